#include "spectro/table.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "spectro/errors.hpp"
#include "spectro/fit.hpp"  // fnv1a64 / digest_hex

namespace spectro {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

struct SuffixRule {
  const char* suffix;
  double scale;  // multiply file value by this to reach SI
};

// accepted header suffixes per expected unit
std::vector<SuffixRule> rules_for(Unit u) {
  switch (u) {
    case Unit::Hertz:   return {{"_hz", 1.0}};
    case Unit::Seconds: return {{"_s", 1.0}};
    case Unit::Tesla:   return {{"_t", 1.0}, {"_mt", 1e-3}};
    case Unit::Degrees: return {{"_deg", 1.0}};
    case Unit::None:    return {};
  }
  return {};
}

const char* unit_name(Unit u) {
  switch (u) {
    case Unit::Hertz:   return "hertz";
    case Unit::Seconds: return "seconds";
    case Unit::Tesla:   return "tesla";
    case Unit::Degrees: return "degrees";
    case Unit::None:    return "dimensionless";
  }
  return "?";
}

std::string canonical_header(const ColumnSpec& c) {
  if (c.text || c.unit == Unit::None) return c.base;
  switch (c.unit) {
    case Unit::Hertz:   return c.base + "_hz";
    case Unit::Seconds: return c.base + "_s";
    case Unit::Tesla:   return c.base + "_t";
    case Unit::Degrees: return c.base + "_deg";
    default:            return c.base;
  }
}

// Returns true and sets scale if header matches this column spec.
bool header_matches(const std::string& header_lc, const ColumnSpec& c, double* scale) {
  if (c.text || c.unit == Unit::None) {
    if (header_lc == lower(c.base)) {
      *scale = 1.0;
      return true;
    }
    return false;
  }
  for (const auto& r : rules_for(c.unit)) {
    if (header_lc == lower(c.base) + r.suffix) {
      *scale = r.scale;
      return true;
    }
  }
  return false;
}

}  // namespace

std::string TableSchema::describe() const {
  std::string s;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) s += ",";
    s += canonical_header(columns[i]);
    if (columns[i].optional) s += "?";
  }
  return s;
}

bool MeasurementTable::has(const std::string& base) const {
  for (std::size_t i = 0; i < bases.size(); ++i)
    if (bases[i] == base) return present[i];
  return false;
}

const std::vector<double>& MeasurementTable::col(const std::string& base) const {
  for (std::size_t i = 0; i < bases.size(); ++i)
    if (bases[i] == base) {
      if (!present[i] || num[i].empty())
        throw ValidationError("column '" + base + "' has no numeric data");
      return num[i];
    }
  throw ValidationError("no such column '" + base + "'");
}

const std::vector<std::string>& MeasurementTable::text_col(const std::string& base) const {
  for (std::size_t i = 0; i < bases.size(); ++i)
    if (bases[i] == base) {
      if (!present[i] || text[i].empty())
        throw ValidationError("column '" + base + "' has no text data");
      return text[i];
    }
  throw ValidationError("no such column '" + base + "'");
}

MeasurementTable load_table(const std::string& path, const TableSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open input file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();

  MeasurementTable t;
  t.source_digest = digest_hex(bytes);
  const std::size_t ncols_schema = schema.columns.size();
  t.bases.resize(ncols_schema);
  t.num.resize(ncols_schema);
  t.text.resize(ncols_schema);
  t.present.assign(ncols_schema, false);
  for (std::size_t i = 0; i < ncols_schema; ++i) t.bases[i] = schema.columns[i].base;

  std::istringstream stream(bytes);
  std::string line;
  int lineno = 0;

  // first non-comment, non-blank line is the header
  std::vector<std::string> header;
  while (std::getline(stream, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    header = split_csv(s);
    break;
  }
  if (header.empty())
    throw ValidationError(path + ": no header row found (expected '" + schema.describe() + "')");

  // map file columns onto schema columns
  std::vector<int> file_to_schema(header.size(), -1);
  std::vector<double> file_scale(header.size(), 1.0);
  std::vector<int> schema_to_file(ncols_schema, -1);
  for (std::size_t f = 0; f < header.size(); ++f) {
    const std::string h = lower(header[f]);
    if (h.empty())
      throw ValidationError(path + ":" + std::to_string(lineno) + ": empty header name in column " +
                            std::to_string(f + 1));
    bool matched = false;
    for (std::size_t c = 0; c < ncols_schema; ++c) {
      double scale = 1.0;
      if (header_matches(h, schema.columns[c], &scale)) {
        if (schema_to_file[c] >= 0)
          throw ValidationError(path + ":" + std::to_string(lineno) + ": duplicate column '" +
                                header[f] + "'");
        file_to_schema[f] = static_cast<int>(c);
        file_scale[f] = scale;
        schema_to_file[c] = static_cast<int>(f);
        matched = true;
        break;
      }
    }
    if (!matched) {
      // distinguish a wrong unit suffix from a truly unknown column
      for (const auto& c : schema.columns) {
        if (!c.text && c.unit != Unit::None && h.rfind(lower(c.base) + "_", 0) == 0)
          throw ValidationError(path + ":" + std::to_string(lineno) + ": column '" + header[f] +
                                "' has an unsupported unit suffix; expected " + unit_name(c.unit) +
                                " (e.g. '" + canonical_header(c) + "')");
      }
      throw ValidationError(path + ":" + std::to_string(lineno) + ": unknown column '" + header[f] +
                            "' (expected header: " + schema.describe() + ")");
    }
  }
  for (std::size_t c = 0; c < ncols_schema; ++c) {
    if (schema_to_file[c] < 0 && !schema.columns[c].optional)
      throw ValidationError(path + ": missing required column '" +
                            canonical_header(schema.columns[c]) + "' (" +
                            unit_name(schema.columns[c].unit) +
                            "); expected header: " + schema.describe());
    t.present[c] = schema_to_file[c] >= 0;
  }
  t.headers = header;

  // data rows
  while (std::getline(stream, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    std::vector<std::string> cells = split_csv(s);
    if (cells.size() != header.size())
      throw ValidationError(path + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(header.size()) + " cells, found " +
                            std::to_string(cells.size()));
    for (std::size_t f = 0; f < cells.size(); ++f) {
      const int c = file_to_schema[f];
      const ColumnSpec& spec = schema.columns[static_cast<std::size_t>(c)];
      if (spec.text) {
        if (cells[f].empty())
          throw ValidationError(path + ":" + std::to_string(lineno) + ": empty value in column '" +
                                header[f] + "'");
        t.text[static_cast<std::size_t>(c)].push_back(cells[f]);
        continue;
      }
      if (cells[f].empty()) {
        if (!spec.optional)
          throw ValidationError(path + ":" + std::to_string(lineno) + ": empty value in column '" +
                                header[f] + "'");
        t.num[static_cast<std::size_t>(c)].push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      char* end = nullptr;
      const double v = std::strtod(cells[f].c_str(), &end);
      if (end == cells[f].c_str() || *end != '\0' || !std::isfinite(v))
        throw ValidationError(path + ":" + std::to_string(lineno) + ": column '" + header[f] +
                              "': cannot parse '" + cells[f] + "' as a finite number");
      t.num[static_cast<std::size_t>(c)].push_back(v * file_scale[f]);
    }
  }

  std::size_t rows = 0;
  bool first = true;
  for (std::size_t c = 0; c < ncols_schema; ++c) {
    if (!t.present[c]) continue;
    const std::size_t n = schema.columns[c].text ? t.text[c].size() : t.num[c].size();
    if (first) {
      rows = n;
      first = false;
    }
  }
  if (rows == 0)
    throw ValidationError(path + ": table has a header but no data rows");
  t.rows = rows;
  return t;
}

void write_csv(const std::string& path, const std::vector<std::string>& headers,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open output file '" + path + "'");
  for (std::size_t i = 0; i < headers.size(); ++i) out << (i ? "," : "") << headers[i];
  out << "\n";
  for (const auto& r : rows) {
    if (r.size() != headers.size())
      throw ValidationError("csv row width " + std::to_string(r.size()) +
                            " does not match header width " + std::to_string(headers.size()));
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << "\n";
  }
  if (!out) throw ValidationError("failed writing '" + path + "'");
}

std::string format_sig(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

}  // namespace spectro
