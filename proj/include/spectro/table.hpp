#pragma once

#include <string>
#include <vector>

// Column-typed CSV ingestion with unit-suffix conversion to SI, plus CSV
// emission (6 significant digits) and content digests.
namespace spectro {

enum class Unit { None, Hertz, Seconds, Tesla, Degrees };

struct ColumnSpec {
  std::string base;   // canonical name without unit suffix, e.g. "b_res"
  Unit unit = Unit::None;
  bool optional = false;
  bool text = false;  // string column (e.g. sub_site_id)
};

struct TableSchema {
  std::string name;
  std::vector<ColumnSpec> columns;

  std::string describe() const;  // expected header spelling
};

struct MeasurementTable {
  std::vector<std::string> headers;  // as found in the file
  std::vector<std::string> bases;    // canonical names, schema order
  std::vector<std::vector<double>> num;        // SI-converted; empty if text/absent
  std::vector<std::vector<std::string>> text;  // per column; empty if numeric
  std::vector<bool> present;
  std::size_t rows = 0;
  std::string source_digest;  // FNV-1a 64 hex of the file bytes

  bool has(const std::string& base) const;
  const std::vector<double>& col(const std::string& base) const;
  const std::vector<std::string>& text_col(const std::string& base) const;
};

// Loads and validates a CSV against the schema. Header suffixes select the
// unit conversion (_hz, _s, _t -> 1; _mT -> 1e-3 into tesla; _deg -> 1);
// unknown columns, missing required columns, unit mismatches, non-numeric
// cells, and empty tables are rejected with file:line diagnostics. '#' lines
// are comments. Values land in SI units.
MeasurementTable load_table(const std::string& path, const TableSchema& schema);

// Writes rows of preformatted cells. Callers format numerics with format_sig.
void write_csv(const std::string& path, const std::vector<std::string>& headers,
               const std::vector<std::vector<std::string>>& rows);

// %.*g with 6 significant digits (deterministic across platforms for doubles)
std::string format_sig(double v, int digits = 6);

}  // namespace spectro
