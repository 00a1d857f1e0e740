#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

// INI run configuration: sectioned key=value files with a closed key registry
// (unknown keys are rejected, with line numbers), defaults for every key, and
// a resolved dump for embedding in reports.
namespace spectro {

// Raw INI parse: [section] headers, key = value pairs, '#'/';' comments.
struct IniFile {
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::string label;  // path or description, used in diagnostics
  std::map<std::string, std::map<std::string, Entry>> sections;

  static IniFile parse_file(const std::string& path);
  static IniFile parse_text(const std::string& text, const std::string& label);

  bool has(const std::string& section, const std::string& key) const;
  // Throw ValidationError when missing or non-numeric.
  double get_number(const std::string& section, const std::string& key) const;
};

struct RunConfig {
  // section -> key -> value, fully populated (defaults merged with overrides)
  std::map<std::string, std::map<std::string, double>> values;
  std::uint64_t seed = 12345;
  std::string source = "defaults";

  double get(const std::string& section, const std::string& key) const;

  // every section/key/value plus the seed, sorted; embedded in reports
  nlohmann::ordered_json resolved() const;

  static RunConfig defaults();
  // defaults overridden by the file; unknown sections/keys rejected; a
  // [constants] section must restate the pinned CODATA values within 1e-9
  // relative or the file is rejected.
  static RunConfig load(const std::string& path);
  // `path` if non-empty, else $SPECTROKIT_CONFIG if set, else defaults
  static RunConfig from_path_or_env(const std::string& path);
};

}  // namespace spectro
