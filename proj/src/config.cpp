#include "spectro/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "spectro/constants.hpp"
#include "spectro/errors.hpp"

namespace spectro {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct KeyDefault {
  const char* section;
  const char* key;
  double value;
};

// Closed registry: every accepted numeric key with its default. Defaults are
// the bundled reference device/material parameters (see data/reference_params.ini
// for the annotated copy).
const std::vector<KeyDefault>& registry() {
  static const std::vector<KeyDefault> r = {
      // crystal-to-lab registration, sub-site principal values, tilt model
      {"spin", "c2_g1", 3.6},
      {"spin", "c2_g2", 3.6},
      {"spin", "c2_g3", 11.61722859},
      {"spin", "c2_psi_deg", 45.0},
      {"spin", "c3i_g_perp", 3.2},
      {"spin", "c3i_g_par", 12.0},
      {"spin", "theta_reg_deg", 50.0},
      {"spin", "tilt_dphi1_deg", 2.8},
      {"spin", "tilt_dphi2_deg", 0.2},
      {"spin", "tilt_theta0_deg", 30.0},
      {"spin", "tilt_sign", 1.0},
      // superconducting resonator and its TLS loss model
      {"resonator", "f0_hz", 5.81e9},
      {"resonator", "qi", 370043.0},
      {"resonator", "qe", 3001.0},
      {"resonator", "qalpha", 0.0},  // 0 = background-slope term disabled
      {"resonator", "kinetic_c_hz_per_t2", 0.0},
      {"resonator", "qi0", 13422.0},
      {"resonator", "f_tan_delta", 3.92e-5},
      {"resonator", "nc", 3.8e6},
      {"resonator", "alpha", 0.36},
      // collective spin ensemble coupled to the resonator
      {"ensemble", "omega_ens_hz", 3.07e6},
      {"ensemble", "gamma_s_hz", 34e6},
      {"ensemble", "g_eff", 3.2},
      {"ensemble", "b0_t", 0.129722294},
      {"ensemble", "g_single_hz", 128.0},
      {"ensemble", "volume_m3", 1.7584e-15},
      {"ensemble", "power_w", 3.162e-10},
      {"ensemble", "kappa_hz", 1.9e6},
      {"ensemble", "kappa_e_hz", 1.9e6},
      // spin spectral diffusion
      {"spectral_diffusion", "gamma0_hz", 700.0},
      {"spectral_diffusion", "gamma_sd_hz", 4400.0},
      {"spectral_diffusion", "r_hz", 287.0},
      {"spectral_diffusion", "t1_s", 0.8},
      // temperature dependence of dephasing
      {"thermal", "t_ze_k", 0.2788360226},
      {"thermal", "c_corr", 1.45},
      {"thermal", "xi_hz", 96.8e3},
      {"thermal", "gamma0_hz", 2.9e3},
      // Hahn-echo coherence (magnetic-noise budget endpoints)
      {"coherence", "t2_hot_s", 0.38e-3},
      {"coherence", "stretch_n", 2.11},
      {"coherence", "t2_cold_s", 1.14e-3},
      // optical cavity + emitter
      {"optical", "tau0_s", 8.5e-3},
      {"optical", "tau_cav_s", 0.14e-3},
      {"optical", "zeta", 0.22},
      {"optical", "q", 58000.0},
      {"optical", "lambda_m", 1536.8e-9},
      {"optical", "refractive_n", 1.89},
      {"optical", "mu_cm", 9.7e-33},
      {"optical", "f_a_hz", 195.1e12},
      {"optical", "t1_s", 3e-3},
      {"optical", "t2_star_s", 122e-6},
      {"optical", "omega_rad_s", 2.0 * 3.14159265358979323846 * 33e3},
      // optical hole linewidth vs magnetic field
      {"holeburn", "gamma0_hz", 158.6e3},
      {"holeburn", "gamma_sd_hz", 635.5e3},
      {"holeburn", "g_env", 2.02},
      {"holeburn", "t_bath_k", 0.22},
      // optical linewidth vs timescale (six-fold site)
      {"optical_c2", "gamma0_hz", 0.88e6},
      {"optical_c2", "gamma_sd_hz", 4.32e6},
      {"optical_c2", "r_hz", 0.83e3},
      {"optical_c2", "gamma_tls_hz", 0.0},
      {"optical_c2", "g_env", 1.2},
      {"optical_c2", "t_bath_k", 0.1},
      // photon collection chain
      {"collection", "eta_cavity", 0.04},
      {"collection", "eta_fiber", 0.51},
      {"collection", "eta_passive", 0.724},
      {"collection", "eta_detector", 0.70},
      // synthetic echo trace defaults
      {"echo", "sample_rate_hz", 1e9},
      {"echo", "duration_s", 3e-6},
      {"echo", "center_f_hz", 200e6},
      {"echo", "envelope_sigma_s", 0.2e-6},
      {"echo", "amplitude", 1.0},
      {"echo", "noise_rms", 0.05},
      {"echo", "window_s", 1.5e-6},
      {"echo", "band_width_hz", 20e6},
      {"echo", "bg_bin_width_hz", 10e6},
  };
  return r;
}

struct PinnedConstant {
  const char* key;
  double value;
};

const std::vector<PinnedConstant>& pinned_constants() {
  static const std::vector<PinnedConstant> c = {
      {"h", constants::h},           {"hbar", constants::hbar},
      {"mu_b", constants::mu_B},     {"mu_0", constants::mu_0},
      {"k_b", constants::k_B},       {"eps_0", constants::eps_0},
  };
  return c;
}

std::string known_keys_for(const std::string& section) {
  std::string s;
  for (const auto& kd : registry()) {
    if (section == kd.section) {
      if (!s.empty()) s += ", ";
      s += kd.key;
    }
  }
  return s;
}

std::string known_sections() {
  std::string s = "constants, run";
  std::string last;
  for (const auto& kd : registry()) {
    if (kd.section != last) {
      s += ", ";
      s += kd.section;
      last = kd.section;
    }
  }
  return s;
}

double parse_number(const IniFile& f, const std::string& section, const std::string& key,
                    const IniFile::Entry& e) {
  char* end = nullptr;
  const double v = std::strtod(e.value.c_str(), &end);
  if (end == e.value.c_str() || *end != '\0' || !std::isfinite(v))
    throw ValidationError(f.label + ":" + std::to_string(e.line) + ": [" + section + "] " + key +
                          ": cannot parse '" + e.value + "' as a finite number");
  return v;
}

}  // namespace

IniFile IniFile::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

IniFile IniFile::parse_text(const std::string& text, const std::string& label) {
  IniFile f;
  f.label = label;
  std::istringstream stream(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(stream, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3)
        throw ValidationError(label + ":" + std::to_string(lineno) + ": malformed section header '" +
                              s + "'");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty())
        throw ValidationError(label + ":" + std::to_string(lineno) + ": empty section name");
      f.sections[section];  // record even if empty
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ValidationError(label + ":" + std::to_string(lineno) +
                            ": expected 'key = value', got '" + s + "'");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    // strip a trailing inline comment
    for (char marker : {'#', ';'}) {
      const std::size_t pos = value.find(marker);
      if (pos != std::string::npos) value = trim(value.substr(0, pos));
    }
    if (key.empty())
      throw ValidationError(label + ":" + std::to_string(lineno) + ": empty key");
    if (section.empty())
      throw ValidationError(label + ":" + std::to_string(lineno) + ": key '" + key +
                            "' appears before any [section] header");
    if (f.sections[section].count(key))
      throw ValidationError(label + ":" + std::to_string(lineno) + ": duplicate key '" + key +
                            "' in section [" + section + "]");
    f.sections[section][key] = Entry{value, lineno};
  }
  return f;
}

bool IniFile::has(const std::string& section, const std::string& key) const {
  auto it = sections.find(section);
  return it != sections.end() && it->second.count(key) > 0;
}

double IniFile::get_number(const std::string& section, const std::string& key) const {
  auto it = sections.find(section);
  if (it == sections.end() || !it->second.count(key))
    throw ValidationError(label + ": missing required key '" + key + "' in section [" + section +
                          "]");
  return parse_number(*this, section, key, it->second.at(key));
}

double RunConfig::get(const std::string& section, const std::string& key) const {
  auto sit = values.find(section);
  if (sit != values.end()) {
    auto kit = sit->second.find(key);
    if (kit != sit->second.end()) return kit->second;
  }
  throw ValidationError("no config value [" + section + "] " + key);
}

nlohmann::ordered_json RunConfig::resolved() const {
  nlohmann::ordered_json j;
  j["source"] = source;
  j["run"]["seed"] = seed;
  for (const auto& [sec, kv] : values) {
    for (const auto& [k, v] : kv) j[sec][k] = v;
  }
  return j;
}

RunConfig RunConfig::defaults() {
  RunConfig c;
  for (const auto& kd : registry()) c.values[kd.section][kd.key] = kd.value;
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  const IniFile f = IniFile::parse_file(path);
  RunConfig c = defaults();
  c.source = path;
  for (const auto& [section, kv] : f.sections) {
    if (section == "constants") {
      // pinned: a restatement must agree with the built-in CODATA values
      for (const auto& [key, entry] : kv) {
        bool known = false;
        for (const auto& pc : pinned_constants()) {
          if (key == pc.key) {
            known = true;
            const double v = parse_number(f, section, key, entry);
            if (std::abs(v - pc.value) > 1e-9 * std::abs(pc.value))
              throw ValidationError(
                  f.label + ":" + std::to_string(entry.line) + ": [constants] " + key + " = " +
                  entry.value + " conflicts with the pinned value " + std::to_string(pc.value) +
                  "; physical constants are not configurable");
            break;
          }
        }
        if (!known)
          throw ValidationError(f.label + ":" + std::to_string(entry.line) +
                                ": unknown constant '" + key + "' (known: h, hbar, mu_b, mu_0, "
                                "k_b, eps_0)");
      }
      continue;
    }
    if (section == "run") {
      for (const auto& [key, entry] : kv) {
        if (key == "seed") {
          char* end = nullptr;
          const unsigned long long s = std::strtoull(entry.value.c_str(), &end, 10);
          if (end == entry.value.c_str() || *end != '\0')
            throw ValidationError(f.label + ":" + std::to_string(entry.line) +
                                  ": [run] seed: cannot parse '" + entry.value +
                                  "' as an unsigned integer");
          c.seed = s;
        } else {
          throw ValidationError(f.label + ":" + std::to_string(entry.line) + ": unknown key '" +
                                key + "' in section [run] (known: seed)");
        }
      }
      continue;
    }
    const std::string known = known_keys_for(section);
    if (known.empty())
      throw ValidationError(f.label + ": unknown section [" + section +
                            "] (known: " + known_sections() + ")");
    for (const auto& [key, entry] : kv) {
      if (!c.values[section].count(key))
        throw ValidationError(f.label + ":" + std::to_string(entry.line) + ": unknown key '" + key +
                              "' in section [" + section + "] (known: " + known + ")");
      c.values[section][key] = parse_number(f, section, key, entry);
    }
  }
  return c;
}

RunConfig RunConfig::from_path_or_env(const std::string& path) {
  if (!path.empty()) return load(path);
  const char* env = std::getenv("SPECTROKIT_CONFIG");
  if (env && *env) return load(env);
  return defaults();
}

}  // namespace spectro
