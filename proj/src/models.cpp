#include "spectro/models.hpp"

#include <cmath>

#include "spectro/coherence.hpp"
#include "spectro/constants.hpp"
#include "spectro/errors.hpp"
#include "spectro/optical.hpp"
#include "spectro/resonator.hpp"

namespace spectro::models {

namespace {

using nlohmann::json;

double fixed_number(const json& fixed, const std::string& key) {
  if (!fixed.contains(key))
    throw ValidationError("model: missing fixed input '" + key + "'");
  if (!fixed.at(key).is_number())
    throw ValidationError("model: fixed input '" + key + "' must be numeric");
  return fixed.at(key).get<double>();
}

void reject_unknown(const json& fixed, std::initializer_list<const char*> known) {
  for (auto it = fixed.begin(); it != fixed.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) ok = true;
    if (!ok) throw ValidationError("model: unknown fixed input '" + it.key() + "'");
  }
}

FitModel linear_model(const json& fixed) {
  reject_unknown(fixed, {});
  FitModel m;
  m.name = "linear";
  m.param_names = {"a", "b"};
  m.eval = [](const std::vector<double>& p, const double* x) {
    return p[0] + p[1] * x[0];
  };
  m.analytic_grad = [](const std::vector<double>&, const double* x, double* g) {
    g[0] = 1.0;
    g[1] = x[0];
  };
  return m;
}

FitModel stretched_exp_model(const json& fixed) {
  reject_unknown(fixed, {});
  FitModel m;
  m.name = "stretched_exp";
  m.param_names = {"a0", "t2_s", "stretch_n"};
  m.eval = [](const std::vector<double>& p, const double* x) {
    return hahn_decay(x[0], {p[0], p[1], p[2]});
  };
  m.analytic_grad = [](const std::vector<double>& p, const double* x, double* g) {
    const double u = 2.0 * x[0] / p[1];
    const double un = std::pow(u, p[2]);
    const double f = p[0] * std::exp(-un);
    g[0] = std::exp(-un);
    g[1] = (u > 0) ? f * p[2] * un / p[1] : 0.0;
    g[2] = (u > 0) ? -f * un * std::log(u) : 0.0;
  };
  return m;
}

FitModel sat_recovery_model(const json& fixed) {
  reject_unknown(fixed, {});
  FitModel m;
  m.name = "sat_recovery";
  m.param_names = {"a0", "t1_s"};
  m.eval = [](const std::vector<double>& p, const double* x) {
    return p[0] * (1.0 - std::exp(-x[0] / p[1]));
  };
  m.analytic_grad = [](const std::vector<double>& p, const double* x, double* g) {
    const double e = std::exp(-x[0] / p[1]);
    g[0] = 1.0 - e;
    g[1] = -p[0] * e * x[0] / (p[1] * p[1]);
  };
  return m;
}

FitModel s21_mag_model(const json& fixed) {
  reject_unknown(fixed, {});
  FitModel m;
  m.name = "s21_mag";
  m.param_names = {"f0_hz", "qi", "qe", "qalpha"};
  m.eval = [](const std::vector<double>& p, const double* x) {
    ResonatorModel r;
    r.omega0_hz = p[0];
    r.Qi = p[1];
    r.Qe = p[2];
    r.Qalpha = p[3];
    return std::abs(s21(x[0], r));
  };
  return m;
}

FitModel stimulated_echo_model(const json& fixed) {
  reject_unknown(fixed, {"t1_s"});
  const double t1 = fixed_number(fixed, "t1_s");
  FitModel m;
  m.name = "stimulated_echo";
  m.n_x = 2;  // (tau, TW)
  m.param_names = {"a0", "gamma0_hz", "gamma_sd_hz", "r_hz"};
  m.eval = [t1](const std::vector<double>& p, const double* x) {
    SpectralDiffusionModel sd{p[1], p[2], p[3], t1};
    return p[0] * stimulated_echo(x[0], x[1], sd);
  };
  return m;
}

FitModel tls_q_model(const json& fixed) {
  reject_unknown(fixed, {});
  FitModel m;
  m.name = "tls_q";
  m.param_names = {"qi0", "f_tan_delta", "nc", "alpha"};
  m.eval = [](const std::vector<double>& p, const double* x) {
    ResonatorModel r;
    r.Qi = 1;  // unused by tls_quality
    r.Qe = 1;
    r.tls = {p[0], p[1], p[2], p[3]};
    return tls_quality(x[0], r);
  };
  return m;
}

FitModel holeburn_b_model_(const json& fixed) {
  reject_unknown(fixed, {"t_bath_k"});
  const double T = fixed_number(fixed, "t_bath_k");
  FitModel m;
  m.name = "holeburn_b";
  m.param_names = {"gamma0_hz", "gamma_sd_hz", "g_env"};
  m.eval = [T](const std::vector<double>& p, const double* x) {
    OpticalLinewidthModel lw;
    lw.Gamma0_opt_hz = p[0];
    lw.Gamma_SD_opt_hz = p[1];
    lw.g_env = p[2];
    lw.T_bath_K = T;
    return holeburn_B_model(x[0], lw);
  };
  m.analytic_grad = [T](const std::vector<double>& p, const double* x, double* g) {
    const double a = constants::mu_B * x[0] / (2.0 * constants::k_B * T);
    const double ch = std::cosh(std::min(std::abs(p[2] * a), 350.0));
    const double se = 1.0 / ch;
    const double th = std::tanh(p[2] * a);
    g[0] = 1.0;
    g[1] = se * se;
    g[2] = -2.0 * p[1] * se * se * th * a;
  };
  return m;
}

FitModel power_broadening_model(const json& fixed) {
  reject_unknown(fixed, {"t1_s"});
  const double t1 = fixed_number(fixed, "t1_s");
  FitModel m;
  m.name = "power_broadening";
  m.param_names = {"t2_star_s"};
  m.eval = [t1](const std::vector<double>& p, const double* x) {
    return bloch_linewidth(x[0], t1, p[0]);
  };
  return m;
}

}  // namespace

const std::map<std::string, ModelFactory>& registry() {
  static const std::map<std::string, ModelFactory> reg = {
      {"linear", linear_model},
      {"stretched_exp", stretched_exp_model},
      {"sat_recovery", sat_recovery_model},
      {"s21_mag", s21_mag_model},
      {"stimulated_echo", stimulated_echo_model},
      {"tls_q", tls_q_model},
      {"holeburn_b", holeburn_b_model_},
      {"power_broadening", power_broadening_model},
  };
  return reg;
}

FitModel make(const std::string& name, const nlohmann::json& fixed) {
  const auto& reg = registry();
  auto it = reg.find(name);
  if (it == reg.end()) {
    std::string known;
    for (const auto& [k, v] : reg) known += (known.empty() ? "" : ", ") + k;
    throw ValidationError("unknown model '" + name + "' (known: " + known + ")");
  }
  return it->second(fixed.is_null() ? nlohmann::json::object() : fixed);
}

std::vector<std::string> names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : registry()) out.push_back(k);
  return out;
}

}  // namespace spectro::models
