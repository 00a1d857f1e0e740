#include "spectro/coherence.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <cmath>
#include <mutex>
#include <string>

#include "spectro/constants.hpp"
#include "spectro/errors.hpp"

namespace spectro {

void StretchedDecay::validate() const {
  if (T2_s <= 0 || stretch_n <= 0)
    throw ValidationError("StretchedDecay: T2 and stretch_n must be > 0");
}

double hahn_decay(double t_s, const StretchedDecay& model) {
  model.validate();
  if (t_s < 0) throw ValidationError("hahn_decay: t must be >= 0");
  return model.A0 * std::exp(-std::pow(2.0 * t_s / model.T2_s, model.stretch_n));
}

void SpectralDiffusionModel::validate() const {
  if (Gamma0_hz < 0 || Gamma_SD_hz < 0 || R_hz < 0 || T1_s < 0)
    throw ValidationError("SpectralDiffusionModel: rates must be >= 0");
}

double effective_linewidth(double tau_s, double TW_s, const SpectralDiffusionModel& m) {
  m.validate();
  if (tau_s < 0 || TW_s < 0)
    throw ValidationError("effective_linewidth: tau and TW must be >= 0");
  return m.Gamma0_hz +
         0.5 * m.Gamma_SD_hz * (m.R_hz * tau_s + 1.0 - std::exp(-m.R_hz * TW_s));
}

double stimulated_echo(double tau_s, double TW_s, const SpectralDiffusionModel& m) {
  const double geff = effective_linewidth(tau_s, TW_s, m);
  const double t1_term = (m.T1_s > 0) ? TW_s / m.T1_s : 0.0;
  return std::exp(-(t1_term + 2.0 * M_PI * tau_s * geff));
}

double sd_limited_T2(double Gamma_SD_hz, double R_hz) {
  if (Gamma_SD_hz <= 0 || R_hz <= 0)
    throw ValidationError("sd_limited_T2: Gamma_SD and R must be > 0");
  return 2.0 / std::sqrt(M_PI * Gamma_SD_hz * R_hz);
}

void ThermalModel::validate() const {
  if (T_Ze_K <= 0 || C_corr <= 0)
    throw ValidationError("ThermalModel: T_Ze and C_corr must be > 0");
}

double zeeman_temperature(double f_hz) {
  if (f_hz <= 0) throw ValidationError("zeeman_temperature: f must be > 0");
  return constants::h * f_hz / constants::k_B;
}

double polarization_amplitude(double T_K, const ThermalModel& m) {
  m.validate();
  if (T_K <= 0) throw ValidationError("polarization_amplitude: T must be > 0");
  return std::tanh(m.T_Ze_K / (m.C_corr * T_K));
}

double dephasing_vs_T(double T_K, const ThermalModel& m) {
  m.validate();
  if (T_K <= 0) throw ValidationError("dephasing_vs_T: T must be > 0");
  const double x = m.T_Ze_K / T_K;
  // (1+e^x)(1+e^-x) = 2 + 2 cosh(x); avoid overflow for large x
  const double denom = 2.0 + 2.0 * std::cosh(std::min(x, 700.0));
  return m.Gamma0_T_hz + (std::isinf(denom) ? 0.0 : m.xi_hz / denom);
}

NoiseBudgetDetail noise_budget_detail(double T2_hahn_s, double T2_cpmg_s, double g_eff) {
  if (T2_hahn_s <= 0 || T2_cpmg_s <= 0)
    throw ValidationError("noise_budget: both T2 values must be > 0");
  NoiseBudgetDetail d{};
  d.ordering_warning = T2_hahn_s > T2_cpmg_s;
  d.hahn_rate_hz = 1.0 / (M_PI * T2_hahn_s);
  d.residual_rate_hz = 1.0 / (M_PI * T2_cpmg_s);
  d.sensitivity_hz_per_T = g_eff * constants::mu_B / constants::h;
  // a negative difference (T2_hahn > T2_cpmg) is reported, not rejected:
  // the caller decides whether a swapped ordering is meaningful
  d.delta_B_T = (d.hahn_rate_hz - d.residual_rate_hz) / d.sensitivity_hz_per_T;
  d.delta_B_literal_T =
      (d.hahn_rate_hz - 1.0 / T2_cpmg_s) / d.sensitivity_hz_per_T;
  return d;
}

double noise_budget(double T2_hahn_s, double T2_cpmg_s, double g_eff) {
  return noise_budget_detail(T2_hahn_s, T2_cpmg_s, g_eff).delta_B_T;
}

double id_effective_density(double T2_cpmg_s, double g_eff) {
  if (T2_cpmg_s <= 0) throw ValidationError("id_effective_density: T2 must be > 0");
  const double gamma = g_eff * constants::mu_B / constants::h;
  return 9.0 * std::sqrt(3.0) /
         (2.0 * M_PI * M_PI * constants::mu_0 * constants::h * gamma * gamma *
          T2_cpmg_s);
}

std::optional<double> id_limited_T2(double density_per_m3, double g_eff,
                                    double flip_prob) {
  if (flip_prob < 0 || flip_prob > 1)
    throw ValidationError("id_limited_T2: flip_prob must be in [0,1]");
  if (density_per_m3 < 0)
    throw ValidationError("id_limited_T2: density must be >= 0");
  const double gamma = g_eff * constants::mu_B / constants::h;
  const double rate = 2.0 * M_PI * M_PI * constants::mu_0 * constants::h *
                      density_per_m3 * gamma * gamma / (9.0 * std::sqrt(3.0)) *
                      flip_prob;
  if (rate == 0.0) return std::nullopt;
  return 1.0 / rate;
}

namespace {

struct FlipIntegrand {
  double Omega;
  double scale;     // Lorentzian HWHM or Gaussian sigma
  bool lorentzian;
};

double flip_prob_point(double Omega, double delta) {
  const double r2 = Omega * Omega + delta * delta;
  const double s = std::sin(M_PI * std::sqrt(r2) / (2.0 * Omega));
  return (Omega * Omega / r2) * s * s;
}

// integrand after delta = scale * tan(phi): lineweight * P, phi in (0, pi/2)
double flip_integrand(double phi, void* params) {
  const auto* p = static_cast<const FlipIntegrand*>(params);
  const double t = std::tan(phi);
  const double delta = p->scale * t;
  const double pf = flip_prob_point(p->Omega, delta);
  if (p->lorentzian) return pf / M_PI;  // (1/pi) d(atan(delta/s)) measure
  const double sec2 = 1.0 + t * t;
  return std::exp(-0.5 * t * t) * sec2 / std::sqrt(2.0 * M_PI) * pf;
}

std::once_flag gsl_handler_once;

}  // namespace

double average_flip_probability(double Omega_hz, double fwhm_hz, Lineshape shape) {
  if (Omega_hz <= 0 || fwhm_hz <= 0)
    throw ValidationError("average_flip_probability: Omega and fwhm must be > 0");
  std::call_once(gsl_handler_once, [] { gsl_set_error_handler_off(); });
  FlipIntegrand p{};
  p.Omega = Omega_hz;
  p.lorentzian = (shape == Lineshape::Lorentzian);
  p.scale = p.lorentzian ? fwhm_hz / 2.0
                         : fwhm_hz / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  gsl_function f;
  f.function = &flip_integrand;
  f.params = &p;
  const size_t limit = 20000;
  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(limit);
  double result = 0, abserr = 0;
  const int status = gsl_integration_qag(&f, 0.0, M_PI / 2.0, 1e-13, 1e-10, limit,
                                         GSL_INTEG_GAUSS61, ws, &result, &abserr);
  gsl_integration_workspace_free(ws);
  result *= 2.0;  // even in delta
  abserr *= 2.0;
  if (status != GSL_SUCCESS && !(status == GSL_EROUND && abserr < 1e-6 * result))
    throw ValidationError(
        "average_flip_probability: quadrature did not converge (status " +
        std::string(gsl_strerror(status)) + ", |err| " + std::to_string(abserr) +
        " on " + std::to_string(result) + ")");
  if (abserr > 1e-4 * std::max(result, 1e-300))
    throw ValidationError(
        "average_flip_probability: tolerance not reached (|err| " +
        std::to_string(abserr) + " on " + std::to_string(result) + ")");
  return std::min(result, 1.0);
}

double purcell_spin_rate(double g_single_hz, double kappa_hz, double detuning_hz) {
  if (kappa_hz <= 0) throw ValidationError("purcell_spin_rate: kappa must be > 0");
  return 4.0 * kappa_hz * g_single_hz * g_single_hz /
         (kappa_hz * kappa_hz + detuning_hz * detuning_hz);
}

double direct_phonon_scaling(double T1_ref_s, double B_ref_T, double f_ref_hz,
                             double T_ref_K, double B_T, double f_hz, double T_K) {
  if (T1_ref_s <= 0 || B_ref_T <= 0 || f_ref_hz <= 0 || T_ref_K <= 0 || B_T <= 0 ||
      f_hz <= 0 || T_K <= 0)
    throw ValidationError("direct_phonon_scaling: all inputs must be > 0");
  const auto coth = [](double x) { return 1.0 / std::tanh(x); };
  const double xr = constants::h * f_ref_hz / (2.0 * constants::k_B * T_ref_K);
  const double x = constants::h * f_hz / (2.0 * constants::k_B * T_K);
  return T1_ref_s * std::pow(B_ref_T / B_T, 5.0) * coth(xr) / coth(x);
}

double thermal_polarization(double f_hz, double T_K) {
  if (T_K <= 0) throw ValidationError("thermal_polarization: T must be > 0");
  if (f_hz <= 0) throw ValidationError("thermal_polarization: f must be > 0");
  return std::tanh(constants::h * f_hz / (2.0 * constants::k_B * T_K));
}

double thermal_polarization_deficit(double f_hz, double T_K, bool half_exponent) {
  if (T_K <= 0) throw ValidationError("thermal_polarization_deficit: T must be > 0");
  const double x = constants::h * f_hz / (constants::k_B * T_K) /
                   (half_exponent ? 2.0 : 1.0);
  // 1 - tanh(x) = 2 / (e^{2x} + 1), stable for large x
  return 2.0 / (std::exp(2.0 * x) + 1.0);
}

double dipolar_coupling(double g1, double g2, double density_per_m3) {
  if (density_per_m3 < 0) throw ValidationError("dipolar_coupling: density must be >= 0");
  const double gamma1 = g1 * constants::mu_B / constants::h;
  const double gamma2 = g2 * constants::mu_B / constants::h;
  return constants::h * constants::mu_0 * gamma1 * gamma2 * density_per_m3 /
         (4.0 * M_PI);
}

}  // namespace spectro
