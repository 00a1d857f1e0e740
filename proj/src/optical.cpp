#include "spectro/optical.hpp"

#include <cmath>

#include "spectro/constants.hpp"
#include "spectro/errors.hpp"

namespace spectro {

void OpticalCavityModel::validate() const {
  if (Q <= 0 || lambda_m <= 0 || refractive_n <= 0)
    throw ValidationError("OpticalCavityModel: Q, lambda, n must be > 0");
  if (branching_zeta <= 0 || branching_zeta > 1)
    throw ValidationError("OpticalCavityModel: zeta must be in (0,1]");
}

void OpticalLinewidthModel::validate() const {
  if (Gamma0_opt_hz < 0 || Gamma_SD_opt_hz < 0 || R_opt_hz < 0 || Gamma_TLS_hz < 0)
    throw ValidationError("OpticalLinewidthModel: rates must be >= 0");
  if (T_bath_K <= 0) throw ValidationError("OpticalLinewidthModel: T_bath must be > 0");
}

double purcell_factor(double tau0_s, double tau_cav_s, double zeta) {
  if (tau0_s <= 0 || tau_cav_s <= 0)
    throw ValidationError("purcell_factor: lifetimes must be > 0");
  if (zeta <= 0 || zeta > 1)
    throw ValidationError("purcell_factor: zeta must be in (0,1]");
  if (tau_cav_s >= tau0_s)
    throw ValidationError("purcell_factor: no enhancement (tau_cav >= tau0)");
  return (tau0_s / tau_cav_s - 1.0) / zeta;
}

double local_field_correction(double refractive_n) {
  if (refractive_n <= 0)
    throw ValidationError("local_field_correction: n must be > 0");
  const double n2 = refractive_n * refractive_n;
  return 3.0 * n2 / (2.0 * n2 + 1.0);
}

ModeVolume mode_volume_from_purcell(double FP, const OpticalCavityModel& cavity) {
  cavity.validate();
  if (FP <= 0) throw ValidationError("mode_volume_from_purcell: FP must be > 0");
  const double chi = local_field_correction(cavity.refractive_n);
  const double units = 3.0 * cavity.Q / (4.0 * M_PI * M_PI * chi * chi * FP);
  const double cell = std::pow(cavity.lambda_m / cavity.refractive_n, 3.0);
  return {units * cell, units};
}

SingleEmitterCoupling g0_from_mode_volume(double mu_Cm, double refractive_n,
                                          double omega_a_rad_s, double Vm_m3) {
  if (mu_Cm < 0) throw ValidationError("g0_from_mode_volume: mu must be >= 0");
  if (refractive_n <= 0 || omega_a_rad_s <= 0 || Vm_m3 <= 0)
    throw ValidationError("g0_from_mode_volume: n, omega_a, Vm must be > 0");
  const double lit = (mu_Cm / refractive_n) *
                     std::sqrt(omega_a_rad_s /
                               (2.0 * constants::hbar * constants::eps_0 * Vm_m3));
  return {lit, lit / 2.0};
}

double purcell_t1_vs_detuning(double detuning_hz, double T1_0_s, double zeta,
                              double FP, double gamma_cav_hz) {
  if (gamma_cav_hz <= 0)
    throw ValidationError("purcell_t1_vs_detuning: gamma_cav must be > 0");
  if (T1_0_s <= 0) throw ValidationError("purcell_t1_vs_detuning: T1_0 must be > 0");
  const double half = gamma_cav_hz / 2.0;
  const double lor = half * half / (half * half + detuning_hz * detuning_hz);
  return T1_0_s / (1.0 + zeta * (FP * lor - 1.0));
}

double bloch_linewidth(double Omega_rad_s, double T1_s, double T2_star_s) {
  if (T1_s <= 0 || T2_star_s <= 0)
    throw ValidationError("bloch_linewidth: T1 and T2* must be > 0");
  const double u = 1.0 / T2_star_s;
  return (u + std::sqrt(u * u + Omega_rad_s * Omega_rad_s * T1_s * u)) /
         (2.0 * M_PI);
}

double t2star_from_linewidth(double Gamma_opt_hz, double Omega_rad_s, double T1_s) {
  if (Gamma_opt_hz <= 0)
    throw ValidationError("t2star_from_linewidth: Gamma must be > 0");
  if (T1_s <= 0) throw ValidationError("t2star_from_linewidth: T1 must be > 0");
  const double s = 2.0 * M_PI * Gamma_opt_hz;
  const double u = s * s / (2.0 * s + Omega_rad_s * Omega_rad_s * T1_s);
  if (!(u > 0))
    throw ValidationError("t2star_from_linewidth: no positive root");
  return 1.0 / u;
}

namespace {
double sech2(double x) {
  const double c = std::cosh(std::min(std::abs(x), 700.0));
  const double s = 1.0 / c;
  return s * s;
}
}  // namespace

double holeburn_B_model(double B_T, const OpticalLinewidthModel& m) {
  m.validate();
  const double x = m.g_env * constants::mu_B * B_T /
                   (2.0 * constants::k_B * m.T_bath_K);
  return m.Gamma0_opt_hz + m.Gamma_SD_opt_hz * sech2(x);
}

double c2_linewidth_model(double t_window_s, double T1_s, double B_T,
                          const OpticalLinewidthModel& m) {
  m.validate();
  if (!(t_window_s > 0))
    throw ValidationError("c2_linewidth_model: t_window must be > 0");
  if (t_window_s > T1_s)
    throw ValidationError("c2_linewidth_model: t_window must be <= T1");
  const double x = m.g_env * constants::mu_B * B_T /
                   (2.0 * constants::k_B * m.T_bath_K);
  return m.Gamma0_opt_hz +
         m.Gamma_SD_opt_hz * sech2(x) * (1.0 - std::exp(-m.R_opt_hz * t_window_s)) +
         m.Gamma_TLS_hz * std::log(T1_s / t_window_s);
}

double collection_efficiency(double eta_cav, double eta_fiber, double eta_passive,
                             double eta_snspd) {
  for (double e : {eta_cav, eta_fiber, eta_passive, eta_snspd})
    if (e < 0 || e > 1)
      throw ValidationError("collection_efficiency: factors must be in [0,1]");
  return eta_cav * eta_fiber * eta_passive * eta_snspd;
}

}  // namespace spectro
