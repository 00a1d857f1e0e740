#pragma once

#include <optional>

// Spin-coherence decay, spectral diffusion, temperature dependence,
// instantaneous diffusion, noise budget, and spin-T1 models.
namespace spectro {

struct StretchedDecay {
  double A0 = 1.0;
  double T2_s = 1.0;
  double stretch_n = 1.0;

  void validate() const;  // T2 > 0, stretch_n > 0
};

// A(t) = A0 exp(-(2t/T2)^n); t is the refocusing-pulse delay.
double hahn_decay(double t_s, const StretchedDecay& model);

// Sudden-jump spectral diffusion: characteristic width Gamma_SD, bath flip
// rate R, plus the static offset Gamma0 and the population lifetime T1.
struct SpectralDiffusionModel {
  double Gamma0_hz = 0;
  double Gamma_SD_hz = 0;
  double R_hz = 0;
  double T1_s = 1.0;

  void validate() const;  // all >= 0
};

// Gamma_eff(tau, TW) = Gamma0 + (Gamma_SD/2) (R tau + 1 - exp(-R TW)), Hz
double effective_linewidth(double tau_s, double TW_s, const SpectralDiffusionModel& m);

// Three-pulse echo amplitude ratio, a decay:
//   A/A0 = exp(-[TW/T1 + 2 pi tau Gamma_eff(tau, TW)])
double stimulated_echo(double tau_s, double TW_s, const SpectralDiffusionModel& m);

// Spectral-diffusion-limited coherence time T2 = 2 / sqrt(pi Gamma_SD R).
double sd_limited_T2(double Gamma_SD_hz, double R_hz);

struct ThermalModel {
  double T_Ze_K = 1.0;    // Zeeman temperature h f / kB
  double C_corr = 1.0;    // thermometry correction factor
  double xi_hz = 0;       // thermally activated dephasing scale
  double Gamma0_T_hz = 0; // temperature-independent dephasing

  void validate() const;  // T_Ze > 0, C_corr > 0
};

// Zeeman temperature h f / kB of a transition at frequency f.
double zeeman_temperature(double f_hz);

// Echo amplitude vs temperature: tanh(T_Ze / (C T)), -> 1 as T -> 0.
double polarization_amplitude(double T_K, const ThermalModel& m);

// Gamma(T) = Gamma0 + xi / ((1 + e^{T_Ze/T})(1 + e^{-T_Ze/T}))
// limits: Gamma0 (T->0) and Gamma0 + xi/4 (T->inf).
double dephasing_vs_T(double T_K, const ThermalModel& m);

// RMS field-noise budget from Hahn vs dynamically decoupled T2.
//   delta_B = (1/(pi T2_hahn) - Gamma_res) / S1,  S1 = g mu_B / h  [Hz/T]
// Primary value uses Gamma_res = 1/(pi T2_cpmg) (pi convention); the literal
// Gamma_res = 1/T2_cpmg variant is reported alongside (it can go negative).
struct NoiseBudgetDetail {
  double delta_B_T;            // pi convention (primary)
  double delta_B_literal_T;    // literal 1/T2_cpmg convention
  double sensitivity_hz_per_T; // S1
  double hahn_rate_hz;         // 1/(pi T2_hahn)
  double residual_rate_hz;     // 1/(pi T2_cpmg)
  bool ordering_warning;       // true when T2_hahn > T2_cpmg
};

NoiseBudgetDetail noise_budget_detail(double T2_hahn_s, double T2_cpmg_s, double g_eff);
double noise_budget(double T2_hahn_s, double T2_cpmg_s, double g_eff);  // primary value

// Effective resonant-spin density consistent with a pulse-limited T2:
//   n_eff = 9 sqrt(3) / (2 pi^2 mu0 h gamma^2 T2),  gamma = g mu_B / h [Hz/T]
double id_effective_density(double T2_cpmg_s, double g_eff);

// Pulse-limited (instantaneous-diffusion) T2 from a resonant density:
//   1/T2 = (2 pi^2 mu0 h n gamma^2 / (9 sqrt(3))) * flip_prob
// Absent (unbounded) when the rate is zero.
std::optional<double> id_limited_T2(double density_per_m3, double g_eff,
                                    double flip_prob);

enum class Lineshape { Lorentzian, Gaussian };

// <sin^2(theta/2)> of a nominal pi pulse averaged over the inhomogeneous line:
//   P(Delta) = (Omega^2/(Omega^2+Delta^2)) sin^2(pi sqrt(Omega^2+Delta^2)/(2 Omega))
// integrated against the normalized lineshape of the given FWHM. In (0, 1].
double average_flip_probability(double Omega_hz, double fwhm_hz, Lineshape shape);

// Purcell-limited spin relaxation: Gamma_P = 4 kappa g^2 / (kappa^2 + delta^2)
double purcell_spin_rate(double g_single_hz, double kappa_hz, double detuning_hz);

// Direct-phonon T1 scaling: rate ~ B^5 coth(h f / 2 kB T).
double direct_phonon_scaling(double T1_ref_s, double B_ref_T, double f_ref_hz,
                             double T_ref_K, double B_T, double f_hz, double T_K);

// p = tanh(h f / 2 kB T)
double thermal_polarization(double f_hz, double T_K);
// deficit 1 - p without cancellation; `half_exponent` selects h f / 2 kB T
// (the model here) vs h f / kB T (alternate convention, reported alongside)
double thermal_polarization_deficit(double f_hz, double T_K, bool half_exponent = true);

// nu_dd = h mu0 gamma1 gamma2 n / (4 pi), gamma = g mu_B / h [Hz/T]
double dipolar_coupling(double g1, double g2, double density_per_m3);

}  // namespace spectro
