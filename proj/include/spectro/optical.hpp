#pragma once

// Cavity-QED and optical-linewidth models: Purcell factor, mode volume,
// single-emitter coupling, lifetime vs detuning, Bloch-limit hole linewidth,
// field- and timescale-dependent optical dephasing, collection efficiency.
namespace spectro {

struct OpticalCavityModel {
  double Q = 0;
  double lambda_m = 0;       // free-space wavelength
  double refractive_n = 1;
  double gamma_cav_hz = 0;   // cavity linewidth
  double branching_zeta = 1; // branching ratio into the cavity transition

  void validate() const;  // Q, lambda, n > 0; 0 < zeta <= 1
};

struct EmitterOptical {
  double T1_intrinsic_s = 0;
  double T1_cavity_s = 0;
  double T2_star_s = 0;
  double dipole_mu_Cm = 0;
  double omega_a_rad_s = 0;  // optical transition angular frequency
};

struct OpticalLinewidthModel {
  double Gamma0_opt_hz = 0;
  double Gamma_SD_opt_hz = 0;
  double R_opt_hz = 0;
  double Gamma_TLS_hz = 0;
  double g_env = 0;        // environment-spin g for the freeze-out factor
  double T_bath_K = 1.0;

  void validate() const;  // non-negative rates, T_bath > 0
};

// FP = (tau0/tau_cav - 1) / zeta; requires tau_cav < tau0.
double purcell_factor(double tau0_s, double tau_cav_s, double zeta);

// chi_L = 3 n^2 / (2 n^2 + 1), in (1, 1.5) for n > 1
double local_field_correction(double refractive_n);

struct ModeVolume {
  double m3;              // absolute
  double lambda_n_units;  // in (lambda/n)^3
};

// Vm = 3 Q lambda^3 / (4 pi^2 chi_L^2 n^3 FP)
ModeVolume mode_volume_from_purcell(double FP, const OpticalCavityModel& cavity);

// Single-emitter coupling from the mode volume, evaluated verbatim:
//   g0 = (mu/n) sqrt(omega_a / (2 hbar eps0 Vm))   [s^-1]
// Reference values for this chain are quoted as literal/2 elsewhere; both
// numbers are emitted by reports (`half_per_s` is the halved convention).
struct SingleEmitterCoupling {
  double literal_per_s;
  double half_per_s;
};

SingleEmitterCoupling g0_from_mode_volume(double mu_Cm, double refractive_n,
                                          double omega_a_rad_s, double Vm_m3);

// 1/T1(delta) = (1/T1_0) (1 + zeta (FP (g/2)^2/((g/2)^2 + delta^2) - 1)),
// g = cavity linewidth. Even in delta, increasing in |delta|.
double purcell_t1_vs_detuning(double detuning_hz, double T1_0_s, double zeta,
                              double FP, double gamma_cav_hz);

// Power-broadened hole linewidth in the Bloch limit (Omega in rad/s):
//   Gamma = (1/2pi) (1/T2* + sqrt(1/T2*^2 + Omega^2 T1/T2*))   [Hz]
double bloch_linewidth(double Omega_rad_s, double T1_s, double T2_star_s);

// Unique positive inversion of bloch_linewidth for T2*:
//   1/T2* = s^2 / (2 s + Omega^2 T1), s = 2 pi Gamma
double t2star_from_linewidth(double Gamma_opt_hz, double Omega_rad_s, double T1_s);

// Gamma(B) = Gamma0 + Gamma_SD sech^2(g_env mu_B B / (2 kB T)); even in B,
// decreasing for B > 0, -> Gamma0 as B -> inf.
double holeburn_B_model(double B_T, const OpticalLinewidthModel& m);

// Timescale-dependent optical linewidth:
//   Gamma0 + Gamma_SD sech^2(g_env mu_B B / 2 kB T) (1 - e^{-R t})
//          + Gamma_TLS ln(T1 / t),   0 < t <= T1
double c2_linewidth_model(double t_window_s, double T1_s, double B_T,
                          const OpticalLinewidthModel& m);

// Product of the four chain efficiencies, each validated in [0,1].
double collection_efficiency(double eta_cav, double eta_fiber, double eta_passive,
                             double eta_snspd);

}  // namespace spectro
