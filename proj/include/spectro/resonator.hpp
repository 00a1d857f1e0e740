#pragma once

#include <complex>
#include <vector>

// Superconducting-resonator transmission, spin-induced dispersive/absorptive
// signatures, kinetic-inductance background, TLS power dependence, intracavity
// photon number, ensemble-coupling-to-density conversion.
//
// All kappa-like quantities in this module are ordinary frequencies (Hz);
// see intracavity_photons for the convention note.
namespace spectro {

struct TlsParams {
  double Qi0 = 0;          // power-independent internal Q
  double F_tan_delta = 0;  // filling factor times loss tangent
  double nc = 1;           // critical photon number
  double alpha = 1;        // saturation exponent; warn outside (0,2]
};

struct ResonatorModel {
  double omega0_hz = 0;  // center frequency
  double Qi = 0;         // internal quality factor
  double Qe = 0;         // external (coupling) quality factor
  double Qalpha = 0;     // asymmetry parameter; <=0 or inf means none
  double kinetic_c_hz_per_T2 = 0;  // kinetic-inductance pulling, Hz/T^2
  TlsParams tls;

  void validate() const;  // Qi,Qe > 0; nc > 0
};

struct SpinEnsemble {
  double Omega_ens_hz = 0;  // ensemble coupling
  double gamma_s_hz = 0;    // inhomogeneous HALF-width (half of FWHM)
  double g_eff = 0;
  double B0_T = 0;          // resonance field
  double g_single_hz = 0;   // single-spin coupling
  double volume_m3 = 0;

  void validate() const;  // Omega_ens, gamma_s, g_single > 0
};

// S21(w) = (1 + 2j Qi x) / (1 + Qi/Qe + j Qi/Qalpha + 2j Qi x), x = (w-w0)/w0
std::complex<double> s21(double omega_hz, const ResonatorModel& model);

struct SpinSignature {
  double delta_kappa_hz;  // linewidth broadening, >= 0
  double delta_f_hz;      // frequency pull
};

// Lorentzian spin signature vs field. Detuning in ordinary-frequency units:
// Delta = g_eff mu_B (B - B0) / h [Hz], matching gamma_s in Hz.
//   delta_kappa = Omega^2 gamma_s / (gamma_s^2 + Delta^2)
//   delta_f     = -Omega^2 Delta  / (gamma_s^2 + Delta^2)
SpinSignature spin_signature(double B_T, const SpinEnsemble& ens);

// omega(B) = omega0 - c B^2
double kinetic_background(double B_T, const ResonatorModel& model);

// 1/Qi(n) = 1/Qi0 + F tan(delta) / (1 + (n/nc)^alpha)
double tls_quality(double n_photons, const ResonatorModel& model);

// <n> = (P / h f) (kappa_e / kappa^2) * (kappa/2)^2 / ((kappa/2)^2 + delta^2).
// kappa, kappa_e, detuning are ordinary frequencies (Hz), not angular; the
// formula is evaluated verbatim in this convention.
double intracavity_photons(double P_W, double f_hz, double kappa_e_hz,
                           double kappa_hz, double detuning_hz);

// Omega = g sqrt(n)
double rabi_from_photons(double g_single_hz, double n_photons);

// N = (Omega_ens / g_single)^2
double ensemble_to_count(double Omega_ens_hz, double g_single_hz);

struct Density {
  double per_m3;
  double ppm;  // relative to host cation density
};

Density count_to_density(double N, double volume_m3, double host_density_per_m3);

// Least-squares polynomial detrend (default order 2) for slow-varying
// backgrounds of field sweeps. Returns y minus the fitted polynomial in x.
std::vector<double> polynomial_detrend(const std::vector<double>& x,
                                       const std::vector<double>& y, int order = 2);

}  // namespace spectro
