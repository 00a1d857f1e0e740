#include "spectro/resonator.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "spectro/constants.hpp"
#include "spectro/errors.hpp"

namespace spectro {

void ResonatorModel::validate() const {
  if (Qi <= 0 || Qe <= 0) throw ValidationError("ResonatorModel: Qi and Qe must be > 0");
  if (tls.nc <= 0) throw ValidationError("ResonatorModel: nc must be > 0");
}

void SpinEnsemble::validate() const {
  if (Omega_ens_hz <= 0 || gamma_s_hz <= 0 || g_single_hz <= 0)
    throw ValidationError("SpinEnsemble: Omega_ens, gamma_s, g_single must be > 0");
}

std::complex<double> s21(double omega_hz, const ResonatorModel& model) {
  if (omega_hz <= 0) throw ValidationError("s21: omega must be > 0");
  const double x = (omega_hz - model.omega0_hz) / model.omega0_hz;
  const std::complex<double> j(0.0, 1.0);
  const std::complex<double> num = 1.0 + 2.0 * j * model.Qi * x;
  std::complex<double> den = 1.0 + model.Qi / model.Qe + 2.0 * j * model.Qi * x;
  if (model.Qalpha > 0 && std::isfinite(model.Qalpha))
    den += j * model.Qi / model.Qalpha;
  return num / den;
}

SpinSignature spin_signature(double B_T, const SpinEnsemble& ens) {
  ens.validate();
  const double delta =
      ens.g_eff * constants::mu_B * (B_T - ens.B0_T) / constants::h;  // Hz
  const double denom = ens.gamma_s_hz * ens.gamma_s_hz + delta * delta;
  const double o2 = ens.Omega_ens_hz * ens.Omega_ens_hz;
  return {o2 * ens.gamma_s_hz / denom, -o2 * delta / denom};
}

double kinetic_background(double B_T, const ResonatorModel& model) {
  return model.omega0_hz - model.kinetic_c_hz_per_T2 * B_T * B_T;
}

double tls_quality(double n_photons, const ResonatorModel& model) {
  if (n_photons < 0) throw ValidationError("tls_quality: photon number must be >= 0");
  const TlsParams& p = model.tls;
  if (p.Qi0 <= 0) throw ValidationError("tls_quality: Qi0 must be > 0");
  const double sat = 1.0 + std::pow(n_photons / p.nc, p.alpha);
  return 1.0 / (1.0 / p.Qi0 + p.F_tan_delta / sat);
}

double intracavity_photons(double P_W, double f_hz, double kappa_e_hz,
                           double kappa_hz, double detuning_hz) {
  if (P_W < 0) throw ValidationError("intracavity_photons: power must be >= 0");
  if (kappa_hz <= 0) throw ValidationError("intracavity_photons: kappa must be > 0");
  const double half = kappa_hz / 2.0;
  const double lor = half * half / (half * half + detuning_hz * detuning_hz);
  return (P_W / (constants::h * f_hz)) * (kappa_e_hz / (kappa_hz * kappa_hz)) * lor;
}

double rabi_from_photons(double g_single_hz, double n_photons) {
  if (n_photons < 0) throw ValidationError("rabi_from_photons: photon number must be >= 0");
  return g_single_hz * std::sqrt(n_photons);
}

double ensemble_to_count(double Omega_ens_hz, double g_single_hz) {
  if (g_single_hz <= 0) throw ValidationError("ensemble_to_count: g_single must be > 0");
  const double r = Omega_ens_hz / g_single_hz;
  return r * r;
}

Density count_to_density(double N, double volume_m3, double host_density_per_m3) {
  if (volume_m3 <= 0) throw ValidationError("count_to_density: volume must be > 0");
  const double d = N / volume_m3;
  return {d, d / host_density_per_m3 * 1e6};
}

std::vector<double> polynomial_detrend(const std::vector<double>& x,
                                       const std::vector<double>& y, int order) {
  if (x.size() != y.size()) throw ValidationError("polynomial_detrend: size mismatch");
  if (order < 0) throw ValidationError("polynomial_detrend: order must be >= 0");
  const int n = static_cast<int>(x.size());
  if (n <= order) throw ValidationError("polynomial_detrend: need more points than order");
  // center/scale x for conditioning
  double xm = 0, xs = 0;
  for (double v : x) xm += v;
  xm /= n;
  for (double v : x) xs = std::max(xs, std::abs(v - xm));
  if (xs == 0) xs = 1;
  Eigen::MatrixXd A(n, order + 1);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    const double u = (x[i] - xm) / xs;
    double p = 1;
    for (int k = 0; k <= order; ++k, p *= u) A(i, k) = p;
    b(i) = y[i];
  }
  const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = y[i] - A.row(i).dot(coef);
  return out;
}

}  // namespace spectro
