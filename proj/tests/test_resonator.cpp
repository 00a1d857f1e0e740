#include <cmath>
#include <complex>

#include <doctest.h>

#include "spectro/constants.hpp"
#include "spectro/errors.hpp"
#include "spectro/resonator.hpp"

#include "oracles.hpp"

using namespace spectro;

namespace {
ResonatorModel reference_resonator() {
  ResonatorModel m;
  m.omega0_hz = 5.81e9;
  m.Qi = 370043.0;
  m.Qe = 3001.0;
  m.Qalpha = 0.0;  // symmetric line
  return m;
}

SpinEnsemble reference_ensemble() {
  SpinEnsemble e;
  e.Omega_ens_hz = 3.07e6;
  e.gamma_s_hz = 34e6;
  e.g_eff = 3.2;
  e.B0_T = 0.129722294;
  e.g_single_hz = 128.0;
  e.volume_m3 = 1.7584e-15;
  return e;
}
}  // namespace

TEST_CASE("transmission dip depth and far-detuned transparency") {
  const ResonatorModel m = reference_resonator();
  CHECK_REL(std::abs(s21(m.omega0_hz, m)), 0.008044627443, 1e-9);
  CHECK_REL(std::abs(s21(m.omega0_hz + 1e8, m)), 1.0, 1e-3);
  CHECK_REL(std::abs(s21(m.omega0_hz - 1e8, m)), 1.0, 1e-3);
}

TEST_CASE("impedance-mismatch term skews the line") {
  ResonatorModel m = reference_resonator();
  const double df = m.omega0_hz / m.Qi;  // about a linewidth
  const double sym_lo = std::abs(s21(m.omega0_hz - df, m));
  const double sym_hi = std::abs(s21(m.omega0_hz + df, m));
  CHECK_REL(sym_lo, sym_hi, 1e-9);
  m.Qalpha = 5e3;
  CHECK(std::abs(std::abs(s21(m.omega0_hz - df, m)) -
                 std::abs(s21(m.omega0_hz + df, m))) > 1e-4);
}

TEST_CASE("resonator model validation") {
  ResonatorModel m = reference_resonator();
  m.Qi = -1;
  CHECK_THROWS_AS(m.validate(), ValidationError);
  m = reference_resonator();
  m.Qe = 0;
  CHECK_THROWS_AS(m.validate(), ValidationError);
}

TEST_CASE("kinetic-inductance field background is quadratic") {
  ResonatorModel m = reference_resonator();
  m.kinetic_c_hz_per_T2 = 2.5e8;
  CHECK_REL(kinetic_background(0.0, m), m.omega0_hz, 1e-15);
  CHECK_REL(m.omega0_hz - kinetic_background(0.2, m), 2.5e8 * 0.04, 1e-9);
}

TEST_CASE("spin signature peak, symmetry, and tails") {
  const SpinEnsemble e = reference_ensemble();
  const SpinSignature at_res = spin_signature(e.B0_T, e);
  CHECK_REL(at_res.delta_kappa_hz, 277202.9412, 1e-9);
  CHECK(std::abs(at_res.delta_f_hz) < 1e-6 * at_res.delta_kappa_hz);

  // field offset that detunes by exactly gamma_s: half-height point
  const double dB = e.gamma_s_hz * constants::h / (e.g_eff * constants::mu_B);
  CHECK_REL(spin_signature(e.B0_T + dB, e).delta_kappa_hz, 277202.9412 / 2.0, 1e-9);
  // dispersive part is odd about resonance, absorptive part even
  const SpinSignature up = spin_signature(e.B0_T + dB, e);
  const SpinSignature dn = spin_signature(e.B0_T - dB, e);
  CHECK_REL(up.delta_f_hz, -dn.delta_f_hz, 1e-12);
  CHECK_REL(up.delta_kappa_hz, dn.delta_kappa_hz, 1e-12);
  // the cavity is pulled toward the spins below resonance
  CHECK(up.delta_f_hz < 0.0);
  CHECK(spin_signature(e.B0_T + 100 * dB, e).delta_kappa_hz <
        1e-3 * at_res.delta_kappa_hz);
}

TEST_CASE("saturable loss channel recovers both power limits") {
  ResonatorModel m = reference_resonator();
  m.tls = TlsParams{13422.0, 3.92e-5, 3.8e6, 0.36};
  CHECK_REL(tls_quality(0.0, m), 8794.723218, 1e-9);
  CHECK_REL(tls_quality(1e30, m), 13422.0, 1e-6);
  // monotone in drive power
  CHECK(tls_quality(1e4, m) < tls_quality(1e8, m));
}

TEST_CASE("intracavity photon number from input power") {
  // -65 dBm drive, critically coupled, on resonance
  CHECK_REL(intracavity_photons(3.162e-10, 5.81e9, 1.9e6, 1.9e6, 0.0),
            43229090.93, 1e-8);
  // detuning by kappa/2 halves the circulating energy
  CHECK_REL(intracavity_photons(3.162e-10, 5.81e9, 1.9e6, 1.9e6, 0.95e6),
            43229090.93 / 2.0, 1e-8);
  CHECK_THROWS_AS(intracavity_photons(-1.0, 5.81e9, 1.9e6, 1.9e6, 0.0),
                  ValidationError);
}

TEST_CASE("single-spin coupling scales ensemble quantities") {
  CHECK_REL(rabi_from_photons(128.0, 41085.0), 25944.87695, 1e-9);
  CHECK_REL(rabi_from_photons(128.0, 43229090.93), 841585.0675, 1e-8);
  CHECK_REL(ensemble_to_count(3.07e6, 128.0), 575250244.1, 1e-9);
  CHECK_REL(ensemble_to_count(1.88e6, 74.67), 633903859.4, 1e-9);
}

TEST_CASE("coupled-spin count maps to density and concentration") {
  const double N = ensemble_to_count(3.07e6, 128.0);
  const Density d = count_to_density(N, 1.7584e-15, constants::n_yttrium);
  CHECK_REL(d.per_m3, 3.271441334e23, 1e-9);
  CHECK_REL(d.ppm, 12.29865163, 1e-9);
  const Density d2 = count_to_density(ensemble_to_count(1.88e6, 74.67), 1.7584e-15,
                                      constants::n_yttrium);
  CHECK_REL(d2.per_m3, 3.60500375e23, 1e-9);
  CHECK_REL(d2.ppm, 13.55264568, 1e-9);
  CHECK_THROWS_AS(count_to_density(1.0, 0.0, constants::n_yttrium), ValidationError);
}

TEST_CASE("polynomial detrend removes a smooth background") {
  std::vector<double> x, y;
  for (int i = 0; i <= 50; ++i) {
    const double xi = 0.1 * i;
    x.push_back(xi);
    y.push_back(3.0 - 0.2 * xi + 0.05 * xi * xi);
  }
  const auto flat = polynomial_detrend(x, y, 2);
  for (double v : flat) CHECK(std::abs(v) < 1e-9);

  // a narrow feature survives detrending
  std::vector<double> y2 = y;
  y2[25] += 1.0;
  const auto kept = polynomial_detrend(x, y2, 2);
  CHECK(kept[25] > 0.9);
}
