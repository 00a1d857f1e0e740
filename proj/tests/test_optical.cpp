#include <cmath>

#include <doctest.h>

#include "spectro/constants.hpp"
#include "spectro/errors.hpp"
#include "spectro/optical.hpp"

#include "oracles.hpp"

using namespace spectro;

namespace {
OpticalCavityModel reference_cavity() {
  OpticalCavityModel c;
  c.Q = 58000.0;
  c.lambda_m = 1536.8e-9;
  c.refractive_n = 1.89;
  c.gamma_cav_hz = 195.1e12 / 58000.0;
  c.branching_zeta = 0.22;
  return c;
}

OpticalLinewidthModel reference_hole() {
  OpticalLinewidthModel m;
  m.Gamma0_opt_hz = 158.6e3;
  m.Gamma_SD_opt_hz = 635.5e3;
  m.g_env = 2.02;
  m.T_bath_K = 0.22;
  return m;
}

constexpr double kFP = 271.4285714;
}  // namespace

TEST_CASE("Purcell factor from lifetime shortening") {
  CHECK_REL(purcell_factor(8.5e-3, 0.14e-3, 0.22), kFP, 1e-9);
  CHECK_THROWS_AS(purcell_factor(0.14e-3, 8.5e-3, 0.22), ValidationError);  // no shortening
  CHECK_THROWS_AS(purcell_factor(8.5e-3, 0.14e-3, 0.0), ValidationError);
}

TEST_CASE("local-field correction for a dielectric host") {
  CHECK_REL(local_field_correction(1.89), 1.315819847, 1e-9);
  CHECK_REL(local_field_correction(1.0), 1.0, 1e-12);
}

TEST_CASE("mode volume inferred from the Purcell factor") {
  const ModeVolume vm = mode_volume_from_purcell(kFP, reference_cavity());
  CHECK_REL(vm.lambda_n_units, 9.37866633, 1e-8);
  CHECK_REL(vm.m3, 5.042056733e-18, 1e-8);
  // consistency between the two unit systems
  const double lam_n = 1536.8e-9 / 1.89;
  CHECK_REL(vm.m3, vm.lambda_n_units * lam_n * lam_n * lam_n, 1e-12);
}

TEST_CASE("single-emitter coupling from dipole moment and mode volume") {
  const double wa = 2.0 * M_PI * 195.1e12;
  const double lam_n = 1536.8e-9 / 1.89;
  const SingleEmitterCoupling quoted =
      g0_from_mode_volume(9.7e-33, 1.89, wa, 8.9 * lam_n * lam_n * lam_n);
  CHECK_REL(quoted.literal_per_s, 1900958.916, 1e-8);
  CHECK_REL(quoted.half_per_s, 1900958.916 / 2.0, 1e-8);
  const SingleEmitterCoupling mine =
      g0_from_mode_volume(9.7e-33, 1.89, wa, 5.042056733e-18);
  CHECK_REL(mine.literal_per_s, 1851813.269, 1e-8);
  // bigger mode dilutes the vacuum field
  CHECK(mine.literal_per_s < quoted.literal_per_s);
}

TEST_CASE("Purcell-shortened lifetime vs cavity detuning") {
  const double gcav = 195.1e12 / 58000.0;
  CHECK_REL(purcell_t1_vs_detuning(0.0, 8.5e-3, 0.22, kFP, gcav),
            1.40509139e-4, 1e-8);
  CHECK_REL(purcell_t1_vs_detuning(1e15, 8.5e-3, 0.22, kFP, gcav),
            0.0108974359, 1e-6);
  // symmetric in detuning and monotone away from resonance
  CHECK_REL(purcell_t1_vs_detuning(2e9, 8.5e-3, 0.22, kFP, gcav),
            purcell_t1_vs_detuning(-2e9, 8.5e-3, 0.22, kFP, gcav), 1e-12);
  CHECK(purcell_t1_vs_detuning(1e9, 8.5e-3, 0.22, kFP, gcav) <
        purcell_t1_vs_detuning(4e9, 8.5e-3, 0.22, kFP, gcav));
  // at half-linewidth detuning the enhancement is halved
  const double mid = purcell_t1_vs_detuning(gcav / 2.0, 8.5e-3, 0.22, kFP, gcav);
  CHECK_REL(mid, 8.5e-3 / (1.0 + 0.22 * (kFP / 2.0 - 1.0)), 1e-9);
}

TEST_CASE("power-broadened linewidth from the optical Bloch picture") {
  CHECK_REL(bloch_linewidth(0.0, 3e-3, 122e-6), 2609.097428, 1e-9);
  CHECK_REL(bloch_linewidth(2.0 * M_PI * 33e3, 3e-3, 122e-6), 164951.7008, 1e-9);
  CHECK(bloch_linewidth(1e5, 3e-3, 122e-6) > bloch_linewidth(0.0, 3e-3, 122e-6));
  CHECK_THROWS_AS(bloch_linewidth(0.0, 0.0, 122e-6), ValidationError);
}

TEST_CASE("dephasing time inverted from a measured broadened linewidth") {
  const double t2s = t2star_from_linewidth(161e3, 2.0 * M_PI * 33e3, 3e-3);
  CHECK_REL(t2s, 1.280138842e-4, 1e-9);
  // round trip through the forward model
  CHECK_REL(bloch_linewidth(2.0 * M_PI * 33e3, 3e-3, t2s), 161e3, 1e-9);
}

TEST_CASE("spectral-hole linewidth vs magnetic field") {
  const OpticalLinewidthModel m = reference_hole();
  CHECK_REL(holeburn_B_model(0.0, m), 794100.0, 1e-9);
  // high field freezes the nuclear bath, leaving the intrinsic width
  CHECK_REL(holeburn_B_model(10.0, m), 158.6e3, 1e-6);
  // half-suppression field of the sech^2 envelope
  CHECK_REL(holeburn_B_model(0.2858097616, m), 158.6e3 + 635.5e3 / 2.0, 1e-8);
  CHECK_REL(holeburn_B_model(-0.2858097616, m), holeburn_B_model(0.2858097616, m),
            1e-12);
}

TEST_CASE("time-windowed optical linewidth with frozen bath") {
  OpticalLinewidthModel m;
  m.Gamma0_opt_hz = 0.88e6;
  m.Gamma_SD_opt_hz = 4.32e6;
  m.R_opt_hz = 0.83e3;
  m.Gamma_TLS_hz = 0.0;
  m.g_env = 1.2;
  m.T_bath_K = 0.1;
  CHECK_REL(c2_linewidth_model(1.3e-3, 3e-3, 0.0, m), 3731479.543, 1e-9);
  // short windows see less spectral diffusion
  CHECK(c2_linewidth_model(1e-5, 3e-3, 0.0, m) < c2_linewidth_model(1e-3, 3e-3, 0.0, m));
  // a TLS term adds log growth in the window
  m.Gamma_TLS_hz = 1e5;
  const double short_w = c2_linewidth_model(1e-4, 3e-3, 0.0, m);
  m.Gamma_TLS_hz = 0.0;
  CHECK(short_w > c2_linewidth_model(1e-4, 3e-3, 0.0, m));
}

TEST_CASE("end-to-end photon collection efficiency") {
  CHECK_REL(collection_efficiency(0.04, 0.51, 0.724, 0.70), 0.01033872, 1e-9);
  CHECK_THROWS_AS(collection_efficiency(1.5, 0.5, 0.5, 0.5), ValidationError);
}
