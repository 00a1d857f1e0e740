#include <cmath>

#include <doctest.h>

#include "spectro/coherence.hpp"
#include "spectro/constants.hpp"
#include "spectro/errors.hpp"

#include "oracles.hpp"

using namespace spectro;

namespace {
SpectralDiffusionModel reference_sd() { return {700.0, 4400.0, 287.0, 0.8}; }
ThermalModel reference_thermal() { return {0.2788360226, 1.45, 96.8e3, 2.9e3}; }
}  // namespace

TEST_CASE("stretched-exponential echo decay") {
  const StretchedDecay d{1.0, 0.38e-3, 1.18};
  // at delay T2 the exponent argument is exactly 2
  CHECK_REL(hahn_decay(0.38e-3, d), 0.1037503475, 1e-9);
  CHECK_REL(hahn_decay(0.0, d), 1.0, 1e-15);
  CHECK(hahn_decay(1e-4, d) > hahn_decay(2e-4, d));
  CHECK_THROWS_AS(hahn_decay(-1e-6, d), ValidationError);
  CHECK_THROWS_AS(hahn_decay(1e-6, StretchedDecay{1.0, 0.0, 1.0}), ValidationError);
}

TEST_CASE("spectral-diffusion effective linewidth") {
  const SpectralDiffusionModel m = reference_sd();
  CHECK_REL(effective_linewidth(0.0, 10e-3, m), 2775.262362, 1e-9);
  CHECK_REL(effective_linewidth(50e-6, 10e-3, m), 2806.832362, 1e-9);
  // instantaneous-diffusion-free limit: no wait, no pulse spacing
  CHECK_REL(effective_linewidth(0.0, 0.0, m), 700.0, 1e-12);
  // saturates in TW at Gamma0 + Gamma_SD/2
  CHECK_REL(effective_linewidth(0.0, 1e3, m), 700.0 + 2200.0, 1e-9);
  CHECK(effective_linewidth(10e-6, 1e-3, m) < effective_linewidth(80e-6, 1e-3, m));
}

TEST_CASE("stimulated-echo amplitude combines lifetime and dephasing") {
  const SpectralDiffusionModel m = reference_sd();
  CHECK_REL(stimulated_echo(50e-6, 10e-3, m), 0.4088968347, 1e-9);
  CHECK_REL(stimulated_echo(0.0, 0.0, m), 1.0, 1e-15);
  CHECK(stimulated_echo(50e-6, 10e-3, m) > stimulated_echo(50e-6, 50e-3, m));
  CHECK(stimulated_echo(10e-6, 10e-3, m) > stimulated_echo(80e-6, 10e-3, m));
}

TEST_CASE("spectral-diffusion-limited coherence time") {
  CHECK_REL(sd_limited_T2(4400.0, 287.0), 1.004124983e-3, 1e-9);
  CHECK_THROWS_AS(sd_limited_T2(0.0, 287.0), ValidationError);
}

TEST_CASE("Zeeman temperature of the transition") {
  CHECK_REL(zeeman_temperature(5.81e9), 0.2788360226, 1e-9);
  CHECK_THROWS_AS(zeeman_temperature(0.0), ValidationError);
}

TEST_CASE("thermally activated dephasing with stable limits") {
  const ThermalModel m = reference_thermal();
  // cold: the fluctuator bath freezes out
  CHECK_REL(dephasing_vs_T(1e-6, m), 2.9e3, 1e-9);
  // hot: denominator saturates at 4
  CHECK_REL(dephasing_vs_T(1e9, m), 2.9e3 + 96.8e3 / 4.0, 1e-9);
  // at T equal to the Zeeman temperature the divisor is 2 + 2 cosh(1)
  CHECK_REL(dephasing_vs_T(m.T_Ze_K, m), 2.9e3 + 96.8e3 / 5.08616127, 1e-8);
  CHECK(std::isfinite(dephasing_vs_T(1e-300, m)));  // no cosh overflow
}

TEST_CASE("thermal polarization amplitude uses the correlation factor") {
  const ThermalModel m = reference_thermal();
  CHECK_REL(polarization_amplitude(m.T_Ze_K / m.C_corr, m), std::tanh(1.0), 1e-12);
  CHECK(polarization_amplitude(1e-3, m) > polarization_amplitude(1.0, m));
}

TEST_CASE("residual field noise from echo-decay rates") {
  const NoiseBudgetDetail d = noise_budget_detail(0.38e-3, 1.14e-3, 3.2);
  CHECK_REL(d.sensitivity_hz_per_T, 4.47879838e10, 1e-9);
  CHECK_REL(d.delta_B_T, 1.246848707e-8, 1e-9);
  // the literal-rate variant over-subtracts and goes negative here
  CHECK_REL(d.delta_B_literal_T, -8.827230852e-10, 1e-9);
  CHECK(!d.ordering_warning);
  CHECK(noise_budget_detail(1.14e-3, 0.38e-3, 3.2).ordering_warning);
  CHECK_REL(noise_budget(0.38e-3, 1.14e-3, 3.2), d.delta_B_T, 1e-15);
}

TEST_CASE("instantaneous-diffusion density scale and its T2 limit") {
  CHECK_REL(id_effective_density(1.14e-3, 3.2), 4.147435359e20, 1e-9);
  const auto t2 = id_limited_T2(3.29e23, 3.2, 0.016);
  REQUIRE(t2.has_value());
  CHECK_REL(*t2, 8.981907882e-5, 1e-9);
  CHECK(!id_limited_T2(0.0, 3.2, 0.016).has_value());
  CHECK_THROWS_AS(id_limited_T2(1e23, 3.2, 1.5), ValidationError);
}

TEST_CASE("refocusing-pulse flip probability averaged over the line") {
  CHECK_REL(average_flip_probability(0.78e6, 100e6, Lineshape::Lorentzian),
            0.01039101368, 1e-6);
  CHECK_REL(average_flip_probability(0.78e6, 100e6, Lineshape::Gaussian),
            0.01534363656, 1e-6);
  // narrow line: everything is near resonance, the pi pulse inverts
  CHECK(average_flip_probability(1e6, 1e3, Lineshape::Lorentzian) > 0.99);
  CHECK_THROWS_AS(average_flip_probability(0.0, 1e6, Lineshape::Lorentzian),
                  ValidationError);
}

TEST_CASE("cavity-enhanced spin relaxation rate") {
  CHECK_REL(purcell_spin_rate(128.0, 1.94e6, 0.0), 0.0337814433, 1e-9);
  CHECK_REL(purcell_spin_rate(128.0, 1.94e6, 1.94e6),
            0.0337814433 / 2.0, 1e-9);
  CHECK_THROWS_AS(purcell_spin_rate(128.0, 0.0, 0.0), ValidationError);
}

TEST_CASE("direct-phonon lifetime scaling in field and temperature") {
  // same f and T cancel the occupation factor: pure B^-5
  CHECK_REL(direct_phonon_scaling(1.0, 0.113, 5.81e9, 0.1, 0.011, 5.81e9, 0.1),
            114400.7289, 1e-8);
  // hotter target bath shortens the lifetime
  const double cold = direct_phonon_scaling(1.0, 0.1, 5.81e9, 0.05, 0.1, 5.81e9, 0.05);
  const double hot = direct_phonon_scaling(1.0, 0.1, 5.81e9, 0.05, 0.1, 5.81e9, 1.0);
  CHECK_REL(cold, 1.0, 1e-12);
  CHECK(hot < cold);
}

TEST_CASE("ground-state polarization and its deficit conventions") {
  CHECK(thermal_polarization(5.81e9, 1e9) < 1e-6);  // hot bath: unpolarized
  CHECK_REL(thermal_polarization_deficit(5.81e9, 0.0125, true),
            4.104632875e-10, 1e-9);
  CHECK_REL(thermal_polarization_deficit(5.81e9, 0.0125, false),
            8.424005523e-20, 1e-9);
  CHECK_REL(thermal_polarization(5.81e9, 0.0125) +
                thermal_polarization_deficit(5.81e9, 0.0125, true),
            1.0, 1e-12);
}

TEST_CASE("like-spin dipolar coupling at a reference concentration") {
  CHECK_REL(dipolar_coupling(3.2, 3.8, 81.4e-6 * constants::n_yttrium),
            341758.0195, 1e-9);
  CHECK_REL(dipolar_coupling(3.2, 3.8, 2.0 * 81.4e-6 * constants::n_yttrium),
            2.0 * 341758.0195, 1e-9);
}
