#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "spectro/fit.hpp"

// Named forward-model registry for the fit engine. Factories take a JSON
// object of fixed (non-fitted) inputs; unknown fixed keys are rejected.
namespace spectro::models {

using ModelFactory = std::function<FitModel(const nlohmann::json& fixed)>;

// Registered models:
//   linear            y = a + b x                        params a, b
//   stretched_exp     y = A0 exp(-(2t/T2)^n)             params A0, T2, n
//   sat_recovery      y = A0 (1 - e^{-t/T1})             params A0, T1
//   s21_mag           y = |S21(f)|                       params f0, Qi, Qe, Qalpha
//   stimulated_echo   y = A0 e^{-(TW/T1 + 2 pi tau Geff)} params A0, Gamma0,
//                     x = (tau, TW), fixed t1_s                  Gamma_SD, R
//   tls_q             y = Qi(n)                          params Qi0, F_tan_delta,
//                                                               nc, alpha
//   holeburn_b        y = Gamma(B), fixed t_bath_k       params Gamma0, Gamma_SD,
//                                                               g_env
//   power_broadening  y = Gamma(Omega), fixed t1_s       params t2_star
// linear, stretched_exp, sat_recovery and holeburn_b provide analytic
// gradients; the rest are differentiated numerically.
const std::map<std::string, ModelFactory>& registry();

FitModel make(const std::string& name, const nlohmann::json& fixed = {});

std::vector<std::string> names();

}  // namespace spectro::models
