#pragma once
// Shared cross-check helpers for the test suite. Everything here is computed
// by a method independent of the library code under test (naive DFT instead
// of FFT, Simpson instead of adaptive quadrature, finite differences instead
// of analytic gradients).

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <doctest.h>

namespace oracles {

inline bool rel_close(double a, double b, double tol) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) <= tol * scale;
}

#define CHECK_REL(a, b, tol)                                                      \
  do {                                                                            \
    const double va = (a), vb = (b);                                              \
    CHECK_MESSAGE(oracles::rel_close(va, vb, (tol)),                              \
                  #a " = ", va, " vs ", vb, " (rel tol ", (tol), ")");            \
  } while (0)

// O(N^2) reference DFT magnitude at bin k of an N-point real sequence
inline std::complex<double> naive_dft_bin(const std::vector<double>& x, std::size_t k) {
  std::complex<double> acc{0.0, 0.0};
  const double w = -2.0 * M_PI * static_cast<double>(k) / x.size();
  for (std::size_t n = 0; n < x.size(); ++n)
    acc += x[n] * std::complex<double>(std::cos(w * n), std::sin(w * n));
  return acc;
}

inline double central_diff(const std::function<double(double)>& f, double x,
                           double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / v.size();
}

inline double stddev(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

}  // namespace oracles
