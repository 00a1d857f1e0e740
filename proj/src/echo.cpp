#include "spectro/echo.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <string>

#include "spectro/errors.hpp"
#include "spectro/rng.hpp"

namespace spectro {

namespace {
// FFTW's planner is not thread-safe; execution of a plan is.
std::mutex fftw_planner_mutex;
}  // namespace

void QuadratureTrace::validate() const {
  if (i_samples.size() != q_samples.size())
    throw ValidationError("QuadratureTrace: I and Q sample counts differ");
  if (sample_rate_hz <= 0)
    throw ValidationError("QuadratureTrace: sample rate must be > 0");
}

double QuadratureTrace::duration_s() const {
  return static_cast<double>(i_samples.size()) / sample_rate_hz;
}

QuadratureTrace synth_echo(double center_f_hz, double amplitude,
                           double envelope_sigma_s, double noise_rms,
                           double duration_s, double sample_rate_hz,
                           std::uint64_t seed) {
  if (sample_rate_hz <= 0) throw ValidationError("synth_echo: sample rate must be > 0");
  if (center_f_hz >= sample_rate_hz / 2.0)
    throw ValidationError("synth_echo: Nyquist violation (center_f >= sample_rate/2)");
  if (center_f_hz < 0) throw ValidationError("synth_echo: center_f must be >= 0");
  if (envelope_sigma_s <= 0) throw ValidationError("synth_echo: envelope sigma must be > 0");
  if (noise_rms < 0) throw ValidationError("synth_echo: noise RMS must be >= 0");
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
  if (n < 64)
    throw ValidationError("synth_echo: need duration*sample_rate >= 64 samples");
  QuadratureTrace tr;
  tr.sample_rate_hz = sample_rate_hz;
  tr.seed = seed;
  tr.i_samples.resize(n);
  tr.q_samples.resize(n);
  const double t0 = 0.5 * duration_s;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / sample_rate_hz;
    const double env =
        amplitude * std::exp(-0.5 * (t - t0) * (t - t0) /
                             (envelope_sigma_s * envelope_sigma_s));
    const double ph = 2.0 * M_PI * center_f_hz * (t - t0);
    double ni = 0.0, nq = 0.0;
    if (noise_rms > 0) {
      ni = noise_rms * rng::gauss(seed, 2 * k);
      nq = noise_rms * rng::gauss(seed, 2 * k + 1);
    }
    tr.i_samples[k] = env * std::cos(ph) + ni;
    tr.q_samples[k] = env * std::sin(ph) + nq;
  }
  return tr;
}

std::vector<double> window_spectrum(const std::vector<double>& samples,
                                    double sample_rate_hz, double window_s) {
  const auto w = static_cast<std::size_t>(std::llround(window_s * sample_rate_hz));
  if (w < 2) throw ValidationError("window_spectrum: window too short");
  if (w > samples.size())
    throw ValidationError("window_spectrum: window exceeds trace duration");
  // central segment, rectangular window (no taper)
  const std::size_t start = (samples.size() - w) / 2;
  std::vector<double> in(samples.begin() + start, samples.begin() + start + w);
  std::vector<double> mag(w / 2 + 1);
  {
    fftw_complex* out;
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(fftw_planner_mutex);
      out = fftw_alloc_complex(w / 2 + 1);
      plan = fftw_plan_dft_r2c_1d(static_cast<int>(w), in.data(), out, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    for (std::size_t k = 0; k < mag.size(); ++k)
      mag[k] = std::hypot(out[k][0], out[k][1]);
    {
      std::lock_guard<std::mutex> lock(fftw_planner_mutex);
      fftw_destroy_plan(plan);
      fftw_free(out);
    }
  }
  return mag;
}

namespace {

// integral of |X(f)| df over [f_lo, f_hi), bins at k*df
double band_integral(const std::vector<double>& mag, double df, double f_lo,
                     double f_hi) {
  double sum = 0;
  for (std::size_t k = 0; k < mag.size(); ++k) {
    const double f = static_cast<double>(k) * df;
    if (f >= f_lo && f < f_hi) sum += mag[k];
  }
  return sum * df;
}

}  // namespace

EchoArea echo_area(const QuadratureTrace& trace, double window_s,
                   double band_center_hz, double band_width_hz,
                   double bg_bin_width_hz) {
  trace.validate();
  if (band_width_hz <= 0 || bg_bin_width_hz <= 0)
    throw ValidationError("echo_area: band widths must be > 0");
  const double band_lo = band_center_hz - band_width_hz / 2.0;
  const double band_hi = band_center_hz + band_width_hz / 2.0;
  if (band_lo - bg_bin_width_hz < 0)
    throw ValidationError("echo_area: background bin extends below 0 Hz");
  if (band_hi + bg_bin_width_hz > trace.sample_rate_hz / 2.0)
    throw ValidationError(
        "echo_area: analysis band (incl. background bins) exceeds Nyquist range");
  if (window_s > trace.duration_s())
    throw ValidationError("echo_area: window exceeds trace duration");

  const auto w = static_cast<std::size_t>(std::llround(window_s * trace.sample_rate_hz));
  const double df = trace.sample_rate_hz / static_cast<double>(w);
  // background integral over the two adjacent bins, rescaled to the signal
  // bandwidth (factor 1 when 2*bg_bin_width == band_width)
  const double bg_scale = band_width_hz / (2.0 * bg_bin_width_hz);

  EchoArea out{};
  const std::vector<double>* chans[2] = {&trace.i_samples, &trace.q_samples};
  double* areas[2] = {&out.i_area, &out.q_area};
  double* peds[2] = {&out.i_pedestal, &out.q_pedestal};
  for (int c = 0; c < 2; ++c) {
    const std::vector<double> mag =
        window_spectrum(*chans[c], trace.sample_rate_hz, window_s);
    const double sig = band_integral(mag, df, band_lo, band_hi);
    const double bg = band_integral(mag, df, band_lo - bg_bin_width_hz, band_lo) +
                      band_integral(mag, df, band_hi, band_hi + bg_bin_width_hz);
    *peds[c] = bg * bg_scale;
    *areas[c] = sig - *peds[c];
  }
  out.combined = std::hypot(out.i_area, out.q_area);
  return out;
}

}  // namespace spectro
