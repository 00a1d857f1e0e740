#pragma once

#include <cstdint>
#include <vector>

// Pulsed-ESR echo extraction: synthetic quadrature traces, windowed FFT, band
// integration, adjacent-bin pedestal subtraction, quadrature combination.
namespace spectro {

struct QuadratureTrace {
  double sample_rate_hz = 0;
  std::vector<double> i_samples;
  std::vector<double> q_samples;
  std::uint64_t seed = 0;  // for synthetic traces

  void validate() const;  // equal lengths, positive sample rate
  double duration_s() const;
};

// Gaussian-envelope tone at center_f (I carries cos, Q carries sin, envelope
// centered mid-trace) plus white Gaussian noise of RMS noise_rms per sample.
// Noise comes from the counter-based splitmix64 generator (Box-Muller), so
// traces are bit-reproducible per seed. Requires duration*sample_rate >= 64
// and center_f below Nyquist.
QuadratureTrace synth_echo(double center_f_hz, double amplitude,
                           double envelope_sigma_s, double noise_rms,
                           double duration_s, double sample_rate_hz,
                           std::uint64_t seed);

// Echo area via the band-integration pipeline. Per quadrature: magnitude FFT
// of the central `window_s` segment, integral of |X(f)| df over
// [band_center +- band_width/2], minus the pedestal formed by the two
// adjacent bins of width bg_bin_width each, rescaled by
// band_width/(2*bg_bin_width). The per-quadrature areas are signed (pedestal
// subtraction makes them mean-zero under pure noise); `combined` is their
// quadrature sum sqrt(i^2+q^2), which is positive-definite by construction —
// statistical unbiasedness statements apply to the signed areas.
struct EchoArea {
  double combined;
  double i_area, q_area;        // signed, pedestal-subtracted
  double i_pedestal, q_pedestal;
};

EchoArea echo_area(const QuadratureTrace& trace, double window_s = 1.5e-6,
                   double band_center_hz = 200e6, double band_width_hz = 20e6,
                   double bg_bin_width_hz = 10e6);

// |DFT| magnitudes of the central window (bins 0..W/2), spacing
// sample_rate/W. Exposed for spectrum inspection and tests.
std::vector<double> window_spectrum(const std::vector<double>& samples,
                                    double sample_rate_hz, double window_s);

}  // namespace spectro
