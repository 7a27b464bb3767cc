#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qsnn::analysis {

struct DecayFit {
  double t1 = 0.0;
  double intercept = 0.0;  // ln-amplitude at t = 0
  double r_squared = 0.0;
  std::size_t peaks_used = 0;
};

enum class EnvelopeMode {
  automatic,     // all samples for a monotone one-signed decay, otherwise local maxima
  local_maxima,  // local maxima of |v|
  all_samples,
};

struct T1FitOptions {
  double floor = 0.0;  // peaks with |v| <= floor are ignored
  EnvelopeMode mode = EnvelopeMode::automatic;
};

/// Least-squares line through (t_peak, ln|v_peak|); t1 = -1 / slope.
DecayFit t1_fit(std::span<const double> t, std::span<const double> v,
                const T1FitOptions& opt = {});

struct DelayEstimate {
  double delay_s = 0.0;
  double peak_corr = 0.0;  // signed normalized correlation at the chosen lag
  long lag = 0;            // positive when b lags a
};

/// Lag of the largest |normalized cross-correlation| between two equally
/// sampled series; ties go to the smallest |lag|.
DelayEstimate estimate_delay(std::span<const double> a, std::span<const double> b, double dt);

struct SpectrumBin {
  double freq_hz;
  double magnitude;
};

struct SpectrumOptions {
  bool hann = false;
};

/// Single-sided magnitude spectrum after zero-padding to the next power of two.
/// Magnitudes are scaled so that sum(magnitude^2) equals sum(v^2) of the
/// (windowed) input.
std::vector<SpectrumBin> spectrum(std::span<const double> t, std::span<const double> v,
                                  const SpectrumOptions& opt = {});

/// In-place iterative radix-2 FFT; size must be a power of two. The inverse is
/// unnormalized.
void fft_radix2(std::vector<std::complex<double>>& x, bool inverse = false);

std::size_t next_pow2(std::size_t n);

/// Sample spacing of `t`; throws a sampling error when spacing is not uniform.
double uniform_step(std::span<const double> t);

}  // namespace qsnn::analysis
