#include "qsnn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qsnn/error.hpp"

namespace qsnn::analysis {
namespace {

using cd = std::complex<double>;

bool monotone_decay(std::span<const double> v) {
  const bool positive = v.front() > 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if ((v[i] > 0.0) != positive || v[i] == 0.0) return false;
    if (i > 0 && std::abs(v[i]) > std::abs(v[i - 1])) return false;
  }
  return true;
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_radix2(std::vector<cd>& x, bool inverse) {
  const std::size_t n = x.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw Error(Errc::invalid_argument, "fft_radix2: size must be a power of two");
  }
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        // Twiddles computed directly rather than by recurrence to keep round-off flat.
        const cd w = std::polar(1.0, ang * static_cast<double>(k));
        const cd u = x[i + k];
        const cd v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
      }
    }
  }
}

double uniform_step(std::span<const double> t) {
  if (t.size() < 2) throw Error(Errc::insufficient_data, "need at least 2 samples");
  const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  if (!(dt > 0.0)) throw Error(Errc::sampling, "sample times must be strictly increasing");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (std::abs((t[i] - t[i - 1]) - dt) > 1e-6 * dt) {
      throw Error(Errc::sampling, "non-uniform sampling at index " + std::to_string(i));
    }
  }
  return dt;
}

DecayFit t1_fit(std::span<const double> t, std::span<const double> v, const T1FitOptions& opt) {
  if (t.size() != v.size()) throw Error(Errc::shape, "t1_fit: t and v differ in length");
  if (v.empty()) throw Error(Errc::insufficient_peaks, "t1_fit: empty series");

  EnvelopeMode mode = opt.mode;
  if (mode == EnvelopeMode::automatic) {
    mode = monotone_decay(v) ? EnvelopeMode::all_samples : EnvelopeMode::local_maxima;
  }

  std::vector<double> px, py;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (!(a > opt.floor) || a == 0.0) continue;
    if (mode == EnvelopeMode::local_maxima) {
      const bool left = i == 0 || a >= std::abs(v[i - 1]);
      const bool right = i + 1 == v.size() || a > std::abs(v[i + 1]);
      if (!(left && right)) continue;
    }
    px.push_back(t[i]);
    py.push_back(std::log(a));
  }
  if (px.size() < 3) {
    throw Error(Errc::insufficient_peaks,
                "t1_fit: found " + std::to_string(px.size()) + " envelope peaks, need 3");
  }

  const double n = static_cast<double>(px.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < px.size(); ++i) {
    mx += px[i];
    my += py[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double dx = px[i] - mx;
    const double dy = py[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw Error(Errc::insufficient_peaks, "t1_fit: peaks share one time");
  const double slope = sxy / sxx;
  if (!(slope < 0.0)) throw Error(Errc::no_decay, "t1_fit: envelope does not decay");

  DecayFit fit;
  fit.t1 = -1.0 / slope;
  fit.intercept = my - slope * mx;
  fit.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  fit.peaks_used = px.size();
  return fit;
}

DelayEstimate estimate_delay(std::span<const double> a, std::span<const double> b, double dt) {
  if (a.size() != b.size()) throw Error(Errc::shape, "estimate_delay: lengths differ");
  if (a.size() < 2) throw Error(Errc::insufficient_data, "estimate_delay: need >= 2 samples");
  if (!(dt > 0.0)) throw Error(Errc::sampling, "estimate_delay: dt must be > 0");
  const std::size_t n = a.size();

  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  const double scale = std::sqrt(va * vb);
  if (!(scale > 0.0)) {
    throw Error(Errc::undefined_correlation, "estimate_delay: zero-variance input");
  }

  // c[L] = sum_i a0[i] b0[i + L]; negative lags wrap to the top of the buffer.
  const std::size_t m = next_pow2(2 * n);
  std::vector<cd> fa(m, 0.0), fb(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    fa[i] = a[i] - ma;
    fb[i] = b[i] - mb;
  }
  fft_radix2(fa);
  fft_radix2(fb);
  for (std::size_t k = 0; k < m; ++k) fa[k] = std::conj(fa[k]) * fb[k];
  fft_radix2(fa, true);
  auto corr = [&](long lag) {
    const std::size_t idx = lag >= 0 ? static_cast<std::size_t>(lag)
                                     : m - static_cast<std::size_t>(-lag);
    return fa[idx].real() / static_cast<double>(m) / scale;
  };

  DelayEstimate best{0.0, corr(0), 0};
  const double tie = 1e-12;
  const long max_lag = static_cast<long>(n) - 1;
  for (long k = 1; k <= max_lag; ++k) {
    for (long lag : {k, -k}) {
      const double c = corr(lag);
      if (std::abs(c) > std::abs(best.peak_corr) + tie) best = {0.0, c, lag};
    }
  }
  best.delay_s = static_cast<double>(best.lag) * dt;
  return best;
}

std::vector<SpectrumBin> spectrum(std::span<const double> t, std::span<const double> v,
                                  const SpectrumOptions& opt) {
  if (t.size() != v.size()) throw Error(Errc::shape, "spectrum: t and v differ in length");
  const double dt = uniform_step(t);
  const std::size_t n = v.size();
  const std::size_t m = next_pow2(n);

  std::vector<cd> x(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double w = 1.0;
    if (opt.hann && n > 1) {
      w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                               static_cast<double>(n - 1));
    }
    x[i] = w * v[i];
  }
  fft_radix2(x);

  const double norm = 1.0 / std::sqrt(static_cast<double>(m));
  std::vector<SpectrumBin> out;
  out.reserve(m / 2 + 1);
  for (std::size_t k = 0; k <= m / 2; ++k) {
    const bool edge = k == 0 || k == m / 2;
    const double mag = std::abs(x[k]) * norm * (edge ? 1.0 : std::numbers::sqrt2);
    out.push_back({static_cast<double>(k) / (static_cast<double>(m) * dt), mag});
  }
  return out;
}

}  // namespace qsnn::analysis
