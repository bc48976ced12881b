#pragma once

// Short-time Fourier transform, synchrosqueezing, band reconstruction along a
// frequency curve, and the frequency-mask bandpass baseline.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sift/error.hpp"
#include "sift/fft.hpp"
#include "sift/signal.hpp"

namespace sift {

/// Gaussian exp(-u^2/2) sampled at `length` equally spaced points of
/// u in [-support, support]. The time scale therefore follows from the
/// length and the sample rate: one unit of u spans (length-1)/(2 support)
/// samples.
struct WindowSpec {
  std::size_t length = 377;
  double support = 6.0;

  static WindowSpec standard() { return {377, 6.0}; }
  static WindowSpec tuned() { return {677, 6.0}; }

  void validate() const {
    if (length < 3 || length % 2 == 0) throw Error(ErrorKind::invalid_window, "window length must be odd and >= 3");
    if (!(support > 0.0)) throw Error(ErrorKind::invalid_window, "window support must be positive");
  }

  std::size_t half() const { return (length - 1) / 2; }
  double step() const { return 2.0 * support / static_cast<double>(length - 1); }

  /// h at sample offset k from the centre.
  double value(long long k) const {
    const double u = static_cast<double>(k) * step();
    return std::exp(-0.5 * u * u);
  }

  /// dh/dt (per second) at sample offset k.
  double derivative(long long k, double dt) const {
    const double u = static_cast<double>(k) * step();
    return -u * std::exp(-0.5 * u * u) * step() / dt;
  }

  double centre_value() const { return 1.0; }

  /// Standard deviation of the window in seconds.
  double time_spread(double dt) const { return dt / step(); }
};

struct SSTConfig {
  double delta_xi = 0.01;
  double magnitude_threshold = 1e-4;
  double max_frequency = 10.0;

  void validate() const {
    if (!(delta_xi > 0.0)) throw Error(ErrorKind::invalid_config, "delta_xi must be positive");
    if (!(magnitude_threshold >= 0.0 && magnitude_threshold < 1.0))
      throw Error(ErrorKind::invalid_config, "magnitude threshold must lie in [0, 1)");
    if (!(max_frequency >= 0.0)) throw Error(ErrorKind::invalid_config, "max frequency must be nonnegative");
  }

  std::size_t bins() const { return static_cast<std::size_t>(std::floor(max_frequency / delta_xi + 1e-9)) + 1; }
};

/// Complex time-frequency matrix: bins at q * delta_xi (q = 0..bins-1),
/// frames at t0 + m * dt. Stored frame-major.
class TFRGrid {
 public:
  TFRGrid(std::size_t bins, std::size_t frames, double delta_xi, double dt, double t0)
      : bins_(bins), frames_(frames), delta_xi_(delta_xi), dt_(dt), t0_(t0), values_(bins * frames) {
    if (bins == 0 || frames == 0) throw Error(ErrorKind::dimension_mismatch, "empty time-frequency grid");
    if (!(delta_xi > 0.0) || !(dt > 0.0)) throw Error(ErrorKind::invalid_config, "grid spacings must be positive");
  }

  std::size_t bins() const { return bins_; }
  std::size_t frames() const { return frames_; }
  double delta_xi() const { return delta_xi_; }
  double dt() const { return dt_; }
  double t0() const { return t0_; }
  double frequency(std::size_t bin) const { return static_cast<double>(bin) * delta_xi_; }
  double time(std::size_t frame) const { return t0_ + static_cast<double>(frame) * dt_; }

  complex& at(std::size_t bin, std::size_t frame) { return values_[frame * bins_ + bin]; }
  const complex& at(std::size_t bin, std::size_t frame) const { return values_[frame * bins_ + bin]; }

  std::span<complex> frame(std::size_t m) { return {values_.data() + m * bins_, bins_}; }
  std::span<const complex> frame(std::size_t m) const { return {values_.data() + m * bins_, bins_}; }
  std::span<const complex> values() const { return values_; }

  bool same_axes(const TFRGrid& o) const {
    return bins_ == o.bins_ && frames_ == o.frames_ && delta_xi_ == o.delta_xi_ && dt_ == o.dt_ && t0_ == o.t0_;
  }

  double max_magnitude() const {
    double m = 0.0;
    for (const auto& v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  double total_magnitude() const {
    double s = 0.0;
    for (const auto& v : values_) s += std::abs(v);
    return s;
  }

  TFRGrid& operator+=(const TFRGrid& o) {
    if (!same_axes(o)) throw Error(ErrorKind::dimension_mismatch, "time-frequency grids have different axes");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }

  bool operator==(const TFRGrid&) const = default;

 private:
  std::size_t bins_;
  std::size_t frames_;
  double delta_xi_;
  double dt_;
  double t0_;
  std::vector<complex> values_;
};

/// Per-frame frequency estimate on a TFR grid.
struct IFCurve {
  std::vector<std::size_t> bins;
  std::vector<double> frequencies;

  std::size_t size() const { return bins.size(); }

  static IFCurve from_bins(const TFRGrid& grid, std::vector<std::size_t> bins) {
    IFCurve c;
    c.frequencies.resize(bins.size());
    for (std::size_t m = 0; m < bins.size(); ++m) {
      if (bins[m] >= grid.bins()) throw Error(ErrorKind::invalid_curve, "curve bin outside the grid");
      c.frequencies[m] = grid.frequency(bins[m]);
    }
    c.bins = std::move(bins);
    return c;
  }

  /// Bins are the nearest grid bins; frequencies are kept as given.
  static IFCurve from_frequencies(const TFRGrid& grid, std::vector<double> hz) {
    IFCurve c;
    c.bins.resize(hz.size());
    for (std::size_t m = 0; m < hz.size(); ++m) {
      const double q = std::round(hz[m] / grid.delta_xi());
      if (!(q >= 0.0) || q >= static_cast<double>(grid.bins()))
        throw Error(ErrorKind::invalid_curve, "curve frequency outside the grid");
      c.bins[m] = static_cast<std::size_t>(q);
    }
    c.frequencies = std::move(hz);
    return c;
  }

  double mean_frequency() const {
    double s = 0.0;
    for (double f : frequencies) s += f;
    return frequencies.empty() ? 0.0 : s / static_cast<double>(frequencies.size());
  }
};

namespace detail {

/// Computes V_h and V_{h'} at one frame:
///   V(t_m, eta_q) = sum_j f(t_j) h(t_j - t_m) e^{-i 2 pi eta_q (t_j - t_m)} dt.
/// Taps outside the signal contribute zero. When fs / delta_xi is an integer
/// L, the sum over k is folded modulo L (exact, the kernel is L-periodic in k)
/// and evaluated with one length-L FFT; otherwise it is summed directly.
template <Sample T>
class FrameTransform {
 public:
  FrameTransform(const Signal<T>& signal, const WindowSpec& window, const SSTConfig& config)
      : signal_(signal), window_(window), bins_(config.bins()), delta_xi_(config.delta_xi) {
    const double dt = signal.dt();
    const auto half = static_cast<long long>(window.half());
    taps_h_.resize(window.length);
    taps_dh_.resize(window.length);
    for (long long k = -half; k <= half; ++k) {
      taps_h_[static_cast<std::size_t>(k + half)] = window.value(k) * dt;
      taps_dh_[static_cast<std::size_t>(k + half)] = window.derivative(k, dt) * dt;
    }
    const double ratio = signal.sample_rate() / config.delta_xi;
    const double rounded = std::round(ratio);
    if (rounded >= 1.0 && std::abs(ratio - rounded) <= 1e-9 * ratio && static_cast<std::size_t>(rounded) >= bins_) {
      plan_.emplace(static_cast<std::size_t>(rounded), FftPlan::Direction::forward);
    }
  }

  void compute(std::size_t m, std::span<complex> vh, std::span<complex> vdh) {
    if (plan_) {
      transform_fft(m, taps_h_, vh);
      transform_fft(m, taps_dh_, vdh);
    } else {
      transform_direct(m, taps_h_, vh);
      transform_direct(m, taps_dh_, vdh);
    }
  }

 private:
  void transform_fft(std::size_t m, const std::vector<double>& taps, std::span<complex> out) {
    auto in = plan_->input();
    std::fill(in.begin(), in.end(), complex{});
    const auto L = static_cast<long long>(plan_->size());
    const auto half = static_cast<long long>(window_.half());
    const auto n = static_cast<long long>(signal_.size());
    for (long long k = -half; k <= half; ++k) {
      const long long j = static_cast<long long>(m) + k;
      if (j < 0 || j >= n) continue;
      long long slot = k % L;
      if (slot < 0) slot += L;
      in[static_cast<std::size_t>(slot)] += complex(signal_[static_cast<std::size_t>(j)]) *
                                            taps[static_cast<std::size_t>(k + half)];
    }
    plan_->execute();
    auto res = plan_->output();
    std::copy_n(res.begin(), bins_, out.begin());
  }

  void transform_direct(std::size_t m, const std::vector<double>& taps, std::span<complex> out) {
    const auto half = static_cast<long long>(window_.half());
    const auto n = static_cast<long long>(signal_.size());
    const double dt = signal_.dt();
    for (std::size_t q = 0; q < bins_; ++q) {
      const double eta = static_cast<double>(q) * delta_xi_;
      complex acc{};
      for (long long k = -half; k <= half; ++k) {
        const long long j = static_cast<long long>(m) + k;
        if (j < 0 || j >= n) continue;
        const double angle = -2.0 * std::numbers::pi * eta * static_cast<double>(k) * dt;
        acc += complex(signal_[static_cast<std::size_t>(j)]) * taps[static_cast<std::size_t>(k + half)] *
               complex(std::cos(angle), std::sin(angle));
      }
      out[q] = acc;
    }
  }

  const Signal<T>& signal_;
  WindowSpec window_;
  std::size_t bins_;
  double delta_xi_;
  std::vector<double> taps_h_;
  std::vector<double> taps_dh_;
  std::optional<FftPlan> plan_;
};

template <Sample T>
void check_transform_inputs(const Signal<T>& signal, const WindowSpec& window, const SSTConfig& config) {
  window.validate();
  config.validate();
  if (window.length >= signal.size())
    throw Error(ErrorKind::invalid_window, "window is not shorter than the signal");
}

}  // namespace detail

template <Sample T>
TFRGrid stft(const Signal<T>& signal, const WindowSpec& window, const SSTConfig& config) {
  detail::check_transform_inputs(signal, window, config);
  TFRGrid grid(config.bins(), signal.size(), config.delta_xi, signal.dt(), signal.start_time());
  detail::FrameTransform<T> transform(signal, window, config);
  std::vector<complex> scratch(grid.bins());
  for (std::size_t m = 0; m < signal.size(); ++m) transform.compute(m, grid.frame(m), scratch);
  return grid;
}

struct SynchrosqueezeResult {
  TFRGrid stft;
  TFRGrid sst;
  double threshold = 0.0;  // absolute magnitude floor used for reassignment
};

/// STFT and its synchrosqueezed version. Each coefficient with
/// |V| > gamma * max|V| moves to the bin nearest
///   omega = eta - Im(V_{h'} / (2 pi V_h));
/// everything else, and anything landing outside the axis, is dropped.
template <Sample T>
SynchrosqueezeResult synchrosqueeze_with_stft(const Signal<T>& signal, const WindowSpec& window,
                                              const SSTConfig& config) {
  detail::check_transform_inputs(signal, window, config);
  const std::size_t bins = config.bins();
  TFRGrid vh(bins, signal.size(), config.delta_xi, signal.dt(), signal.start_time());
  std::vector<std::int32_t> target(bins * signal.size(), -1);
  detail::FrameTransform<T> transform(signal, window, config);
  std::vector<complex> vdh(bins);
  for (std::size_t m = 0; m < signal.size(); ++m) {
    auto frame = vh.frame(m);
    transform.compute(m, frame, vdh);
    for (std::size_t q = 0; q < bins; ++q) {
      if (frame[q] == complex{}) continue;
      const double eta = static_cast<double>(q) * config.delta_xi;
      const double omega = eta - (vdh[q] / (2.0 * std::numbers::pi * frame[q])).imag();
      const double idx = std::round(omega / config.delta_xi);
      if (idx >= 0.0 && idx < static_cast<double>(bins)) target[m * bins + q] = static_cast<std::int32_t>(idx);
    }
  }
  const double threshold = config.magnitude_threshold * vh.max_magnitude();
  TFRGrid sst(bins, signal.size(), config.delta_xi, signal.dt(), signal.start_time());
  for (std::size_t m = 0; m < signal.size(); ++m) {
    const auto frame = std::as_const(vh).frame(m);
    auto out = sst.frame(m);
    for (std::size_t q = 0; q < bins; ++q) {
      const auto to = target[m * bins + q];
      if (to < 0 || !(std::abs(frame[q]) > threshold)) continue;
      out[static_cast<std::size_t>(to)] += frame[q];
    }
  }
  return {std::move(vh), std::move(sst), threshold};
}

template <Sample T>
TFRGrid synchrosqueeze(const Signal<T>& signal, const WindowSpec& window, const SSTConfig& config) {
  return synchrosqueeze_with_stft(signal, window, config).sst;
}

struct BandReconstruction {
  ComplexSignal signal;
  std::size_t empty_frames = 0;  // frames whose band held no bin
};

/// (delta_xi / h(0)) * sum of SST bins within +-band_b of the curve, per frame.
inline BandReconstruction reconstruct_along_curve(const TFRGrid& sst, const IFCurve& curve, double band_b,
                                                  const WindowSpec& window) {
  if (!(band_b > 0.0)) throw Error(ErrorKind::invalid_band, "band half-width must be positive");
  if (curve.size() != sst.frames() || curve.frequencies.size() != sst.frames())
    throw Error(ErrorKind::invalid_curve, "curve length differs from the number of frames");
  const double scale = sst.delta_xi() / window.centre_value();
  const double top = sst.frequency(sst.bins() - 1);
  std::vector<complex> out(sst.frames());
  std::size_t empty = 0;
  const double slack = 1e-9 * sst.delta_xi();
  for (std::size_t m = 0; m < sst.frames(); ++m) {
    const double centre = curve.frequencies[m];
    if (curve.bins[m] >= sst.bins() || !(centre >= 0.0) || centre > top + sst.delta_xi())
      throw Error(ErrorKind::invalid_curve, "curve leaves the frequency axis");
    const double lo_f = std::max(0.0, centre - band_b);
    const double hi_f = centre + band_b;
    const auto lo = static_cast<std::size_t>(std::ceil((lo_f - slack) / sst.delta_xi()));
    const auto hi_raw = std::floor((hi_f + slack) / sst.delta_xi());
    const auto hi = static_cast<std::size_t>(std::min(hi_raw, static_cast<double>(sst.bins() - 1)));
    complex acc{};
    if (lo > hi) {
      ++empty;
    } else {
      const auto frame = sst.frame(m);
      for (std::size_t q = lo; q <= hi; ++q) acc += frame[q];
    }
    out[m] = acc * scale;
  }
  return {ComplexSignal(std::move(out), 1.0 / sst.dt(), sst.t0()), empty};
}

/// Zero-phase frequency-domain mask keeping |f| in [low, high].
template <Sample T>
Signal<T> bandpass_reconstruct(const Signal<T>& signal, double low, double high) {
  const double nyquist = signal.sample_rate() / 2.0;
  if (!(low >= 0.0) || !(high > low) || high > nyquist * (1.0 + 1e-12))
    throw Error(ErrorKind::invalid_band, "band must satisfy 0 <= low < high <= Nyquist");
  const std::size_t n = signal.size();
  detail::FftPlan fwd(n, detail::FftPlan::Direction::forward);
  detail::FftPlan inv(n, detail::FftPlan::Direction::backward);
  auto in = fwd.input();
  for (std::size_t j = 0; j < n; ++j) in[j] = complex(signal[j]);
  fwd.execute();
  auto spec = fwd.output();
  auto back = inv.input();
  const double df = signal.sample_rate() / static_cast<double>(n);
  const double slack = 1e-9 * df;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = (2 * k <= n ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n)) * df;
    const double af = std::abs(f);
    back[k] = (af >= low - slack && af <= high + slack) ? spec[k] : complex{};
  }
  inv.execute();
  auto res = inv.output();
  std::vector<T> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    if constexpr (is_complex_v<T>)
      out[j] = res[j] / static_cast<double>(n);
    else
      out[j] = res[j].real() / static_cast<double>(n);
  }
  return signal.with_samples(std::move(out));
}

}  // namespace sift
