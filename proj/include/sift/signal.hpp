#pragma once

// Core signal types, synthetic IMT/AHM generation, seeded noise and error
// metrics shared by the rest of the library.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "sift/error.hpp"

namespace sift {

using complex = std::complex<double>;

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};
template <typename T>
inline constexpr bool is_complex_v = is_complex<T>::value;

template <typename T>
concept Sample = std::is_same_v<T, double> || std::is_same_v<T, complex>;

inline double abs2(double x) { return x * x; }
inline double abs2(const complex& z) { return std::norm(z); }

inline double real_part(double x) { return x; }
inline double real_part(const complex& z) { return z.real(); }

/// Uniform time grid: t_j = start_time + j / sample_rate.
struct SampleGrid {
  double sample_rate = 100.0;
  double start_time = 0.0;
  std::size_t length = 0;

  double dt() const { return 1.0 / sample_rate; }
  double time(std::size_t j) const { return start_time + static_cast<double>(j) / sample_rate; }
  double duration() const { return static_cast<double>(length) / sample_rate; }

  static SampleGrid over(double duration_seconds, double sample_rate = 100.0, double start = 0.0) {
    const auto n = static_cast<std::size_t>(std::llround(duration_seconds * sample_rate));
    return SampleGrid{sample_rate, start, n};
  }
};

/// Uniformly sampled real or complex series. Immutable after construction.
template <Sample T>
class Signal {
 public:
  using value_type = T;

  Signal(std::vector<T> samples, double sample_rate, double start_time = 0.0)
      : samples_(std::move(samples)), sample_rate_(sample_rate), start_time_(start_time) {
    if (samples_.empty()) throw Error(ErrorKind::invalid_signal, "signal has no samples");
    if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_))
      throw Error(ErrorKind::invalid_signal, "sample rate must be positive and finite");
    if (!std::isfinite(start_time_)) throw Error(ErrorKind::invalid_signal, "start time must be finite");
  }

  Signal(std::vector<T> samples, const SampleGrid& grid)
      : Signal(std::move(samples), grid.sample_rate, grid.start_time) {}

  std::span<const T> samples() const { return samples_; }
  const std::vector<T>& values() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  const T& operator[](std::size_t j) const { return samples_[j]; }

  double sample_rate() const { return sample_rate_; }
  double start_time() const { return start_time_; }
  double dt() const { return 1.0 / sample_rate_; }
  double time(std::size_t j) const { return start_time_ + static_cast<double>(j) / sample_rate_; }
  SampleGrid grid() const { return SampleGrid{sample_rate_, start_time_, samples_.size()}; }

  /// Same grid, new samples.
  Signal with_samples(std::vector<T> samples) const {
    if (samples.size() != samples_.size())
      throw Error(ErrorKind::dimension_mismatch, "replacement samples have a different length");
    return Signal(std::move(samples), sample_rate_, start_time_);
  }

  bool operator==(const Signal&) const = default;

 private:
  std::vector<T> samples_;
  double sample_rate_;
  double start_time_;
};

using RealSignal = Signal<double>;
using ComplexSignal = Signal<complex>;

template <Sample T>
void require_same_grid(const Signal<T>& a, const Signal<T>& b, const char* what) {
  if (a.size() != b.size() || a.sample_rate() != b.sample_rate())
    throw Error(ErrorKind::dimension_mismatch, what);
}

template <Sample T>
Signal<T> operator+(const Signal<T>& a, const Signal<T>& b) {
  require_same_grid(a, b, "cannot add signals on different grids");
  std::vector<T> out(a.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = a[j] + b[j];
  return a.with_samples(std::move(out));
}

template <Sample T>
Signal<T> operator-(const Signal<T>& a, const Signal<T>& b) {
  require_same_grid(a, b, "cannot subtract signals on different grids");
  std::vector<T> out(a.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = a[j] - b[j];
  return a.with_samples(std::move(out));
}

template <Sample T>
Signal<T> scaled(const Signal<T>& s, double alpha) {
  std::vector<T> out(s.values());
  for (auto& v : out) v *= alpha;
  return s.with_samples(std::move(out));
}

inline RealSignal real(const ComplexSignal& s) {
  std::vector<double> out(s.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = s[j].real();
  return RealSignal(std::move(out), s.sample_rate(), s.start_time());
}

template <Sample T>
double l2_norm(std::span<const T> x) {
  double acc = 0.0;
  for (const auto& v : x) acc += abs2(v);
  return std::sqrt(acc);
}

template <Sample T>
double l2_norm(const Signal<T>& s) {
  return l2_norm<T>(s.samples());
}

// ---------------------------------------------------------------------------
// Synthetic IMT / AHM models

/// A(t) e^{i 2 pi phi(t)} with A > 0 and phi strictly increasing.
///
/// `frequency` (phi') is optional; when absent it is recovered from `phase`
/// by central differences. `epsilon` and `phase_second_derivative_bound` are
/// only used by the growth-condition check.
struct IMTSpec {
  std::function<double(double)> amplitude;
  std::function<double(double)> phase;
  std::function<double(double)> frequency;
  double epsilon = 0.0;
  double phase_second_derivative_bound = 0.0;

  double instantaneous_frequency(double t, double h = 1e-4) const {
    if (frequency) return frequency(t);
    return (phase(t + h) - phase(t - h)) / (2.0 * h);
  }

  static IMTSpec tone(double frequency_hz, double amplitude = 1.0, double phase0 = 0.0) {
    IMTSpec spec;
    spec.amplitude = [amplitude](double) { return amplitude; };
    spec.phase = [frequency_hz, phase0](double t) { return frequency_hz * t + phase0; };
    spec.frequency = [frequency_hz](double) { return frequency_hz; };
    return spec;
  }
};

struct AHMSpec {
  std::vector<IMTSpec> components;
  double separation = 0.0;  // d, Hz
};

/// Boundedness check on the grid: A > 0 and phi' > 0 at every sample.
inline void validate(const IMTSpec& spec, const SampleGrid& grid) {
  if (!spec.amplitude || !spec.phase) throw Error(ErrorKind::invalid_spec, "IMT needs amplitude and phase");
  if (grid.length == 0 || !(grid.sample_rate > 0.0)) throw Error(ErrorKind::invalid_spec, "empty grid");
  for (std::size_t j = 0; j < grid.length; ++j) {
    const double t = grid.time(j);
    const double a = spec.amplitude(t);
    if (!(a > 0.0) || !std::isfinite(a))
      throw Error(ErrorKind::invalid_spec, "amplitude must be positive at t=" + std::to_string(t));
    const double f = spec.instantaneous_frequency(t);
    if (!(f > 0.0) || !std::isfinite(f))
      throw Error(ErrorKind::invalid_spec, "phase must be strictly increasing at t=" + std::to_string(t));
  }
}

/// Separation condition phi'_{l+1} - phi'_l >= d between adjacent components
/// (components ordered by increasing frequency).
inline void validate(const AHMSpec& spec, const SampleGrid& grid) {
  if (spec.components.empty()) throw Error(ErrorKind::invalid_spec, "AHM has no components");
  for (const auto& c : spec.components) validate(c, grid);
  if (spec.separation < 0.0) throw Error(ErrorKind::invalid_spec, "separation must be nonnegative");
  for (std::size_t l = 0; l + 1 < spec.components.size(); ++l) {
    for (std::size_t j = 0; j < grid.length; ++j) {
      const double t = grid.time(j);
      const double gap = spec.components[l + 1].instantaneous_frequency(t) -
                         spec.components[l].instantaneous_frequency(t);
      if (gap < spec.separation)
        throw Error(ErrorKind::invalid_spec, "separation condition violated at t=" + std::to_string(t));
    }
  }
}

/// Finite-difference check of |A'| <= eps phi' and |phi''| <= eps phi'.
inline bool satisfies_growth_conditions(const IMTSpec& spec, const SampleGrid& grid) {
  const double h = grid.dt();
  const double slack = 1e-9;
  for (std::size_t j = 0; j < grid.length; ++j) {
    const double t = grid.time(j);
    const double f = spec.instantaneous_frequency(t);
    const double da = (spec.amplitude(t + h) - spec.amplitude(t - h)) / (2.0 * h);
    const double ddphi = (spec.phase(t + h) - 2.0 * spec.phase(t) + spec.phase(t - h)) / (h * h);
    const double bound = spec.epsilon * f + slack * std::max(1.0, f);
    if (std::abs(da) > bound || std::abs(ddphi) > bound) return false;
  }
  return true;
}

inline ComplexSignal synthesize(const IMTSpec& spec, const SampleGrid& grid) {
  validate(spec, grid);
  std::vector<complex> out(grid.length);
  for (std::size_t j = 0; j < grid.length; ++j) {
    const double t = grid.time(j);
    out[j] = std::polar(spec.amplitude(t), 2.0 * std::numbers::pi * spec.phase(t));
  }
  return ComplexSignal(std::move(out), grid);
}

inline ComplexSignal synthesize(const AHMSpec& spec, const SampleGrid& grid) {
  validate(spec, grid);
  std::vector<complex> out(grid.length, complex{});
  for (const auto& c : spec.components) {
    for (std::size_t j = 0; j < grid.length; ++j) {
      const double t = grid.time(j);
      out[j] += std::polar(c.amplitude(t), 2.0 * std::numbers::pi * c.phase(t));
    }
  }
  return ComplexSignal(std::move(out), grid);
}

/// Real projection A(t) cos(2 pi phi(t)).
template <typename Spec>
RealSignal synthesize_real(const Spec& spec, const SampleGrid& grid) {
  return real(synthesize(spec, grid));
}

// ---------------------------------------------------------------------------
// Noise

struct NoiseSpec {
  double standard_deviation = 0.0;
  std::uint64_t seed = 0;
};

/// Standard normal draws from mt19937_64 through Box-Muller.
///
/// Both the engine and the uniform mapping (top 53 bits) are fully specified,
/// so a seed yields the same sequence on every conforming platform.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Returns (noisy, noise). Complex signals get circular noise with the same
/// total variance.
template <Sample T>
std::pair<Signal<T>, Signal<T>> add_noise(const Signal<T>& signal, const NoiseSpec& noise) {
  if (!(noise.standard_deviation >= 0.0) || !std::isfinite(noise.standard_deviation))
    throw Error(ErrorKind::invalid_spec, "noise standard deviation must be nonnegative");
  GaussianSource draw(noise.seed);
  std::vector<T> n(signal.size());
  std::vector<T> noisy(signal.size());
  for (std::size_t j = 0; j < n.size(); ++j) {
    if constexpr (is_complex_v<T>) {
      const double s = noise.standard_deviation / std::numbers::sqrt2;
      const double re = draw();
      const double im = draw();
      n[j] = T{s * re, s * im};
    } else {
      n[j] = noise.standard_deviation * draw();
    }
    noisy[j] = signal[j] + n[j];
  }
  return {signal.with_samples(std::move(noisy)), signal.with_samples(std::move(n))};
}

/// 20 log10(||signal|| / ||noise||).
template <Sample T>
double snr_db(const Signal<T>& signal, const Signal<T>& noise) {
  require_same_grid(signal, noise, "signal and noise lengths differ");
  const double ns = l2_norm(noise);
  if (!(ns > 0.0)) throw Error(ErrorKind::undefined_snr, "noise has zero norm");
  return 20.0 * std::log10(l2_norm(signal) / ns);
}

/// Noise standard deviation that puts white noise at `target_db` below the
/// signal (in expectation).
template <Sample T>
double noise_level_for_snr(const Signal<T>& signal, double target_db) {
  const double rms = l2_norm(signal) / std::sqrt(static_cast<double>(signal.size()));
  return rms / std::pow(10.0, target_db / 20.0);
}

// ---------------------------------------------------------------------------
// Extrema and errors

/// Strict interior extrema. A maximal run of equal values counts as one
/// extremum when both neighbours are strictly on the same side of it.
inline std::size_t count_extrema(std::span<const double> x) {
  std::vector<double> runs;
  runs.reserve(x.size());
  for (double v : x)
    if (runs.empty() || v != runs.back()) runs.push_back(v);
  std::size_t count = 0;
  for (std::size_t i = 1; i + 1 < runs.size(); ++i) {
    const bool is_max = runs[i] > runs[i - 1] && runs[i] > runs[i + 1];
    const bool is_min = runs[i] < runs[i - 1] && runs[i] < runs[i + 1];
    if (is_max || is_min) ++count;
  }
  return count;
}

inline std::size_t count_extrema(const RealSignal& s) { return count_extrema(s.samples()); }

/// Complex signals are judged on their real part.
inline std::size_t count_extrema(const ComplexSignal& s) { return count_extrema(real(s)); }

/// Index range left after trimming `trim_seconds` from both ends.
inline std::pair<std::size_t, std::size_t> trimmed_range(std::size_t length, double sample_rate,
                                                          double trim_seconds) {
  if (trim_seconds < 0.0) throw Error(ErrorKind::invalid_spec, "trim must be nonnegative");
  const auto cut = static_cast<std::size_t>(std::llround(trim_seconds * sample_rate));
  if (2 * cut >= length) throw Error(ErrorKind::invalid_spec, "trim removes the whole signal");
  return {cut, length - cut};
}

/// ||estimate - truth|| / ||truth|| over the trimmed interior.
template <Sample T>
double relative_error_l2(const Signal<T>& estimate, const Signal<T>& truth, double trim_seconds) {
  require_same_grid(estimate, truth, "estimate and truth grids differ");
  const auto [lo, hi] = trimmed_range(truth.size(), truth.sample_rate(), trim_seconds);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = lo; j < hi; ++j) {
    num += abs2(estimate[j] - truth[j]);
    den += abs2(truth[j]);
  }
  if (!(den > 0.0)) throw Error(ErrorKind::undefined_error, "truth is zero on the trimmed window");
  return std::sqrt(num / den);
}

}  // namespace sift
