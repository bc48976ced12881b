#pragma once

// Adaptive Local Iterative Filtering: the position-dependent Gaussian kernel,
// its moving-average operator L, the iterate (I - L)^K and the two-loop
// decomposition.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "sift/error.hpp"
#include "sift/signal.hpp"

namespace sift {

enum class BoundaryExtension { reflect, periodic, none };

/// Per-sample kernel scale sigma(t_j) in seconds.
class BandwidthProfile {
 public:
  BandwidthProfile(std::vector<double> sigma, double sample_rate)
      : sigma_(std::move(sigma)), sample_rate_(sample_rate) {
    if (sigma_.empty()) throw Error(ErrorKind::invalid_profile, "empty bandwidth profile");
    if (!(sample_rate_ > 0.0)) throw Error(ErrorKind::invalid_profile, "sample rate must be positive");
    for (std::size_t j = 0; j < sigma_.size(); ++j) {
      if (!(sigma_[j] > 0.0) || !std::isfinite(sigma_[j]))
        throw Error(ErrorKind::invalid_profile,
                    "sigma must be positive and finite (sample " + std::to_string(j) + ")");
    }
  }

  static BandwidthProfile constant(double sigma, std::size_t length, double sample_rate) {
    return BandwidthProfile(std::vector<double>(length, sigma), sample_rate);
  }

  std::size_t size() const { return sigma_.size(); }
  double operator[](std::size_t j) const { return sigma_[j]; }
  std::span<const double> values() const { return sigma_; }
  double sample_rate() const { return sample_rate_; }

 private:
  std::vector<double> sigma_;
  double sample_rate_;
};

struct ALIFConfig {
  double stop_tolerance = 1e-3;
  int max_inner_iterations = 200;
  int max_outer_components = 16;
  BoundaryExtension boundary_extension = BoundaryExtension::reflect;

  void validate() const {
    if (!(stop_tolerance > 0.0)) throw Error(ErrorKind::invalid_config, "stop tolerance must be positive");
    if (max_inner_iterations < 1 || max_outer_components < 1)
      throw Error(ErrorKind::invalid_config, "iteration caps must be at least 1");
  }
};

namespace detail {

/// Taps with exponent below -36 are dropped: |k| dt <= 6 sigma.
inline std::size_t kernel_half_width(double sigma, double dt) {
  return static_cast<std::size_t>(std::floor(6.0 * sigma / dt * (1.0 + 1e-12)));
}

/// Maps an index on the infinite line onto [0, n) for the given extension;
/// returns n when the tap falls off the grid (boundary "none").
inline std::size_t map_index(long long i, std::size_t n, BoundaryExtension mode) {
  const auto len = static_cast<long long>(n);
  if (i >= 0 && i < len) return static_cast<std::size_t>(i);
  switch (mode) {
    case BoundaryExtension::none:
      return n;
    case BoundaryExtension::periodic: {
      long long m = i % len;
      if (m < 0) m += len;
      return static_cast<std::size_t>(m);
    }
    case BoundaryExtension::reflect: {
      if (n == 1) return 0;
      const long long period = 2 * (len - 1);
      long long m = i % period;
      if (m < 0) m += period;
      if (m >= len) m = period - m;
      return static_cast<std::size_t>(m);
    }
  }
  return n;
}

}  // namespace detail

/// The discretised moving average (L f)_j = sum_x w_{j,x} f_x.
///
/// Row j holds exp(-(t_j - t_x)^2 / sigma_j^2) over |t_j - t_x| <= 6 sigma_j,
/// renormalised to sum to one, so constants are reproduced exactly on any
/// grid. Weights are generated by the recurrence q^{(k+1)^2} = q^{k^2} q^{2k+1}
/// instead of calling exp per tap.
class MovingAverageOperator {
 public:
  MovingAverageOperator(const BandwidthProfile& profile, BoundaryExtension mode)
      : n_(profile.size()), mode_(mode), half_width_(n_), decay_(n_), norm_(n_) {
    const double dt = 1.0 / profile.sample_rate();
    for (std::size_t j = 0; j < n_; ++j) {
      const double sigma = profile[j];
      half_width_[j] = detail::kernel_half_width(sigma, dt);
      decay_[j] = std::exp(-(dt * dt) / (sigma * sigma));
      max_half_width_ = std::max(max_half_width_, half_width_[j]);
    }
    for (std::size_t j = 0; j < n_; ++j) norm_[j] = row_sum(j);
  }

  std::size_t size() const { return n_; }
  std::size_t max_half_width() const { return max_half_width_; }

  template <Sample T>
  void apply(std::span<const T> in, std::span<T> out) const {
    if (in.size() != n_ || out.size() != n_)
      throw Error(ErrorKind::dimension_mismatch, "signal and bandwidth profile lengths differ");
    const std::size_t pad = max_half_width_;
    std::vector<T> ext(n_ + 2 * pad, T{});
    for (std::size_t i = 0; i < ext.size(); ++i) {
      const auto idx = detail::map_index(static_cast<long long>(i) - static_cast<long long>(pad), n_, mode_);
      if (idx < n_) ext[i] = in[idx];
    }
    for (std::size_t j = 0; j < n_; ++j) {
      const T* centre = ext.data() + pad + j;
      const double q = decay_[j];
      const double q2 = q * q;
      double w = 1.0;
      double ratio = q;
      T acc = centre[0];
      for (std::size_t k = 1; k <= half_width_[j]; ++k) {
        w *= ratio;
        ratio *= q2;
        const auto kk = static_cast<std::ptrdiff_t>(k);
        acc += w * (centre[kk] + centre[-kk]);
      }
      out[j] = acc / norm_[j];
    }
  }

  /// Dense row j folded onto the grid according to the boundary mode.
  std::vector<double> row(std::size_t j) const {
    if (j >= n_) throw Error(ErrorKind::invalid_profile, "kernel centre out of range");
    std::vector<double> weights(n_, 0.0);
    const double q = decay_[j];
    const double q2 = q * q;
    double w = 1.0;
    double ratio = q;
    weights[j] += 1.0 / norm_[j];
    for (std::size_t k = 1; k <= half_width_[j]; ++k) {
      w *= ratio;
      ratio *= q2;
      for (long long s : {static_cast<long long>(j + k), static_cast<long long>(j) - static_cast<long long>(k)}) {
        const auto idx = detail::map_index(s, n_, mode_);
        if (idx < n_) weights[idx] += w / norm_[j];
      }
    }
    return weights;
  }

 private:
  double row_sum(std::size_t j) const {
    const double q = decay_[j];
    const double q2 = q * q;
    double w = 1.0;
    double ratio = q;
    double sum = 1.0;
    for (std::size_t k = 1; k <= half_width_[j]; ++k) {
      w *= ratio;
      ratio *= q2;
      if (mode_ == BoundaryExtension::none) {
        if (j + k < n_) sum += w;
        if (k <= j) sum += w;
      } else {
        sum += 2.0 * w;
      }
    }
    return sum;
  }

  std::size_t n_;
  BoundaryExtension mode_;
  std::vector<std::size_t> half_width_;
  std::vector<double> decay_;
  std::vector<double> norm_;
  std::size_t max_half_width_ = 0;
};

/// Normalised kernel weights of row `center` over the grid.
inline std::vector<double> kernel_row(const BandwidthProfile& profile, std::size_t center,
                                      BoundaryExtension mode = BoundaryExtension::reflect) {
  if (center >= profile.size()) throw Error(ErrorKind::invalid_profile, "kernel centre out of range");
  return MovingAverageOperator(profile, mode).row(center);
}

template <Sample T>
void require_aligned(const Signal<T>& signal, const BandwidthProfile& profile) {
  if (signal.size() != profile.size())
    throw Error(ErrorKind::dimension_mismatch, "bandwidth profile is not aligned with the signal");
  if (std::abs(signal.sample_rate() - profile.sample_rate()) > 1e-12 * signal.sample_rate())
    throw Error(ErrorKind::dimension_mismatch, "bandwidth profile sample rate differs from the signal");
}

template <Sample T>
Signal<T> moving_average(const Signal<T>& signal, const BandwidthProfile& profile, const ALIFConfig& config) {
  require_aligned(signal, profile);
  const MovingAverageOperator op(profile, config.boundary_extension);
  std::vector<T> out(signal.size());
  op.apply<T>(signal.samples(), out);
  return signal.with_samples(std::move(out));
}

/// (I - L)^K applied to the signal.
template <Sample T>
Signal<T> iterate_operator(const Signal<T>& signal, const BandwidthProfile& profile, int K,
                           const ALIFConfig& config) {
  require_aligned(signal, profile);
  if (K < 0) throw Error(ErrorKind::invalid_config, "iteration count must be nonnegative");
  const MovingAverageOperator op(profile, config.boundary_extension);
  std::vector<T> f(signal.values());
  std::vector<T> avg(f.size());
  for (int k = 0; k < K; ++k) {
    op.apply<T>(f, avg);
    for (std::size_t j = 0; j < f.size(); ++j) f[j] -= avg[j];
  }
  return signal.with_samples(std::move(f));
}

/// Predicted gain (1 - exp(-pi^2 (phi'/varphi')^2))^K of (I - L_{1/varphi'})^K
/// on a component with instantaneous frequency phi'.
inline double theoretical_attenuation(double phi_prime, double varphi_prime, int K) {
  if (!(varphi_prime > 0.0)) throw Error(ErrorKind::invalid_config, "reference frequency must be positive");
  const double ratio = phi_prime / varphi_prime;
  const double step = 1.0 - std::exp(-std::numbers::pi * std::numbers::pi * ratio * ratio);
  return std::pow(step, K);
}

template <Sample T>
struct InnerLoopResult {
  Signal<T> imt;
  int iterations = 0;
  bool converged = false;
};

/// Sifting: f_{m+1} = f_m - L f_m until ||f_{m+1} - f_m|| / ||f_m|| < tolerance
/// or the iteration cap.
template <Sample T>
InnerLoopResult<T> alif_inner_loop(const Signal<T>& signal, const BandwidthProfile& profile,
                                   const ALIFConfig& config) {
  config.validate();
  require_aligned(signal, profile);
  const MovingAverageOperator op(profile, config.boundary_extension);
  std::vector<T> f(signal.values());
  std::vector<T> avg(f.size());
  int m = 0;
  bool converged = false;
  while (m < config.max_inner_iterations) {
    const double before = l2_norm<T>(f);
    op.apply<T>(f, avg);
    for (std::size_t j = 0; j < f.size(); ++j) f[j] -= avg[j];
    ++m;
    const double change = l2_norm<T>(avg);
    if (before == 0.0 || change < config.stop_tolerance * before) {
      converged = true;
      break;
    }
  }
  return {signal.with_samples(std::move(f)), m, converged};
}

template <Sample T>
struct Decomposition {
  std::vector<Signal<T>> imts;
  Signal<T> trend;
  std::vector<int> iterations_used;
  bool complete = true;
  std::string failure;

  Signal<T> reconstruct() const {
    Signal<T> sum = trend;
    for (const auto& imt : imts) sum = sum + imt;
    return sum;
  }
};

template <Sample T>
using ProfileProvider = std::function<std::optional<BandwidthProfile>(const Signal<T>&)>;

/// Outer loop: peel IMTs off the remainder while it has at least two extrema.
/// A provider that throws or returns nothing stops the loop and marks the
/// decomposition incomplete; what was extracted so far is kept.
template <Sample T>
Decomposition<T> alif_decompose(const Signal<T>& signal, const ProfileProvider<T>& provider,
                                const ALIFConfig& config) {
  config.validate();
  Decomposition<T> out{{}, signal, {}, true, {}};
  Signal<T> r = signal;
  while (count_extrema(r) >= 2 && static_cast<int>(out.imts.size()) < config.max_outer_components) {
    std::optional<BandwidthProfile> profile;
    try {
      profile = provider(r);
    } catch (const Error& e) {
      out.complete = false;
      out.failure = e.what();
      break;
    }
    if (!profile) {
      out.complete = false;
      out.failure = "profile provider returned no profile";
      break;
    }
    auto inner = alif_inner_loop(r, *profile, config);
    r = r - inner.imt;
    out.imts.push_back(std::move(inner.imt));
    out.iterations_used.push_back(inner.iterations);
  }
  out.trend = r;
  return out;
}

}  // namespace sift
