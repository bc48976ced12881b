#pragma once

// Regularity-penalised ridge extraction on a time-frequency grid:
//
//   c* = argmax_c  sum_m log(|S(c(m), m)| / sum|S|)  -  lambda sum_m |c(m) - c(m-1)|^2
//
// solved exactly by dynamic programming over frames.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "sift/error.hpp"
#include "sift/tfr.hpp"

namespace sift {

struct ExtractionConfig {
  double lambda = 1.0;                // per squared bin jump
  std::optional<IFCurve> prior;       // search only near this curve
  double prior_halfwidth = 0.5;       // Hz
  double magnitude_floor = 1e-12;     // relative to the grid maximum
  std::size_t max_jump = 0;           // bins per frame; 0 disables pruning

  void validate() const {
    if (!(lambda >= 0.0)) throw Error(ErrorKind::invalid_config, "lambda must be nonnegative");
    if (prior && !(prior_halfwidth > 0.0))
      throw Error(ErrorKind::invalid_config, "prior half-width must be positive");
    if (!(magnitude_floor > 0.0)) throw Error(ErrorKind::invalid_config, "magnitude floor must be positive");
  }
};

namespace detail {

inline constexpr double minus_inf = -std::numeric_limits<double>::infinity();

/// Inclusive bin range admitted by the prior at frame m (whole axis without one).
inline std::pair<std::size_t, std::size_t> admissible_bins(const TFRGrid& tfr, const ExtractionConfig& config,
                                                           std::size_t m) {
  if (!config.prior) return {0, tfr.bins() - 1};
  const double centre = config.prior->frequencies[m];
  const double slack = 1e-9 * tfr.delta_xi();
  const double lo_f = std::max(0.0, centre - config.prior_halfwidth);
  const double hi_f = centre + config.prior_halfwidth;
  const double lo = std::ceil((lo_f - slack) / tfr.delta_xi());
  const double hi = std::min(std::floor((hi_f + slack) / tfr.delta_xi()), static_cast<double>(tfr.bins() - 1));
  if (lo > hi) throw Error(ErrorKind::invalid_curve, "prior band holds no bins at some frame");
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

inline void check_prior(const TFRGrid& tfr, const ExtractionConfig& config) {
  if (config.prior && config.prior->frequencies.size() != tfr.frames())
    throw Error(ErrorKind::invalid_curve, "prior length differs from the number of frames");
}

/// out[i] = argmax_j prev[j] - lambda (i - j)^2 over finite prev[j], ties to
/// the lower j. Lower envelope of parabolas (Felzenszwalb-Huttenlocher),
/// linear in the number of bins.
inline void best_predecessor_quadratic(const std::vector<double>& prev, double lambda,
                                       std::vector<std::size_t>& out) {
  const std::size_t n = prev.size();
  std::vector<std::size_t> v;
  std::vector<double> z;
  v.reserve(n);
  z.reserve(n + 1);
  auto height = [&](std::size_t j) {
    const double x = static_cast<double>(j);
    return -prev[j] / lambda + x * x;
  };
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(prev[j])) continue;
    if (v.empty()) {
      v.push_back(j);
      z.push_back(-std::numeric_limits<double>::infinity());
      continue;
    }
    double s = 0.0;
    while (true) {
      const std::size_t top = v.back();
      s = (height(j) - height(top)) / (2.0 * static_cast<double>(j) - 2.0 * static_cast<double>(top));
      if (s <= z.back() && v.size() > 1) {
        v.pop_back();
        z.pop_back();
        continue;
      }
      break;
    }
    v.push_back(j);
    z.push_back(s);
  }
  if (v.empty()) throw Error(ErrorKind::no_curve, "no admissible bins in the previous frame");
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i);
    while (k + 1 < v.size() && z[k + 1] < x) ++k;
    out[i] = v[k];
  }
}

inline void best_predecessor_window(const std::vector<double>& prev, double lambda, std::size_t max_jump,
                                    std::vector<std::size_t>& out) {
  const std::size_t n = prev.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= max_jump ? i - max_jump : 0;
    const std::size_t hi = std::min(n - 1, i + max_jump);
    double best = minus_inf;
    std::size_t arg = n;
    for (std::size_t j = lo; j <= hi; ++j) {
      if (!std::isfinite(prev[j])) continue;
      const double d = static_cast<double>(i) - static_cast<double>(j);
      const double val = prev[j] - lambda * d * d;
      if (arg == n || val > best) {
        best = val;
        arg = j;
      }
    }
    out[i] = arg;
  }
}

}  // namespace detail

/// Full objective of a curve, including the normalisation by the total
/// magnitude. Returns -inf for a curve outside the admissible set.
inline double curve_objective(const TFRGrid& tfr, const IFCurve& curve, const ExtractionConfig& config) {
  config.validate();
  detail::check_prior(tfr, config);
  if (curve.size() != tfr.frames()) throw Error(ErrorKind::invalid_curve, "curve length differs from frames");
  const double floor = config.magnitude_floor * tfr.max_magnitude();
  const double log_total = std::log(tfr.total_magnitude());
  double value = 0.0;
  for (std::size_t m = 0; m < tfr.frames(); ++m) {
    const auto [lo, hi] = detail::admissible_bins(tfr, config, m);
    const std::size_t c = curve.bins[m];
    if (c < lo || c > hi) return detail::minus_inf;
    value += std::log(std::abs(tfr.at(c, m)) + floor) - log_total;
    if (m > 0) {
      const double jump = static_cast<double>(c) - static_cast<double>(curve.bins[m - 1]);
      if (config.max_jump > 0 && std::abs(jump) > static_cast<double>(config.max_jump)) return detail::minus_inf;
      value -= config.lambda * jump * jump;
    }
  }
  return value;
}

/// Exact maximiser of the ridge objective. The normalising constant is
/// dropped from the recursion since it shifts every curve equally.
inline IFCurve extract_curve(const TFRGrid& tfr, const ExtractionConfig& config) {
  config.validate();
  detail::check_prior(tfr, config);
  const double peak = tfr.max_magnitude();
  if (!(peak > 0.0)) throw Error(ErrorKind::no_curve, "time-frequency grid is identically zero");
  const double floor = config.magnitude_floor * peak;
  const std::size_t n = tfr.bins();
  const std::size_t frames = tfr.frames();

  auto scores = [&](std::size_t m, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), detail::minus_inf);
    const auto [lo, hi] = detail::admissible_bins(tfr, config, m);
    const auto frame = tfr.frame(m);
    for (std::size_t q = lo; q <= hi; ++q) out[q] = std::log(std::abs(frame[q]) + floor);
  };

  std::vector<double> value(n);
  std::vector<double> next(n);
  std::vector<double> local(n);
  std::vector<std::size_t> pred(n);
  std::vector<std::uint32_t> back(frames * n);
  scores(0, value);
  const bool windowed = config.max_jump > 0 && config.max_jump < n;
  for (std::size_t m = 1; m < frames; ++m) {
    if (windowed) {
      detail::best_predecessor_window(value, config.lambda, config.max_jump, pred);
    } else if (config.lambda == 0.0) {
      std::size_t arg = n;
      for (std::size_t j = 0; j < n; ++j)
        if (std::isfinite(value[j]) && (arg == n || value[j] > value[arg])) arg = j;
      if (arg == n) throw Error(ErrorKind::no_curve, "no admissible path");
      std::fill(pred.begin(), pred.end(), arg);
    } else {
      detail::best_predecessor_quadratic(value, config.lambda, pred);
    }
    scores(m, local);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = pred[i];
      if (j == n || !std::isfinite(local[i])) {
        next[i] = detail::minus_inf;
        back[m * n + i] = static_cast<std::uint32_t>(n);
        continue;
      }
      const double d = static_cast<double>(i) - static_cast<double>(j);
      next[i] = local[i] + value[j] - config.lambda * d * d;
      back[m * n + i] = static_cast<std::uint32_t>(j);
    }
    std::swap(value, next);
  }
  std::size_t best = n;
  for (std::size_t i = 0; i < n; ++i)
    if (std::isfinite(value[i]) && (best == n || value[i] > value[best])) best = i;
  if (best == n) throw Error(ErrorKind::no_curve, "no admissible path through the grid");
  std::vector<std::size_t> bins(frames);
  bins[frames - 1] = best;
  for (std::size_t m = frames - 1; m > 0; --m) bins[m - 1] = back[m * n + bins[m]];
  return IFCurve::from_bins(tfr, std::move(bins));
}

}  // namespace sift
