#pragma once

// Synchrosqueezing-guided iterative filtering: SST of the remainder, ridge of
// the highest-frequency meaningful component, ALIF extraction with a
// bandwidth profile built from that ridge, subtract, repeat.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sift/alif.hpp"
#include "sift/curve.hpp"
#include "sift/error.hpp"
#include "sift/signal.hpp"
#include "sift/tfr.hpp"

namespace sift {

enum class OscillationTest { extrema_count, ridge_energy, component_cap };

/// Content above a component's ridge is stripped before the component is
/// sifted: (I - L)^iterations with sigma = xi / (ratio * f(t)). It is kept in
/// the residual so the decomposition still sums to the input.
struct GuardConfig {
  bool enabled = true;
  double ratio = 3.0;
  double xi = 0.9;
  int iterations = 10;
};

struct SIFTConfig {
  SSTConfig sst;
  WindowSpec window = WindowSpec::standard();
  ExtractionConfig extraction;
  ALIFConfig alif;
  double xi = 1.4;
  int max_components = 8;
  OscillationTest oscillation_test = OscillationTest::ridge_energy;
  /// Optional per-sample frequency priors (Hz), highest component first.
  std::vector<std::vector<double>> priors;
  double meaningful_ratio = 30.0;  // noise ridges at 100 Hz score about 13-21
  double median_width = 0.5;   // seconds
  double min_frequency = 0.05; // Hz
  double min_remainder = 0.05;  // stop once |r| < min_remainder * |input|; 0 disables
  GuardConfig guard;

  void validate() const {
    if (!(xi > 0.0)) throw Error(ErrorKind::invalid_config, "xi must be positive");
    if (max_components < 1) throw Error(ErrorKind::invalid_config, "component cap must be at least 1");
    if (!(min_frequency > 0.0)) throw Error(ErrorKind::invalid_config, "minimum frequency must be positive");
    if (!(min_remainder >= 0.0 && min_remainder < 1.0))
      throw Error(ErrorKind::invalid_config, "minimum remainder must lie in [0, 1)");
    if (guard.enabled && (!(guard.ratio > 1.0) || !(guard.xi > 0.0) || guard.iterations < 0))
      throw Error(ErrorKind::invalid_config, "guard needs ratio > 1, xi > 0 and iterations >= 0");
    sst.validate();
    window.validate();
    extraction.validate();
    alif.validate();
  }
};

struct ComponentDiagnostics {
  int inner_iterations = 0;
  bool converged = false;
  double mean_frequency = 0.0;
};

template <Sample T>
struct SIFTResult {
  std::vector<Signal<T>> imts;  // highest frequency first
  Signal<T> residual;           // final remainder plus guard content
  Signal<T> guard_content;
  std::vector<IFCurve> curves;
  std::vector<ComponentDiagnostics> diagnostics;
  bool complete = true;
  std::string note;

  Signal<T> reconstruct() const {
    Signal<T> sum = residual;
    for (const auto& imt : imts) sum = sum + imt;
    return sum;
  }
};

/// sigma(t_j) = xi / f(t_j).
inline BandwidthProfile profile_from_frequencies(std::span<const double> hz, double xi, double sample_rate) {
  if (!(xi > 0.0)) throw Error(ErrorKind::invalid_config, "xi must be positive");
  std::vector<double> sigma(hz.size());
  for (std::size_t j = 0; j < hz.size(); ++j) {
    if (!(hz[j] > 0.0) || !std::isfinite(hz[j]))
      throw Error(ErrorKind::invalid_curve, "curve frequency must be positive (sample " + std::to_string(j) + ")");
    sigma[j] = xi / hz[j];
  }
  return BandwidthProfile(std::move(sigma), sample_rate);
}

inline BandwidthProfile profile_from_curve(const IFCurve& curve, double xi, double sample_rate) {
  return profile_from_frequencies(curve.frequencies, xi, sample_rate);
}

/// Running median over `width` samples (odd, clipped at the ends).
inline std::vector<double> moving_median(std::span<const double> x, std::size_t width) {
  if (width <= 1 || x.empty()) return {x.begin(), x.end()};
  const std::size_t half = width / 2;
  std::vector<double> out(x.size());
  std::vector<double> buf;
  buf.reserve(2 * half + 1);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(x.size() - 1, i + half);
    buf.assign(x.begin() + static_cast<std::ptrdiff_t>(lo), x.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    auto mid = buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2);
    std::nth_element(buf.begin(), mid, buf.end());
    out[i] = *mid;
  }
  return out;
}

/// Mean ridge magnitude over the mean magnitude of the whole grid.
inline double ridge_strength(const TFRGrid& tfr, const IFCurve& curve) {
  const double cells = static_cast<double>(tfr.bins() * tfr.frames());
  const double grid_mean = tfr.total_magnitude() / cells;
  if (!(grid_mean > 0.0)) return 0.0;
  double ridge = 0.0;
  for (std::size_t m = 0; m < curve.size(); ++m) ridge += std::abs(tfr.at(curve.bins[m], m));
  ridge /= static_cast<double>(curve.size());
  return ridge / grid_mean;
}

/// With a prior, the ridge inside the prior band. Without one, the global
/// maximiser, then repeatedly the maximiser of the grid above the current
/// ridge (offset by the prior half-width) for as long as that ridge stays
/// meaningful. A ridge is meaningful when ridge_strength >= meaningful_ratio;
/// a ratio of zero disables the test.
inline IFCurve highest_frequency_curve(const TFRGrid& tfr, const ExtractionConfig& config,
                                       double meaningful_ratio = 30.0) {
  IFCurve curve = extract_curve(tfr, config);
  if (meaningful_ratio > 0.0 && ridge_strength(tfr, curve) < meaningful_ratio)
    throw Error(ErrorKind::no_curve, "no meaningful ridge in the time-frequency grid");
  if (config.prior) return curve;

  const auto gap = static_cast<std::size_t>(std::ceil(config.prior_halfwidth / tfr.delta_xi()));
  while (true) {
    TFRGrid above(tfr.bins(), tfr.frames(), tfr.delta_xi(), tfr.dt(), tfr.t0());
    bool any = false;
    for (std::size_t m = 0; m < tfr.frames(); ++m) {
      const auto src = tfr.frame(m);
      auto dst = above.frame(m);
      for (std::size_t q = curve.bins[m] + gap + 1; q < tfr.bins(); ++q) {
        dst[q] = src[q];
        any = any || src[q] != complex{};
      }
    }
    if (!any) break;
    IFCurve candidate = extract_curve(above, config);
    bool strictly_above = true;
    for (std::size_t m = 0; m < tfr.frames() && strictly_above; ++m)
      strictly_above = candidate.bins[m] > curve.bins[m] + gap;
    const double threshold = meaningful_ratio > 0.0 ? meaningful_ratio : 0.0;
    if (!strictly_above || ridge_strength(tfr, candidate) < threshold) break;
    curve = std::move(candidate);
  }
  return curve;
}

namespace detail {

inline std::vector<double> clamp_to_axis(std::span<const double> hz, const SSTConfig& sst) {
  std::vector<double> out(hz.begin(), hz.end());
  const double top = static_cast<double>(sst.bins() - 1) * sst.delta_xi;
  for (auto& f : out) f = std::clamp(f, 0.0, top);
  return out;
}

}  // namespace detail

template <Sample T>
SIFTResult<T> sift_decompose(const Signal<T>& signal, const SIFTConfig& config) {
  config.validate();
  if (signal.size() <= config.window.length)
    throw Error(ErrorKind::invalid_window, "signal must be longer than the window");
  for (const auto& p : config.priors)
    if (p.size() != signal.size()) throw Error(ErrorKind::invalid_curve, "prior length differs from the signal");

  SIFTResult<T> out{{}, signal, signal.with_samples(std::vector<T>(signal.size(), T{})), {}, {}, true, {}};
  Signal<T> r = signal;
  std::vector<T> guard(signal.size(), T{});
  const double meaningful =
      config.oscillation_test == OscillationTest::ridge_energy ? config.meaningful_ratio : 0.0;
  const auto median_samples =
      static_cast<std::size_t>(std::llround(config.median_width * signal.sample_rate())) | 1U;

  const double input_norm = l2_norm(signal);
  for (int l = 0; l < config.max_components; ++l) {
    if (!config.priors.empty() && static_cast<std::size_t>(l) >= config.priors.size()) break;
    if (l > 0 && l2_norm(r) < config.min_remainder * input_norm) break;
    if (config.oscillation_test != OscillationTest::component_cap && count_extrema(r) < 2) break;

    const TFRGrid sst = synchrosqueeze(r, config.window, config.sst);
    ExtractionConfig extraction = config.extraction;
    if (!config.priors.empty())
      extraction.prior = IFCurve::from_frequencies(sst, detail::clamp_to_axis(config.priors[l], config.sst));

    IFCurve curve;
    try {
      curve = highest_frequency_curve(sst, extraction, meaningful);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::no_curve) throw;
      if (l == 0) {
        out.complete = false;
        out.note = e.what();
      }
      break;
    }
    if (config.oscillation_test == OscillationTest::ridge_energy && curve.mean_frequency() < config.min_frequency)
      break;

    auto hz = moving_median(curve.frequencies, median_samples);
    for (auto& f : hz) f = std::max(f, config.min_frequency);

    if (config.guard.enabled && config.guard.iterations > 0) {
      std::vector<double> upper(hz);
      for (auto& f : upper) f *= config.guard.ratio;
      const auto stripped =
          iterate_operator(r, profile_from_frequencies(upper, config.guard.xi, signal.sample_rate()),
                           config.guard.iterations, config.alif);
      // iterate_operator returns the high-passed part; that is what is stripped.
      for (std::size_t j = 0; j < guard.size(); ++j) guard[j] += stripped[j];
      r = r - stripped;
    }

    auto inner = alif_inner_loop(r, profile_from_frequencies(hz, config.xi, signal.sample_rate()), config.alif);
    r = r - inner.imt;
    out.diagnostics.push_back({inner.iterations, inner.converged, curve.mean_frequency()});
    out.imts.push_back(std::move(inner.imt));
    out.curves.push_back(std::move(curve));
  }

  out.guard_content = signal.with_samples(guard);
  out.residual = r + out.guard_content;
  return out;
}

/// Sum of the SST grids of the individual components.
template <Sample T>
TFRGrid sift_tfr(const std::vector<Signal<T>>& imts, const WindowSpec& window, const SSTConfig& config) {
  if (imts.empty()) throw Error(ErrorKind::invalid_config, "no components to combine");
  TFRGrid total = synchrosqueeze(imts.front(), window, config);
  for (std::size_t l = 1; l < imts.size(); ++l) {
    require_same_grid(imts.front(), imts[l], "components live on different grids");
    total += synchrosqueeze(imts[l], window, config);
  }
  return total;
}

}  // namespace sift
