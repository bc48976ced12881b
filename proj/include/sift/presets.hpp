#pragma once

// Named two-component test signals. Components are listed highest frequency
// first; phases are closed-form integrals of the listed instantaneous
// frequencies, with u = t / duration.
//
//   example1  f1 = 1.7 + 0.7 sin(2 pi u)          f2 = 0.42 f1
//             disjoint ridges, overlapping ranges [1.0, 2.4] and [0.42, 1.01] Hz
//   example3  f1 = 2.6 - 1.5 u^2                  f2 = 1.15 - 0.65 u
//             disjoint ridges, overlapping ranges [1.1, 2.6] and [0.5, 1.15] Hz
//   example4  f1 = 2.0 - 1.5 u                    f2 = 0.5 + 1.5 u
//             ridges cross once at u = 0.5
//
// example2 is example1 with noise at 1.7 dB SNR; it shares the signal.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "sift/error.hpp"
#include "sift/signal.hpp"

namespace sift {

struct SignalPreset {
  std::string name;
  double duration = 30.0;
  double default_snr_db = 0.0;  // used only when noise is requested by name
  bool noisy = false;
  std::vector<IMTSpec> components;  // highest frequency first
};

namespace detail {

inline IMTSpec unit_component(std::function<double(double)> phase, std::function<double(double)> frequency) {
  IMTSpec spec;
  spec.amplitude = [](double) { return 1.0; };
  spec.phase = std::move(phase);
  spec.frequency = std::move(frequency);
  return spec;
}

}  // namespace detail

inline SignalPreset make_preset(const std::string& name, double duration = 30.0) {
  if (!(duration > 0.0)) throw Error(ErrorKind::invalid_config, "preset duration must be positive");
  const double T = duration;
  const double two_pi = 2.0 * std::numbers::pi;
  SignalPreset p;
  p.name = name;
  p.duration = T;
  if (name == "example1" || name == "example2") {
    auto f1 = [=](double t) { return 1.7 + 0.7 * std::sin(two_pi * t / T); };
    auto phi1 = [=](double t) { return 1.7 * t - 0.7 * T / two_pi * std::cos(two_pi * t / T); };
    p.components.push_back(detail::unit_component(phi1, f1));
    p.components.push_back(detail::unit_component([=](double t) { return 0.42 * phi1(t); },
                                                  [=](double t) { return 0.42 * f1(t); }));
    if (name == "example2") {
      p.noisy = true;
      p.default_snr_db = 1.7;
    }
  } else if (name == "example3") {
    p.components.push_back(detail::unit_component([=](double t) { return 2.6 * t - 0.5 * t * t * t / (T * T); },
                                                  [=](double t) { return 2.6 - 1.5 * (t / T) * (t / T); }));
    p.components.push_back(detail::unit_component([=](double t) { return 1.15 * t - 0.325 * t * t / T; },
                                                  [=](double t) { return 1.15 - 0.65 * t / T; }));
    p.noisy = true;
    p.default_snr_db = 1.93;
  } else if (name == "example4") {
    p.components.push_back(detail::unit_component([=](double t) { return 2.0 * t - 0.75 * t * t / T; },
                                                  [=](double t) { return 2.0 - 1.5 * t / T; }));
    p.components.push_back(detail::unit_component([=](double t) { return 0.5 * t + 0.75 * t * t / T; },
                                                  [=](double t) { return 0.5 + 1.5 * t / T; }));
    p.noisy = true;
    p.default_snr_db = 3.13;
  } else {
    throw Error(ErrorKind::invalid_config, "unknown preset '" + name + "'");
  }
  return p;
}

/// Real components A cos(2 pi phi) on the grid, in preset order.
inline std::vector<RealSignal> preset_components(const SignalPreset& preset, const SampleGrid& grid) {
  std::vector<RealSignal> out;
  for (const auto& c : preset.components) out.push_back(synthesize_real(c, grid));
  return out;
}

/// Ground-truth instantaneous frequencies per sample, in preset order.
inline std::vector<std::vector<double>> preset_frequencies(const SignalPreset& preset, const SampleGrid& grid) {
  std::vector<std::vector<double>> out;
  for (const auto& c : preset.components) {
    std::vector<double> f(grid.length);
    for (std::size_t j = 0; j < grid.length; ++j) f[j] = c.instantaneous_frequency(grid.time(j));
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace sift
