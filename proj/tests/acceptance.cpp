// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "sift/bench.hpp"

using namespace sift;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void note(Outcome& o, bool ok, const std::string& what) {
  o.pass = o.pass && ok;
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += what + (ok ? "" : " [x]");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Least-squares scale of y against x on [lo, hi).
complex projection(const ComplexSignal& y, const ComplexSignal& x, std::size_t lo, std::size_t hi) {
  complex num = 0.0;
  double den = 0.0;
  for (std::size_t j = lo; j < hi; ++j) {
    num += y[j] * std::conj(x[j]);
    den += std::norm(x[j]);
  }
  return num / den;
}

// 1. Moving average of a tone scales it by exp(-pi^2 nu^2 sigma^2).
Outcome kernel_oracle() {
  constexpr double tol = 1e-3, max_seconds = 1.0, trim = 15.0;
  Outcome o;
  const double nu = 1.0;
  const auto x = synthesize(IMTSpec::tone(nu), SampleGrid::over(60.0, 100.0));
  const auto [lo, hi] = trimmed_range(x.size(), 100.0, trim);
  for (double ns : {0.25, 0.5, 1.0, 2.0}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto y = moving_average(x, BandwidthProfile::constant(ns / nu, x.size(), 100.0), ALIFConfig{});
    const double secs = seconds_since(t0);
    const double expected = std::exp(-pi * pi * ns * ns);
    const double rel = std::abs(projection(y, x, lo, hi) - expected) / expected;
    note(o, rel <= tol && secs < max_seconds, fmt("nu*sigma=%.2f rel %.2e (%.2f s)", ns, rel, secs));
  }
  return o;
}

// 2. Iterated operator on two tones follows the attenuation law.
Outcome attenuation_law() {
  constexpr double tol = 2e-2, max_seconds = 10.0, trim = 3.0;
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto grid = SampleGrid::over(30.0, 100.0);
  const auto x = synthesize(AHMSpec{{IMTSpec::tone(1.0), IMTSpec::tone(3.0)}, 0.0}, grid);
  const auto [lo, hi] = trimmed_range(x.size(), 100.0, trim);
  const auto profile = BandwidthProfile::constant(1.0 / 3.0, x.size(), 100.0);
  double worst = 0.0;
  for (int K : {1, 5, 10, 20}) {
    const auto y = iterate_operator(x, profile, K, ALIFConfig{});
    for (double nu : {1.0, 3.0}) {
      const auto tone = synthesize(IMTSpec::tone(nu), grid);
      const double p = std::abs(projection(y, tone, lo, hi));
      const double th = theoretical_attenuation(nu, 3.0, K);
      const double rel = std::abs(p - th) / th;
      worst = std::max(worst, rel);
      if (rel > tol) note(o, false, fmt("K=%d nu=%.0f rel %.2e", K, nu, rel));
    }
  }
  const double secs = seconds_since(t0);
  note(o, worst <= tol && secs < max_seconds, fmt("worst rel %.2e over K in {1,5,10,20} (%.2f s)", worst, secs));
  return o;
}

// 3. Single pass on a chirp deviates from the frozen-tone prediction by at most eps * max H.
Outcome chirp_error_bound() {
  constexpr double max_seconds = 10.0, trim = 7.0;
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const double nu = 1.0;
  const auto grid = SampleGrid::over(30.0, 100.0);
  double previous = std::numeric_limits<double>::infinity();
  for (double eps : {0.01, 0.005, 0.0025}) {
    IMTSpec s;
    s.amplitude = [](double) { return 1.0; };
    s.phase = [=](double t) { return nu * (t + 0.5 * eps * t * t); };
    s.frequency = [=](double t) { return nu * (1.0 + eps * t); };
    const auto x = synthesize(s, grid);
    std::vector<double> sigma(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) sigma[j] = 1.0 / s.frequency(grid.time(j));
    const auto lx = moving_average(x, BandwidthProfile(sigma, 100.0), ALIFConfig{});
    const auto [lo, hi] = trimmed_range(x.size(), 100.0, trim);
    // Unit amplitude, varphi' = phi' = f, M'' = nu * eps bounds |phi''|.
    const double m2 = nu * eps;
    double dev = 0.0, h_max = 0.0;
    for (std::size_t j = lo; j < hi; ++j) {
      dev = std::max(dev, std::abs(x[j] - lx[j] - (1.0 - std::exp(-pi * pi)) * x[j]));
      const double f = s.frequency(grid.time(j));
      h_max = std::max(h_max, 1.0 / std::sqrt(pi) + pi / f + m2 / (4.0 * f * f));
    }
    note(o, dev <= eps * h_max && dev < previous, fmt("eps=%.4f dev %.2e bound %.2e", eps, dev, eps * h_max));
    previous = dev;
  }
  const double secs = seconds_since(t0);
  note(o, secs < max_seconds, fmt("%.2f s", secs));
  return o;
}

// 4. IMTs plus trend give back the input.
Outcome telescoping() {
  constexpr double tol = 1e-10;
  constexpr int inputs = 50;
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < inputs; ++i) {
    const double rate = 20.0 + 80.0 * u(rng);
    const auto grid = SampleGrid::over(2.0 + 6.0 * u(rng), rate);
    std::vector<double> v(grid.length);
    std::normal_distribution<double> nd(0.0, 0.1 + 5.0 * u(rng));
    const double f1 = 0.5 + 4.0 * u(rng), f2 = 0.2 + 2.0 * u(rng), offset = 10.0 * (u(rng) - 0.5);
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double t = grid.time(j);
      v[j] = std::cos(2 * pi * f1 * t) + 0.5 * std::sin(2 * pi * f2 * t * (1 + 0.1 * t)) + offset + nd(rng);
    }
    const RealSignal x(v, rate);
    const double sigma0 = 0.05 + 0.5 * u(rng);
    int calls = 0;
    const ProfileProvider<double> provider = [&](const RealSignal& r) -> std::optional<BandwidthProfile> {
      std::vector<double> s(r.size());
      for (std::size_t j = 0; j < s.size(); ++j)
        s[j] = sigma0 * (calls + 1) * (1.0 + 0.3 * std::sin(2 * pi * static_cast<double>(j) / s.size()));
      ++calls;
      return BandwidthProfile(s, r.sample_rate());
    };
    ALIFConfig cfg;
    cfg.max_outer_components = 1 + i % 4;
    cfg.boundary_extension = static_cast<BoundaryExtension>(i % 3);
    const auto d = alif_decompose(x, provider, cfg);
    const auto back = d.reconstruct();
    double num = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) num += (back[j] - x[j]) * (back[j] - x[j]);
    worst = std::max(worst, std::sqrt(num) / l2_norm(x));
  }
  note(o, worst <= tol, fmt("%d inputs, worst relative residual %.2e", inputs, worst));
  return o;
}

// 5. Dynamic programming matches exhaustive search; the argmax ignores magnitude scale.
std::pair<std::vector<std::size_t>, double> exhaustive(const TFRGrid& g, const ExtractionConfig& cfg) {
  const std::size_t n = g.bins(), frames = g.frames();
  std::vector<std::size_t> c(frames, 0), arg;
  double best = -std::numeric_limits<double>::infinity();
  for (;;) {
    const double v = curve_objective(g, IFCurve::from_bins(g, c), cfg);
    if (v > best) {
      best = v;
      arg = c;
    }
    std::size_t k = frames;
    for (;;) {
      if (k == 0) return {arg, best};
      --k;
      if (++c[k] < n) break;
      c[k] = 0;
    }
  }
}

Outcome curve_exactness() {
  constexpr double tol = 1e-10;
  constexpr int grids = 100;
  Outcome o;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> nb(1, 10), nf(1, 6);
  int mismatched = 0, not_invariant = 0;
  double worst = 0.0;
  for (int i = 0; i < grids; ++i) {
    const std::size_t bins = nb(rng), frames = nf(rng);
    TFRGrid g(bins, frames, 0.1, 0.01, 0.0);
    for (std::size_t m = 0; m < frames; ++m)
      for (std::size_t q = 0; q < bins; ++q) g.at(q, m) = std::polar(u(rng), 2 * pi * u(rng));
    ExtractionConfig cfg;
    cfg.lambda = i % 5 == 0 ? 0.0 : 3.0 * u(rng);
    const auto dp = extract_curve(g, cfg);
    const auto [bins_bf, value] = exhaustive(g, cfg);
    const double err = std::abs(curve_objective(g, dp, cfg) - value);
    worst = std::max(worst, err);
    if (err > tol || dp.bins != bins_bf) ++mismatched;
    for (double alpha : {1e-3, 1.0, 1e3}) {
      TFRGrid scaled = g;
      for (std::size_t m = 0; m < frames; ++m)
        for (auto& v : scaled.frame(m)) v *= alpha;
      if (extract_curve(scaled, cfg).bins != dp.bins) ++not_invariant;
    }
  }
  note(o, mismatched == 0, fmt("%d grids, %d mismatches, worst objective gap %.2e", grids, mismatched, worst));
  note(o, not_invariant == 0, fmt("%d scale-dependent argmaxes", not_invariant));
  return o;
}

// 6. Reconstruction of a unit tone along its curve.
Outcome sst_reconstruction() {
  constexpr double amp_tol = 0.05, err_tol = 0.1, b = 0.1, trim = 1.0;
  Outcome o;
  const auto z = synthesize(IMTSpec::tone(1.0), SampleGrid::over(20.0, 100.0));
  const auto g = synchrosqueeze(z, WindowSpec::standard(), SSTConfig{});
  const auto curve = IFCurve::from_frequencies(g, std::vector<double>(g.frames(), 1.0));
  const auto rec = reconstruct_along_curve(g, curve, b, WindowSpec::standard());
  const auto [lo, hi] = trimmed_range(z.size(), 100.0, trim);
  double amp = 0.0;
  for (std::size_t j = lo; j < hi; ++j) amp = std::max(amp, std::abs(std::abs(rec.signal[j]) - 1.0));
  const double err = relative_error_l2(rec.signal, z, trim);
  note(o, amp <= amp_tol, fmt("max amplitude error %.4f", amp));
  note(o, err <= err_tol, fmt("relative error %.4f", err));
  return o;
}

bench::ExperimentConfig example1_config() {
  bench::ExperimentConfig c;
  c.preset = "example1";
  c.methods = {bench::Method::bpf, bench::Method::sst, bench::Method::sift};
  return c;
}

std::string cells_text(const bench::BenchmarkReport& r, bench::Method m) {
  std::string s = bench::to_string(m);
  for (std::size_t c = 0; c < r.components; ++c) {
    const auto& cell = r.cell(m, c);
    s += fmt(" %.4f(%.4f,n=%zu)", cell.mean, cell.stddev, cell.count);
  }
  return s;
}

bool sift_wins(const bench::BenchmarkReport& r) {
  using bench::Method;
  bool ok = true;
  for (std::size_t c = 0; c < r.components; ++c) {
    const auto& s = r.cell(Method::sift, c);
    ok = ok && s.count == r.realizations.size() && s.mean < r.cell(Method::sst, c).mean &&
         s.mean < r.cell(Method::bpf, c).mean;
  }
  return ok;
}

// 7. Clean example1: SIFT beats SST and BPF.
Outcome clean_ordering() {
  constexpr double sift_bound = 0.35, max_seconds = 120.0;
  Outcome o;
  const auto r = bench::run_benchmark(example1_config());
  note(o, sift_wins(r), "SIFT below SST and BPF");
  double worst = 0.0;
  for (std::size_t c = 0; c < r.components; ++c) worst = std::max(worst, r.cell(bench::Method::sift, c).mean);
  note(o, worst <= sift_bound, fmt("SIFT worst %.4f", worst));
  note(o, r.runtime_seconds < max_seconds, fmt("%.1f s", r.runtime_seconds));
  o.detail += " | " + cells_text(r, bench::Method::bpf) + " | " + cells_text(r, bench::Method::sst) + " | " +
              cells_text(r, bench::Method::sift);
  return o;
}

bench::ExperimentConfig noisy_config() {
  auto c = example1_config();
  c.target_snr_db = 1.7;
  c.realizations = 20;
  c.seed_base = 0;
  return c;
}

// 8. Noisy example1, 20 realizations: mean SIFT error below SST and BPF.
Outcome noisy_ordering(std::string& csv_out) {
  constexpr double max_seconds = 900.0;
  Outcome o;
  const auto r = bench::run_benchmark(noisy_config());
  csv_out = bench::report_csv(r, false);
  note(o, sift_wins(r), "mean SIFT below SST and BPF");
  note(o, r.runtime_seconds < max_seconds, fmt("%.1f s", r.runtime_seconds));
  o.detail += fmt(" | SNR %.2f(%.2f) dB", r.snr_mean.value_or(NAN), r.snr_std.value_or(NAN)) + " | " +
              cells_text(r, bench::Method::bpf) + " | " + cells_text(r, bench::Method::sst) + " | " +
              cells_text(r, bench::Method::sift);
  return o;
}

// 9. SIFT-TFR ridges are tighter than direct SST on noisy example3.
Outcome tfr_sharpening() {
  constexpr double halfwidth = 0.3, trim = 1.0, required = 0.8;
  constexpr std::size_t realizations = 20;
  Outcome o;
  bench::ExperimentConfig cfg;
  cfg.preset = "example3";
  const bench::Scenario s(cfg);
  SIFTConfig sc;
  sc.priors = s.frequencies;
  std::vector<std::size_t> wins(2, 0);
  std::size_t failed = 0;
  for (std::size_t i = 0; i < realizations; ++i) {
    const auto x = add_noise(s.clean, NoiseSpec{s.noise_sd, cfg.seed_base + i}).first;
    const auto res = sift_decompose(x, sc);
    if (res.imts.size() != 2) {
      ++failed;
      continue;
    }
    const auto sharpened = sift_tfr(res.imts, sc.window, sc.sst);
    const auto direct = synchrosqueeze(x, sc.window, sc.sst);
    for (std::size_t c = 0; c < 2; ++c)
      if (bench::ridge_second_moment(sharpened, s.frequencies[c], halfwidth, trim) <=
          bench::ridge_second_moment(direct, s.frequencies[c], halfwidth, trim))
        ++wins[c];
  }
  for (std::size_t c = 0; c < 2; ++c) {
    const double share = static_cast<double>(wins[c]) / realizations;
    note(o, share >= required, fmt("IMT%zu %zu/%zu", c + 1, wins[c], realizations));
  }
  if (failed) note(o, true, fmt("%zu incomplete decompositions", failed));
  return o;
}

// 10. Crossing frequencies: the pipeline completes and telescopes.
Outcome crossing_smoke() {
  constexpr double tol = 1e-10;
  Outcome o;
  bench::ExperimentConfig cfg;
  cfg.preset = "example4";
  const bench::Scenario s(cfg);
  SIFTConfig sc;
  sc.priors = s.frequencies;
  const auto res = sift_decompose(s.clean, sc);
  note(o, res.complete && res.imts.size() == 2, fmt("%zu IMTs", res.imts.size()));
  const auto back = res.reconstruct();
  double num = 0.0;
  for (std::size_t j = 0; j < back.size(); ++j) num += (back[j] - s.clean[j]) * (back[j] - s.clean[j]);
  const double rel = std::sqrt(num) / l2_norm(s.clean);
  note(o, rel <= tol, fmt("reconstruction %.2e", rel));
  for (std::size_t c = 0; c < std::min<std::size_t>(2, res.imts.size()); ++c) {
    const double e = relative_error_l2(res.imts[c], s.components[c], cfg.trim);
    note(o, std::isfinite(e), fmt("IMT%zu error %.4f", c + 1, e));
  }
  return o;
}

// 11. Rerunning criterion 8 gives the same report.
Outcome determinism(const std::string& first) {
  Outcome o;
  const std::string second = bench::report_csv(bench::run_benchmark(noisy_config()), false);
  note(o, !first.empty() && first == second, fmt("%zu-byte report %s", second.size(),
                                                 first == second ? "identical" : "differs"));
  return o;
}

}  // namespace

int main() {
  std::string noisy_csv;
  const std::vector<std::function<Outcome()>> criteria{
      kernel_oracle,
      attenuation_law,
      chirp_error_bound,
      telescoping,
      curve_exactness,
      sst_reconstruction,
      clean_ordering,
      [&] { return noisy_ordering(noisy_csv); },
      tfr_sharpening,
      crossing_smoke,
      [&] { return determinism(noisy_csv); },
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %zu: %s %s [%.1f s]\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
