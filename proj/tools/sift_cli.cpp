// Command-line front end: benchmarks, single-signal decompositions, and TFR export.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "sift/bench.hpp"
#include "sift/io.hpp"
#include "sift/sift.hpp"

namespace fs = std::filesystem;
using namespace sift;

namespace {

constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::no_curve:
    case ErrorKind::undefined_error:
    case ErrorKind::undefined_snr:
    case ErrorKind::dimension_mismatch:
    case ErrorKind::invalid_curve:
    case ErrorKind::invalid_profile:
      return exit_numerical;
    default:
      return exit_config;
  }
}

struct BenchArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string out = "bench_out";
};

struct DecomposeArgs {
  std::string input;
  std::string method = "sift";
  std::size_t window_len = 377;
  double xi = 1.4;
  double lambda = 1.0;
  double band_b = 0.1;
  int components = 2;
  std::string out = "decompose_out";
};

struct TfrArgs {
  std::string input;
  std::string method = "sst";
  std::size_t window_len = 377;
  std::string out = "tfr_out";
};

int run_bench(const BenchArgs& a) {
  auto config = bench::load_config(a.config);
  if (a.seed) config.seed_base = *a.seed;
  if (a.workers) config.workers = *a.workers;
  const auto report = bench::run_benchmark(config);
  const fs::path out(a.out);
  bench::emit_report(report, bench::ReportFormat::csv, out / "report.csv");
  bench::emit_report(report, bench::ReportFormat::json, out / "report.json");
  bench::emit_report(report, bench::ReportFormat::markdown, out / "report.md");
  std::cout << bench::report_markdown(report);
  if (report.snr_mean) std::printf("SNR %.3f dB (sd %.3f)\n", *report.snr_mean, *report.snr_std);
  std::printf("realizations: %zu, runtime %.2f s\n", report.realizations.size(), report.runtime_seconds);
  for (const auto& rec : report.realizations)
    for (std::size_t k = 0; k < rec.outcomes.size(); ++k)
      if (!rec.outcomes[k].failure.empty())
        std::fprintf(stderr, "realization %zu, %s: %s\n", rec.index, bench::to_string(report.methods[k]).c_str(),
                     rec.outcomes[k].failure.c_str());
  return 0;
}

/// Up to `count` ridges, strongest first, each masked (+-halfwidth) before the
/// next search; returned highest mean frequency first.
std::vector<IFCurve> strongest_curves(const TFRGrid& sst, const ExtractionConfig& ec, int count) {
  TFRGrid work = sst;
  std::vector<IFCurve> curves;
  const auto gap = static_cast<std::size_t>(std::ceil(ec.prior_halfwidth / sst.delta_xi()));
  for (int l = 0; l < count; ++l) {
    IFCurve c;
    try {
      c = highest_frequency_curve(work, [&] {
        ExtractionConfig plain = ec;
        plain.prior.reset();
        return plain;
      }(), SIFTConfig{}.meaningful_ratio);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::no_curve || curves.empty()) throw;
      break;
    }
    for (std::size_t m = 0; m < work.frames(); ++m) {
      const std::size_t lo = c.bins[m] > gap ? c.bins[m] - gap : 0;
      const std::size_t hi = std::min(work.bins() - 1, c.bins[m] + gap);
      for (std::size_t q = lo; q <= hi; ++q) work.at(q, m) = complex{};
    }
    curves.push_back(std::move(c));
  }
  std::sort(curves.begin(), curves.end(),
            [](const IFCurve& a, const IFCurve& b) { return a.mean_frequency() > b.mean_frequency(); });
  return curves;
}

int run_decompose(const DecomposeArgs& a) {
  const RealSignal x = io::read_signal(a.input);
  const fs::path out(a.out);
  const WindowSpec window{a.window_len, 6.0};
  window.validate();
  if (a.components < 1) throw Error(ErrorKind::invalid_config, "--components must be at least 1");

  if (a.method == "sift") {
    SIFTConfig config;
    config.window = window;
    config.xi = a.xi;
    config.extraction.lambda = a.lambda;
    config.max_components = a.components;
    const auto result = sift_decompose(x, config);
    io::write_sift_result(result, config, out);
    std::printf("%zu components%s\n", result.imts.size(), result.complete ? "" : " (incomplete)");
    if (!result.complete) std::fprintf(stderr, "%s\n", result.note.c_str());
    return result.complete ? 0 : exit_numerical;
  }
  if (a.method != "sst" && a.method != "bpf")
    throw Error(ErrorKind::invalid_config, "unknown method '" + a.method + "'");

  const SSTConfig sst_config;
  const TFRGrid sst = synchrosqueeze(x, window, sst_config);
  ExtractionConfig ec;
  ec.lambda = a.lambda;
  const auto curves = strongest_curves(sst, ec, a.components);
  std::vector<RealSignal> parts;
  for (const auto& c : curves) {
    if (a.method == "sst") {
      const auto rec = reconstruct_along_curve(sst, c, a.band_b, window);
      std::vector<double> v(x.size());
      for (std::size_t j = 0; j < v.size(); ++j) v[j] = 2.0 * rec.signal[j].real();
      parts.push_back(x.with_samples(std::move(v)));
    } else {
      const auto [lo, hi] = std::minmax_element(c.frequencies.begin(), c.frequencies.end());
      parts.push_back(bandpass_reconstruct(x, std::max(0.0, *lo - a.band_b),
                                           std::min(0.5 * x.sample_rate(), *hi + a.band_b)));
    }
  }
  RealSignal residual = x;
  io::json files = io::json::array();
  for (std::size_t k = 0; k < parts.size(); ++k) {
    residual = residual - parts[k];
    const std::string imt = "imt_" + std::to_string(k + 1) + ".csv";
    const std::string curve = "curve_" + std::to_string(k + 1) + ".csv";
    io::write_signal_csv(parts[k], out / imt);
    io::write_curve_csv(sst, curves[k], out / curve);
    files.push_back({{"signal", imt}, {"curve", curve}, {"mean_frequency", curves[k].mean_frequency()}});
  }
  io::write_signal_csv(residual, out / "residual.csv");
  io::write_json({{"method", a.method},
                  {"window_length", a.window_len},
                  {"lambda", a.lambda},
                  {"band_b", a.band_b},
                  {"components", files},
                  {"residual", "residual.csv"}},
                 out / "manifest.json");
  std::printf("%zu components\n", parts.size());
  return 0;
}

int run_tfr(const TfrArgs& a) {
  const RealSignal x = io::read_signal(a.input);
  const WindowSpec window{a.window_len, 6.0};
  TFRGrid grid = [&] {
    if (a.method == "stft") return stft(x, window, SSTConfig{});
    if (a.method == "sst") return synchrosqueeze(x, window, SSTConfig{});
    throw Error(ErrorKind::invalid_config, "unknown method '" + a.method + "'");
  }();
  const fs::path out(a.out);
  io::write_tfr_binary(grid, out / (a.method + ".tfr"));
  io::emit_tfr_plotdata(grid, out, a.method);
  std::printf("%zu bins x %zu frames\n", grid.bins(), grid.frames());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synchrosqueezing-guided iterative filtering"};
  app.require_subcommand(1);

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Benchmark harness");
  bench_cmd->require_subcommand(1);
  auto* bench_run = bench_cmd->add_subcommand("run", "Run a configured experiment");
  bench_run->add_option("--config", bench_args.config, "JSON or key=value config")->required();
  bench_run->add_option("--seed", bench_args.seed, "Seed base override");
  bench_run->add_option("--workers", bench_args.workers, "Worker threads (0 = all cores)");
  bench_run->add_option("--out", bench_args.out, "Output directory");

  DecomposeArgs dec;
  auto* dec_cmd = app.add_subcommand("decompose", "Decompose one signal");
  dec_cmd->add_option("--input", dec.input, "Signal file (.csv or binary)")->required();
  dec_cmd->add_option("--method", dec.method, "sift, sst or bpf")->check(CLI::IsMember({"sift", "sst", "bpf"}));
  dec_cmd->add_option("--window-len", dec.window_len, "Window length in samples");
  dec_cmd->add_option("--xi", dec.xi, "Filter scale factor");
  dec_cmd->add_option("--lambda", dec.lambda, "Curve regularity weight");
  dec_cmd->add_option("--band-b", dec.band_b, "Band half-width in Hz");
  dec_cmd->add_option("--components", dec.components, "Maximum number of components");
  dec_cmd->add_option("--out", dec.out, "Output directory");

  TfrArgs tfr;
  auto* tfr_cmd = app.add_subcommand("tfr", "Export a time-frequency representation");
  tfr_cmd->add_option("--input", tfr.input, "Signal file (.csv or binary)")->required();
  tfr_cmd->add_option("--method", tfr.method, "stft or sst")->check(CLI::IsMember({"stft", "sst"}));
  tfr_cmd->add_option("--window-len", tfr.window_len, "Window length in samples");
  tfr_cmd->add_option("--out", tfr.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_config;
  }

  try {
    if (*bench_run) return run_bench(bench_args);
    if (*dec_cmd) return run_decompose(dec);
    if (*tfr_cmd) return run_tfr(tfr);
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_numerical;
  }
  return exit_config;
}
