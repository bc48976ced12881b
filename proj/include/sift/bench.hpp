#pragma once

// Synthetic benchmark harness: methods x components x noise realizations,
// with CSV / JSON / markdown reports.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "sift/error.hpp"
#include "sift/io.hpp"
#include "sift/presets.hpp"
#include "sift/sift.hpp"
#include "sift/signal.hpp"
#include "sift/tfr.hpp"

namespace sift::bench {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr int schema_version = 1;

enum class Method { bpf, sst, sst_tuned, sift };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::bpf: return "BPF";
    case Method::sst: return "SST";
    case Method::sst_tuned: return "SST-tuned";
    case Method::sift: return "SIFT";
  }
  return "?";
}

inline Method parse_method(std::string s) {
  std::string key;
  for (char c : s)
    if (c != ' ' && c != '_' && c != '-') key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (key == "bpf") return Method::bpf;
  if (key == "sst") return Method::sst;
  if (key == "ssttuned") return Method::sst_tuned;
  if (key == "sift") return Method::sift;
  throw Error(ErrorKind::invalid_config, "unknown method '" + s + "'");
}

struct ExperimentConfig {
  std::string preset = "example1";
  double sample_rate = 100.0;
  double duration = 30.0;
  /// Noise level: noise_sd wins over target_snr_db; with neither, noisy
  /// presets use their default SNR and the others stay clean.
  std::optional<double> noise_sd;
  std::optional<double> target_snr_db;
  std::size_t realizations = 1;
  std::uint64_t seed_base = 0;
  std::vector<Method> methods{Method::bpf, Method::sst, Method::sst_tuned, Method::sift};
  std::size_t window_length = 377;
  std::size_t tuned_window_length = 677;
  double band_b = 0.1;
  double lambda = 1.0;
  double xi = 1.4;
  double trim = 1.0;
  unsigned workers = 1;  // 0 = one per hardware thread

  void validate() const {
    if (realizations < 1) throw Error(ErrorKind::invalid_config, "need at least one realization");
    if (!(sample_rate > 0.0) || !(duration > 0.0))
      throw Error(ErrorKind::invalid_config, "sample rate and duration must be positive");
    const double samples = std::floor(duration * sample_rate + 0.5);
    if (samples <= static_cast<double>(std::max(window_length, tuned_window_length)))
      throw Error(ErrorKind::invalid_config, "signal must be longer than the windows");
    WindowSpec{window_length, 6.0}.validate();
    WindowSpec{tuned_window_length, 6.0}.validate();
    if (noise_sd && !(*noise_sd >= 0.0)) throw Error(ErrorKind::invalid_config, "noise sd must be nonnegative");
    if (target_snr_db && !std::isfinite(*target_snr_db))
      throw Error(ErrorKind::invalid_config, "target SNR must be finite");
    if (!(band_b > 0.0)) throw Error(ErrorKind::invalid_config, "band half-width must be positive");
    if (!(lambda >= 0.0)) throw Error(ErrorKind::invalid_config, "lambda must be nonnegative");
    if (!(xi > 0.0)) throw Error(ErrorKind::invalid_config, "xi must be positive");
    if (!(trim >= 0.0) || 2.0 * trim >= duration) throw Error(ErrorKind::invalid_config, "trim too large");
    make_preset(preset, duration);
  }
};

// Config files

namespace detail {

inline double to_number(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorKind::invalid_config, "'" + key + "' expects a number, got '" + v + "'");
  }
}

inline std::uint64_t to_count(const std::string& key, const std::string& v) {
  const double d = to_number(key, v);
  if (!(d >= 0.0) || d != std::floor(d) || d > 1.8e19)
    throw Error(ErrorKind::invalid_config, "'" + key + "' expects a nonnegative integer");
  return static_cast<std::uint64_t>(d);
}

inline std::string trim_ws(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

inline void assign(ExperimentConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim_ws(raw);
  if (key == "schema_version") {
    if (to_count(key, v) != schema_version)
      throw Error(ErrorKind::invalid_config, "unsupported schema_version " + v);
  } else if (key == "preset") {
    c.preset = v;
  } else if (key == "sample_rate") {
    c.sample_rate = to_number(key, v);
  } else if (key == "duration") {
    c.duration = to_number(key, v);
  } else if (key == "noise_sd") {
    c.noise_sd = to_number(key, v);
  } else if (key == "target_snr_db") {
    c.target_snr_db = to_number(key, v);
  } else if (key == "realizations") {
    c.realizations = to_count(key, v);
  } else if (key == "seed_base" || key == "seed") {
    c.seed_base = to_count(key, v);
  } else if (key == "methods") {
    c.methods.clear();
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!trim_ws(item).empty()) c.methods.push_back(parse_method(trim_ws(item)));
  } else if (key == "window_length") {
    c.window_length = to_count(key, v);
  } else if (key == "tuned_window_length") {
    c.tuned_window_length = to_count(key, v);
  } else if (key == "band_b") {
    c.band_b = to_number(key, v);
  } else if (key == "lambda") {
    c.lambda = to_number(key, v);
  } else if (key == "xi") {
    c.xi = to_number(key, v);
  } else if (key == "trim") {
    c.trim = to_number(key, v);
  } else if (key == "workers") {
    c.workers = static_cast<unsigned>(to_count(key, v));
  } else {
    throw Error(ErrorKind::invalid_config, "unknown key '" + key + "'");
  }
}

}  // namespace detail

inline ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::invalid_config, "config must be a JSON object");
  ExperimentConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "methods" && value.is_array()) {
      std::string joined;
      for (const auto& m : value) {
        if (!m.is_string()) throw Error(ErrorKind::invalid_config, "methods must be strings");
        joined += m.get<std::string>() + ",";
      }
      detail::assign(c, key, joined);
    } else if (value.is_string()) {
      detail::assign(c, key, value.get<std::string>());
    } else if (value.is_number()) {
      detail::assign(c, key, io::format_double(value.get<double>()));
    } else {
      throw Error(ErrorKind::invalid_config, "unsupported value for '" + key + "'");
    }
  }
  return c;
}

/// `key = value` lines; '#' starts a comment.
inline ExperimentConfig config_from_key_values(const std::string& text) {
  ExperimentConfig c;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (detail::trim_ws(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::invalid_config, "line " + std::to_string(lineno) + " is not key = value");
    detail::assign(c, detail::trim_ws(line.substr(0, eq)), line.substr(eq + 1));
  }
  return c;
}

/// JSON when the first non-blank character is '{', key/value otherwise.
inline ExperimentConfig parse_config(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::invalid_config, std::string("malformed JSON config: ") + e.what());
    }
    return config_from_json(j);
  }
  return config_from_key_values(text);
}

inline ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::invalid_config, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// Reports

struct MethodOutcome {
  std::vector<double> errors;  // per component; empty on failure
  std::string failure;
  bool operator==(const MethodOutcome&) const = default;
};

struct RealizationRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::optional<double> snr_db;   // absent for noiseless runs
  std::vector<MethodOutcome> outcomes;  // in report method order
  bool operator==(const RealizationRecord&) const = default;
};

struct Cell {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 with fewer than two values
  std::size_t count = 0;
  bool operator==(const Cell&) const = default;
};

struct BenchmarkReport {
  int schema_version = bench::schema_version;
  std::string preset;
  std::size_t components = 0;
  std::uint64_t seed_base = 0;
  std::vector<Method> methods;
  std::vector<RealizationRecord> realizations;
  std::vector<std::vector<Cell>> cells;  // [method][component]
  std::optional<double> snr_mean;
  std::optional<double> snr_std;
  double runtime_seconds = 0.0;

  bool operator==(const BenchmarkReport&) const = default;

  /// Equality ignoring wall-clock time.
  bool same_results(const BenchmarkReport& o) const {
    BenchmarkReport a = *this;
    a.runtime_seconds = o.runtime_seconds;
    return a == o;
  }

  const Cell& cell(Method m, std::size_t component) const {
    const auto it = std::find(methods.begin(), methods.end(), m);
    if (it == methods.end()) throw Error(ErrorKind::invalid_config, "method not in report: " + to_string(m));
    return cells[static_cast<std::size_t>(it - methods.begin())].at(component);
  }
};

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double s = 0.0;
  for (double x : v) s += x;
  const double mean = s / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

inline std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  return s;
}

}  // namespace detail

/// Fills cells and SNR statistics from the realization records, in index order.
inline void aggregate(BenchmarkReport& r) {
  r.cells.assign(r.methods.size(), std::vector<Cell>(r.components));
  for (std::size_t k = 0; k < r.methods.size(); ++k)
    for (std::size_t c = 0; c < r.components; ++c) {
      std::vector<double> v;
      for (const auto& rec : r.realizations)
        if (rec.outcomes[k].failure.empty()) v.push_back(rec.outcomes[k].errors[c]);
      const auto [mean, sd] = detail::mean_std(v);
      r.cells[k][c] = {mean, sd, v.size()};
    }
  std::vector<double> snr;
  for (const auto& rec : r.realizations)
    if (rec.snr_db) snr.push_back(*rec.snr_db);
  r.snr_mean.reset();
  r.snr_std.reset();
  if (!snr.empty()) {
    const auto [mean, sd] = detail::mean_std(snr);
    r.snr_mean = mean;
    r.snr_std = sd;
  }
}

// Running

/// Mean over interior frames of the |S|-weighted squared distance from the
/// reference frequency, restricted to |f - centre| <= halfwidth.
/// `centre_hz` has one entry per frame.
inline double ridge_second_moment(const TFRGrid& tfr, std::span<const double> centre_hz, double halfwidth,
                                  double trim_seconds) {
  if (centre_hz.size() != tfr.frames()) throw Error(ErrorKind::invalid_curve, "reference length differs from frames");
  if (!(halfwidth > 0.0)) throw Error(ErrorKind::invalid_band, "half-width must be positive");
  const auto [lo, hi] = trimmed_range(tfr.frames(), 1.0 / tfr.dt(), trim_seconds);
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t m = lo; m < hi; ++m) {
    const double c = centre_hz[m];
    const auto q0 = static_cast<std::size_t>(std::max(0.0, std::ceil((c - halfwidth) / tfr.delta_xi())));
    const auto q1 = std::min(tfr.bins() - 1, static_cast<std::size_t>(std::max(0.0, std::floor((c + halfwidth) / tfr.delta_xi()))));
    double mass = 0.0;
    double moment = 0.0;
    for (std::size_t q = q0; q <= q1; ++q) {
      const double w = std::abs(tfr.at(q, m));
      const double d = tfr.frequency(q) - c;
      mass += w;
      moment += w * d * d;
    }
    if (mass > 0.0) {
      total += moment / mass;
      ++used;
    }
  }
  return used ? total / static_cast<double>(used) : 0.0;
}

/// Everything a realization needs that does not depend on the noise draw.
struct Scenario {
  SignalPreset preset;
  SampleGrid grid;
  std::vector<RealSignal> components;
  std::vector<std::vector<double>> frequencies;
  RealSignal clean;
  double noise_sd = 0.0;

  explicit Scenario(const ExperimentConfig& config)
      : preset(make_preset(config.preset, config.duration)),
        grid{config.sample_rate, 0.0, static_cast<std::size_t>(std::floor(config.duration * config.sample_rate + 0.5))},
        components(preset_components(preset, grid)),
        frequencies(preset_frequencies(preset, grid)),
        clean(components.front()) {
    for (std::size_t l = 1; l < components.size(); ++l) clean = clean + components[l];
    if (config.noise_sd)
      noise_sd = *config.noise_sd;
    else if (config.target_snr_db)
      noise_sd = noise_level_for_snr(clean, *config.target_snr_db);
    else if (preset.noisy)
      noise_sd = noise_level_for_snr(clean, preset.default_snr_db);
  }
};

namespace detail {

inline std::vector<double> sst_estimates(const RealSignal& x, const Scenario& s, const ExperimentConfig& config,
                                         std::size_t window_length, std::size_t component, const TFRGrid& sst) {
  ExtractionConfig ec;
  ec.lambda = config.lambda;
  ec.prior = IFCurve::from_frequencies(sst, sift::detail::clamp_to_axis(s.frequencies[component], SSTConfig{}));
  const IFCurve curve = extract_curve(sst, ec);
  const auto rec = reconstruct_along_curve(sst, curve, config.band_b, WindowSpec{window_length, 6.0});
  std::vector<double> est(x.size());
  for (std::size_t j = 0; j < est.size(); ++j) est[j] = 2.0 * rec.signal[j].real();
  return est;
}

inline std::vector<double> run_method(Method method, const RealSignal& x, const Scenario& s,
                                      const ExperimentConfig& config) {
  const std::size_t n = s.components.size();
  std::vector<double> errors(n);
  auto score = [&](std::size_t c, const RealSignal& est) {
    errors[c] = relative_error_l2(est, s.components[c], config.trim);
  };
  switch (method) {
    case Method::bpf: {
      for (std::size_t c = 0; c < n; ++c) {
        const auto [lo, hi] = std::minmax_element(s.frequencies[c].begin(), s.frequencies[c].end());
        const double nyquist = 0.5 * x.sample_rate();
        score(c, bandpass_reconstruct(x, std::max(0.0, *lo - config.band_b), std::min(nyquist, *hi + config.band_b)));
      }
      break;
    }
    case Method::sst:
    case Method::sst_tuned: {
      const std::size_t len = method == Method::sst ? config.window_length : config.tuned_window_length;
      const TFRGrid sst = synchrosqueeze(x, WindowSpec{len, 6.0}, SSTConfig{});
      for (std::size_t c = 0; c < n; ++c) score(c, x.with_samples(sst_estimates(x, s, config, len, c, sst)));
      break;
    }
    case Method::sift: {
      SIFTConfig sc;
      sc.window = WindowSpec{config.window_length, 6.0};
      sc.xi = config.xi;
      sc.extraction.lambda = config.lambda;
      sc.priors = s.frequencies;
      const auto result = sift_decompose(x, sc);
      if (result.imts.size() != n)
        throw Error(ErrorKind::no_curve, "SIFT produced " + std::to_string(result.imts.size()) + " of " +
                                             std::to_string(n) + " components");
      for (std::size_t c = 0; c < n; ++c) score(c, result.imts[c]);
      break;
    }
  }
  return errors;
}

}  // namespace detail

inline RealizationRecord run_realization(const Scenario& s, const ExperimentConfig& config, std::size_t index) {
  RealizationRecord rec;
  rec.index = index;
  rec.seed = config.seed_base + index;
  RealSignal x = s.clean;
  if (s.noise_sd > 0.0) {
    auto [noisy, noise] = add_noise(s.clean, NoiseSpec{s.noise_sd, rec.seed});
    rec.snr_db = snr_db(s.clean, noise);
    x = std::move(noisy);
  }
  for (Method m : config.methods) {
    MethodOutcome out;
    try {
      out.errors = detail::run_method(m, x, s, config);
    } catch (const std::exception& e) {
      out.errors.clear();
      out.failure = detail::sanitize(e.what());
      if (out.failure.empty()) out.failure = "failed";
    }
    rec.outcomes.push_back(std::move(out));
  }
  return rec;
}

inline BenchmarkReport run_benchmark(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const Scenario scenario(config);
  BenchmarkReport report;
  report.preset = config.preset;
  report.components = scenario.components.size();
  report.seed_base = config.seed_base;
  report.methods = config.methods;
  report.realizations.resize(config.realizations);

  unsigned workers = config.workers == 0 ? std::max(1U, std::thread::hardware_concurrency()) : config.workers;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, config.realizations));
  std::atomic<std::size_t> next{0};
  auto job = [&] {
    for (std::size_t i = next++; i < config.realizations; i = next++)
      report.realizations[i] = run_realization(scenario, config, i);
  };
  if (workers <= 1) {
    job();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(job);
  }
  aggregate(report);
  report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

// Serialization

enum class ReportFormat { csv, json, markdown };

/// Long-form rows: kind,method,component,realization,seed,value.
/// Components are numbered from 1.
inline std::string report_csv(const BenchmarkReport& r, bool include_runtime = true) {
  using io::format_double;
  std::ostringstream out;
  out << "kind,method,component,realization,seed,value\n";
  out << "schema_version,,,,," << r.schema_version << '\n';
  out << "preset,,,,," << detail::sanitize(r.preset) << '\n';
  out << "components,,,,," << r.components << '\n';
  out << "seed_base,,,,," << r.seed_base << '\n';
  for (Method m : r.methods) out << "method," << to_string(m) << ",,,,\n";
  for (const auto& rec : r.realizations) {
    out << "realization,,," << rec.index << ',' << rec.seed << ",\n";
    if (rec.snr_db) out << "snr,,," << rec.index << ',' << rec.seed << ',' << format_double(*rec.snr_db) << '\n';
    for (std::size_t k = 0; k < r.methods.size(); ++k) {
      const auto& o = rec.outcomes[k];
      const std::string name = to_string(r.methods[k]);
      if (!o.failure.empty()) {
        out << "failure," << name << ",," << rec.index << ',' << rec.seed << ',' << o.failure << '\n';
        continue;
      }
      for (std::size_t c = 0; c < o.errors.size(); ++c)
        out << "error," << name << ',' << c + 1 << ',' << rec.index << ',' << rec.seed << ','
            << format_double(o.errors[c]) << '\n';
    }
  }
  for (std::size_t k = 0; k < r.methods.size(); ++k)
    for (std::size_t c = 0; c < r.components; ++c) {
      const auto& cell = r.cells[k][c];
      const std::string prefix = to_string(r.methods[k]) + "," + std::to_string(c + 1) + ",,,";
      out << "mean," << prefix << format_double(cell.mean) << '\n';
      out << "std," << prefix << format_double(cell.stddev) << '\n';
      out << "count," << prefix << cell.count << '\n';
    }
  if (r.snr_mean) out << "snr_mean,,,,," << format_double(*r.snr_mean) << '\n';
  if (r.snr_std) out << "snr_std,,,,," << format_double(*r.snr_std) << '\n';
  if (include_runtime) out << "runtime_seconds,,,,," << format_double(r.runtime_seconds) << '\n';
  return out.str();
}

inline BenchmarkReport parse_report_csv(const std::string& text) {
  BenchmarkReport r;
  r.schema_version = 0;
  std::stringstream ss(text);
  std::string line;
  std::getline(ss, line);
  if (detail::trim_ws(line) != "kind,method,component,realization,seed,value")
    throw Error(ErrorKind::io, "not a benchmark report");
  auto realization = [&](const std::string& idx) -> RealizationRecord& {
    const auto i = static_cast<std::size_t>(std::stoull(idx));
    if (i >= r.realizations.size()) throw Error(ErrorKind::io, "realization row out of order");
    return r.realizations[i];
  };
  auto method_index = [&](const std::string& name) {
    const auto it = std::find(r.methods.begin(), r.methods.end(), parse_method(name));
    if (it == r.methods.end()) throw Error(ErrorKind::io, "undeclared method " + name);
    return static_cast<std::size_t>(it - r.methods.begin());
  };
  std::vector<std::vector<std::optional<double>>> mean, sd;
  std::vector<std::vector<std::size_t>> count;
  auto ensure_cells = [&] {
    if (r.cells.empty()) r.cells.assign(r.methods.size(), std::vector<Cell>(r.components));
  };
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t pos = 0;
    for (int i = 0; i < 5; ++i) {
      const auto comma = line.find(',', pos);
      if (comma == std::string::npos) throw Error(ErrorKind::io, "short report row: " + line);
      f.push_back(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
    f.push_back(line.substr(pos));
    const std::string& kind = f[0];
    try {
      if (kind == "schema_version") {
        r.schema_version = std::stoi(f[5]);
      } else if (kind == "preset") {
        r.preset = f[5];
      } else if (kind == "components") {
        r.components = std::stoull(f[5]);
      } else if (kind == "seed_base") {
        r.seed_base = std::stoull(f[5]);
      } else if (kind == "method") {
        r.methods.push_back(parse_method(f[1]));
      } else if (kind == "realization") {
        RealizationRecord rec;
        rec.index = std::stoull(f[3]);
        rec.seed = std::stoull(f[4]);
        rec.outcomes.resize(r.methods.size());
        for (auto& o : rec.outcomes) o.errors.assign(r.components, 0.0);
        if (rec.index != r.realizations.size()) throw Error(ErrorKind::io, "realizations out of order");
        r.realizations.push_back(std::move(rec));
      } else if (kind == "snr") {
        realization(f[3]).snr_db = std::stod(f[5]);
      } else if (kind == "failure") {
        auto& o = realization(f[3]).outcomes[method_index(f[1])];
        o.errors.clear();
        o.failure = f[5];
      } else if (kind == "error") {
        realization(f[3]).outcomes[method_index(f[1])].errors.at(std::stoull(f[2]) - 1) = std::stod(f[5]);
      } else if (kind == "mean" || kind == "std" || kind == "count") {
        ensure_cells();
        auto& cell = r.cells.at(method_index(f[1])).at(std::stoull(f[2]) - 1);
        if (kind == "mean") cell.mean = std::stod(f[5]);
        if (kind == "std") cell.stddev = std::stod(f[5]);
        if (kind == "count") cell.count = std::stoull(f[5]);
      } else if (kind == "snr_mean") {
        r.snr_mean = std::stod(f[5]);
      } else if (kind == "snr_std") {
        r.snr_std = std::stod(f[5]);
      } else if (kind == "runtime_seconds") {
        r.runtime_seconds = std::stod(f[5]);
      } else {
        throw Error(ErrorKind::io, "unknown report row kind '" + kind + "'");
      }
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::io, "malformed report row: " + line);
    }
  }
  ensure_cells();
  return r;
}

inline json report_json(const BenchmarkReport& r, bool include_runtime = true) {
  json methods = json::array();
  for (std::size_t k = 0; k < r.methods.size(); ++k) {
    json comps = json::array();
    for (std::size_t c = 0; c < r.components; ++c)
      comps.push_back({{"mean", r.cells[k][c].mean}, {"std", r.cells[k][c].stddev}, {"count", r.cells[k][c].count}});
    methods.push_back({{"method", to_string(r.methods[k])}, {"components", comps}});
  }
  json runs = json::array();
  for (const auto& rec : r.realizations) {
    json outcomes = json::object();
    for (std::size_t k = 0; k < r.methods.size(); ++k) {
      const auto& o = rec.outcomes[k];
      outcomes[to_string(r.methods[k])] =
          o.failure.empty() ? json{{"errors", o.errors}} : json{{"failure", o.failure}};
    }
    json entry = {{"index", rec.index}, {"seed", rec.seed}, {"outcomes", outcomes}};
    if (rec.snr_db) entry["snr_db"] = *rec.snr_db;
    runs.push_back(entry);
  }
  json j = {{"schema_version", r.schema_version},
            {"preset", r.preset},
            {"components", r.components},
            {"seed_base", r.seed_base},
            {"methods", methods},
            {"realizations", runs}};
  if (r.snr_mean) j["snr"] = {{"mean", *r.snr_mean}, {"std", *r.snr_std}};
  if (include_runtime) j["runtime_seconds"] = r.runtime_seconds;
  return j;
}

/// Methods as columns, components as rows, "mean (std)" per cell.
inline std::string report_markdown(const BenchmarkReport& r) {
  std::ostringstream out;
  char buf[64];
  out << "| IMT |";
  for (Method m : r.methods) out << ' ' << to_string(m) << " |";
  out << "\n|---|";
  for (std::size_t k = 0; k < r.methods.size(); ++k) out << "---|";
  out << '\n';
  if (r.methods.empty()) return out.str();
  for (std::size_t c = 0; c < r.components; ++c) {
    out << "| IMT" << c + 1 << " |";
    for (std::size_t k = 0; k < r.methods.size(); ++k) {
      const auto& cell = r.cells[k][c];
      if (cell.count == 0) {
        out << " n/a |";
        continue;
      }
      if (r.realizations.size() > 1)
        std::snprintf(buf, sizeof buf, " %.4f (%.4f) |", cell.mean, cell.stddev);
      else
        std::snprintf(buf, sizeof buf, " %.4f |", cell.mean);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

inline std::string render_report(const BenchmarkReport& r, ReportFormat format) {
  switch (format) {
    case ReportFormat::csv: return report_csv(r);
    case ReportFormat::json: return report_json(r).dump(2) + "\n";
    case ReportFormat::markdown: return report_markdown(r);
  }
  return {};
}

inline void emit_report(const BenchmarkReport& r, ReportFormat format, const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << render_report(r, format);
  out.flush();
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

}  // namespace sift::bench
