#pragma once

// File formats: signal CSV and binary, TFR binary and magnitude CSV, curve
// CSV, and JSON manifests for decompositions.
//
// Signal binary (little-endian):
//   "SIFTSIG1" | u32 version | u32 kind (0 real, 1 complex) | f64 sample_rate
//   | f64 start_time | u64 length | samples (f64, or re/im f64 pairs)
// TFR binary (little-endian):
//   "SIFTTFR1" | u64 bins | u64 frames | f64 delta_xi | f64 dt | f64 t0
//   | bins x frames complex pairs, row-major by bin

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sift/alif.hpp"
#include "sift/error.hpp"
#include "sift/sift.hpp"
#include "sift/signal.hpp"
#include "sift/tfr.hpp"

namespace sift::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr std::uint32_t signal_format_version = 1;

/// Shortest round-tripping decimal form.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::ofstream open_out(const fs::path& path, bool binary = false) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  return out;
}

inline std::ifstream open_in(const fs::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  return in;
}

inline void finish(std::ostream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), 8);
}

inline void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b;
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), 4);
}

inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 8)) throw Error(ErrorKind::io, "truncated binary file");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

inline std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw Error(ErrorKind::io, "truncated binary file");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

inline void expect_magic(std::istream& in, const char (&magic)[9], const fs::path& path) {
  char buf[8];
  if (!in.read(buf, 8) || std::string(buf, 8) != std::string(magic, 8))
    throw Error(ErrorKind::io, "bad magic in " + path.string());
}

inline std::vector<double> split_numbers(const std::string& line, std::size_t lineno) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
    } catch (const std::exception&) {
      throw Error(ErrorKind::io, "non-numeric field on line " + std::to_string(lineno));
    }
  }
  return out;
}

template <Sample T>
constexpr std::uint32_t sample_kind() {
  return is_complex_v<T> ? 1U : 0U;
}

}  // namespace detail

// Signals

/// Header "time,value" (real) or "time,re,im" (complex).
template <Sample T>
void write_signal_csv(const Signal<T>& s, const fs::path& path) {
  auto out = detail::open_out(path);
  out << (is_complex_v<T> ? "time,re,im\n" : "time,value\n");
  for (std::size_t j = 0; j < s.size(); ++j) {
    out << format_double(s.time(j));
    if constexpr (is_complex_v<T>)
      out << ',' << format_double(s[j].real()) << ',' << format_double(s[j].imag());
    else
      out << ',' << format_double(s[j]);
    out << '\n';
  }
  detail::finish(out, path);
}

/// Reads either CSV layout. The sample rate is recovered from the time column,
/// which must be uniform. A real reader given a complex file keeps the real part.
template <Sample T>
Signal<T> read_signal_csv(const fs::path& path) {
  auto in = detail::open_in(path);
  std::string line;
  std::vector<double> times;
  std::vector<T> values;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && !line.empty() && (std::isalpha(static_cast<unsigned char>(line[0])) != 0)) continue;
    const auto cells = detail::split_numbers(line, lineno);
    if (cells.size() != 2 && cells.size() != 3)
      throw Error(ErrorKind::io, "expected 2 or 3 columns on line " + std::to_string(lineno));
    times.push_back(cells[0]);
    if constexpr (is_complex_v<T>)
      values.emplace_back(cells[1], cells.size() == 3 ? cells[2] : 0.0);
    else
      values.push_back(cells[1]);
  }
  if (values.empty()) throw Error(ErrorKind::io, "no samples in " + path.string());
  if (values.size() == 1) throw Error(ErrorKind::io, "cannot infer the sample rate from one sample");
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(dt > 0.0)) throw Error(ErrorKind::io, "time column must increase");
  for (std::size_t j = 1; j < times.size(); ++j)
    if (std::abs(times[j] - times[j - 1] - dt) > 1e-6 * dt)
      throw Error(ErrorKind::io, "time column is not uniformly spaced");
  double rate = 1.0 / dt;
  if (std::abs(rate - std::round(rate)) <= 1e-9 * rate) rate = std::round(rate);
  return Signal<T>(std::move(values), rate, times.front());
}

template <Sample T>
void write_signal_binary(const Signal<T>& s, const fs::path& path) {
  auto out = detail::open_out(path, true);
  out.write("SIFTSIG1", 8);
  detail::put_u32(out, signal_format_version);
  detail::put_u32(out, detail::sample_kind<T>());
  detail::put_f64(out, s.sample_rate());
  detail::put_f64(out, s.start_time());
  detail::put_u64(out, s.size());
  for (const auto& v : s.samples()) {
    if constexpr (is_complex_v<T>) {
      detail::put_f64(out, v.real());
      detail::put_f64(out, v.imag());
    } else {
      detail::put_f64(out, v);
    }
  }
  detail::finish(out, path);
}

template <Sample T>
Signal<T> read_signal_binary(const fs::path& path) {
  auto in = detail::open_in(path, true);
  detail::expect_magic(in, "SIFTSIG1", path);
  if (detail::get_u32(in) != signal_format_version) throw Error(ErrorKind::io, "unsupported signal file version");
  const auto kind = detail::get_u32(in);
  if (kind != detail::sample_kind<T>()) throw Error(ErrorKind::io, "sample type differs from the file");
  const double rate = detail::get_f64(in);
  const double start = detail::get_f64(in);
  const auto n = detail::get_u64(in);
  std::vector<T> values;
  values.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(n, 1U << 20)));
  for (std::uint64_t j = 0; j < n; ++j) {
    if constexpr (is_complex_v<T>) {
      const double re = detail::get_f64(in);
      values.emplace_back(re, detail::get_f64(in));
    } else {
      values.push_back(detail::get_f64(in));
    }
  }
  return Signal<T>(std::move(values), rate, start);
}

/// Chooses the reader by extension: ".csv" is text, anything else binary.
inline RealSignal read_signal(const fs::path& path) {
  return path.extension() == ".csv" ? read_signal_csv<double>(path) : read_signal_binary<double>(path);
}

// Time-frequency grids

inline void write_tfr_binary(const TFRGrid& g, const fs::path& path) {
  auto out = detail::open_out(path, true);
  out.write("SIFTTFR1", 8);
  detail::put_u64(out, g.bins());
  detail::put_u64(out, g.frames());
  detail::put_f64(out, g.delta_xi());
  detail::put_f64(out, g.dt());
  detail::put_f64(out, g.t0());
  for (std::size_t q = 0; q < g.bins(); ++q)
    for (std::size_t m = 0; m < g.frames(); ++m) {
      detail::put_f64(out, g.at(q, m).real());
      detail::put_f64(out, g.at(q, m).imag());
    }
  detail::finish(out, path);
}

inline TFRGrid read_tfr_binary(const fs::path& path) {
  auto in = detail::open_in(path, true);
  detail::expect_magic(in, "SIFTTFR1", path);
  const auto bins = detail::get_u64(in);
  const auto frames = detail::get_u64(in);
  const double dxi = detail::get_f64(in);
  const double dt = detail::get_f64(in);
  const double t0 = detail::get_f64(in);
  TFRGrid g(bins, frames, dxi, dt, t0);
  for (std::size_t q = 0; q < bins; ++q)
    for (std::size_t m = 0; m < frames; ++m) {
      const double re = detail::get_f64(in);
      g.at(q, m) = complex(re, detail::get_f64(in));
    }
  return g;
}

/// |S| with one row per frequency bin and one column per frame.
inline void write_magnitude_csv(const TFRGrid& g, const fs::path& path) {
  auto out = detail::open_out(path);
  for (std::size_t q = 0; q < g.bins(); ++q) {
    for (std::size_t m = 0; m < g.frames(); ++m) {
      if (m > 0) out << ',';
      out << format_double(std::abs(g.at(q, m)));
    }
    out << '\n';
  }
  detail::finish(out, path);
}

inline std::vector<std::vector<double>> read_matrix_csv(const fs::path& path) {
  auto in = detail::open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) rows.push_back(detail::split_numbers(line, lineno));
  }
  return rows;
}

inline void write_column(const std::vector<double>& v, const fs::path& path) {
  auto out = detail::open_out(path);
  for (double x : v) out << format_double(x) << '\n';
  detail::finish(out, path);
}

struct PlotFiles {
  fs::path magnitude;
  fs::path frequencies;
  fs::path times;
};

/// Magnitude matrix plus one-column axis files, named <stem>_magnitude.csv,
/// <stem>_frequencies.csv and <stem>_times.csv inside `dir`.
inline PlotFiles emit_tfr_plotdata(const TFRGrid& g, const fs::path& dir, const std::string& stem = "tfr") {
  PlotFiles files{dir / (stem + "_magnitude.csv"), dir / (stem + "_frequencies.csv"), dir / (stem + "_times.csv")};
  write_magnitude_csv(g, files.magnitude);
  std::vector<double> f(g.bins());
  for (std::size_t q = 0; q < g.bins(); ++q) f[q] = g.frequency(q);
  std::vector<double> t(g.frames());
  for (std::size_t m = 0; m < g.frames(); ++m) t[m] = g.time(m);
  write_column(f, files.frequencies);
  write_column(t, files.times);
  return files;
}

// Curves

/// Frames are taken to sit on `frames` (one per sample, as produced here).
inline void write_curve_csv(const SampleGrid& frames, const IFCurve& c, const fs::path& path) {
  if (c.size() != frames.length) throw Error(ErrorKind::invalid_curve, "curve length differs from frames");
  auto out = detail::open_out(path);
  out << "frame_time,frequency_Hz\n";
  for (std::size_t m = 0; m < c.size(); ++m)
    out << format_double(frames.time(m)) << ',' << format_double(c.frequencies[m]) << '\n';
  detail::finish(out, path);
}

inline void write_curve_csv(const TFRGrid& g, const IFCurve& c, const fs::path& path) {
  write_curve_csv(SampleGrid{1.0 / g.dt(), g.t0(), g.frames()}, c, path);
}

/// Returns (frame_time, frequency) pairs.
inline std::vector<std::pair<double, double>> read_curve_csv(const fs::path& path) {
  auto in = detail::open_in(path);
  std::vector<std::pair<double, double>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 || line.empty()) continue;
    const auto cells = detail::split_numbers(line, lineno);
    if (cells.size() != 2) throw Error(ErrorKind::io, "curve rows need two columns");
    out.emplace_back(cells[0], cells[1]);
  }
  return out;
}

// Manifests

inline json to_json(const ALIFConfig& c) {
  const char* ext = c.boundary_extension == BoundaryExtension::reflect    ? "reflect"
                    : c.boundary_extension == BoundaryExtension::periodic ? "periodic"
                                                                          : "none";
  return {{"stop_tolerance", c.stop_tolerance},
          {"max_inner_iterations", c.max_inner_iterations},
          {"max_outer_components", c.max_outer_components},
          {"boundary_extension", ext}};
}

inline json to_json(const SIFTConfig& c) {
  const char* test = c.oscillation_test == OscillationTest::extrema_count  ? "extrema_count"
                     : c.oscillation_test == OscillationTest::ridge_energy ? "ridge_energy"
                                                                           : "component_cap";
  return {{"xi", c.xi},
          {"max_components", c.max_components},
          {"oscillation_test", test},
          {"window", {{"length", c.window.length}, {"support", c.window.support}}},
          {"sst",
           {{"delta_xi", c.sst.delta_xi},
            {"magnitude_threshold", c.sst.magnitude_threshold},
            {"max_frequency", c.sst.max_frequency}}},
          {"extraction",
           {{"lambda", c.extraction.lambda},
            {"prior_halfwidth", c.extraction.prior_halfwidth},
            {"max_jump", c.extraction.max_jump}}},
          {"alif", to_json(c.alif)},
          {"priors", c.priors.size()},
          {"meaningful_ratio", c.meaningful_ratio},
          {"median_width", c.median_width},
          {"min_frequency", c.min_frequency},
          {"min_remainder", c.min_remainder},
          {"guard",
           {{"enabled", c.guard.enabled},
            {"ratio", c.guard.ratio},
            {"xi", c.guard.xi},
            {"iterations", c.guard.iterations}}}};
}

inline void write_json(const json& j, const fs::path& path) {
  auto out = detail::open_out(path);
  out << j.dump(2) << '\n';
  detail::finish(out, path);
}

/// imt_<k>.csv per component, trend.csv and manifest.json in `dir`.
template <Sample T>
json write_decomposition(const Decomposition<T>& d, const ALIFConfig& config, const fs::path& dir) {
  json files = json::array();
  for (std::size_t k = 0; k < d.imts.size(); ++k) {
    const std::string name = "imt_" + std::to_string(k + 1) + ".csv";
    write_signal_csv(d.imts[k], dir / name);
    files.push_back(name);
  }
  write_signal_csv(d.trend, dir / "trend.csv");
  json manifest = {{"components", d.imts.size()},
                   {"iterations_used", d.iterations_used},
                   {"complete", d.complete},
                   {"failure", d.failure},
                   {"files", files},
                   {"trend", "trend.csv"},
                   {"config", to_json(config)}};
  write_json(manifest, dir / "manifest.json");
  return manifest;
}

/// Components, residual, guard content, curves and manifest.json in `dir`.
template <Sample T>
json write_sift_result(const SIFTResult<T>& r, const SIFTConfig& config, const fs::path& dir) {
  json components = json::array();
  for (std::size_t k = 0; k < r.imts.size(); ++k) {
    const std::string imt = "imt_" + std::to_string(k + 1) + ".csv";
    const std::string curve = "curve_" + std::to_string(k + 1) + ".csv";
    write_signal_csv(r.imts[k], dir / imt);
    write_curve_csv(r.residual.grid(), r.curves[k], dir / curve);
    const auto& d = r.diagnostics[k];
    components.push_back({{"signal", imt},
                          {"curve", curve},
                          {"inner_iterations", d.inner_iterations},
                          {"converged", d.converged},
                          {"mean_frequency", d.mean_frequency}});
  }
  write_signal_csv(r.residual, dir / "residual.csv");
  write_signal_csv(r.guard_content, dir / "guard_content.csv");
  json manifest = {{"components", components},
                   {"residual", "residual.csv"},
                   {"guard_content", "guard_content.csv"},
                   {"complete", r.complete},
                   {"note", r.note},
                   {"config", to_json(config)}};
  write_json(manifest, dir / "manifest.json");
  return manifest;
}

}  // namespace sift::io
