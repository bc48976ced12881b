#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sift/bench.hpp"
#include "sift/io.hpp"
#include "sift/presets.hpp"

using namespace sift;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sift_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(SIFT_CLI_PATH) + " " + args + " > " + (dir_ / "stdout.txt").string() +
                            " 2> " + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const std::string& name) const {
    std::ifstream in(dir_ / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write_two_tones(const std::string& name, double seconds) const {
    const auto grid = SampleGrid::over(seconds, 100.0);
    const auto x = synthesize_real(IMTSpec::tone(1.0), grid) + synthesize_real(IMTSpec::tone(3.0), grid);
    io::write_signal_csv(x, dir_ / name);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, HelpAndUsageErrors) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("decompose"), 2);
  EXPECT_EQ(run("decompose --input x.csv --method wavelet"), 2);
  EXPECT_EQ(run("bench run"), 2);
}

TEST_F(CliTest, BenchRunWritesReports) {
  std::ofstream(dir_ / "exp.conf") << "preset = example1\nduration = 10\nrealizations = 2\nmethods = BPF, SST\n"
                                      "target_snr_db = 5\n";
  ASSERT_EQ(run("bench run --config " + path("exp.conf") + " --seed 3 --out " + path("out")), 0) << read("stderr.txt");
  for (const char* f : {"out/report.csv", "out/report.json", "out/report.md"})
    EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  const auto report = bench::parse_report_csv(read("out/report.csv"));
  EXPECT_EQ(report.seed_base, 3U);
  EXPECT_EQ(report.realizations.size(), 2U);
  EXPECT_EQ(report.realizations[1].seed, 4U);
  EXPECT_NE(read("stdout.txt").find("| IMT | BPF | SST |"), std::string::npos);
  EXPECT_EQ(read("out/report.md"), bench::report_markdown(report));
}

TEST_F(CliTest, BenchSeedOverrideIsDeterministic) {
  std::ofstream(dir_ / "exp.json") << R"({"preset": "example2", "duration": 10, "methods": ["BPF"]})";
  ASSERT_EQ(run("bench run --config " + path("exp.json") + " --seed 9 --out " + path("a")), 0);
  ASSERT_EQ(run("bench run --config " + path("exp.json") + " --seed 9 --workers 2 --out " + path("b")), 0);
  const auto a = bench::parse_report_csv(read("a/report.csv"));
  const auto b = bench::parse_report_csv(read("b/report.csv"));
  EXPECT_TRUE(a.same_results(b));
}

TEST_F(CliTest, BenchConfigErrorsExitTwo) {
  std::ofstream(dir_ / "bad.conf") << "colour = red\n";
  EXPECT_EQ(run("bench run --config " + path("bad.conf")), 2);
  EXPECT_NE(read("stderr.txt").find("colour"), std::string::npos);
  EXPECT_EQ(run("bench run --config " + path("missing.conf")), 2);
  std::ofstream(dir_ / "short.conf") << "duration = 2\n";
  EXPECT_EQ(run("bench run --config " + path("short.conf")), 2);
}

TEST_F(CliTest, DecomposeSift) {
  write_two_tones("x.csv", 12.0);
  ASSERT_EQ(run("decompose --input " + path("x.csv") + " --method sift --out " + path("d")), 0) << read("stderr.txt");
  for (const char* f : {"d/imt_1.csv", "d/imt_2.csv", "d/curve_1.csv", "d/residual.csv", "d/manifest.json"})
    EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  const auto manifest = nlohmann::json::parse(read("d/manifest.json"));
  ASSERT_EQ(manifest["components"].size(), 2U);
  EXPECT_NEAR(manifest["components"][0]["mean_frequency"].get<double>(), 3.0, 0.05);
  EXPECT_NEAR(manifest["components"][1]["mean_frequency"].get<double>(), 1.0, 0.05);
}

TEST_F(CliTest, DecomposeSstAndBpf) {
  write_two_tones("x.csv", 12.0);
  const auto x = io::read_signal_csv<double>(dir_ / "x.csv");
  io::write_signal_binary(x, dir_ / "x.sig");
  for (const std::string method : {"sst", "bpf"}) {
    ASSERT_EQ(run("decompose --input " + path("x.sig") + " --method " + method + " --band-b 0.3 --out " +
                  path(method)),
              0)
        << read("stderr.txt");
    const auto manifest = nlohmann::json::parse(read(method + "/manifest.json"));
    ASSERT_EQ(manifest["components"].size(), 2U) << method;
    EXPECT_NEAR(manifest["components"][0]["mean_frequency"].get<double>(), 3.0, 0.05) << method;
    const auto imt = io::read_signal_csv<double>(dir_ / method / "imt_2.csv");
    EXPECT_EQ(imt.size(), x.size());
  }
}

TEST_F(CliTest, DecomposeNoiseExitsThree) {
  const RealSignal z(std::vector<double>(1500, 0.0), 100.0);
  io::write_signal_csv(add_noise(z, NoiseSpec{1.0, 5}).first, dir_ / "noise.csv");
  EXPECT_EQ(run("decompose --input " + path("noise.csv") + " --method sift --out " + path("n")), 3);
  EXPECT_TRUE(fs::exists(dir_ / "n/manifest.json"));
  EXPECT_EQ(run("decompose --input " + path("noise.csv") + " --method sst --out " + path("n2")), 3);
}

TEST_F(CliTest, DecomposeInputErrors) {
  EXPECT_EQ(run("decompose --input " + path("missing.csv") + " --out " + path("m")), 2);
  write_two_tones("short.csv", 3.0);
  EXPECT_EQ(run("decompose --input " + path("short.csv") + " --out " + path("m")), 2);
  write_two_tones("x.csv", 8.0);
  EXPECT_EQ(run("decompose --input " + path("x.csv") + " --window-len 100 --out " + path("m")), 2);
}

TEST_F(CliTest, TfrExport) {
  write_two_tones("x.csv", 6.0);
  ASSERT_EQ(run("tfr --input " + path("x.csv") + " --method stft --out " + path("t")), 0) << read("stderr.txt");
  const auto grid = io::read_tfr_binary(dir_ / "t/stft.tfr");
  EXPECT_EQ(grid.bins(), 1001U);
  EXPECT_EQ(grid.frames(), 600U);
  EXPECT_TRUE(fs::exists(dir_ / "t/stft_magnitude.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "t/stft_frequencies.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "t/stft_times.csv"));
  ASSERT_EQ(run("tfr --input " + path("x.csv") + " --method sst --window-len 201 --out " + path("t")), 0);
  EXPECT_TRUE(fs::exists(dir_ / "t/sst.tfr"));
  EXPECT_EQ(run("tfr --input " + path("x.csv") + " --method sst --window-len 200 --out " + path("t")), 2);
}
