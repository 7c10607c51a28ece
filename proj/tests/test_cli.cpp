#include "resilient/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

namespace resilient::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const fs::path kConfig = fs::path(RESILIENT_SOURCE_DIR) / "configs" / "paper_sec4.json";
const fs::path kReferenceGains = fs::path(RESILIENT_SOURCE_DIR) / "configs" / "paper_sec4_gains.json";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("resilient_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

  json config_json() const { return json::parse(slurp(kConfig)); }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, SynthWritesCertifiedGains) {
  const fs::path gains = dir_ / "gains.json";
  EXPECT_EQ(cmd_synth({kConfig, gains, dir_ / "report.json"}, out_, err_), kOk) << err_.str();
  const auto report = json::parse(out_.str());
  EXPECT_EQ(report, json::parse(slurp(dir_ / "report.json")));
  EXPECT_EQ(report["status"], "certified");
  EXPECT_GT(report["lmi_margin"].get<double>(), 0.0);
  EXPECT_LT(report["oracle_rho"].get<double>(), 1.0);
  EXPECT_EQ(report["config_digest"], digest_bytes(slurp(kConfig)));

  const auto file = load_gains(gains);
  EXPECT_EQ(file.gains.K.rows(), 2);
  EXPECT_TRUE(file.Q1.has_value());
  // Round trip through the printed form is exact.
  EXPECT_EQ(format_gains(file), slurp(gains));
}

TEST_F(CliTest, SynthIsBitReproducible) {
  ASSERT_EQ(cmd_synth({kConfig, dir_ / "a.json", {}}, out_, err_), kOk);
  ASSERT_EQ(cmd_synth({kConfig, dir_ / "b.json", {}}, out_, err_), kOk);
  EXPECT_EQ(slurp(dir_ / "a.json"), slurp(dir_ / "b.json"));
}

TEST_F(CliTest, SynthRejectsOutOfRangeField) {
  auto cfg = config_json();
  cfg["sensors"][1]["alpha_mean"] = 1.5;
  const auto path = write("bad.json", cfg.dump());
  EXPECT_EQ(cmd_synth({path, dir_ / "g.json", {}}, out_, err_), kInputError);
  EXPECT_NE(err_.str().find("sensors[1]"), std::string::npos) << err_.str();
  EXPECT_FALSE(fs::exists(dir_ / "g.json"));
  EXPECT_EQ(json::parse(out_.str())["exit_code"], 1);
}

TEST_F(CliTest, SynthMalformedJsonAndMissingFile) {
  EXPECT_EQ(cmd_synth({write("broken.json", "{\"plant\": [1,"), dir_ / "g.json", {}}, out_, err_),
            kInputError);
  EXPECT_EQ(cmd_synth({dir_ / "absent.json", dir_ / "g.json", {}}, out_, err_), kInputError);
  auto cfg = config_json();
  cfg["plant"].erase("B");
  EXPECT_EQ(cmd_synth({write("nob.json", cfg.dump()), dir_ / "g.json", {}}, out_, err_), kInputError);
}

TEST_F(CliTest, SynthHopelessSystem) {
  auto cfg = config_json();
  for (auto& s : cfg["sensors"]) s = {{"alpha_mean", 0.0}, {"beta_mean", 0.0}, {"beta_var", 25.0}, {"beta_dist", "gaussian"}};
  for (auto& a : cfg["actuators"]) a = {{"gamma_mean", 0.0}, {"delta_mean", 0.0}, {"delta_var", 25.0}, {"delta_dist", "gaussian"}};
  const int code = cmd_synth({write("hopeless.json", cfg.dump()), dir_ / "g.json", {}}, out_, err_);
  EXPECT_TRUE(code == kInfeasible || code == kNotStable) << code;
  EXPECT_NE(json::parse(out_.str())["certified"], true);
}

TEST_F(CliTest, VerifyExitCodes) {
  EXPECT_EQ(cmd_verify({kConfig, kReferenceGains, {}}, out_, err_), kOk) << err_.str();
  EXPECT_NEAR(json::parse(out_.str())["oracle_rho"].get<double>(), 0.66282958222852206, 1e-9);

  const auto zero = write("zero.json", R"({"K": [[0,0,0],[0,0,0]], "L": [[0,0],[0,0],[0,0]]})");
  std::ostringstream out2;
  EXPECT_EQ(cmd_verify({kConfig, zero, {}}, out2, err_), kNotStable);
  EXPECT_EQ(json::parse(out2.str())["status"], "unstable");

  const auto wrong = write("wrong.json", R"({"K": [[0,0],[0,0]], "L": [[0,0],[0,0],[0,0]]})");
  EXPECT_EQ(cmd_verify({kConfig, wrong, {}}, out_, err_), kInputError);
}

TEST_F(CliTest, SimulateOutputs) {
  SimulateOptions opts;
  opts.config = kConfig;
  opts.gains = kReferenceGains;
  opts.runs = 20;
  opts.steps = 50;
  opts.out_dir = dir_ / "sim";
  EXPECT_EQ(cmd_simulate(opts, out_, err_), kOk) << err_.str();
  const std::string traj = slurp(opts.out_dir / "trajectories.csv");
  const std::string ms = slurp(opts.out_dir / "mean_square.csv");
  EXPECT_EQ(count_lines(traj), 1u + 20u * 51u);
  EXPECT_EQ(count_lines(ms), 1u + 51u);
  EXPECT_EQ(traj.substr(0, traj.find('\n')),
            "run,k,x1,x2,x3,xhat1,xhat2,xhat3,u1,u2,ytilde1,ytilde2,alpha1,alpha2,gamma1,gamma2");
  EXPECT_EQ(ms.substr(0, ms.find('\n')), "k,mean_square");
  const auto report = json::parse(out_.str());
  EXPECT_EQ(report["status"], "stable");
  EXPECT_EQ(report["runs"], 20);

  // Same seed, different thread count: identical files.
  opts.out_dir = dir_ / "sim2";
  opts.threads = 3;
  EXPECT_EQ(cmd_simulate(opts, out_, err_), kOk);
  EXPECT_EQ(slurp(opts.out_dir / "trajectories.csv"), traj);
  EXPECT_EQ(slurp(opts.out_dir / "mean_square.csv"), ms);
}

TEST_F(CliTest, SimulateExitCodes) {
  SimulateOptions opts;
  opts.config = kConfig;
  opts.gains = write("zero.json", R"({"K": [[0,0,0],[0,0,0]], "L": [[0,0],[0,0],[0,0]]})");
  opts.runs = 5;
  opts.steps = 40;
  opts.out_dir = dir_;
  EXPECT_EQ(cmd_simulate(opts, out_, err_), kNotStable);

  opts.gains = kReferenceGains;
  opts.runs = 0;
  EXPECT_EQ(cmd_simulate(opts, out_, err_), kInputError);

  auto cfg = config_json();
  cfg.erase("x0");
  opts.config = write("nox0.json", cfg.dump());
  opts.runs = 5;
  EXPECT_EQ(cmd_simulate(opts, out_, err_), kInputError);
}

TEST_F(CliTest, CommandLineEntryPoint) {
  const std::string gains = (dir_ / "g.json").string();
  const std::string cfg = kConfig.string();
  const char* synth[] = {"resilient-lmi", "synth", cfg.c_str(), "-g", gains.c_str()};
  EXPECT_EQ(run(5, synth, out_, err_), kOk) << err_.str();
  EXPECT_TRUE(fs::exists(gains));

  const char* verify[] = {"resilient-lmi", "verify", cfg.c_str(), gains.c_str()};
  EXPECT_EQ(run(4, verify, out_, err_), kOk);

  const std::string outdir = (dir_ / "out").string();
  const char* sim[] = {"resilient-lmi", "simulate", cfg.c_str(), gains.c_str(), "--runs", "10",
                       "--steps", "20", "--seed", "7", "--out", outdir.c_str()};
  EXPECT_EQ(run(12, sim, out_, err_), kOk) << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "out" / "mean_square.csv"));

  const char* bogus[] = {"resilient-lmi", "frobnicate"};
  EXPECT_EQ(run(2, bogus, out_, err_), kInputError);
  const char* help[] = {"resilient-lmi", "--help"};
  EXPECT_EQ(run(2, help, out_, err_), kOk);
}

TEST(Digest, KnownValues) {
  // FNV-1a 64 reference values.
  EXPECT_EQ(digest_bytes(""), "fnv1a64:cbf29ce484222325");
  EXPECT_EQ(digest_bytes("a"), "fnv1a64:af63dc4c8601ec8c");
}

TEST(FormatNumber, RoundTrips) {
  for (double v : {0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0}) EXPECT_EQ(std::stod(format_number(v)), v);
}

TEST(ParseConfig, DefaultsAndSolverBlock) {
  const auto cfg = parse_config(R"({
    "plant": {"A": [[0.5]], "B": [[1]], "C": [[1]]},
    "sensors": [{"alpha_mean": 0.9, "beta_mean": 1.0}],
    "actuators": [{"gamma_mean": 1.0, "delta_mean": 0.0, "delta_var": 0.1, "delta_dist": "uniform"}],
    "solver": {"eps_strict": 1e-6}
  })");
  EXPECT_EQ(cfg.system.sensor_channels[0].injection_variance, 0.0);
  EXPECT_EQ(cfg.system.actuator_channels[0].injection_distribution, InjectionDistribution::uniform);
  EXPECT_EQ(cfg.settings.eps_strict, 1e-6);
  EXPECT_FALSE(cfg.x0.has_value());
  EXPECT_THROW(parse_config(R"({"plant": {"A": [[0.5]], "B": [[1]], "C": [[1]]}, "sensors": [], "actuators": [], "solver": {"max_iter": -3}})"),
               ConfigError);
}

}  // namespace
}  // namespace resilient::cli
