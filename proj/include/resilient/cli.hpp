#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "resilient/model.hpp"
#include "resilient/settings.hpp"
#include "resilient/simulator.hpp"

namespace resilient::cli {

/// Exit codes shared by all commands.
enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kNotStable = 2,   ///< verify/simulate: unstable; synth: feasible but uncertified
  kInfeasible = 3,
  kNumericalFailure = 4,
};

/// Malformed or schema-invalid input; the message names the field or line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigFile {
  AttackedSystem system;
  std::optional<std::vector<double>> x0;
  std::optional<std::vector<double>> xhat0;
  NumericSettings settings;
  std::string digest;  ///< FNV-1a 64 of the raw bytes, "fnv1a64:<hex>"
};

ConfigFile parse_config(std::string_view text);
ConfigFile load_config(const std::filesystem::path& path);

struct GainsFile {
  Gains gains;
  std::optional<Matrix> Q1;
  std::optional<Matrix> Q2;
  std::optional<double> lmi_margin;
  std::optional<double> oracle_rho;
};

GainsFile parse_gains(std::string_view text);
GainsFile load_gains(const std::filesystem::path& path);
/// JSON with every number printed with 17 significant digits.
std::string format_gains(const GainsFile& gains);

std::string digest_bytes(std::string_view bytes);
/// printf("%.17g"); round-trips every finite double.
std::string format_number(double v);

struct SynthOptions {
  std::filesystem::path config;
  std::filesystem::path gains_out = "gains.json";
  std::optional<std::filesystem::path> report_out;
};

struct VerifyOptions {
  std::filesystem::path config;
  std::filesystem::path gains;
  std::optional<std::filesystem::path> report_out;
};

struct SimulateOptions {
  std::filesystem::path config;
  std::filesystem::path gains;
  int runs = 1000;
  int steps = 100;
  std::uint64_t seed = 42;
  std::filesystem::path out_dir = ".";
  std::optional<std::filesystem::path> report_out;
  unsigned threads = 0;
};

int cmd_synth(const SynthOptions& opts, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyOptions& opts, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err);

/// Writes trajectories in the documented CSV layout.
void write_trajectories_csv(std::ostream& os, const PlantModel& plant,
                            const std::vector<TrajectoryRecord>& records);
void write_mean_square_csv(std::ostream& os, const MsEstimate& estimate);

/// Full command-line entry point (argv[0] is the program name).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace resilient::cli
