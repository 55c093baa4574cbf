#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ibnr/config.hpp"
#include "ibnr/errors.hpp"
#include "ibnr/harness.hpp"

namespace ibnr {

enum class Command { simulate, fit, reserve, backtest, validate };

Command parse_command(const std::string& name);
const char* to_string(Command command) noexcept;

struct ValidateOptions {
  double tau = 30.0;
  std::size_t identity_replicates = 10000;
  std::vector<InclusionProfile> profiles{{{0.0}, {0.5}}, {{0.0, 2.0, 6.0}, {0.2, 0.6, 0.9}}};
  std::size_t robustness_replicates = 400;
  double distortion = 1.3;
  double severity_bias = 1.5;
  double cohort_width = 1.0;
};

struct RunConfig {
  Command command = Command::backtest;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::filesystem::path output_dir = "out";
  std::optional<SimConfig> simulation;
  std::optional<std::filesystem::path> claims_path;
  std::optional<std::filesystem::path> policies_path;
  std::optional<std::string> inclusion_column;  // claims column holding fixed probabilities
  std::optional<double> tau;
  std::vector<double> grid;
  std::vector<EstimatorKind> estimators;
  PipelineOptions pipeline;
  RefitPolicy refit = RefitPolicy::every_date;
  ValidateOptions validate;
};

/// Relative data paths resolve against `base_dir`. Unknown keys are rejected.
RunConfig run_config_from_json(const Json& j, Command command, const std::filesystem::path& base_dir = {});

/// Checks that the inputs the command needs are present and consistent.
void check_run_config(const RunConfig& config);

/// Steps and output files of a run, without executing it.
Json execution_plan(const RunConfig& config);

/// Output files relative to the output directory, with their contents.
struct RunOutput {
  std::vector<std::pair<std::string, std::string>> files;
};

/// Computes every output in memory; nothing is written.
RunOutput execute(const RunConfig& config);

/// Creates the output directory and writes the files.
void write_outputs(const std::filesystem::path& dir, const RunOutput& output);

/// Process exit code for a failure category; 0 is success, 1 an unexpected
/// error and 2 a command-line usage error.
int exit_code(ErrorKind kind) noexcept;

/// {"error": kind, "message": ..., "exit_code": n}
std::string error_json(ErrorKind kind, const std::string& message);

}  // namespace ibnr
