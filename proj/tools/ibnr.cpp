#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "ibnr/cli.hpp"

namespace {

constexpr const char* exit_codes = R"(Exit codes:
  0  success
  1  unexpected error
  2  command-line usage error
  3  invalid-argument (bad config value, missing input)
  4  schema-mismatch (CSV or model file layout)
  5  unknown-estimator
  6  convergence-failure
  7  estimator-undefined
  8  undefined-cohort
  9  degenerate-fit
  10 singular-design
  11 undefined-distribution
  12 io-error
Errors are also printed to stderr as one JSON object.)";

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> estimators;
  std::optional<double> tau;
  bool dry_run = false;
};

ibnr::Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ibnr::IoError("cannot open config " + path);
  try {
    return ibnr::Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ibnr::InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
}

int run(ibnr::Command command, const Flags& f) {
  const auto json = load_json(f.config);
  auto config = ibnr::run_config_from_json(json, command, std::filesystem::path(f.config).parent_path());
  if (f.out) config.output_dir = *f.out;
  if (f.seed) {
    config.seed = *f.seed;
    config.pipeline.bootstrap_seed = *f.seed;
  }
  if (f.threads) config.threads = config.pipeline.threads = *f.threads;
  if (f.estimators) config.estimators = ibnr::parse_estimator_list(*f.estimators);
  if (f.tau) {
    config.tau = *f.tau;
    if (command != ibnr::Command::backtest) config.grid.clear();
  }
  ibnr::check_run_config(config);
  if (f.dry_run) {
    std::cout << ibnr::execution_plan(config).dump(2) << "\n";
    return 0;
  }
  const auto output = ibnr::execute(config);
  ibnr::write_outputs(config.output_dir, output);
  for (const auto& [name, text] : output.files) std::cout << (config.output_dir / name).string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Micro-level IBNR reserving: simulate, fit, reserve, backtest, validate"};
  app.footer(exit_codes);
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<ibnr::Command, std::string>> commands{
      {ibnr::Command::simulate, "Simulate a portfolio and write claims, policies and ground truth"},
      {ibnr::Command::fit, "Fit delay, frequency and severity models at one valuation date"},
      {ibnr::Command::reserve, "Evaluate reserve estimators at one valuation date"},
      {ibnr::Command::backtest, "Evaluate estimators over a valuation grid against realized reserves"},
      {ibnr::Command::validate, "Monte Carlo checks of the odds-weighting identity and double robustness"}};
  std::optional<ibnr::Command> chosen;
  for (const auto& [command, help] : commands) {
    auto* sub = app.add_subcommand(ibnr::to_string(command), help);
    sub->add_option("--config", flags.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_option("--seed", flags.seed, "Random seed");
    sub->add_option("--threads", flags.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--estimators", flags.estimators, "Comma-separated estimator names");
    sub->add_option("--tau", flags.tau, "Valuation date");
    sub->add_flag("--dry-run", flags.dry_run, "Validate the config and print the plan");
    sub->callback([&chosen, command = command] { chosen = command; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    return run(*chosen, flags);
  } catch (const ibnr::Error& e) {
    std::cerr << ibnr::error_json(e.kind(), e.what()) << "\n";
    return ibnr::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << R"({"error":"internal","message":)" << ibnr::Json(e.what()).dump() << R"(,"exit_code":1})" << "\n";
    return 1;
  }
}
