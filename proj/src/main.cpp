#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "infodyn/config.hpp"
#include "infodyn/errors.hpp"
#include "infodyn/pipeline.hpp"
#include "infodyn/scenarios.hpp"
#include "infodyn/var_model.hpp"

namespace {

using namespace infodyn;

struct GlobalFlags {
  std::uint64_t seed = 0;
  bool seed_set = false;
  int grid = 0;  // 0 = keep the config/subcommand default
  std::string log_base;
  int jobs = 1;
};

void apply_overrides(AnalysisConfig& config, const GlobalFlags& flags) {
  if (flags.seed_set) config.seed = flags.seed;
  if (flags.grid > 0) config.grid = flags.grid;
  if (!flags.log_base.empty()) {
    config.log_base =
        flags.log_base == "bits" ? LogBase::kBits : LogBase::kNats;
  }
}

int run_simulate(const std::string& scenario_name, const std::string& model_path,
                 long length, long transient, std::uint64_t seed,
                 const std::string& out_path) {
  VarModel model;
  if (!scenario_name.empty()) {
    model = build_scenario(scenario_name).model;
  } else {
    model = parse_model_file(model_path);
  }
  const TimeSeriesData data = simulate(model, length, transient, seed);
  write_csv(data, out_path);
  std::printf("wrote %ld samples x %d channels (fs = %g Hz) to %s\n",
              data.length(), data.channels(), data.fs, out_path.c_str());
  return 0;
}

int run_analyze(const std::string& data_path, const std::string& config_path,
                const std::string& out_dir, double fs_override,
                const GlobalFlags& flags) {
  AnalysisConfig config = AnalysisConfig::parse_file(config_path);
  apply_overrides(config, flags);
  if (!out_dir.empty()) config.output_dir = out_dir;
  if (fs_override > 0.0) config.fs = fs_override;
  config.validate();
  const TimeSeriesData data = ingest_csv(data_path, config.fs, config.header);
  const ResultBundle bundle = run_pipeline(config, data, flags.jobs, data_path);
  for (const std::string& path : emit(bundle)) {
    std::printf("wrote %s\n", path.c_str());
  }
  return 0;
}

int run_significance(const std::string& data_path,
                     const std::string& config_path, const std::string& out_dir,
                     double fs_override, const GlobalFlags& flags) {
  AnalysisConfig config = AnalysisConfig::parse_file(config_path);
  apply_overrides(config, flags);
  if (!out_dir.empty()) config.output_dir = out_dir;
  if (fs_override > 0.0) config.fs = fs_override;
  config.validate();
  if (!config.any_significance()) {
    throw validation_error(
        "significance: config requests no measures (set significance = "
        "er,mir,oir or all)");
  }
  const TimeSeriesData data = ingest_csv(data_path, config.fs, config.header);
  const ResultBundle bundle = run_pipeline(config, data, flags.jobs, data_path);

  namespace stdfs = std::filesystem;
  const stdfs::path dir(bundle.config.output_dir);
  std::error_code ec;
  stdfs::create_directories(dir, ec);
  if (ec) {
    throw validation_error("cannot create output directory " + dir.string());
  }
  const std::string report_path = (dir / "significance_report.json").string();
  const std::string prov_path = (dir / "provenance.json").string();
  {
    std::ofstream out(report_path, std::ios::binary);
    if (!out) throw validation_error("cannot write file: " + report_path);
    out << significance_json_text(bundle);
  }
  {
    std::ofstream out(prov_path, std::ios::binary);
    if (!out) throw validation_error("cannot write file: " + prov_path);
    out << provenance_json_text(bundle);
  }
  std::printf("wrote %s\nwrote %s\n", report_path.c_str(), prov_path.c_str());
  return 0;
}

int run_benchmark(const std::string& scenario_name, const std::string& mode,
                  const std::string& estimator, long length, long transient,
                  int var_order, int wc_tau, const GlobalFlags& flags) {
  std::vector<std::string> names;
  if (scenario_name == "all") {
    names = scenario_names();
  } else {
    names.push_back(scenario_name);
  }

  RunOptions options;
  options.mode = mode == "estimated" ? RunMode::kEstimated : RunMode::kTrueParams;
  options.grid_points = flags.grid > 0 ? flags.grid : 1024;
  options.length = length;
  options.transient = transient;
  options.seed = flags.seed_set ? flags.seed : 1;
  options.jobs = flags.jobs;
  options.estimator.kind =
      estimator == "wc" ? EstimatorKind::kWc : EstimatorKind::kVar;
  options.estimator.var_order = var_order;
  options.estimator.wc_tau = wc_tau;

  bool all_pass = true;
  int total = 0;
  int passed = 0;
  for (const std::string& name : names) {
    const Scenario scenario = build_scenario(name);
    const ScenarioResult result = run_scenario(scenario, options);
    std::printf("%s (%s)\n", result.scenario.c_str(),
                options.mode == RunMode::kTrueParams ? "TRUE_PARAMS"
                                                     : "ESTIMATED");
    for (const Verdict& v : result.verdicts) {
      std::printf("  %s %s -- %s\n", v.passed ? "PASS" : "FAIL",
                  v.description.c_str(), v.detail.c_str());
      ++total;
      if (v.passed) ++passed;
    }
    all_pass = all_pass && result.all_pass;
  }
  std::printf("%d/%d expectations passed\n", passed, total);
  return all_pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"infodyn: spectral information rates for dynamic networks"};
  app.set_version_flag("--version", std::string("infodyn ") + kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags flags;
  app.add_option("--seed", flags.seed, "master random seed");
  app.add_option("--grid", flags.grid, "frequency grid points");
  app.add_option("--log-base", flags.log_base, "reporting log base")
      ->check(CLI::IsMember({"nats", "bits"}));
  app.add_option("--jobs", flags.jobs, "worker thread count")
      ->check(CLI::PositiveNumber);

  // simulate
  auto* simulate_cmd =
      app.add_subcommand("simulate", "generate CSV data from a model");
  std::string sim_scenario;
  std::string sim_model;
  long sim_length = 10000;
  long sim_transient = 1000;
  std::string sim_out;
  simulate_cmd->add_option("--scenario", sim_scenario, "built-in scenario name")
      ->check(CLI::IsMember(scenario_names()));
  simulate_cmd->add_option("--model", sim_model, "model specification file")
      ->check(CLI::ExistingFile);
  simulate_cmd->add_option("--length", sim_length, "samples to generate")
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--transient", sim_transient, "burn-in samples")
      ->check(CLI::NonNegativeNumber);
  simulate_cmd->add_option("--out", sim_out, "output CSV path")->required();

  // analyze
  auto* analyze_cmd =
      app.add_subcommand("analyze", "run the full analysis pipeline");
  std::string ana_data;
  std::string ana_config;
  std::string ana_out_dir;
  double ana_fs = 0.0;
  analyze_cmd->add_option("--data", ana_data, "input CSV")
      ->required()
      ->check(CLI::ExistingFile);
  analyze_cmd->add_option("--config", ana_config, "analysis config file")
      ->required()
      ->check(CLI::ExistingFile);
  analyze_cmd->add_option("--out-dir", ana_out_dir,
                          "output directory (overrides config)");
  analyze_cmd->add_option("--fs", ana_fs, "sampling rate override in Hz");

  // benchmark
  auto* bench_cmd =
      app.add_subcommand("benchmark", "run built-in scenario regressions");
  std::string bench_scenario = "all";
  std::string bench_mode = "true";
  std::string bench_estimator = "var";
  long bench_length = 10000;
  long bench_transient = 1000;
  int bench_var_order = 0;
  int bench_wc_tau = 0;
  {
    std::vector<std::string> choices = scenario_names();
    choices.push_back("all");
    bench_cmd->add_option("--scenario", bench_scenario, "scenario or all")
        ->check(CLI::IsMember(choices));
  }
  bench_cmd->add_option("--mode", bench_mode, "true or estimated")
      ->check(CLI::IsMember({"true", "estimated"}));
  bench_cmd->add_option("--estimator", bench_estimator,
                        "estimator for ESTIMATED mode")
      ->check(CLI::IsMember({"var", "wc"}));
  bench_cmd->add_option("--length", bench_length, "ESTIMATED mode samples")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--transient", bench_transient, "burn-in samples")
      ->check(CLI::NonNegativeNumber);
  bench_cmd->add_option("--var-order", bench_var_order,
                        "VAR order (0 = true model order)");
  bench_cmd->add_option("--wc-tau", bench_wc_tau,
                        "WC truncation lag (0 = default 50)");

  // significance
  auto* sig_cmd = app.add_subcommand(
      "significance", "run only the statistical validation reports");
  std::string sig_data;
  std::string sig_config;
  std::string sig_out_dir;
  double sig_fs = 0.0;
  sig_cmd->add_option("--data", sig_data, "input CSV")
      ->required()
      ->check(CLI::ExistingFile);
  sig_cmd->add_option("--config", sig_config, "analysis config file")
      ->required()
      ->check(CLI::ExistingFile);
  sig_cmd->add_option("--out-dir", sig_out_dir,
                      "output directory (overrides config)");
  sig_cmd->add_option("--fs", sig_fs, "sampling rate override in Hz");

  CLI11_PARSE(app, argc, argv);
  flags.seed_set = app.count("--seed") > 0;

  try {
    if (simulate_cmd->parsed()) {
      if (sim_scenario.empty() == sim_model.empty()) {
        throw validation_error(
            "simulate: give exactly one of --scenario and --model");
      }
      return run_simulate(sim_scenario, sim_model, sim_length, sim_transient,
                          flags.seed_set ? flags.seed : 1, sim_out);
    }
    if (analyze_cmd->parsed()) {
      return run_analyze(ana_data, ana_config, ana_out_dir, ana_fs, flags);
    }
    if (bench_cmd->parsed()) {
      return run_benchmark(bench_scenario, bench_mode, bench_estimator,
                           bench_length, bench_transient, bench_var_order,
                           bench_wc_tau, flags);
    }
    if (sig_cmd->parsed()) {
      return run_significance(sig_data, sig_config, sig_out_dir, sig_fs, flags);
    }
  } catch (const validation_error& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 1;
  } catch (const numerical_error& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 2;
  } catch (const estimation_error& e) {
    std::fprintf(stderr, "estimation error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
