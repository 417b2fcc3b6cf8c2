// strtd command line: impute, sweep, diagnose, mask, synth.

#include <CLI11.hpp>
#include <algorithm>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "strtd/experiment.hpp"
#include "strtd/io.hpp"
#include "strtd/metrics.hpp"
#include "strtd/scenarios.hpp"

namespace {

using namespace strtd;

// Every config key gets a flag of the same name (underscores become dashes).
const std::vector<std::string> kConfigKeys = {
    "input",           "sensors",   "slots",        "days",      "scenario",     "missing_ratio", "block_length",
    "window_fraction", "mask_file", "regularizers", "betas",     "neighbors",    "bandwidth",     "alpha",
    "gamma",           "tol",       "max_iters",    "core_dims", "missing_fill", "seed",          "output",
    "sweep_ratios",    "threads"};

struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
  cmd->add_option("-c,--config", flags.config_path, "key = value config file")->check(CLI::ExistingFile);
  for (const auto& key : kConfigKeys) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    cmd->add_option(flag, flags.values[key], "overrides '" + key + "'");
  }
}

ExperimentConfig resolve(const CLI::App* cmd, const ConfigFlags& flags) {
  ExperimentConfig cfg = flags.config_path.empty() ? ExperimentConfig{} : load_config(flags.config_path);
  for (const auto& key : kConfigKeys) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (cmd->count(flag) > 0) apply_config_value(cfg, key, flags.values.at(key), flag);
  }
  return cfg;
}

Extents parse_dims(const std::string& text) {
  Extents dims;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) dims.push_back(static_cast<std::size_t>(std::stoul(part)));
  if (dims.empty()) throw std::invalid_argument("empty extents '" + text + "'");
  return dims;
}

void write_series(const std::filesystem::path& path, const std::string& header, const std::vector<double>& xs) {
  std::ostringstream os;
  os << header << ",cdf\n";
  for (std::size_t k = 0; k < xs.size(); ++k) {
    os << format_double(xs[k]) << ',' << format_double(static_cast<double>(k + 1) / static_cast<double>(xs.size()))
       << '\n';
  }
  write_file_atomic(path, os.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatiotemporal regularized Tucker imputation"};
  app.require_subcommand(1);

  ConfigFlags impute_flags;
  auto* impute = app.add_subcommand("impute", "impute one matrix under one missing scenario");
  add_config_flags(impute, impute_flags);

  ConfigFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "one imputation per ratio in sweep_ratios");
  add_config_flags(sweep, sweep_flags);

  std::string diag_input;
  std::size_t diag_days = 1;
  std::string diag_output = "strtd_diag";
  auto* diagnose = app.add_subcommand("diagnose", "spatial correlation and increment-rate CDFs");
  diagnose->add_option("--input", diag_input, "matrix CSV")->required()->check(CLI::ExistingFile);
  diagnose->add_option("--days", diag_days, "days stacked along the columns");
  diagnose->add_option("--output", diag_output, "output directory");

  std::string mask_dims;
  std::string mask_input;
  std::size_t mask_days = 1;
  std::string mask_scenario = "RM";
  ScenarioParams mask_params{0.3, 6, 0.3};
  std::uint64_t mask_seed = 0;
  std::string mask_output = "mask.csv";
  auto* mask = app.add_subcommand("mask", "write a scenario mask as observed coordinates");
  auto* dims_opt = mask->add_option("--dims", mask_dims, "M,I,J extents");
  mask->add_option("--input", mask_input, "take extents from a matrix CSV")->excludes(dims_opt);
  mask->add_option("--days", mask_days, "days stacked along the input columns");
  mask->add_option("--scenario", mask_scenario, "RM, NM or BM");
  mask->add_option("--missing-ratio", mask_params.missing_ratio);
  mask->add_option("--block-length", mask_params.block_length);
  mask->add_option("--window-fraction", mask_params.window_fraction);
  mask->add_option("--seed", mask_seed);
  mask->add_option("--output", mask_output);

  std::string synth_dims = "20,24,7";
  std::string synth_core;
  double synth_density = 0.1;
  std::uint64_t synth_seed = 0;
  std::string synth_output = "synthetic.csv";
  auto* synth = app.add_subcommand("synth", "write a synthetic nonnegative Tucker matrix");
  synth->add_option("--dims", synth_dims, "M,I,J extents");
  synth->add_option("--core-dims", synth_core, "core extents (default: dims)");
  synth->add_option("--density", synth_density, "fraction of nonzero core entries");
  synth->add_option("--seed", synth_seed);
  synth->add_option("--output", synth_output);

  CLI11_PARSE(app, argc, argv);

  try {
    if (impute->parsed()) {
      const auto cfg = resolve(impute, impute_flags);
      const auto out = run_experiment(cfg);
      std::cout << out.metrics_json().dump(2) << '\n';
    } else if (sweep->parsed()) {
      const auto cfg = resolve(sweep, sweep_flags);
      const auto outs = run_sweep(cfg);
      for (std::size_t k = 0; k < outs.size(); ++k) {
        std::cout << "ratio " << format_double(cfg.sweep_ratios[k]) << ": ";
        if (outs[k].heldout) {
          std::cout << "nmae " << format_double(outs[k].heldout->nmae) << " baseline "
                    << format_double(outs[k].baseline_heldout->nmae);
        } else {
          std::cout << "no held-out entries";
        }
        std::cout << " iterations " << outs[k].iterations << '\n';
      }
      std::cout << "summary written to " << (cfg.output_dir / "sweep.csv").string() << '\n';
    } else if (diagnose->parsed()) {
      const auto y = read_matrix_csv(diag_input, diag_days);
      std::filesystem::create_directories(diag_output);
      const auto corr = spatial_correlation_cdf(y.values);
      const auto rates = increment_rate_cdf(y.values);
      write_series(std::filesystem::path(diag_output) / "correlation_cdf.csv", "coefficient", corr.coefficients);
      write_series(std::filesystem::path(diag_output) / "increment_rate_cdf.csv", "rate", rates.rates);
      std::cout << corr.coefficients.size() << " correlation pairs (" << corr.excluded_pairs << " excluded), "
                << rates.rates.size() << " increment rates (" << rates.skipped << " skipped)\n";
    } else if (mask->parsed()) {
      Extents dims;
      if (!mask_input.empty()) {
        const auto y = read_matrix_csv(mask_input, mask_days);
        dims = {y.sensors, y.slots, y.days};
      } else if (!mask_dims.empty()) {
        dims = parse_dims(mask_dims);
      } else {
        throw std::invalid_argument("mask needs --dims or --input");
      }
      ObservationMask m;
      switch (scenario_from_string(mask_scenario)) {
        case Scenario::random:
          m = mask_rm(dims, mask_params.missing_ratio, mask_seed);
          break;
        case Scenario::nonrandom:
          m = mask_nm(dims, mask_params.missing_ratio, mask_params.block_length, mask_seed);
          break;
        case Scenario::blackout:
          m = mask_bm(dims, mask_params.window_fraction, mask_seed);
          break;
        case Scenario::external:
          throw std::invalid_argument("mask needs a generated scenario (RM, NM or BM)");
      }
      write_mask_csv(std::filesystem::path(mask_output), m);
      std::cout << m.observed_count() << " of " << m.size() << " entries observed\n";
    } else if (synth->parsed()) {
      const Extents dims = parse_dims(synth_dims);
      const Extents core = synth_core.empty() ? dims : parse_dims(synth_core);
      if (dims.size() != 3) throw std::invalid_argument("synth needs M,I,J extents");
      const auto s = make_synthetic_tucker(dims, core, synth_density, synth_seed);
      write_matrix_csv(std::filesystem::path(synth_output), inverse_tensorize(s.truth).values);
      std::cout << "wrote " << dims[0] << "x" << dims[1] * dims[2] << " matrix to " << synth_output << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
