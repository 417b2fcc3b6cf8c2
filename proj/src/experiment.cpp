#include "strtd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "strtd/error.hpp"
#include "strtd/scenarios.hpp"

namespace strtd {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::size_t to_size(const std::string& v) {
  std::size_t pos = 0;
  const long long parsed = std::stoll(v, &pos);
  if (pos != v.size() || parsed < 0) throw std::invalid_argument("expected a nonnegative integer");
  return static_cast<std::size_t>(parsed);
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
  return out;
}

nlohmann::json metric_json(const MetricReport& m) {
  nlohmann::json j;
  j["mape"] = m.mape_defined ? nlohmann::json(m.mape) : nlohmann::json(nullptr);
  j["nmae"] = m.nmae;
  j["rse"] = m.rse;
  j["evaluated_count"] = m.evaluated_count;
  j["excluded_zero_truth"] = m.excluded_zero_truth;
  return j;
}

std::string ratio_label(double r) { return "ratio_" + format_double(r); }

}  // namespace

void ExperimentConfig::validate() const {
  if (input.empty()) throw std::invalid_argument("input path is required");
  if (days == 0) throw std::invalid_argument("days must be positive");
  if (regularizers.size() != 3) throw std::invalid_argument("regularizers needs one entry per mode (3)");
  if (!betas.empty() && betas.size() != 3) throw std::invalid_argument("betas needs one entry per mode (3)");
  if (threads == 0) throw std::invalid_argument("threads must be positive");
  if (scenario == Scenario::external && !mask_file.empty() && !std::filesystem::exists(mask_file)) {
    throw std::invalid_argument("mask file " + mask_file.string() + " does not exist");
  }
  solver.validate();
}

void apply_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                        const std::string& where) {
  try {
    if (key == "input") {
      cfg.input = value;
    } else if (key == "sensors") {
      cfg.sensors = to_size(value);
    } else if (key == "slots") {
      cfg.slots = to_size(value);
    } else if (key == "days") {
      cfg.days = to_size(value);
    } else if (key == "scenario") {
      cfg.scenario = scenario_from_string(value);
    } else if (key == "missing_ratio") {
      cfg.scenario_params.missing_ratio = parse_double(value);
    } else if (key == "block_length") {
      cfg.scenario_params.block_length = to_size(value);
    } else if (key == "window_fraction") {
      cfg.scenario_params.window_fraction = parse_double(value);
    } else if (key == "mask_file") {
      cfg.mask_file = value;
    } else if (key == "regularizers") {
      cfg.regularizers.clear();
      for (const auto& item : split_list(value)) cfg.regularizers.push_back(prior_kind_from_string(item));
    } else if (key == "betas") {
      cfg.betas.clear();
      for (const auto& item : split_list(value)) {
        if (item == "auto" || item.empty()) {
          cfg.betas.emplace_back(std::nullopt);
        } else {
          cfg.betas.emplace_back(parse_double(item));
        }
      }
    } else if (key == "neighbors") {
      cfg.graph.neighbors = to_size(value);
    } else if (key == "bandwidth") {
      cfg.graph.bandwidth = parse_double(value);
    } else if (key == "alpha") {
      cfg.solver.alpha = parse_double(value);
    } else if (key == "gamma") {
      cfg.solver.gamma = parse_double(value);
    } else if (key == "tol") {
      cfg.solver.tol = parse_double(value);
    } else if (key == "max_iters") {
      cfg.solver.max_iters = static_cast<int>(to_size(value));
    } else if (key == "core_dims") {
      cfg.solver.core_dims.clear();
      if (!value.empty()) {
        for (const auto& item : split_list(value)) cfg.solver.core_dims.push_back(to_size(item));
      }
    } else if (key == "missing_fill") {
      cfg.solver.missing_fill = missing_fill_from_string(value);
    } else if (key == "seed") {
      cfg.seed = to_size(value);
    } else if (key == "output") {
      cfg.output_dir = value;
    } else if (key == "sweep_ratios") {
      cfg.sweep_ratios.clear();
      for (const auto& item : split_list(value)) cfg.sweep_ratios.push_back(parse_double(item));
    } else if (key == "threads") {
      cfg.threads = to_size(value);
    } else {
      throw std::invalid_argument("unknown key '" + key + "'");
    }
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    if (msg.rfind("unknown key", 0) == 0) throw std::invalid_argument(where + ": " + msg);
    throw std::invalid_argument(where + ": bad value '" + value + "' for '" + key + "': " + msg);
  } catch (const std::out_of_range&) {
    throw std::invalid_argument(where + ": value '" + value + "' for '" + key + "' is out of range");
  }
}

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument(where + ": expected 'key = value'");
    apply_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return parse_config(in, path.string());
}

std::string render_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  std::vector<std::string> regs;
  for (auto k : cfg.regularizers) regs.emplace_back(to_string(k));
  std::vector<std::string> betas;
  for (const auto& b : cfg.betas) betas.push_back(b ? format_double(*b) : "auto");
  std::vector<std::string> core;
  for (auto r : cfg.solver.core_dims) core.push_back(std::to_string(r));
  std::vector<std::string> ratios;
  for (auto r : cfg.sweep_ratios) ratios.push_back(format_double(r));

  os << "# resolved strtd experiment config\n";
  os << "input = " << cfg.input.string() << '\n';
  os << "sensors = " << cfg.sensors << '\n';
  os << "slots = " << cfg.slots << '\n';
  os << "days = " << cfg.days << '\n';
  os << "scenario = " << to_string(cfg.scenario) << '\n';
  os << "missing_ratio = " << format_double(cfg.scenario_params.missing_ratio) << '\n';
  os << "block_length = " << cfg.scenario_params.block_length << '\n';
  os << "window_fraction = " << format_double(cfg.scenario_params.window_fraction) << '\n';
  os << "mask_file = " << cfg.mask_file.string() << '\n';
  os << "regularizers = " << join(regs) << '\n';
  os << "betas = " << (betas.empty() ? std::string("auto,auto,auto") : join(betas)) << '\n';
  os << "neighbors = " << cfg.graph.neighbors << '\n';
  os << "bandwidth = " << format_double(cfg.graph.bandwidth) << '\n';
  os << "alpha = " << format_double(cfg.solver.alpha) << '\n';
  os << "gamma = " << format_double(cfg.solver.gamma) << '\n';
  os << "tol = " << format_double(cfg.solver.tol) << '\n';
  os << "max_iters = " << cfg.solver.max_iters << '\n';
  os << "core_dims = " << join(core) << '\n';
  os << "missing_fill = " << to_string(cfg.solver.missing_fill) << '\n';
  os << "seed = " << cfg.seed << '\n';
  os << "output = " << cfg.output_dir.string() << '\n';
  os << "sweep_ratios = " << join(ratios) << '\n';
  os << "threads = " << cfg.threads << '\n';
  return os.str();
}

std::vector<ModeRegularizer> build_regularizers(const DenseTensor& x0, const ObservationMask& observed,
                                                const std::vector<PriorKind>& kinds,
                                                const std::vector<std::optional<double>>& betas,
                                                const GraphPriorConfig& graph) {
  if (kinds.size() != x0.order()) throw DimensionError("one regularizer kind per mode is required");
  if (!betas.empty() && betas.size() != x0.order()) throw DimensionError("one beta per mode is required");
  std::vector<double> flag_values(observed.flags().begin(), observed.flags().end());
  const DenseTensor flags(x0.dims(), std::move(flag_values));

  std::vector<ModeRegularizer> regs(x0.order());
  for (std::size_t n = 0; n < x0.order(); ++n) {
    const std::optional<double> beta = betas.empty() ? std::nullopt : betas[n];
    switch (kinds[n]) {
      case PriorKind::none:
        break;
      case PriorKind::laplacian: {
        const BoolArray obs = unfold(flags, n).array() > 0.5;
        const auto g = similarity_matrix(unfold(x0, n), obs, graph);
        regs[n] = ModeRegularizer::from_prior(laplacian(g.weights), beta);
        break;
      }
      case PriorKind::temporal:
        regs[n] = ModeRegularizer::from_prior(temporal_operator(x0.dim(n)), beta);
        break;
    }
  }
  return regs;
}

nlohmann::json ExperimentOutcome::metrics_json() const {
  nlohmann::json j;
  j["scenario"] = std::string(to_string(mask.scenario));
  j["missing_ratio"] = mask.params.missing_ratio;
  j["window_fraction"] = mask.params.window_fraction;
  j["seed"] = mask.seed;
  j["heldout"] = heldout ? metric_json(*heldout) : nlohmann::json(nullptr);
  j["all_entries"] = all_entries ? metric_json(*all_entries) : nlohmann::json(nullptr);
  j["baseline_mean_imputation"] = {
      {"heldout", baseline_heldout ? metric_json(*baseline_heldout) : nlohmann::json(nullptr)}};
  j["observed_rse"] = observed_rse ? nlohmann::json(*observed_rse) : nlohmann::json(nullptr);
  j["iterations"] = iterations;
  j["stop_reason"] = std::string(to_string(stop_reason));
  j["final_objective"] = final_objective;
  j["observed_count"] = observed_count;
  j["heldout_count"] = heldout_count;
  j["runtime_seconds"] = runtime_seconds;
  return j;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, bool write_artifacts) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();

  TrafficMatrix y = read_matrix_csv(cfg.input, cfg.days);
  if (cfg.sensors != 0 && cfg.sensors != y.sensors) {
    throw DimensionError("expected " + std::to_string(cfg.sensors) + " sensors, file has " + std::to_string(y.sensors));
  }
  if (cfg.slots != 0 && cfg.slots != y.slots) {
    throw DimensionError("expected " + std::to_string(cfg.slots) + " slots per day, file has " +
                         std::to_string(y.slots));
  }

  const DenseTensor truth = tensorize(y);
  const ObservationMask known = tensorize_mask(y);
  const Extents& dims = truth.dims();

  ObservationMask scenario_mask(dims, true);
  switch (cfg.scenario) {
    case Scenario::random:
      scenario_mask = mask_rm(dims, cfg.scenario_params.missing_ratio, cfg.seed);
      break;
    case Scenario::nonrandom:
      scenario_mask = mask_nm(dims, cfg.scenario_params.missing_ratio, cfg.scenario_params.block_length, cfg.seed);
      break;
    case Scenario::blackout:
      scenario_mask = mask_bm(dims, cfg.scenario_params.window_fraction, cfg.seed);
      break;
    case Scenario::external:
      if (!cfg.mask_file.empty()) {
        scenario_mask = read_mask_csv(cfg.mask_file);
        if (scenario_mask.dims() != dims) throw DimensionError("mask file extents do not match the data");
      }
      scenario_mask.scenario = Scenario::external;
      break;
  }

  ExperimentOutcome out;
  out.mask = known.intersect(scenario_mask);
  out.mask.scenario = scenario_mask.scenario;
  out.mask.params = scenario_mask.params;
  out.mask.seed = scenario_mask.seed;
  out.observed_count = out.mask.observed_count();
  if (out.observed_count == 0) throw std::invalid_argument("no observed entries remain after masking");

  const DenseTensor x0 = masked_project(truth, out.mask);
  auto regs = build_regularizers(x0, out.mask, cfg.regularizers, cfg.betas, cfg.graph);
  SolverConfig solver_cfg = cfg.solver;
  solver_cfg.seed = cfg.seed;
  SolveResult result = solve(x0, out.mask, std::move(regs), solver_cfg);

  out.iterations = result.state.iteration;
  out.stop_reason = result.state.stop_reason;
  out.final_objective = result.state.objective_trace.empty() ? 0.0 : result.state.objective_trace.back();
  out.observed_rse = observed_rse(reconstruct(result.state.core, result.state.factors.factors), x0, out.mask);
  out.trace = result.state.trace;
  out.imputed = inverse_tensorize(result.imputed);

  const ObservationMask heldout = known.minus(out.mask);
  out.heldout_count = heldout.observed_count();
  if (out.heldout_count > 0) {
    out.heldout = evaluate(truth, result.imputed, heldout);
    out.baseline_heldout = evaluate(truth, mean_imputation(x0, out.mask), heldout);
  }
  try {
    out.all_entries = evaluate(truth, result.imputed, known);
  } catch (const DegenerateError&) {
    out.all_entries.reset();
  }
  out.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  if (write_artifacts) {
    std::filesystem::create_directories(cfg.output_dir);
    write_matrix_csv(cfg.output_dir / "imputed.csv", out.imputed.values);
    write_file_atomic(cfg.output_dir / "metrics.json", out.metrics_json().dump(2) + "\n");
    write_trace_csv(cfg.output_dir / "trace.csv", out.trace);
    write_mask_csv(cfg.output_dir / "mask.csv", out.mask);
    write_file_atomic(cfg.output_dir / "config.resolved", render_config(cfg));
  }
  return out;
}

std::vector<ExperimentOutcome> run_sweep(const ExperimentConfig& cfg, bool write_artifacts) {
  cfg.validate();
  if (cfg.sweep_ratios.empty()) throw std::invalid_argument("sweep_ratios is empty");
  if (cfg.scenario == Scenario::external) throw std::invalid_argument("sweeps need a generated scenario");

  std::vector<ExperimentConfig> instances;
  for (double r : cfg.sweep_ratios) {
    ExperimentConfig inst = cfg;
    if (cfg.scenario == Scenario::blackout) {
      inst.scenario_params.window_fraction = r;
    } else {
      inst.scenario_params.missing_ratio = r;
    }
    inst.output_dir = cfg.output_dir / ratio_label(r);
    inst.sweep_ratios.clear();
    inst.threads = 1;
    instances.push_back(std::move(inst));
  }

  std::vector<ExperimentOutcome> outcomes(instances.size());
  std::vector<std::exception_ptr> errors(instances.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < instances.size(); i = next++) {
      try {
        outcomes[i] = run_experiment(instances[i], write_artifacts);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min(cfg.threads, instances.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  if (write_artifacts) {
    std::ostringstream os;
    os << "ratio,heldout_nmae,heldout_mape,baseline_nmae,iterations,stop_reason\n";
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      const auto& o = outcomes[i];
      os << format_double(cfg.sweep_ratios[i]) << ',';
      if (o.heldout) {
        os << format_double(o.heldout->nmae) << ',' << (o.heldout->mape_defined ? format_double(o.heldout->mape) : "")
           << ',' << format_double(o.baseline_heldout->nmae);
      } else {
        os << ",,";
      }
      os << ',' << o.iterations << ',' << to_string(o.stop_reason) << '\n';
    }
    std::filesystem::create_directories(cfg.output_dir);
    write_file_atomic(cfg.output_dir / "sweep.csv", os.str());
    write_file_atomic(cfg.output_dir / "config.resolved", render_config(cfg));
  }
  return outcomes;
}

}  // namespace strtd
