#include "switchdp/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "switchdp/bench.hpp"
#include "switchdp/control.hpp"
#include "switchdp/errors.hpp"
#include "switchdp/oracle.hpp"
#include "switchdp/training.hpp"
#include "switchdp/valuestore.hpp"

namespace switchdp::cli {

namespace {

using nlohmann::json;

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + path + "' for writing");
  out << text;
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

State parse_state(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ConfigError("bad state component '" + item + "' in '" + text + "'");
    }
  }
  if (values.empty()) throw ConfigError("empty state vector '" + text + "'");
  State x(static_cast<Eigen::Index>(values.size()));
  for (std::size_t a = 0; a < values.size(); ++a) x[static_cast<Eigen::Index>(a)] = values[a];
  return x;
}

/// Builds the scenario described by a config document: scenario name plus
/// optional parameter and training overrides.
struct ResolvedConfig {
  Scenario scenario;
  std::string method = "batch";
};

ResolvedConfig resolve_config(const json& config) {
  if (!config.is_object()) throw ConfigError("config: top level must be an object");
  if (!config.contains("scenario") || !config["scenario"].is_string()) {
    throw ConfigError("config: missing string field 'scenario' "
                      "(one of example1, example2, example2-pref)");
  }
  json echo = config;
  ResolvedConfig out{scenario_from_echo(echo), "batch"};

  if (config.contains("training")) {
    const json& t = config["training"];
    if (!t.is_object()) throw ConfigError("config: 'training' must be an object");
    TrainingConfig& tc = out.scenario.training;
    auto geti = [&](const char* key, int current) {
      if (!t.contains(key)) return current;
      if (!t[key].is_number_integer()) {
        throw ConfigError(std::string("config: training.") + key + " must be an integer");
      }
      return t[key].get<int>();
    };
    auto getd = [&](const char* key, double current) {
      if (!t.contains(key)) return current;
      if (!t[key].is_number()) {
        throw ConfigError(std::string("config: training.") + key + " must be a number");
      }
      return t[key].get<double>();
    };
    auto getb = [&](const char* key, bool current) {
      if (!t.contains(key)) return current;
      if (!t[key].is_boolean()) {
        throw ConfigError(std::string("config: training.") + key + " must be a boolean");
      }
      return t[key].get<bool>();
    };
    tc.sample_count = geti("sample_count", tc.sample_count);
    tc.ridge_lambda = getd("ridge_lambda", tc.ridge_lambda);
    if (t.contains("rng_seed")) {
      if (!t["rng_seed"].is_number_integer()) {
        throw ConfigError("config: training.rng_seed must be an integer");
      }
      tc.rng_seed = t["rng_seed"].get<std::uint64_t>();
    }
    tc.convergence_tol = getd("convergence_tol", tc.convergence_tol);
    tc.convergence_window = geti("convergence_window", tc.convergence_window);
    tc.resample_per_stage = getb("resample_per_stage", tc.resample_per_stage);
    tc.clip_next_state_samples = getb("clip_next_state_samples", tc.clip_next_state_samples);
    if (t.contains("method")) {
      if (!t["method"].is_string()) throw ConfigError("config: training.method must be a string");
      out.method = t["method"].get<std::string>();
      if (out.method != "batch" && out.method != "sequential") {
        throw ConfigError("config: training.method must be 'batch' or 'sequential'");
      }
    }
  }
  return out;
}

json training_echo(const TrainingConfig& tc, const std::string& method) {
  return {
      {"method", method},
      {"sample_count", tc.sample_count},
      {"ridge_lambda", tc.ridge_lambda},
      {"rng_seed", tc.rng_seed},
      {"convergence_tol", tc.convergence_tol},
      {"convergence_window", tc.convergence_window},
      {"resample_per_stage", tc.resample_per_stage},
      {"clip_next_state_samples", tc.clip_next_state_samples},
  };
}

json state_to_json(const State& x) {
  json arr = json::array();
  for (Eigen::Index a = 0; a < x.size(); ++a) arr.push_back(x[a]);
  return arr;
}

void format_csv_double(std::ostream& out, double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  out << buffer;
}

// ---- train ---------------------------------------------------------------

struct TrainArgs {
  std::string config_path;
  std::string out_path;
  std::string report_path;
  std::optional<std::uint64_t> seed_override;
};

void run_train(const TrainArgs& args) {
  const json config = read_json_file(args.config_path);
  ResolvedConfig resolved = resolve_config(config);
  if (args.seed_override) resolved.scenario.training.rng_seed = *args.seed_override;

  TrainReport report;
  ValueTable table = [&] {
    if (resolved.method == "sequential") {
      return sequential_train(resolved.scenario.system, resolved.scenario.cost,
                              resolved.scenario.basis, resolved.scenario.training, &report);
    }
    return batch_train(resolved.scenario.system, resolved.scenario.cost,
                       resolved.scenario.basis, resolved.scenario.training, &report);
  }();

  json echo = resolved.scenario.echo;
  echo["training"] = training_echo(resolved.scenario.training, resolved.method);
  table.metadata.scenario = echo;
  save(table, args.out_path);

  if (!args.report_path.empty()) {
    json stages = json::array();
    for (const StageDiagnostics& d : report.stages) {
      stages.push_back({{"k", d.k},
                        {"mode", d.mode},
                        {"max_residual", d.max_residual},
                        {"iterations", d.iterations},
                        {"converged", d.converged}});
    }
    const json doc = {
        {"wall_time_seconds", report.wall_seconds},
        {"rng_seed", resolved.scenario.training.rng_seed},
        {"method", resolved.method},
        {"config_echo", echo},
        {"stages", stages},
    };
    write_text_file(args.report_path, doc.dump(2) + "\n");
  }
}

// ---- simulate ------------------------------------------------------------

struct SimulateArgs {
  std::string weights_path;
  std::string x0_text;
  int i_init = 1;
  double threshold = 0.0;
  std::string disturbance;  // "lo:hi" or "lo:hi:seed"
  std::optional<double> kappa0_override;
  std::string out_csv;
  std::string summary_path;
};

DisturbanceSpec parse_disturbance(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 2 && parts.size() != 3) {
    throw ConfigError("disturbance spec must be lo:hi or lo:hi:seed, got '" + text + "'");
  }
  DisturbanceSpec spec;
  try {
    spec.lo = std::stod(parts[0]);
    spec.hi = std::stod(parts[1]);
    if (parts.size() == 3) spec.seed = std::stoull(parts[2]);
  } catch (const std::exception&) {
    throw ConfigError("bad disturbance spec '" + text + "'");
  }
  if (!(spec.lo <= spec.hi)) {
    throw ConfigError("disturbance spec requires lo <= hi, got '" + text + "'");
  }
  return spec;
}

json summarize_trace(const SimulationTrace& trace, const Scenario& scenario) {
  json summary = {
      {"total_cost", trace.total_cost},
      {"switch_count", trace.switch_count()},
      {"switch_steps", trace.switch_steps()},
      {"final_state", state_to_json(trace.states.back())},
      {"terminal_cost", trace.terminal_cost},
  };
  if (scenario.tracking_axis >= 0) {
    summary["terminal_tracking_error"] =
        std::abs(trace.states.back()[scenario.tracking_axis] - scenario.tracking_target);
  }
  return summary;
}

void run_simulate(const SimulateArgs& args) {
  ValueTable table = load(args.weights_path);
  json echo = table.metadata.scenario;
  if (args.kappa0_override) echo["kappa0"] = *args.kappa0_override;
  Scenario scenario = scenario_from_echo(echo);
  if (scenario.cost.horizon != table.horizon()) {
    throw ConfigError("weight file horizon " + std::to_string(table.horizon()) +
                      " does not match scenario horizon " +
                      std::to_string(scenario.cost.horizon));
  }

  const State x0 = parse_state(args.x0_text);
  if (x0.size() != scenario.system.state_dim) {
    throw ConfigError("x0 has " + std::to_string(x0.size()) + " components, scenario needs " +
                      std::to_string(scenario.system.state_dim));
  }
  if (!scenario.system.domain.contains(x0)) {
    std::cerr << "warning: x0 is outside the training domain; results use polynomial "
                 "extrapolation\n";
  }

  ControllerConfig cfg;
  cfg.threshold = args.threshold;
  if (!args.disturbance.empty()) cfg.disturbance = parse_disturbance(args.disturbance);

  const SimulationTrace trace =
      simulate(table, scenario.cost, scenario.system, x0, args.i_init, cfg);

  if (!args.out_csv.empty()) {
    std::ostringstream csv;
    write_trace_csv(trace, csv);
    write_text_file(args.out_csv, csv.str());
  }
  json summary = summarize_trace(trace, scenario);
  summary["config_echo"] = echo;
  summary["threshold"] = args.threshold;
  if (!args.disturbance.empty()) summary["disturbance"] = args.disturbance;
  const std::string summary_text = summary.dump(2) + "\n";
  if (!args.summary_path.empty()) {
    write_text_file(args.summary_path, summary_text);
  } else {
    std::cout << summary_text;
  }
}

// ---- sweep ---------------------------------------------------------------

struct SweepArgs {
  std::string weights_path;
  std::string config_path;
  std::string out_csv;
};

struct SweepPoint {
  State x0;
  ModeIndex i_init;
};

std::vector<SweepPoint> parse_sweep(const json& config, int state_dim) {
  if (!config.contains("sweep") || !config["sweep"].is_object()) {
    throw ConfigError("sweep config: missing object field 'sweep'");
  }
  const json& sweep = config["sweep"];
  std::vector<SweepPoint> points;
  auto parse_point_x0 = [&](const json& arr) {
    if (!arr.is_array() || static_cast<int>(arr.size()) != state_dim) {
      throw ConfigError("sweep config: each x0 must be an array of " +
                        std::to_string(state_dim) + " numbers");
    }
    State x(state_dim);
    for (int a = 0; a < state_dim; ++a) {
      if (!arr[static_cast<std::size_t>(a)].is_number()) {
        throw ConfigError("sweep config: x0 components must be numbers");
      }
      x[a] = arr[static_cast<std::size_t>(a)].get<double>();
    }
    return x;
  };
  if (sweep.contains("points")) {
    if (!sweep["points"].is_array()) throw ConfigError("sweep config: 'points' must be an array");
    for (const json& pt : sweep["points"]) {
      if (!pt.is_object() || !pt.contains("x0") || !pt.contains("i_init") ||
          !pt["i_init"].is_number_integer()) {
        throw ConfigError("sweep config: each point needs 'x0' and integer 'i_init'");
      }
      points.push_back({parse_point_x0(pt["x0"]), pt["i_init"].get<int>()});
    }
  }
  if (sweep.contains("grid")) {
    const json& grid = sweep["grid"];
    if (!grid.is_object() || !grid.contains("axes") || !grid["axes"].is_array() ||
        static_cast<int>(grid["axes"].size()) != state_dim) {
      throw ConfigError("sweep config: grid.axes must list value arrays for every state axis");
    }
    std::vector<std::vector<double>> axes;
    for (const json& axis : grid["axes"]) {
      if (!axis.is_array()) throw ConfigError("sweep config: grid axis must be an array");
      std::vector<double> values;
      for (const json& v : axis) {
        if (!v.is_number()) throw ConfigError("sweep config: grid values must be numbers");
        values.push_back(v.get<double>());
      }
      axes.push_back(std::move(values));
    }
    std::vector<int> inits;
    if (grid.contains("i_init")) {
      if (!grid["i_init"].is_array()) {
        throw ConfigError("sweep config: grid.i_init must be an array");
      }
      for (const json& v : grid["i_init"]) {
        if (!v.is_number_integer()) {
          throw ConfigError("sweep config: grid.i_init entries must be integers");
        }
        inits.push_back(v.get<int>());
      }
    } else {
      inits.push_back(1);
    }
    // Row-major cartesian product: last axis varies fastest, i_init outermost.
    std::vector<std::size_t> index(axes.size(), 0);
    bool any_empty = false;
    for (const auto& axis : axes) {
      if (axis.empty()) any_empty = true;
    }
    if (!any_empty) {
      for (int init : inits) {
        std::fill(index.begin(), index.end(), 0);
        while (true) {
          State x(state_dim);
          for (int a = 0; a < state_dim; ++a) {
            x[a] = axes[static_cast<std::size_t>(a)][index[static_cast<std::size_t>(a)]];
          }
          points.push_back({std::move(x), init});
          int axis = state_dim - 1;
          while (axis >= 0) {
            if (++index[static_cast<std::size_t>(axis)] <
                axes[static_cast<std::size_t>(axis)].size()) {
              break;
            }
            index[static_cast<std::size_t>(axis)] = 0;
            --axis;
          }
          if (axis < 0) break;
        }
      }
    }
  }
  return points;
}

void run_sweep(const SweepArgs& args) {
  ValueTable table = load(args.weights_path);
  Scenario scenario = scenario_from_echo(table.metadata.scenario);
  if (scenario.cost.horizon != table.horizon()) {
    throw ConfigError("weight file horizon does not match scenario horizon");
  }
  const json config = read_json_file(args.config_path);
  const std::vector<SweepPoint> points = parse_sweep(config, scenario.system.state_dim);

  std::ostringstream csv;
  for (int a = 0; a < scenario.system.state_dim; ++a) csv << "x0_" << a << ',';
  csv << "i_init,total_cost,switch_count,terminal_tracking_error,out_of_domain\n";
  for (const SweepPoint& point : points) {
    detail::check_mode(point.i_init, scenario.system.mode_count, "sweep");
    const SimulationTrace trace =
        simulate(table, scenario.cost, scenario.system, point.x0, point.i_init, {});
    for (int a = 0; a < scenario.system.state_dim; ++a) {
      format_csv_double(csv, point.x0[a]);
      csv << ',';
    }
    const double tracking_error =
        scenario.tracking_axis >= 0
            ? std::abs(trace.states.back()[scenario.tracking_axis] - scenario.tracking_target)
            : trace.states.back().norm();
    csv << point.i_init << ',';
    format_csv_double(csv, trace.total_cost);
    csv << ',' << trace.switch_count() << ',';
    format_csv_double(csv, tracking_error);
    csv << ',' << (scenario.system.domain.contains(point.x0) ? 0 : 1) << "\n";
  }
  write_text_file(args.out_csv, csv.str());
}

// ---- oracle --------------------------------------------------------------

struct OracleArgs {
  std::string config_path;
  std::string x0_text;
  int i_init = 1;
  std::optional<int> horizon_override;
  std::uint64_t cap = std::uint64_t{1} << 20;
  std::string weights_path;
  std::string out_path;
};

void run_oracle(const OracleArgs& args) {
  json config = read_json_file(args.config_path);
  if (args.horizon_override) config["horizon"] = *args.horizon_override;
  ResolvedConfig resolved = resolve_config(config);
  const Scenario& scenario = resolved.scenario;

  const State x0 = parse_state(args.x0_text);
  if (x0.size() != scenario.system.state_dim) {
    throw ConfigError("x0 has " + std::to_string(x0.size()) + " components, scenario needs " +
                      std::to_string(scenario.system.state_dim));
  }

  const OracleResult result = enumerate_optimal(scenario.system, scenario.cost, x0, args.i_init,
                                                scenario.cost.horizon, args.cap);
  json doc = {
      {"optimal_cost", result.optimal_cost},
      {"optimal_sequence", result.optimal_sequence},
      {"config_echo", scenario.echo},
  };
  if (!args.weights_path.empty()) {
    ValueTable table = load(args.weights_path);
    if (table.horizon() != scenario.cost.horizon) {
      throw ConfigError("weight file horizon " + std::to_string(table.horizon()) +
                        " does not match oracle horizon " +
                        std::to_string(scenario.cost.horizon));
    }
    const SimulationTrace trace =
        simulate(table, scenario.cost, scenario.system, x0, args.i_init, {});
    doc["controller_cost"] = trace.total_cost;
    doc["gap"] = trace.total_cost - result.optimal_cost;
  }
  const std::string text = doc.dump(2) + "\n";
  if (!args.out_path.empty()) {
    write_text_file(args.out_path, text);
  } else {
    std::cout << text;
  }
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Finite-horizon optimal mode switching: train value tables, run the online "
               "controller, sweep initial conditions, and compare against exhaustive "
               "enumeration."};
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand(
      "train", "Train a value table from a scenario config and write a weight file");
  train_cmd->add_option("--config", train_args.config_path, "Scenario config JSON")->required();
  train_cmd->add_option("--out", train_args.out_path, "Output weight file")->required();
  train_cmd->add_option("--report", train_args.report_path, "Optional JSON training report");
  std::uint64_t seed_value = 0;
  CLI::Option* seed_opt =
      train_cmd->add_option("--seed", seed_value, "Override the config's rng seed");

  SimulateArgs sim_args;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "Run the closed-loop controller from a weight file");
  sim_cmd->add_option("--weights", sim_args.weights_path, "Weight file")->required();
  sim_cmd->add_option("--x0", sim_args.x0_text, "Initial state, comma-separated")->required();
  sim_cmd->add_option("--i-init", sim_args.i_init, "Initial mode (1-based)")->required();
  sim_cmd->add_option("--threshold", sim_args.threshold,
                      "Threshold-remedy tau (0 = plain controller)");
  sim_cmd->add_option("--disturbance", sim_args.disturbance,
                      "Additive uniform per-step offsets, lo:hi or lo:hi:seed");
  double kappa0_value = 0.0;
  CLI::Option* kappa_opt = sim_cmd->add_option(
      "--kappa0", kappa0_value, "Evaluate under this switching cost instead of the trained one");
  sim_cmd->add_option("--out", sim_args.out_csv, "Trace CSV path");
  sim_cmd->add_option("--summary", sim_args.summary_path,
                      "Summary JSON path (default: standard output)");

  SweepArgs sweep_args;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Simulate a grid/list of initial conditions");
  sweep_cmd->add_option("--weights", sweep_args.weights_path, "Weight file")->required();
  sweep_cmd->add_option("--config", sweep_args.config_path, "Sweep config JSON")->required();
  sweep_cmd->add_option("--out", sweep_args.out_csv, "Output CSV")->required();

  OracleArgs oracle_args;
  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle", "Exhaustive-enumeration optimum, optionally compared to a controller");
  oracle_cmd->add_option("--config", oracle_args.config_path, "Scenario config JSON")->required();
  oracle_cmd->add_option("--x0", oracle_args.x0_text, "Initial state, comma-separated")
      ->required();
  oracle_cmd->add_option("--i-init", oracle_args.i_init, "Initial mode (1-based)")->required();
  int horizon_value = 0;
  CLI::Option* horizon_opt =
      oracle_cmd->add_option("--horizon", horizon_value, "Override the scenario horizon");
  oracle_cmd->add_option("--cap", oracle_args.cap, "Enumeration cap (default 2^20 sequences)");
  oracle_cmd->add_option("--weights", oracle_args.weights_path,
                         "Weight file for a controller-vs-oracle comparison");
  oracle_cmd->add_option("--out", oracle_args.out_path,
                         "Result JSON path (default: standard output)");

  try {
    app.parse(argc, argv);
    if (train_cmd->parsed()) {
      if (seed_opt->count() > 0) train_args.seed_override = seed_value;
      run_train(train_args);
    } else if (sim_cmd->parsed()) {
      if (kappa_opt->count() > 0) sim_args.kappa0_override = kappa0_value;
      run_simulate(sim_args);
    } else if (sweep_cmd->parsed()) {
      run_sweep(sweep_args);
    } else if (oracle_cmd->parsed()) {
      if (horizon_opt->count() > 0) oracle_args.horizon_override = horizon_value;
      run_oracle(oracle_args);
    }
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const TrainingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const SimulationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const LoadError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace switchdp::cli
