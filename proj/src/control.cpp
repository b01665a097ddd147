#include "switchdp/control.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>

#include "switchdp/errors.hpp"

namespace switchdp {

namespace {

void validate_controller_inputs(const ValueTable& table, const CostSpec& cost,
                                const SwitchedSystem& system) {
  if (table.mode_count() != system.mode_count) {
    throw std::invalid_argument("controller: table mode count != system mode count");
  }
  if (static_cast<int>(cost.switch_table.rows()) != system.mode_count) {
    throw std::invalid_argument("controller: switch table size != system mode count");
  }
  if (table.basis().input_dim() != system.state_dim) {
    throw std::invalid_argument("controller: basis input dimension != system state dimension");
  }
}

ModeIndex pick_mode(const ValueTable& table, const CostSpec& cost, const SwitchedSystem& system,
                    int k, const State& x, ModeIndex i_prev, double threshold) {
  double best = 0.0;
  ModeIndex best_mode = 1;
  double keep_score = 0.0;
  bool have = false;
  for (ModeIndex i = 1; i <= system.mode_count; ++i) {
    const State next = step(system, i, x);
    double score = cost.running(x, i) + table.value(k + 1, next, i);
    if (threshold == 0.0) score += switching_cost(cost, i_prev, i);
    if (i == i_prev) keep_score = score;
    if (!have || score < best) {
      best = score;
      best_mode = i;
      have = true;
    }
  }
  if (threshold > 0.0 && best_mode != i_prev && !(best < keep_score - threshold)) {
    return i_prev;
  }
  return best_mode;
}

void format_double(std::ostream& out, double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  out << buffer;
}

}  // namespace

ModeIndex select_mode(const ValueTable& table, const CostSpec& cost,
                      const SwitchedSystem& system, int k, const State& x, ModeIndex i_prev,
                      const ControllerConfig& cfg) {
  validate_controller_inputs(table, cost, system);
  detail::check_mode(i_prev, system.mode_count, "select_mode");
  if (k < 0 || k >= table.horizon()) {
    throw std::invalid_argument("select_mode: stage must satisfy 0 <= k <= N-1 "
                                "(no decision at terminal time)");
  }
  if (cfg.threshold < 0.0) throw std::invalid_argument("select_mode: threshold must be >= 0");
  return pick_mode(table, cost, system, k, x, i_prev, cfg.threshold);
}

namespace {

SimulationTrace roll(const ValueTable* table, const CostSpec& cost,
                     const SwitchedSystem& system, const State& x0, ModeIndex i_init,
                     const std::vector<ModeIndex>* fixed_modes, const ControllerConfig& cfg) {
  detail::check_mode(i_init, system.mode_count, "simulate");
  if (x0.size() != system.state_dim) {
    throw std::invalid_argument("simulate: x0 dimension mismatch");
  }
  if (cfg.threshold < 0.0) throw std::invalid_argument("simulate: threshold must be >= 0");
  const int n_stages = cost.horizon;

  std::optional<std::mt19937_64> noise_rng;
  if (cfg.disturbance) {
    if (!(cfg.disturbance->lo <= cfg.disturbance->hi)) {
      throw std::invalid_argument("simulate: disturbance bounds must satisfy lo <= hi");
    }
    noise_rng.emplace(cfg.disturbance->seed);
  }

  SimulationTrace trace;
  trace.initial_mode = i_init;
  trace.states.reserve(static_cast<std::size_t>(n_stages) + 1);
  trace.states.push_back(x0);
  trace.out_of_domain.push_back(system.domain.contains(x0) ? 0 : 1);

  ModeIndex prev = i_init;
  for (int k = 0; k < n_stages; ++k) {
    const State& x = trace.states.back();
    if (!x.allFinite()) {
      throw SimulationError("simulate: non-finite state at step " + std::to_string(k));
    }
    const ModeIndex mode = fixed_modes
                               ? (*fixed_modes)[static_cast<std::size_t>(k)]
                               : pick_mode(*table, cost, system, k, x, prev, cfg.threshold);
    detail::check_mode(mode, system.mode_count, "simulate");
    trace.stage_costs.push_back(cost.running(x, mode));
    trace.switch_costs.push_back(switching_cost(cost, prev, mode));
    State next = step(system, mode, x);
    if (noise_rng) {
      State offset(system.state_dim);
      for (int a = 0; a < system.state_dim; ++a) {
        std::uniform_real_distribution<double> dist(cfg.disturbance->lo, cfg.disturbance->hi);
        offset[a] = dist(*noise_rng);
      }
      next += offset;
      trace.disturbances.push_back(std::move(offset));
    }
    if (!next.allFinite()) {
      throw SimulationError("simulate: non-finite state produced at step " + std::to_string(k));
    }
    trace.out_of_domain.push_back(system.domain.contains(next) ? 0 : 1);
    trace.states.push_back(std::move(next));
    trace.modes.push_back(mode);
    prev = mode;
  }
  trace.terminal_cost = cost.terminal(trace.states.back(), prev);
  trace.total_cost = detail::accumulate_cost(cost, trace.states, trace.modes, i_init);
  return trace;
}

}  // namespace

SimulationTrace simulate(const ValueTable& table, const CostSpec& cost,
                         const SwitchedSystem& system, const State& x0, ModeIndex i_init,
                         const ControllerConfig& cfg) {
  validate_controller_inputs(table, cost, system);
  if (table.horizon() != cost.horizon) {
    throw std::invalid_argument("simulate: table horizon != cost horizon");
  }
  return roll(&table, cost, system, x0, i_init, nullptr, cfg);
}

SimulationTrace replay_open_loop(const CostSpec& cost, const SwitchedSystem& system,
                                 const State& x0, ModeIndex i_init,
                                 const std::vector<ModeIndex>& modes,
                                 const ControllerConfig& cfg) {
  if (static_cast<int>(modes.size()) != cost.horizon) {
    throw std::invalid_argument("replay_open_loop: sequence length != cost horizon");
  }
  return roll(nullptr, cost, system, x0, i_init, &modes, cfg);
}

void write_trace_csv(const SimulationTrace& trace, std::ostream& out) {
  const int state_dim = trace.states.empty() ? 0 : static_cast<int>(trace.states[0].size());
  out << "k";
  for (int a = 0; a < state_dim; ++a) out << ",x_" << a;
  out << ",mode,stage_cost,switch_cost,out_of_domain\n";
  const int n_steps = trace.horizon();
  for (int k = 0; k <= n_steps; ++k) {
    out << k;
    for (int a = 0; a < state_dim; ++a) {
      out << ',';
      format_double(out, trace.states[static_cast<std::size_t>(k)][a]);
    }
    if (k < n_steps) {
      out << ',' << trace.modes[static_cast<std::size_t>(k)] << ',';
      format_double(out, trace.stage_costs[static_cast<std::size_t>(k)]);
      out << ',';
      format_double(out, trace.switch_costs[static_cast<std::size_t>(k)]);
    } else {
      out << ",,";
      format_double(out, trace.terminal_cost);
      out << ',';
    }
    out << ',' << static_cast<int>(trace.out_of_domain[static_cast<std::size_t>(k)]) << "\n";
  }
}

}  // namespace switchdp
