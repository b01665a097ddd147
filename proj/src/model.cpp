#include "switchdp/model.hpp"

#include <cmath>
#include <sstream>

namespace switchdp {

Box::Box(Eigen::VectorXd lower, Eigen::VectorXd upper)
    : lo(std::move(lower)), hi(std::move(upper)) {
  if (lo.size() != hi.size()) {
    throw std::invalid_argument("Box: lower/upper dimension mismatch");
  }
  for (Eigen::Index a = 0; a < lo.size(); ++a) {
    if (!(lo[a] < hi[a])) {
      std::ostringstream os;
      os << "Box: require lower < upper per axis, got [" << lo[a] << ", " << hi[a]
         << "] on axis " << a;
      throw std::invalid_argument(os.str());
    }
  }
}

bool Box::contains(const State& x) const {
  if (x.size() != lo.size()) return false;
  for (Eigen::Index a = 0; a < lo.size(); ++a) {
    if (x[a] < lo[a] || x[a] > hi[a]) return false;
  }
  return true;
}

SwitchedSystem::SwitchedSystem(int n, std::vector<ModeMap> maps, Box omega)
    : state_dim(n), mode_count(static_cast<int>(maps.size())),
      mode_maps(std::move(maps)), domain(std::move(omega)) {
  if (state_dim <= 0) throw std::invalid_argument("SwitchedSystem: state_dim must be positive");
  if (mode_count <= 0) throw std::invalid_argument("SwitchedSystem: need at least one mode map");
  if (domain.dim() != state_dim) {
    throw std::invalid_argument("SwitchedSystem: domain dimension != state_dim");
  }
}

CostSpec::CostSpec(StateModeCost psi, StateModeCost q, Eigen::MatrixXd kappa, int n_stages)
    : terminal(std::move(psi)), running(std::move(q)),
      switch_table(std::move(kappa)), horizon(n_stages) {
  if (!terminal || !running) {
    throw std::invalid_argument("CostSpec: terminal and running costs are required");
  }
  if (switch_table.rows() != switch_table.cols() || switch_table.rows() < 1) {
    throw std::invalid_argument("CostSpec: switch table must be square and non-empty");
  }
  for (Eigen::Index i = 0; i < switch_table.rows(); ++i) {
    if (switch_table(i, i) != 0.0) {
      throw std::invalid_argument("CostSpec: switch table diagonal must be exactly zero");
    }
  }
  if (horizon < 0) throw std::invalid_argument("CostSpec: horizon must be >= 0");
}

int SimulationTrace::switch_count() const {
  int c = 0;
  ModeIndex prev = initial_mode;
  for (ModeIndex m : modes) {
    if (m != prev) ++c;
    prev = m;
  }
  return c;
}

std::vector<int> SimulationTrace::switch_steps() const {
  std::vector<int> steps;
  ModeIndex prev = initial_mode;
  for (int k = 0; k < static_cast<int>(modes.size()); ++k) {
    if (modes[k] != prev) steps.push_back(k);
    prev = modes[k];
  }
  return steps;
}

namespace detail {

void check_mode(ModeIndex mode, int mode_count, const char* who) {
  if (mode < 1 || mode > mode_count) {
    std::ostringstream os;
    os << who << ": mode index " << mode << " outside 1.." << mode_count;
    throw std::invalid_argument(os.str());
  }
}

double accumulate_cost(const CostSpec& cost, const std::vector<State>& states,
                       const std::vector<ModeIndex>& modes, ModeIndex i_init) {
  const int n_modes = static_cast<int>(cost.switch_table.rows());
  double total = 0.0;
  ModeIndex prev = i_init;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    check_mode(modes[k], n_modes, "accumulate_cost");
    total += cost.running(states[k], modes[k]);
    total += cost.switch_table(prev - 1, modes[k] - 1);
    prev = modes[k];
  }
  total += cost.terminal(states.back(), prev);
  return total;
}

}  // namespace detail

State step(const SwitchedSystem& system, ModeIndex mode, const State& x) {
  detail::check_mode(mode, system.mode_count, "step");
  if (x.size() != system.state_dim) {
    throw std::invalid_argument("step: state dimension mismatch");
  }
  if (!x.allFinite()) throw std::invalid_argument("step: non-finite state");
  return system.mode_maps[static_cast<std::size_t>(mode - 1)](x);
}

double switching_cost(const CostSpec& cost, ModeIndex from, ModeIndex to) {
  const int n_modes = static_cast<int>(cost.switch_table.rows());
  detail::check_mode(from, n_modes, "switching_cost");
  detail::check_mode(to, n_modes, "switching_cost");
  if (from == to) return 0.0;
  return cost.switch_table(from - 1, to - 1);
}

double trace_cost(const CostSpec& cost, const SimulationTrace& trace) {
  const auto n_steps = trace.modes.size();
  if (trace.states.size() != n_steps + 1 || trace.stage_costs.size() != n_steps ||
      trace.switch_costs.size() != n_steps) {
    throw std::invalid_argument("trace_cost: inconsistent trace lengths");
  }
  if (static_cast<int>(n_steps) != cost.horizon) {
    throw std::invalid_argument("trace_cost: trace horizon != cost horizon");
  }
  return detail::accumulate_cost(cost, trace.states, trace.modes, trace.initial_mode);
}

SimulationTrace build_trace(const SwitchedSystem& system, const CostSpec& cost,
                            const State& x0, ModeIndex i_init,
                            const std::vector<ModeIndex>& modes) {
  detail::check_mode(i_init, system.mode_count, "build_trace");
  if (static_cast<int>(modes.size()) != cost.horizon) {
    throw std::invalid_argument("build_trace: sequence length != cost horizon");
  }
  SimulationTrace trace;
  trace.initial_mode = i_init;
  trace.states.reserve(modes.size() + 1);
  trace.states.push_back(x0);
  trace.out_of_domain.push_back(system.domain.contains(x0) ? 0 : 1);
  ModeIndex prev = i_init;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const State& x = trace.states.back();
    trace.stage_costs.push_back(cost.running(x, modes[k]));
    trace.switch_costs.push_back(switching_cost(cost, prev, modes[k]));
    State next = step(system, modes[k], x);
    trace.out_of_domain.push_back(system.domain.contains(next) ? 0 : 1);
    trace.states.push_back(std::move(next));
    prev = modes[k];
  }
  trace.modes = modes;
  trace.terminal_cost = cost.terminal(trace.states.back(), prev);
  trace.total_cost = detail::accumulate_cost(cost, trace.states, trace.modes, i_init);
  return trace;
}

}  // namespace switchdp
