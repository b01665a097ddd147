#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "switchdp/errors.hpp"

namespace switchdp {

/// State vector in R^n.
using State = Eigen::VectorXd;

/// Discrete mode index. 1-based everywhere (interfaces, file formats, traces);
/// valid values are 1..M for the owning system.
using ModeIndex = int;

/// Discrete-time mode map: x_{k+1} = f_i(x_k).
using ModeMap = std::function<State(const State&)>;

/// Scalar cost term evaluated at a state under an active mode.
using StateModeCost = std::function<double(const State&, ModeIndex)>;

/// Axis-aligned box domain of interest.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Box() = default;
  /// Requires lo.size()==hi.size() and lo < hi per axis.
  Box(Eigen::VectorXd lower, Eigen::VectorXd upper);

  int dim() const { return static_cast<int>(lo.size()); }
  /// Closed-box membership test (sampling treats upper bounds as exclusive).
  bool contains(const State& x) const;
};

/// M deterministic discrete-time mode maps on an n-dimensional state, plus the
/// domain of interest used for training-sample draws.
struct SwitchedSystem {
  int state_dim = 0;
  int mode_count = 0;
  std::vector<ModeMap> mode_maps;  // exactly mode_count entries
  Box domain;

  SwitchedSystem() = default;
  SwitchedSystem(int n, std::vector<ModeMap> maps, Box omega);
};

/// Terminal cost psi(x, i), running cost Q(x, i), switching-cost table
/// kappa(from, to), and the horizon N.
///
/// The switch table's diagonal must be exactly zero (staying costs nothing).
/// Off-diagonal entries may be any real, including negative (rewards).
/// Convexity of psi/Q is not checked; black-box callables make it
/// unverifiable, so it is a caller obligation.
struct CostSpec {
  StateModeCost terminal;
  StateModeCost running;
  Eigen::MatrixXd switch_table;  // M x M
  int horizon = 0;               // N >= 0 (N=0 is the degenerate terminal-only case)

  CostSpec() = default;
  CostSpec(StateModeCost psi, StateModeCost q, Eigen::MatrixXd kappa, int n_stages);
};

/// Per-step record of a closed-loop or replayed run. Supports exact cost
/// recomputation from raw states and modes.
struct SimulationTrace {
  std::vector<State> states;        // x_0 .. x_N (N+1 entries)
  std::vector<ModeIndex> modes;     // i_0 .. i_{N-1}
  ModeIndex initial_mode = 1;       // i_{-1}
  std::vector<double> stage_costs;  // Q(x_k, i_k) per step
  std::vector<double> switch_costs; // kappa(i_{k-1}, i_k) per step
  double terminal_cost = 0.0;       // psi(x_N, i_{N-1})
  double total_cost = 0.0;
  std::vector<char> out_of_domain;  // per state x_0..x_N: 1 if outside the box
  std::vector<State> disturbances;  // per step additive offsets; empty if none

  int horizon() const { return static_cast<int>(modes.size()); }
  int switch_count() const;
  std::vector<int> switch_steps() const;
};

/// Applies f_mode to x. Pure; throws std::invalid_argument on an invalid mode
/// index or non-finite input.
State step(const SwitchedSystem& system, ModeIndex mode, const State& x);

/// Returns kappa(from, to); exactly 0 when from == to.
double switching_cost(const CostSpec& cost, ModeIndex from, ModeIndex to);

/// Recomputes J = psi(x_N, i_{N-1}) + sum_k (Q(x_k, i_k) + kappa(i_{k-1}, i_k))
/// from the trace's raw states and modes. The accumulation order is shared
/// with the oracle's sequence evaluation so the two agree bit-for-bit.
double trace_cost(const CostSpec& cost, const SimulationTrace& trace);

/// Rolls the fixed mode sequence forward from x0 and fills a complete trace
/// (states, cost decomposition, out-of-domain flags). Disturbance-free.
SimulationTrace build_trace(const SwitchedSystem& system, const CostSpec& cost,
                            const State& x0, ModeIndex i_init,
                            const std::vector<ModeIndex>& modes);

namespace detail {
/// Shared cost accumulator: all cost paths (trace_cost, sequence_cost,
/// simulate totals) sum in this exact order so results are bitwise identical.
double accumulate_cost(const CostSpec& cost, const std::vector<State>& states,
                       const std::vector<ModeIndex>& modes, ModeIndex i_init);
void check_mode(ModeIndex mode, int mode_count, const char* who);
}  // namespace detail

}  // namespace switchdp
