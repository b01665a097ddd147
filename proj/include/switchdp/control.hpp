#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "switchdp/model.hpp"
#include "switchdp/valuestore.hpp"

namespace switchdp {

/// Additive per-step state offsets, drawn uniformly per axis from [lo, hi),
/// from a stream seeded independently of training.
struct DisturbanceSpec {
  double lo = 0.0;
  double hi = 0.0;
  std::uint64_t seed = 0;
};

/// threshold == 0: the plain one-step-lookahead selector.
/// threshold > 0: the threshold-remedy baseline — switching costs are ignored
/// in the scores (the table is expected to be trained without them) and the
/// controller keeps the previous mode unless the best alternative improves
/// the score by strictly more than the threshold.
struct ControllerConfig {
  double threshold = 0.0;
  std::optional<DisturbanceSpec> disturbance;
};

/// Online mode selection at stage k (0 <= k <= N-1):
///   argmin_i [ Q(x, i) + kappa(i_prev, i) + <W_{k+1}^i, phi(f_i(x))> ]
/// with ties toward the lowest index. Throws std::invalid_argument at k = N
/// (no decision at terminal time).
ModeIndex select_mode(const ValueTable& table, const CostSpec& cost,
                      const SwitchedSystem& system, int k, const State& x, ModeIndex i_prev,
                      const ControllerConfig& cfg = {});

/// Closed-loop rollout for k = 0..N-1: select, step, add the disturbance
/// offset if configured, accumulate costs. Out-of-domain states are flagged,
/// never fatal. Throws SimulationError if a non-finite state appears.
SimulationTrace simulate(const ValueTable& table, const CostSpec& cost,
                         const SwitchedSystem& system, const State& x0, ModeIndex i_init,
                         const ControllerConfig& cfg = {});

/// Applies a fixed mode sequence regardless of state (open-loop), with the
/// same disturbance handling and trace bookkeeping as simulate.
SimulationTrace replay_open_loop(const CostSpec& cost, const SwitchedSystem& system,
                                 const State& x0, ModeIndex i_init,
                                 const std::vector<ModeIndex>& modes,
                                 const ControllerConfig& cfg = {});

/// Writes the canonical trace CSV: header
///   k, x_0..x_{n-1}, mode, stage_cost, switch_cost, out_of_domain
/// one row per step, and a final row carrying the terminal cost in
/// `stage_cost` with an empty mode column.
void write_trace_csv(const SimulationTrace& trace, std::ostream& out);

}  // namespace switchdp
