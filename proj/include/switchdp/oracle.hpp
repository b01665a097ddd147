#pragma once

#include <cstdint>
#include <vector>

#include "switchdp/model.hpp"

namespace switchdp {

struct OracleResult {
  double optimal_cost = 0.0;
  std::vector<ModeIndex> optimal_sequence;
};

/// Exact forward cost of a fixed mode sequence. Shares its accumulation order
/// with trace_cost, so the two agree bit-for-bit on the same run.
double sequence_cost(const SwitchedSystem& system, const CostSpec& cost, const State& x0,
                     ModeIndex i_init, const std::vector<ModeIndex>& modes);

/// Globally optimal cost and minimizing sequence over all M^horizon mode
/// sequences (depth-first, shared-prefix accumulation; among ties the
/// lexicographically smallest sequence wins). `horizon` may be smaller than
/// cost.horizon; the terminal cost is charged at stage `horizon`.
/// Throws BudgetError when M^horizon exceeds `cap`.
OracleResult enumerate_optimal(const SwitchedSystem& system, const CostSpec& cost,
                               const State& x0, ModeIndex i_init, int horizon,
                               std::uint64_t cap = (std::uint64_t{1} << 20));

}  // namespace switchdp
