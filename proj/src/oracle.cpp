#include "switchdp/oracle.hpp"

#include <sstream>

#include "switchdp/errors.hpp"

namespace switchdp {

double sequence_cost(const SwitchedSystem& system, const CostSpec& cost, const State& x0,
                     ModeIndex i_init, const std::vector<ModeIndex>& modes) {
  if (static_cast<int>(modes.size()) != cost.horizon) {
    throw std::invalid_argument("sequence_cost: sequence length != cost horizon");
  }
  detail::check_mode(i_init, system.mode_count, "sequence_cost");
  std::vector<State> states;
  states.reserve(modes.size() + 1);
  states.push_back(x0);
  for (ModeIndex mode : modes) {
    states.push_back(step(system, mode, states.back()));
  }
  return detail::accumulate_cost(cost, states, modes, i_init);
}

namespace {

struct Enumerator {
  const SwitchedSystem& system;
  const CostSpec& cost;
  int horizon;
  double best_cost = 0.0;
  bool have_best = false;
  std::vector<ModeIndex> best_sequence;
  std::vector<ModeIndex> current;

  // Depth-first over mode sequences in lexicographic order, carrying the
  // accumulated prefix cost; the strict '<' acceptance keeps the first
  // (lexicographically smallest) sequence among exact ties.
  void visit(const State& x, ModeIndex prev, double partial, int depth) {
    if (depth == horizon) {
      const double total = partial + cost.terminal(x, prev);
      if (!have_best || total < best_cost) {
        best_cost = total;
        best_sequence = current;
        have_best = true;
      }
      return;
    }
    for (ModeIndex i = 1; i <= system.mode_count; ++i) {
      const double stage = partial + cost.running(x, i) + cost.switch_table(prev - 1, i - 1);
      current.push_back(i);
      visit(step(system, i, x), i, stage, depth + 1);
      current.pop_back();
    }
  }
};

}  // namespace

OracleResult enumerate_optimal(const SwitchedSystem& system, const CostSpec& cost,
                               const State& x0, ModeIndex i_init, int horizon,
                               std::uint64_t cap) {
  detail::check_mode(i_init, system.mode_count, "enumerate_optimal");
  if (horizon < 0) throw std::invalid_argument("enumerate_optimal: horizon must be >= 0");
  if (horizon > cost.horizon) {
    throw std::invalid_argument("enumerate_optimal: horizon exceeds cost horizon");
  }
  // M^horizon with overflow-safe early exit.
  std::uint64_t count = 1;
  for (int d = 0; d < horizon; ++d) {
    if (count > cap / static_cast<std::uint64_t>(system.mode_count)) {
      std::ostringstream os;
      os << "enumerate_optimal: " << system.mode_count << "^" << horizon
         << " sequences exceed the enumeration cap " << cap
         << "; raise the cap or reduce the horizon";
      throw BudgetError(os.str());
    }
    count *= static_cast<std::uint64_t>(system.mode_count);
  }

  Enumerator e{system, cost, horizon};
  e.current.reserve(static_cast<std::size_t>(horizon));
  e.visit(x0, i_init, 0.0, 0);
  return {e.best_cost, std::move(e.best_sequence)};
}

}  // namespace switchdp
