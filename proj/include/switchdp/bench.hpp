#pragma once

#include <json.hpp>

#include "switchdp/basis.hpp"
#include "switchdp/model.hpp"
#include "switchdp/training.hpp"

namespace switchdp {

/// Continuous-time vector fields xdot = g_i(x) plus the forward-Euler
/// sampling time. `nonneg_clamp` clamps every state component at zero after
/// each Euler step (for systems whose states are physically nonnegative).
struct ContinuousModeSet {
  std::vector<ModeMap> fields;
  double dt = 0.0;
  bool nonneg_clamp = false;
  int state_dim = 0;

  ContinuousModeSet(int n, std::vector<ModeMap> gs, double sampling_dt, bool clamp);
};

/// Discrete maps x -> x + dt * g_i(x), component-wise clamped at zero when
/// requested; the box becomes the training domain of interest.
SwitchedSystem euler_discretize(const ContinuousModeSet& cms, const Box& domain);

/// A fully parameterized benchmark problem: everything a training or
/// simulation run needs, plus a JSON echo that makes weight files
/// self-describing (simulate/sweep rebuild the scenario from the echo).
struct Scenario {
  std::string name;
  SwitchedSystem system;
  CostSpec cost;
  BasisSet basis;
  TrainingConfig training;
  nlohmann::json echo;
  int tracking_axis = -1;       // state axis whose tracking error reports use
  double tracking_target = 0.0;
};

/// Scalar two-mode benchmark: xdot = -x and xdot = -x^3 under forward Euler,
/// terminal cost 5 x_N^2, no running cost, symmetric switching cost kappa0,
/// basis x^1..x^14 on [-2, 2]. Defaults dt=0.02, horizon=100, and the scaled
/// variant is reachable through the dt/horizon parameters.
Scenario example1_scenario(double kappa0, double dt = 0.02, int horizon = 100);

/// Two-tank benchmark: three valve modes (inflow 0, 0.5, 1) with
/// ydot = -sqrt(y) + u, zdot = sqrt(y) - sqrt(z), forward Euler with
/// nonnegativity clamp, quadratic tracking of z = 0.5 in both running and
/// terminal cost, 45-term monomial basis on [0,1) x [0,0.8).
/// With mode_preference, mode 1's terminal cost is offset by
/// `preference_terminal_delta` (reward for finishing in mode 1) and its
/// running cost by `preference_running_delta` (small penalty for using it).
Scenario example2_scenario(double kappa0, bool mode_preference = false, double dt = 0.025,
                           int horizon = 200, double preference_terminal_delta = -10.0,
                           double preference_running_delta = 0.01);

/// Rebuilds a scenario from the echo stored in a weight file.
/// Throws ConfigError when the echo is missing or not reconstructible.
Scenario scenario_from_echo(const nlohmann::json& echo);

}  // namespace switchdp
