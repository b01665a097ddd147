#include "switchdp/bench.hpp"

#include <cmath>

#include "switchdp/errors.hpp"

namespace switchdp {

ContinuousModeSet::ContinuousModeSet(int n, std::vector<ModeMap> gs, double sampling_dt,
                                     bool clamp)
    : fields(std::move(gs)), dt(sampling_dt), nonneg_clamp(clamp), state_dim(n) {
  if (state_dim < 1) throw std::invalid_argument("ContinuousModeSet: state_dim must be >= 1");
  if (fields.empty()) throw std::invalid_argument("ContinuousModeSet: need at least one field");
  if (!(dt > 0.0)) throw std::invalid_argument("ContinuousModeSet: dt must be positive");
}

SwitchedSystem euler_discretize(const ContinuousModeSet& cms, const Box& domain) {
  std::vector<ModeMap> maps;
  maps.reserve(cms.fields.size());
  const double dt = cms.dt;
  const bool clamp = cms.nonneg_clamp;
  for (const ModeMap& g : cms.fields) {
    maps.push_back([g, dt, clamp](const State& x) -> State {
      State next = x + dt * g(x);
      if (clamp) next = next.cwiseMax(0.0);
      return next;
    });
  }
  return SwitchedSystem(cms.state_dim, std::move(maps), domain);
}

namespace {

Eigen::MatrixXd uniform_switch_table(int n_modes, double kappa0) {
  Eigen::MatrixXd table = Eigen::MatrixXd::Constant(n_modes, n_modes, kappa0);
  table.diagonal().setZero();
  return table;
}

double sqrt0(double v) { return std::sqrt(std::max(v, 0.0)); }

}  // namespace

Scenario example1_scenario(double kappa0, double dt, int horizon) {
  ContinuousModeSet cms(
      1,
      {
          [](const State& x) -> State { return -x; },
          [](const State& x) -> State { return -x.array().cube().matrix(); },
      },
      dt, /*clamp=*/false);
  Box domain((Eigen::VectorXd(1) << -2.0).finished(), (Eigen::VectorXd(1) << 2.0).finished());

  Scenario scenario{
      "example1",
      euler_discretize(cms, domain),
      CostSpec([](const State& x, ModeIndex) { return 5.0 * x[0] * x[0]; },
               [](const State&, ModeIndex) { return 0.0; }, uniform_switch_table(2, kappa0),
               horizon),
      BasisSet::univariate_powers(1, 14),
      TrainingConfig{},
      nlohmann::json{},
      -1,
      0.0};
  scenario.training.sample_count = 1000;
  scenario.training.rng_seed = 101;
  scenario.training.resample_per_stage = false;
  scenario.training.ridge_lambda = 0.0;
  scenario.tracking_axis = 0;
  scenario.tracking_target = 0.0;
  scenario.echo = {
      {"scenario", "example1"}, {"kappa0", kappa0}, {"dt", dt}, {"horizon", horizon},
      {"tracking_axis", 0},     {"tracking_target", 0.0},
  };
  return scenario;
}

Scenario example2_scenario(double kappa0, bool mode_preference, double dt, int horizon,
                           double preference_terminal_delta, double preference_running_delta) {
  auto tank_field = [](double inflow) {
    return [inflow](const State& x) -> State {
      State d(2);
      d[0] = -sqrt0(x[0]) + inflow;
      d[1] = sqrt0(x[0]) - sqrt0(x[1]);
      return d;
    };
  };
  ContinuousModeSet cms(2, {tank_field(0.0), tank_field(0.5), tank_field(1.0)}, dt,
                        /*clamp=*/true);
  Box domain((Eigen::VectorXd(2) << 0.0, 0.0).finished(),
             (Eigen::VectorXd(2) << 1.0, 0.8).finished());

  const double track = 0.5;
  auto base = [track](const State& x) {
    const double e = x[1] - track;
    return 0.25 * e * e;
  };

  StateModeCost terminal, running;
  if (mode_preference) {
    terminal = [base, preference_terminal_delta](const State& x, ModeIndex i) {
      return base(x) + (i == 1 ? preference_terminal_delta : 0.0);
    };
    running = [base, preference_running_delta](const State& x, ModeIndex i) {
      return base(x) + (i == 1 ? preference_running_delta : 0.0);
    };
  } else {
    terminal = [base](const State& x, ModeIndex) { return base(x); };
    running = [base](const State& x, ModeIndex) { return base(x); };
  }

  Scenario scenario{
      mode_preference ? "example2-pref" : "example2",
      euler_discretize(cms, domain),
      CostSpec(std::move(terminal), std::move(running), uniform_switch_table(3, kappa0),
               horizon),
      BasisSet::total_degree_monomials(2, 8),
      TrainingConfig{},
      nlohmann::json{},
      -1,
      0.0};
  scenario.training.sample_count = 100;
  scenario.training.rng_seed = 202;
  scenario.training.resample_per_stage = true;
  scenario.training.ridge_lambda = 0.0;
  scenario.tracking_axis = 1;
  scenario.tracking_target = track;
  scenario.echo = {
      {"scenario", scenario.name},
      {"kappa0", kappa0},
      {"dt", dt},
      {"horizon", horizon},
      {"tracking_axis", 1},
      {"tracking_target", track},
  };
  if (mode_preference) {
    scenario.echo["preference_terminal_delta"] = preference_terminal_delta;
    scenario.echo["preference_running_delta"] = preference_running_delta;
  }
  return scenario;
}

Scenario scenario_from_echo(const nlohmann::json& echo) {
  if (!echo.is_object() || !echo.contains("scenario") || !echo["scenario"].is_string()) {
    throw ConfigError("scenario echo: missing scenario name (weight file not self-describing)");
  }
  const std::string name = echo["scenario"].get<std::string>();
  auto number = [&](const char* key, double fallback) {
    return (echo.contains(key) && echo[key].is_number()) ? echo[key].get<double>() : fallback;
  };
  const double kappa0 = number("kappa0", 0.0);
  if (name == "example1") {
    return example1_scenario(kappa0, number("dt", 0.02),
                             static_cast<int>(number("horizon", 100)));
  }
  if (name == "example2" || name == "example2-pref") {
    return example2_scenario(kappa0, name == "example2-pref", number("dt", 0.025),
                             static_cast<int>(number("horizon", 200)),
                             number("preference_terminal_delta", -10.0),
                             number("preference_running_delta", 0.01));
  }
  throw ConfigError("scenario echo: unknown scenario '" + name + "'");
}

}  // namespace switchdp
