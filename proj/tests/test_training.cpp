#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "switchdp/bench.hpp"
#include "switchdp/errors.hpp"
#include "switchdp/oracle.hpp"
#include "switchdp/training.hpp"
#include "switchdp/valuestore.hpp"

using namespace switchdp;
using testutil::scalar;

namespace {

std::vector<Eigen::VectorXd> zero_weights(int n_modes, int basis_size) {
  return std::vector<Eigen::VectorXd>(static_cast<std::size_t>(n_modes),
                                      Eigen::VectorXd::Zero(basis_size));
}

double stage_residual(const TrainReport& report, int k, ModeIndex mode) {
  for (const StageDiagnostics& d : report.stages) {
    if (d.k == k && d.mode == mode) return d.max_residual;
  }
  REQUIRE(false);
  return 0.0;
}

}  // namespace

TEST_CASE("single-mode lookahead target has no minimum to take") {
  SwitchedSystem sys(1, {[](const State& x) { return scalar(0.5 * x[0]); }},
                     testutil::interval(-2.0, 2.0));
  CostSpec cost([](const State& x, ModeIndex) { return x[0] * x[0]; },
                [](const State& x, ModeIndex) { return 0.1 * x[0] * x[0]; },
                Eigen::MatrixXd::Zero(1, 1), 5);
  BasisSet basis = BasisSet::univariate_powers(1, 3);
  std::vector<Eigen::VectorXd> next = zero_weights(1, 3);
  next[0] << 1.0, -0.5, 0.25;

  State x = scalar(1.2);
  auto [target, minimizer] = bellman_target(sys, cost, basis, next, x, 1);
  State x1 = step(sys, 1, x);
  double expected = cost.running(x, 1) + next[0].dot(basis.evaluate(x1));
  CHECK(target == doctest::Approx(expected).epsilon(1e-15));
  CHECK(minimizer == 1);
}

TEST_CASE("zero continuation keeps the lookahead in the current mode") {
  Scenario sc = example1_scenario(0.1);
  std::vector<Eigen::VectorXd> next = zero_weights(2, sc.basis.size());
  // All continuations are zero, running cost is zero: only kappa differs.
  auto [target, minimizer] = bellman_target(sc.system, sc.cost, sc.basis, next, scalar(1.5), 1);
  CHECK(target == 0.0);
  CHECK(minimizer == 1);
  auto [target2, minimizer2] = bellman_target(sc.system, sc.cost, sc.basis, next, scalar(1.5), 2);
  CHECK(target2 == 0.0);
  CHECK(minimizer2 == 2);
}

TEST_CASE("ties break toward the lowest mode index") {
  SwitchedSystem sys = testutil::affine_pair(0.9, 0.0, 0.9, 0.0);
  CostSpec cost([](const State&, ModeIndex) { return 0.0; },
                [](const State&, ModeIndex) { return 0.0; }, Eigen::MatrixXd::Zero(2, 2), 5);
  BasisSet basis = BasisSet::univariate_powers(1, 2);
  auto [target, minimizer] = bellman_target(sys, cost, basis, zero_weights(2, 2), scalar(1.0), 2);
  CHECK(target == 0.0);
  CHECK(minimizer == 1);  // exact tie: lowest index wins, even against staying
}

TEST_CASE("final-stage lookahead matches the one-step oracle") {
  Scenario sc = example1_scenario(0.1);
  TrainingConfig config = sc.training;
  TerminalFit terminal = fit_terminal(sc.system, sc.cost, sc.basis, config);

  for (double x0 : {1.8, 1.3, 0.6, -1.1}) {
    for (ModeIndex j : {1, 2}) {
      CAPTURE(x0);
      CAPTURE(j);
      auto [target, minimizer] =
          bellman_target(sc.system, sc.cost, sc.basis, terminal.weights, scalar(x0), j);
      OracleResult oracle = enumerate_optimal(sc.system, sc.cost, scalar(x0), j, 1);
      CHECK(minimizer == oracle.optimal_sequence.at(0));
      CHECK(target == doctest::Approx(oracle.optimal_cost).epsilon(1e-6));
    }
  }
}

TEST_CASE("raising the switching cost never lowers the target") {
  Scenario low = example1_scenario(0.01);
  Scenario high = example1_scenario(0.1);
  std::vector<Eigen::VectorXd> next = zero_weights(2, low.basis.size());
  std::mt19937_64 rng(23);
  std::normal_distribution<double> wdist(0.0, 0.05);
  for (auto& w : next) {
    for (Eigen::Index t = 0; t < w.size(); ++t) w[t] = wdist(rng);
  }
  std::uniform_real_distribution<double> xdist(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    State x = scalar(xdist(rng));
    ModeIndex j = 1 + trial % 2;
    double t_low = bellman_target(low.system, low.cost, low.basis, next, x, j).first;
    double t_high = bellman_target(high.system, high.cost, high.basis, next, x, j).first;
    CHECK(t_high >= t_low - 1e-12);
  }
}

TEST_CASE("terminal fit recovers coefficients in the span exactly") {
  SwitchedSystem sys = testutil::affine_pair(0.9, 0.0, 0.8, 0.1);
  BasisSet basis = BasisSet::univariate_powers(1, 5);
  Eigen::VectorXd truth(5);
  truth << 2.0, -1.0, 0.5, 0.0, 0.25;
  CostSpec cost(
      [&basis, truth](const State& x, ModeIndex) { return truth.dot(basis.evaluate(x)); },
      [](const State&, ModeIndex) { return 0.0; }, Eigen::MatrixXd::Zero(2, 2), 3);
  TrainingConfig config;
  config.sample_count = 50;
  config.rng_seed = 3;
  TerminalFit fit = fit_terminal(sys, cost, basis, config);
  REQUIRE(fit.weights.size() == 2);
  for (ModeIndex j = 1; j <= 2; ++j) {
    CHECK((fit.weights[static_cast<std::size_t>(j - 1)] - truth).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(fit.max_residual[static_cast<std::size_t>(j - 1)] < 1e-8);
  }
}

TEST_CASE("benchmark terminal fits are numerically exact") {
  Scenario sc = example1_scenario(0.1);
  TerminalFit fit = fit_terminal(sc.system, sc.cost, sc.basis, sc.training);
  // 5 x^2 lies in the span of x^1..x^14.
  CHECK(fit.max_residual[0] < 1e-6);
  CHECK(fit.max_residual[1] < 1e-6);
}

TEST_CASE("terminal preference offsets land on the constant term") {
  Scenario sc = example2_scenario(0.0002, /*mode_preference=*/true);
  TerminalFit fit = fit_terminal(sc.system, sc.cost, sc.basis, sc.training);
  REQUIRE(fit.weights.size() == 3);
  // Modes share the sample set, and the costs differ by the constant -10,
  // which the basis can represent exactly: the weight difference is -10 e_0.
  Eigen::VectorXd diff = fit.weights[0] - fit.weights[1];
  CHECK(diff[0] == doctest::Approx(-10.0).epsilon(1e-8));
  for (Eigen::Index t = 1; t < diff.size(); ++t) {
    CAPTURE(t);
    CHECK(std::abs(diff[t]) < 1e-6);
  }
  // Modes 2 and 3 share the same terminal cost.
  CHECK((fit.weights[1] - fit.weights[2]).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("batch training composes exactly inside a closed polynomial family") {
  // Linear map + polynomial basis: the lookahead target stays in the span at
  // every stage, so fits are exact and residuals vanish.
  SwitchedSystem sys(1, {[](const State& x) { return scalar(0.9 * x[0]); }},
                     testutil::interval(-2.0, 2.0));
  BasisSet basis = BasisSet::univariate_powers(1, 3);
  CostSpec cost([](const State& x, ModeIndex) { return 2.0 * x[0] + x[0] * x[0] * x[0]; },
                [](const State& x, ModeIndex) { return 0.5 * x[0] * x[0]; },
                Eigen::MatrixXd::Zero(1, 1), 4);
  TrainingConfig config;
  config.sample_count = 40;
  config.rng_seed = 12;
  TrainReport report;
  ValueTable table = batch_train(sys, cost, basis, config, &report);

  for (const StageDiagnostics& d : report.stages) {
    CAPTURE(d.k);
    CHECK(d.max_residual < 1e-6);
  }
  // Spot-check the Bellman identity on fresh points at an interior stage.
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    State x = scalar(dist(rng));
    std::vector<Eigen::VectorXd> next = {table.weights(3, 1)};
    double target = bellman_target(sys, cost, basis, next, x, 1).first;
    CHECK(table.value(2, x, 1) == doctest::Approx(target).epsilon(1e-9));
  }
}

TEST_CASE("training runs are deterministic given the seed") {
  Scenario sc = example1_scenario(0.1, 0.02, 12);
  ValueTable a = batch_train(sc.system, sc.cost, sc.basis, sc.training);
  ValueTable b = batch_train(sc.system, sc.cost, sc.basis, sc.training);
  CHECK(to_json_text(a) == to_json_text(b));

  TrainingConfig seq = sc.training;
  seq.sample_count = 300;
  ValueTable c = sequential_train(sc.system, sc.cost, sc.basis, seq);
  ValueTable d = sequential_train(sc.system, sc.cost, sc.basis, seq);
  CHECK(to_json_text(c) == to_json_text(d));
  CHECK(c.metadata.trained_by == "sequential");
  CHECK(a.metadata.trained_by == "batch");
}

TEST_CASE("resampling per stage changes samples but not the fitted function much") {
  Scenario sc = example1_scenario(0.1, 0.02, 10);
  TrainingConfig fixed = sc.training;
  TrainingConfig fresh = sc.training;
  fresh.resample_per_stage = true;
  ValueTable a = batch_train(sc.system, sc.cost, sc.basis, fixed);
  ValueTable b = batch_train(sc.system, sc.cost, sc.basis, fresh);
  CHECK(a.metadata.resample_per_stage == false);
  CHECK(b.metadata.resample_per_stage == true);
  // Different sample draws -> different weights...
  CHECK(to_json_text(a) != to_json_text(b));
  // ...but similar value functions on the bulk of the domain (the gap is
  // Monte-Carlo regression noise, a few percent at worst).
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> dist(-1.5, 1.5);
  for (int trial = 0; trial < 30; ++trial) {
    State x = scalar(dist(rng));
    double va = a.value(5, x, 1);
    double vb = b.value(5, x, 1);
    CHECK(std::abs(va - vb) < 0.01 + 0.02 * std::abs(vb));
  }
}

TEST_CASE("sample budget below the basis size is refused") {
  Scenario sc = example1_scenario(0.1);
  TrainingConfig config = sc.training;
  config.sample_count = 10;  // basis has 14 terms
  CHECK_THROWS_WITH_AS(batch_train(sc.system, sc.cost, sc.basis, config),
                       doctest::Contains("p >= m"), std::invalid_argument);
}

TEST_CASE("rank deficiency is reported with a ridge suggestion") {
  // A degenerate domain collapses every monomial sample to ~0: the normal
  // system is singular without regularization.
  SwitchedSystem sys(1, {[](const State& x) { return scalar(0.5 * x[0]); }},
                     testutil::interval(-1e-9, 1e-9));
  BasisSet basis = BasisSet::univariate_powers(0, 3);
  CostSpec cost([](const State& x, ModeIndex) { return x[0]; },
                [](const State&, ModeIndex) { return 0.0; }, Eigen::MatrixXd::Zero(1, 1), 2);
  TrainingConfig config;
  config.sample_count = 10;
  CHECK_THROWS_WITH_AS(batch_train(sys, cost, basis, config),
                       doctest::Contains("ridge_lambda"), TrainingError);

  config.ridge_lambda = 1e-6;
  CHECK_NOTHROW(batch_train(sys, cost, basis, config));
}

TEST_CASE("non-finite cost evaluations carry stage context") {
  SwitchedSystem sys = testutil::affine_pair(0.9, 0.0, 0.8, 0.0);
  BasisSet basis = BasisSet::univariate_powers(1, 3);
  TrainingConfig config;
  config.sample_count = 20;

  SUBCASE("terminal cost produces NaN") {
    CostSpec cost([](const State& x, ModeIndex) { return std::sqrt(x[0] - 10.0); },
                  [](const State&, ModeIndex) { return 0.0; }, Eigen::MatrixXd::Zero(2, 2), 3);
    CHECK_THROWS_AS(batch_train(sys, cost, basis, config), TrainingError);
  }
  SUBCASE("running cost produces NaN mid-recursion") {
    CostSpec cost([](const State& x, ModeIndex) { return x[0] * x[0]; },
                  [](const State& x, ModeIndex) { return std::sqrt(x[0] - 10.0); },
                  Eigen::MatrixXd::Zero(2, 2), 3);
    CHECK_THROWS_WITH_AS(batch_train(sys, cost, basis, config), doctest::Contains("k="),
                         TrainingError);
  }
}

TEST_CASE("sequential training matches batch on a polynomial-closed problem") {
  SwitchedSystem sys(1, {[](const State& x) { return scalar(0.9 * x[0]); }},
                     testutil::interval(-2.0, 2.0));
  BasisSet basis = BasisSet::total_degree_monomials(1, 2);
  CostSpec cost([](const State&, ModeIndex) { return 3.0; },
                [](const State&, ModeIndex) { return 0.0; }, Eigen::MatrixXd::Zero(1, 1), 1);
  TrainingConfig config;
  config.sample_count = 500;
  config.rng_seed = 9;
  ValueTable batch = batch_train(sys, cost, basis, config);
  ValueTable seq = sequential_train(sys, cost, basis, config);
  for (int k = 0; k <= 1; ++k) {
    for (double x0 : {-1.5, -0.3, 0.4, 1.9}) {
      CHECK(seq.value(k, scalar(x0), 1) ==
            doctest::Approx(batch.value(k, scalar(x0), 1)).epsilon(1e-4));
    }
  }
}

TEST_CASE("sequential training is exact on the zero problem") {
  SwitchedSystem sys = testutil::affine_pair(0.9, 0.0, 0.8, 0.0);
  BasisSet basis = BasisSet::univariate_powers(1, 3);
  CostSpec cost([](const State&, ModeIndex) { return 0.0; },
                [](const State&, ModeIndex) { return 0.0; }, Eigen::MatrixXd::Zero(2, 2), 3);
  TrainingConfig config;
  config.sample_count = 200;
  ValueTable table = sequential_train(sys, cost, basis, config);
  for (int k = 0; k <= 3; ++k) {
    for (ModeIndex i = 1; i <= 2; ++i) {
      CHECK(table.weights(k, i).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("sequential and batch agree on the scalar benchmark policy") {
  Scenario sc = example1_scenario(0.1);
  ValueTable batch = batch_train(sc.system, sc.cost, sc.basis, sc.training);
  TrainingConfig seq_config = sc.training;
  ValueTable seq = sequential_train(sc.system, sc.cost, sc.basis, seq_config);

  // Compare induced one-step decisions at a mid-horizon stage over a grid.
  int agree = 0;
  int total = 0;
  for (int g = 0; g < 100; ++g) {
    double x0 = -2.0 + 4.0 * g / 99.0;
    for (ModeIndex j : {1, 2}) {
      auto pick = [&](const ValueTable& table) {
        double best = std::numeric_limits<double>::infinity();
        ModeIndex arg = 0;
        for (ModeIndex i = 1; i <= 2; ++i) {
          State x1 = step(sc.system, i, scalar(x0));
          double s = sc.cost.switch_table(j - 1, i - 1) + table.value(51, x1, i);
          if (s < best) {
            best = s;
            arg = i;
          }
        }
        return arg;
      };
      agree += (pick(batch) == pick(seq)) ? 1 : 0;
      ++total;
    }
  }
  CHECK(total == 200);
  CHECK(agree >= 196);  // >= 98% policy agreement
}

TEST_CASE("divergent recursions trip the runaway guard") {
  SwitchedSystem sys = testutil::affine_pair(1.5, 0.0, 1.4, 0.0, -2.0, 2.0);
  BasisSet basis = BasisSet::univariate_powers(1, 3);
  CostSpec cost([](const State& x, ModeIndex) { return 1e14 * x[0] * x[0]; },
                [](const State& x, ModeIndex) { return 1e10 * x[0] * x[0]; },
                Eigen::MatrixXd::Zero(2, 2), 30);
  TrainingConfig config;
  config.sample_count = 50;
  CHECK_THROWS_WITH_AS(sequential_train(sys, cost, basis, config), doctest::Contains("diverg"),
                       TrainingError);
}

TEST_CASE("trained tables generalize beyond their own samples") {
  Scenario sc = example1_scenario(0.1);
  TrainReport report;
  ValueTable table = batch_train(sc.system, sc.cost, sc.basis, sc.training, &report);
  CHECK(report.wall_seconds > 0.0);
  CHECK(report.stages.size() == 2 * 101);

  // Fresh holdout samples at stage 50: Bellman residuals stay comparable to
  // the in-sample residual (no blow-up away from the training set).
  std::mt19937_64 rng(999);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  double in_sample = std::max(stage_residual(report, 50, 1), 1e-9);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    State x = scalar(dist(rng));
    std::vector<Eigen::VectorXd> next = {table.weights(51, 1), table.weights(51, 2)};
    double target = bellman_target(sc.system, sc.cost, sc.basis, next, x, 1).first;
    worst = std::max(worst, std::abs(table.value(50, x, 1) - target));
  }
  CHECK(worst < 10.0 * in_sample + 1e-6);
}
