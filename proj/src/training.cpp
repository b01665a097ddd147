#include "switchdp/training.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <random>
#include <sstream>

#include "switchdp/errors.hpp"

namespace switchdp {

namespace {

void validate_common(const SwitchedSystem& system, const CostSpec& cost, const BasisSet& basis,
                     const TrainingConfig& config) {
  if (basis.input_dim() != system.state_dim) {
    throw std::invalid_argument("training: basis input dimension != system state dimension");
  }
  if (static_cast<int>(cost.switch_table.rows()) != system.mode_count) {
    throw std::invalid_argument("training: switch table size != system mode count");
  }
  if (config.sample_count < 1) {
    throw std::invalid_argument("training: sample_count must be positive");
  }
  if (config.ridge_lambda < 0.0) {
    throw std::invalid_argument("training: ridge_lambda must be nonnegative");
  }
  if (config.convergence_tol <= 0.0) {
    throw std::invalid_argument("training: convergence_tol must be positive");
  }
}

State draw_state(const SwitchedSystem& system, std::mt19937_64& rng) {
  State x(system.state_dim);
  for (int a = 0; a < system.state_dim; ++a) {
    std::uniform_real_distribution<double> dist(system.domain.lo[a], system.domain.hi[a]);
    x[a] = dist(rng);
  }
  return x;
}

bool next_states_in_domain(const SwitchedSystem& system, const State& x) {
  for (ModeIndex i = 1; i <= system.mode_count; ++i) {
    if (!system.domain.contains(step(system, i, x))) return false;
  }
  return true;
}

State draw_sample(const SwitchedSystem& system, const TrainingConfig& config,
                  std::mt19937_64& rng) {
  if (!config.clip_next_state_samples) return draw_state(system, rng);
  constexpr int kMaxAttempts = 100000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    State x = draw_state(system, rng);
    if (next_states_in_domain(system, x)) return x;
  }
  throw TrainingError(
      "training: clip_next_state_samples could not find an admissible sample "
      "(domain maps outside itself almost everywhere?)");
}

/// Least-squares solver shared by terminal and stage fits.
///
/// lambda == 0: rank-revealing column-pivoted QR of the p-by-m sample matrix;
/// a rank deficiency is reported instead of silently producing a minimum-norm
/// solution. lambda > 0: QR of the stacked ridge system [A; sqrt(lambda) I].
class LsSolver {
 public:
  LsSolver(const Eigen::MatrixXd& a, double lambda, int k_context) : lambda_(lambda) {
    if (lambda_ == 0.0) {
      qr_.compute(a);
      if (qr_.rank() < a.cols()) {
        std::ostringstream os;
        os << "training: normal system rank-deficient (rank " << qr_.rank() << " < "
           << a.cols() << ")";
        if (k_context >= 0) os << " at stage k=" << k_context;
        os << "; consider ridge_lambda > 0";
        throw TrainingError(os.str());
      }
    } else {
      const Eigen::Index p = a.rows();
      const Eigen::Index m = a.cols();
      Eigen::MatrixXd stacked(p + m, m);
      stacked.topRows(p) = a;
      stacked.bottomRows(m) = std::sqrt(lambda_) * Eigen::MatrixXd::Identity(m, m);
      ridge_qr_.compute(stacked);
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& y) const {
    if (lambda_ == 0.0) return qr_.solve(y);
    Eigen::VectorXd stacked = Eigen::VectorXd::Zero(y.size() + ridge_qr_.matrixQR().cols());
    stacked.head(y.size()) = y;
    return ridge_qr_.solve(stacked);
  }

 private:
  double lambda_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
  Eigen::HouseholderQR<Eigen::MatrixXd> ridge_qr_;
};

/// One batch of samples with everything precomputed for the stage fits.
struct SampleSet {
  Eigen::MatrixXd a;                 // p x m basis rows at the samples
  std::vector<Eigen::MatrixXd> b;    // per mode: p x m basis rows at f_i(sample)
  Eigen::MatrixXd q;                 // p x M running costs Q(sample, i)
  std::vector<State> x;              // the samples themselves
  std::unique_ptr<LsSolver> solver;
};

SampleSet make_sample_set(const SwitchedSystem& system, const CostSpec& cost,
                          const BasisSet& basis, const TrainingConfig& config,
                          std::mt19937_64& rng, bool with_next_states, int k_context) {
  const int p = config.sample_count;
  const int m = basis.size();
  SampleSet set;
  set.x.reserve(static_cast<std::size_t>(p));
  set.a.resize(p, m);
  for (int s = 0; s < p; ++s) {
    State x = draw_sample(system, config, rng);
    set.a.row(s) = basis.evaluate(x).transpose();
    set.x.push_back(std::move(x));
  }
  if (with_next_states) {
    set.b.reserve(static_cast<std::size_t>(system.mode_count));
    set.q.resize(p, system.mode_count);
    for (ModeIndex i = 1; i <= system.mode_count; ++i) {
      Eigen::MatrixXd bi(p, m);
      for (int s = 0; s < p; ++s) {
        const State next = step(system, i, set.x[static_cast<std::size_t>(s)]);
        if (!next.allFinite()) {
          std::ostringstream os;
          os << "training: non-finite successor state under mode " << i;
          if (k_context >= 0) os << " at stage k=" << k_context;
          throw TrainingError(os.str());
        }
        bi.row(s) = basis.evaluate(next).transpose();
        set.q(s, i - 1) = cost.running(set.x[static_cast<std::size_t>(s)], i);
      }
      set.b.push_back(std::move(bi));
    }
  }
  set.solver = std::make_unique<LsSolver>(set.a, config.ridge_lambda, k_context);
  return set;
}

void check_finite_targets(const Eigen::VectorXd& y, int k, ModeIndex j, const char* what) {
  for (Eigen::Index s = 0; s < y.size(); ++s) {
    if (!std::isfinite(y[s])) {
      std::ostringstream os;
      os << "training: non-finite " << what << " (sample " << s << ", mode j=" << j;
      if (k >= 0) os << ", stage k=" << k;
      os << ")";
      throw TrainingError(os.str());
    }
  }
}

}  // namespace

std::pair<double, ModeIndex> bellman_target(const SwitchedSystem& system, const CostSpec& cost,
                                            const BasisSet& basis,
                                            const std::vector<Eigen::VectorXd>& next_weights,
                                            const State& x, ModeIndex j, int k_context) {
  detail::check_mode(j, system.mode_count, "bellman_target");
  if (static_cast<int>(next_weights.size()) != system.mode_count) {
    throw std::invalid_argument("bellman_target: need one next-stage weight vector per mode");
  }
  double best = 0.0;
  ModeIndex best_mode = 1;
  bool have = false;
  for (ModeIndex i = 1; i <= system.mode_count; ++i) {
    const State next = step(system, i, x);
    const double candidate = cost.running(x, i) + switching_cost(cost, j, i) +
                             next_weights[static_cast<std::size_t>(i - 1)].dot(
                                 basis.evaluate(next));
    if (!std::isfinite(candidate)) {
      std::ostringstream os;
      os << "training: non-finite lookahead candidate (mode i=" << i << ", x=[";
      for (Eigen::Index a = 0; a < x.size(); ++a) os << (a ? ", " : "") << x[a];
      os << "]";
      if (k_context >= 0) os << ", stage k=" << k_context;
      os << ")";
      throw TrainingError(os.str());
    }
    if (!have || candidate < best) {
      best = candidate;
      best_mode = i;
      have = true;
    }
  }
  return {best, best_mode};
}

TerminalFit fit_terminal(const SwitchedSystem& system, const CostSpec& cost,
                         const BasisSet& basis, const TrainingConfig& config) {
  validate_common(system, cost, basis, config);
  if (config.sample_count < basis.size()) {
    throw std::invalid_argument(
        "training: sample_count must be >= basis size (p >= m), got p=" +
        std::to_string(config.sample_count) + ", m=" + std::to_string(basis.size()));
  }
  std::mt19937_64 rng(config.rng_seed);
  const SampleSet set =
      make_sample_set(system, cost, basis, config, rng, /*with_next_states=*/false, cost.horizon);

  TerminalFit fit;
  for (ModeIndex j = 1; j <= system.mode_count; ++j) {
    Eigen::VectorXd y(config.sample_count);
    for (int s = 0; s < config.sample_count; ++s) {
      y[s] = cost.terminal(set.x[static_cast<std::size_t>(s)], j);
    }
    check_finite_targets(y, cost.horizon, j, "terminal cost");
    Eigen::VectorXd w = set.solver->solve(y);
    fit.max_residual.push_back((set.a * w - y).cwiseAbs().maxCoeff());
    fit.weights.push_back(std::move(w));
  }
  return fit;
}

ValueTable batch_train(const SwitchedSystem& system, const CostSpec& cost, const BasisSet& basis,
                       const TrainingConfig& config, TrainReport* report) {
  const auto start = std::chrono::steady_clock::now();
  validate_common(system, cost, basis, config);
  if (cost.horizon < 1) throw std::invalid_argument("batch_train: horizon must be >= 1");
  if (config.sample_count < basis.size()) {
    throw std::invalid_argument(
        "training: sample_count must be >= basis size (p >= m), got p=" +
        std::to_string(config.sample_count) + ", m=" + std::to_string(basis.size()));
  }
  const int n_stages = cost.horizon;
  const int n_modes = system.mode_count;
  const int p = config.sample_count;

  ValueTable table(n_stages, n_modes, basis);
  TrainReport local_report;

  std::mt19937_64 rng(config.rng_seed);
  SampleSet set = make_sample_set(system, cost, basis, config, rng,
                                  /*with_next_states=*/true, n_stages);

  // Terminal fit (stage N) on the first sample set.
  for (ModeIndex j = 1; j <= n_modes; ++j) {
    Eigen::VectorXd y(p);
    for (int s = 0; s < p; ++s) y[s] = cost.terminal(set.x[static_cast<std::size_t>(s)], j);
    check_finite_targets(y, n_stages, j, "terminal cost");
    Eigen::VectorXd w = set.solver->solve(y);
    local_report.stages.push_back(
        {n_stages, j, (set.a * w - y).cwiseAbs().maxCoeff(), p, true});
    table.weights(n_stages, j) = std::move(w);
  }

  // Backward stage fits.
  for (int k = n_stages - 1; k >= 0; --k) {
    if (config.resample_per_stage) {
      set = make_sample_set(system, cost, basis, config, rng, /*with_next_states=*/true, k);
    }
    // Candidate values Q(x,i) + <W_{k+1}^i, phi(f_i(x))> are mode-j independent;
    // only the switching term differs, so precompute the shared part.
    Eigen::MatrixXd lookahead(p, n_modes);
    for (ModeIndex i = 1; i <= n_modes; ++i) {
      lookahead.col(i - 1) =
          set.q.col(i - 1) + set.b[static_cast<std::size_t>(i - 1)] * table.weights(k + 1, i);
    }
    for (ModeIndex j = 1; j <= n_modes; ++j) {
      Eigen::VectorXd y(p);
      for (int s = 0; s < p; ++s) {
        double best = 0.0;
        bool have = false;
        for (ModeIndex i = 1; i <= n_modes; ++i) {
          const double candidate = lookahead(s, i - 1) + cost.switch_table(j - 1, i - 1);
          if (!have || candidate < best) {
            best = candidate;
            have = true;
          }
        }
        y[s] = best;
      }
      check_finite_targets(y, k, j, "lookahead target");
      Eigen::VectorXd w = set.solver->solve(y);
      local_report.stages.push_back({k, j, (set.a * w - y).cwiseAbs().maxCoeff(), p, true});
      table.weights(k, j) = std::move(w);
    }
  }

  table.metadata.trained_by = "batch";
  table.metadata.rng_seed = config.rng_seed;
  table.metadata.sample_count = config.sample_count;
  table.metadata.ridge_lambda = config.ridge_lambda;
  table.metadata.resample_per_stage = config.resample_per_stage;

  local_report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (report) *report = std::move(local_report);
  return table;
}

ValueTable sequential_train(const SwitchedSystem& system, const CostSpec& cost,
                            const BasisSet& basis, const TrainingConfig& config,
                            TrainReport* report) {
  const auto start = std::chrono::steady_clock::now();
  validate_common(system, cost, basis, config);
  if (cost.horizon < 1) throw std::invalid_argument("sequential_train: horizon must be >= 1");
  if (config.convergence_window < 1) {
    throw std::invalid_argument("sequential_train: convergence_window must be >= 1");
  }
  const int n_stages = cost.horizon;
  const int n_modes = system.mode_count;
  const int m = basis.size();

  ValueTable table(n_stages, n_modes, basis);
  TrainReport local_report;
  std::mt19937_64 rng(config.rng_seed);

  // Recursive least-squares loop for one (k, j) pair. Returns diagnostics.
  auto rls_fit = [&](int k, ModeIndex j, const Eigen::VectorXd& warm_start,
                     auto&& target_of) -> Eigen::VectorXd {
    Eigen::VectorXd w = warm_start;
    Eigen::MatrixXd p_mat = config.rls_init_scale * Eigen::MatrixXd::Identity(m, m);
    std::deque<double> window;
    double window_residual = 0.0;
    int iterations = 0;
    bool converged = false;
    for (int it = 0; it < config.sample_count; ++it) {
      ++iterations;
      const State x = draw_sample(system, config, rng);
      const Eigen::VectorXd phi = basis.evaluate(x);
      const double target = target_of(x);
      const Eigen::VectorXd p_phi = p_mat * phi;
      const double denom = 1.0 + phi.dot(p_phi);
      const Eigen::VectorXd gain = p_phi / denom;
      const double innovation = target - phi.dot(w);
      const Eigen::VectorXd dw = gain * innovation;
      w += dw;
      p_mat -= gain * p_phi.transpose();
      p_mat = 0.5 * (p_mat + p_mat.transpose());  // keep symmetric under roundoff

      if (w.cwiseAbs().maxCoeff() > config.divergence_guard) {
        std::ostringstream os;
        os << "sequential_train: diverging weights at stage k=" << k << ", mode j=" << j
           << " (||W||_inf > " << config.divergence_guard << ")";
        throw TrainingError(os.str());
      }
      window.push_back(dw.cwiseAbs().maxCoeff());
      if (static_cast<int>(window.size()) > config.convergence_window) window.pop_front();
      window_residual = std::abs(target - phi.dot(w));
      if (static_cast<int>(window.size()) == config.convergence_window) {
        double worst = 0.0;
        for (double d : window) worst = std::max(worst, d);
        if (worst < config.convergence_tol) {
          converged = true;
          break;
        }
      }
    }
    if (!converged) table.metadata.non_converged.emplace_back(k, j);
    local_report.stages.push_back({k, j, window_residual, iterations, converged});
    return w;
  };

  for (ModeIndex j = 1; j <= n_modes; ++j) {
    table.weights(n_stages, j) =
        rls_fit(n_stages, j, Eigen::VectorXd::Zero(m),
                [&](const State& x) { return cost.terminal(x, j); });
  }
  for (int k = n_stages - 1; k >= 0; --k) {
    std::vector<Eigen::VectorXd> next_weights;
    next_weights.reserve(static_cast<std::size_t>(n_modes));
    for (ModeIndex i = 1; i <= n_modes; ++i) next_weights.push_back(table.weights(k + 1, i));
    for (ModeIndex j = 1; j <= n_modes; ++j) {
      table.weights(k, j) =
          rls_fit(k, j, table.weights(k + 1, j), [&](const State& x) {
            return bellman_target(system, cost, basis, next_weights, x, j, k).first;
          });
    }
  }

  table.metadata.trained_by = "sequential";
  table.metadata.rng_seed = config.rng_seed;
  table.metadata.sample_count = config.sample_count;
  table.metadata.ridge_lambda = config.ridge_lambda;
  table.metadata.resample_per_stage = config.resample_per_stage;

  local_report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (report) *report = std::move(local_report);
  return table;
}

}  // namespace switchdp
