#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "switchdp/basis.hpp"
#include "switchdp/model.hpp"
#include "switchdp/valuestore.hpp"

namespace switchdp {

/// Shared configuration for both trainers.
///
/// `sample_count` is the per-stage sample count p for the batch trainer and
/// the per-(stage, mode) iteration cap for the sequential trainer.
struct TrainingConfig {
  int sample_count = 1000;
  double ridge_lambda = 0.0;        // 0 = exact least squares via rank-revealing QR
  std::uint64_t rng_seed = 0;
  double convergence_tol = 1e-6;    // sequential: ||dW||_inf threshold
  int convergence_window = 50;      // sequential: sliding window length
  bool resample_per_stage = false;  // batch: fresh samples at every stage
  bool clip_next_state_samples = false;  // keep f_i(x) inside the domain for all i
  double rls_init_scale = 1e8;      // sequential: P0 = scale * I
  double divergence_guard = 1e12;   // sequential: ||W||_inf runaway bound
};

/// Per-(stage, mode) fit diagnostics.
struct StageDiagnostics {
  int k = 0;
  ModeIndex mode = 1;
  double max_residual = 0.0;
  int iterations = 0;
  bool converged = true;
};

struct TrainReport {
  std::vector<StageDiagnostics> stages;
  double wall_seconds = 0.0;
};

/// One-step lookahead target
///   min_i [ Q(x, i) + kappa(j, i) + <W_{k+1}^i, phi(f_i(x))> ]
/// with ties broken toward the lowest mode index. Returns (target, minimizer).
/// Throws TrainingError on a non-finite candidate, carrying (x, i, k) context
/// (`k_context` is only used for the message; pass -1 when unknown).
std::pair<double, ModeIndex> bellman_target(const SwitchedSystem& system, const CostSpec& cost,
                                            const BasisSet& basis,
                                            const std::vector<Eigen::VectorXd>& next_weights,
                                            const State& x, ModeIndex j, int k_context = -1);

struct TerminalFit {
  std::vector<Eigen::VectorXd> weights;  // W_N^j for j = 1..M
  std::vector<double> max_residual;      // per mode, over the training samples
};

/// Fits <W_N^j, phi(x)> to psi(x, j) by (ridge) least squares over
/// `config.sample_count` states sampled uniformly from the system domain.
TerminalFit fit_terminal(const SwitchedSystem& system, const CostSpec& cost,
                         const BasisSet& basis, const TrainingConfig& config);

/// Backward batch trainer: terminal fit, then for k = N-1..0 and every mode j
/// a (ridge) least-squares fit of the one-step lookahead targets over p
/// sampled states. Deterministic given the seed; single-threaded.
ValueTable batch_train(const SwitchedSystem& system, const CostSpec& cost, const BasisSet& basis,
                       const TrainingConfig& config, TrainReport* report = nullptr);

/// Backward sequential trainer: per stage and mode, single-sample recursive
/// least-squares updates until the weight change stays below
/// `convergence_tol` over a sliding window, or the iteration cap is reached.
/// Non-converged (k, j) pairs are flagged in the table metadata.
ValueTable sequential_train(const SwitchedSystem& system, const CostSpec& cost,
                            const BasisSet& basis, const TrainingConfig& config,
                            TrainReport* report = nullptr);

}  // namespace switchdp
