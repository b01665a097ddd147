#pragma once

#include <random>
#include <vector>

#include "switchdp/basis.hpp"
#include "switchdp/model.hpp"
#include "switchdp/valuestore.hpp"

namespace testutil {

using switchdp::Box;
using switchdp::CostSpec;
using switchdp::ModeIndex;
using switchdp::State;
using switchdp::SwitchedSystem;

inline State scalar(double v) {
  State x(1);
  x[0] = v;
  return x;
}

inline State vec2(double a, double b) {
  State x(2);
  x[0] = a;
  x[1] = b;
  return x;
}

inline Box interval(double lo, double hi) {
  return Box(scalar(lo), scalar(hi));
}

/// Scalar two-mode system with affine maps a*x + b; handy for exact checks.
inline SwitchedSystem affine_pair(double a1, double b1, double a2, double b2, double lo = -2.0,
                                  double hi = 2.0) {
  return SwitchedSystem(
      1,
      {
          [a1, b1](const State& x) { return scalar(a1 * x[0] + b1); },
          [a2, b2](const State& x) { return scalar(a2 * x[0] + b2); },
      },
      interval(lo, hi));
}

inline Eigen::MatrixXd uniform_kappa(int n_modes, double kappa0) {
  Eigen::MatrixXd table = Eigen::MatrixXd::Constant(n_modes, n_modes, kappa0);
  table.diagonal().setZero();
  return table;
}

/// Random mode sequence of the given length.
inline std::vector<ModeIndex> random_sequence(std::mt19937_64& rng, int length, int n_modes) {
  std::uniform_int_distribution<int> dist(1, n_modes);
  std::vector<ModeIndex> modes;
  modes.reserve(static_cast<std::size_t>(length));
  for (int k = 0; k < length; ++k) modes.push_back(dist(rng));
  return modes;
}

/// Fills a table with reproducible pseudo-random weights.
inline void randomize_table(switchdp::ValueTable& table, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int k = 0; k <= table.horizon(); ++k) {
    for (ModeIndex i = 1; i <= table.mode_count(); ++i) {
      Eigen::VectorXd& w = table.weights(k, i);
      for (Eigen::Index t = 0; t < w.size(); ++t) w[t] = dist(rng);
    }
  }
}

}  // namespace testutil
