#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "switchdp/basis.hpp"
#include "switchdp/model.hpp"

namespace switchdp {

inline constexpr const char* kWeightsSchemaVersion = "switchdp-weights-v1";

/// Training provenance stored alongside the weights. Deliberately excludes
/// wall-clock timestamps so that identical configs produce byte-identical
/// weight files; timing lives in the separate training report.
struct TableMetadata {
  std::string trained_by = "manual";  // "batch" | "sequential" | "manual"
  std::uint64_t rng_seed = 0;
  int sample_count = 0;               // batch: p; sequential: iteration cap
  double ridge_lambda = 0.0;
  bool resample_per_stage = false;
  std::vector<std::pair<int, int>> non_converged;  // (stage k, mode i) pairs
  nlohmann::json scenario;            // scenario echo for self-describing files
};

/// Mode- and time-indexed value-function weights W_k^i, k in 0..N, i in 1..M.
/// Immutable in spirit after training: trainers build a private table and
/// publish it whole; concurrent readers need no synchronization.
class ValueTable {
 public:
  /// Builds an all-zero table.
  ValueTable(int horizon, int mode_count, BasisSet basis);

  int horizon() const { return horizon_; }
  int mode_count() const { return mode_count_; }
  const BasisSet& basis() const { return basis_; }

  const Eigen::VectorXd& weights(int k, ModeIndex i) const;
  Eigen::VectorXd& weights(int k, ModeIndex i);

  /// Approximate cost-to-go <W_k^{i_prev}, phi(x)>.
  /// Throws std::invalid_argument on stage/mode/dimension violations.
  double value(int k, const State& x, ModeIndex i_prev) const;

  TableMetadata metadata;

 private:
  int horizon_;
  int mode_count_;
  BasisSet basis_;
  std::vector<Eigen::VectorXd> weights_;  // [k * M + (i-1)]
};

/// Serializes the table as a versioned JSON document (schema
/// "switchdp-weights-v1", weights ordered k ascending then mode ascending,
/// shortest-roundtrip decimal floats — bit-exact on reload).
std::string to_json_text(const ValueTable& table);
void save(const ValueTable& table, const std::string& path);

/// Parses a weight document. Throws UnsupportedVersionError on a foreign
/// schema version, StructureError on malformed/missing/inconsistent content,
/// BasisDescriptorError on a bad basis descriptor.
ValueTable from_json_text(const std::string& text);
ValueTable load(const std::string& path);

}  // namespace switchdp
