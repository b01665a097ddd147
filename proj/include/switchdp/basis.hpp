#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "switchdp/model.hpp"

namespace switchdp {

/// Ordered set of multivariate monomial basis functions phi over R^n.
///
/// The term order is fixed at construction and round-trips through the text
/// descriptor, so persisted weight vectors stay aligned with their basis.
class BasisSet {
 public:
  /// Univariate powers x^{j_min} .. x^{j_max}; requires 0 <= j_min <= j_max.
  static BasisSet univariate_powers(int j_min, int j_max);

  /// All monomials in n variables with total degree <= d, constant included,
  /// in graded-lexicographic order; size C(n+d, n). Requires n >= 1, d >= 0.
  static BasisSet total_degree_monomials(int n, int d);

  /// Rebuilds a basis from its descriptor text, e.g.
  ///   powers(jmin=1,jmax=14)
  ///   monomials(dim=2,maxdeg=8,constant=true)
  /// Throws BasisDescriptorError on unknown or malformed descriptors.
  static BasisSet parse_descriptor(const std::string& text);

  int input_dim() const { return input_dim_; }
  int size() const { return static_cast<int>(terms_.size()); }
  const std::string& descriptor() const { return descriptor_; }
  const std::vector<std::vector<int>>& terms() const { return terms_; }

  /// Evaluates all m terms at x, in canonical order.
  /// Throws std::invalid_argument on dimension mismatch.
  Eigen::VectorXd evaluate(const State& x) const;

 private:
  BasisSet(int input_dim, std::vector<std::vector<int>> terms, std::string descriptor);

  int input_dim_;
  std::vector<std::vector<int>> terms_;  // exponent tuples, one per basis term
  std::string descriptor_;
};

}  // namespace switchdp
