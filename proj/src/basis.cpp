#include "switchdp/basis.hpp"

#include <cmath>
#include <sstream>

#include "switchdp/errors.hpp"

namespace switchdp {

namespace {

// All exponent tuples of length n summing to exactly d, lexicographically
// descending (first axis varies slowest, highest exponent first).
void tuples_of_degree(int n, int d, std::vector<int>& prefix,
                      std::vector<std::vector<int>>& out) {
  if (n == 1) {
    prefix.push_back(d);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int a = d; a >= 0; --a) {
    prefix.push_back(a);
    tuples_of_degree(n - 1, d - a, prefix, out);
    prefix.pop_back();
  }
}

double int_pow(double base, int exp) {
  double r = 1.0;
  for (int e = 0; e < exp; ++e) r *= base;
  return r;
}

// Parses "key=value" segments of a descriptor body like "jmin=1,jmax=14".
std::vector<std::pair<std::string, std::string>> parse_kv(const std::string& body,
                                                          const std::string& full) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= item.size()) {
      throw BasisDescriptorError("basis descriptor: malformed key=value in '" + full + "'");
    }
    kv.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return kv;
}

int parse_int(const std::string& value, const std::string& full) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw BasisDescriptorError("basis descriptor: bad integer '" + value + "' in '" + full + "'");
  }
}

}  // namespace

BasisSet::BasisSet(int input_dim, std::vector<std::vector<int>> terms, std::string descriptor)
    : input_dim_(input_dim), terms_(std::move(terms)), descriptor_(std::move(descriptor)) {}

BasisSet BasisSet::univariate_powers(int j_min, int j_max) {
  if (j_min < 0 || j_min > j_max) {
    throw std::invalid_argument("univariate_powers: require 0 <= j_min <= j_max");
  }
  std::vector<std::vector<int>> terms;
  terms.reserve(static_cast<std::size_t>(j_max - j_min + 1));
  for (int j = j_min; j <= j_max; ++j) terms.push_back({j});
  std::ostringstream os;
  os << "powers(jmin=" << j_min << ",jmax=" << j_max << ")";
  return BasisSet(1, std::move(terms), os.str());
}

BasisSet BasisSet::total_degree_monomials(int n, int d) {
  if (n < 1) throw std::invalid_argument("total_degree_monomials: require n >= 1");
  if (d < 0) throw std::invalid_argument("total_degree_monomials: require d >= 0");
  std::vector<std::vector<int>> terms;
  std::vector<int> prefix;
  for (int deg = 0; deg <= d; ++deg) {
    tuples_of_degree(n, deg, prefix, terms);
  }
  std::ostringstream os;
  os << "monomials(dim=" << n << ",maxdeg=" << d << ",constant=true)";
  return BasisSet(n, std::move(terms), os.str());
}

BasisSet BasisSet::parse_descriptor(const std::string& text) {
  const auto open = text.find('(');
  if (open == std::string::npos || text.back() != ')') {
    throw BasisDescriptorError("basis descriptor: expected name(...), got '" + text + "'");
  }
  const std::string name = text.substr(0, open);
  const std::string body = text.substr(open + 1, text.size() - open - 2);
  const auto kv = parse_kv(body, text);
  auto get = [&](const std::string& key) -> const std::string& {
    for (const auto& [k, v] : kv) {
      if (k == key) return v;
    }
    throw BasisDescriptorError("basis descriptor: missing '" + key + "' in '" + text + "'");
  };
  if (name == "powers") {
    if (kv.size() != 2) {
      throw BasisDescriptorError("basis descriptor: powers takes jmin,jmax: '" + text + "'");
    }
    const int jmin = parse_int(get("jmin"), text);
    const int jmax = parse_int(get("jmax"), text);
    try {
      return univariate_powers(jmin, jmax);
    } catch (const std::invalid_argument& e) {
      throw BasisDescriptorError(std::string("basis descriptor: ") + e.what());
    }
  }
  if (name == "monomials") {
    if (kv.size() != 3) {
      throw BasisDescriptorError("basis descriptor: monomials takes dim,maxdeg,constant: '" +
                                 text + "'");
    }
    const int dim = parse_int(get("dim"), text);
    const int maxdeg = parse_int(get("maxdeg"), text);
    const std::string& constant = get("constant");
    if (constant != "true" && constant != "false") {
      throw BasisDescriptorError("basis descriptor: constant must be true|false: '" + text + "'");
    }
    BasisSet basis = [&] {
      try {
        return total_degree_monomials(dim, maxdeg);
      } catch (const std::invalid_argument& e) {
        throw BasisDescriptorError(std::string("basis descriptor: ") + e.what());
      }
    }();
    if (constant == "false") {
      // Drop the leading constant term; keep the rest of the canonical order.
      std::vector<std::vector<int>> terms(basis.terms_.begin() + 1, basis.terms_.end());
      std::ostringstream os;
      os << "monomials(dim=" << dim << ",maxdeg=" << maxdeg << ",constant=false)";
      return BasisSet(dim, std::move(terms), os.str());
    }
    return basis;
  }
  throw BasisDescriptorError("basis descriptor: unknown family '" + name + "'");
}

Eigen::VectorXd BasisSet::evaluate(const State& x) const {
  if (x.size() != input_dim_) {
    throw std::invalid_argument("BasisSet::evaluate: dimension mismatch");
  }
  Eigen::VectorXd phi(size());
  for (int t = 0; t < size(); ++t) {
    double v = 1.0;
    const auto& exps = terms_[static_cast<std::size_t>(t)];
    for (int a = 0; a < input_dim_; ++a) {
      v *= int_pow(x[a], exps[static_cast<std::size_t>(a)]);
    }
    phi[t] = v;
  }
  return phi;
}

}  // namespace switchdp
