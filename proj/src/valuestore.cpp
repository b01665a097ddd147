#include "switchdp/valuestore.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "switchdp/errors.hpp"

namespace switchdp {

using nlohmann::json;

ValueTable::ValueTable(int horizon, int mode_count, BasisSet basis)
    : horizon_(horizon), mode_count_(mode_count), basis_(std::move(basis)) {
  if (horizon_ < 0) throw std::invalid_argument("ValueTable: horizon must be >= 0");
  if (mode_count_ < 1) throw std::invalid_argument("ValueTable: mode_count must be >= 1");
  weights_.assign(static_cast<std::size_t>(horizon_ + 1) * static_cast<std::size_t>(mode_count_),
                  Eigen::VectorXd::Zero(basis_.size()));
}

const Eigen::VectorXd& ValueTable::weights(int k, ModeIndex i) const {
  if (k < 0 || k > horizon_) throw std::invalid_argument("ValueTable: stage out of range");
  detail::check_mode(i, mode_count_, "ValueTable::weights");
  return weights_[static_cast<std::size_t>(k) * static_cast<std::size_t>(mode_count_) +
                  static_cast<std::size_t>(i - 1)];
}

Eigen::VectorXd& ValueTable::weights(int k, ModeIndex i) {
  return const_cast<Eigen::VectorXd&>(static_cast<const ValueTable&>(*this).weights(k, i));
}

double ValueTable::value(int k, const State& x, ModeIndex i_prev) const {
  const Eigen::VectorXd& w = weights(k, i_prev);
  return w.dot(basis_.evaluate(x));
}

std::string to_json_text(const ValueTable& table) {
  json doc;
  doc["schema_version"] = kWeightsSchemaVersion;
  doc["horizon"] = table.horizon();
  doc["mode_count"] = table.mode_count();
  doc["state_dim"] = table.basis().input_dim();
  doc["basis_size"] = table.basis().size();
  doc["basis"] = table.basis().descriptor();

  json meta;
  meta["trained_by"] = table.metadata.trained_by;
  meta["rng_seed"] = table.metadata.rng_seed;
  meta["sample_count"] = table.metadata.sample_count;
  meta["ridge_lambda"] = table.metadata.ridge_lambda;
  meta["resample_per_stage"] = table.metadata.resample_per_stage;
  json nc = json::array();
  for (const auto& [k, i] : table.metadata.non_converged) nc.push_back(json::array({k, i}));
  meta["non_converged"] = nc;
  meta["scenario"] = table.metadata.scenario;
  doc["metadata"] = meta;

  json rows = json::array();
  for (int k = 0; k <= table.horizon(); ++k) {
    for (ModeIndex i = 1; i <= table.mode_count(); ++i) {
      json row;
      row["k"] = k;
      row["mode"] = i;
      const Eigen::VectorXd& w = table.weights(k, i);
      json wv = json::array();
      for (Eigen::Index t = 0; t < w.size(); ++t) wv.push_back(w[t]);
      row["w"] = wv;
      rows.push_back(row);
    }
  }
  doc["weights"] = rows;
  return doc.dump(2) + "\n";
}

void save(const ValueTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("save: cannot open '" + path + "' for writing");
  out << to_json_text(table);
  if (!out) throw std::invalid_argument("save: write to '" + path + "' failed");
}

namespace {

const json& require_field(const json& doc, const char* name) {
  const auto it = doc.find(name);
  if (it == doc.end()) {
    throw StructureError(std::string("weight file: missing field '") + name + "'");
  }
  return *it;
}

int require_int(const json& doc, const char* name) {
  const json& v = require_field(doc, name);
  if (!v.is_number_integer()) {
    throw StructureError(std::string("weight file: field '") + name + "' must be an integer");
  }
  return v.get<int>();
}

}  // namespace

ValueTable from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw StructureError(std::string("weight file: not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw StructureError("weight file: top level must be an object");

  const json& version = require_field(doc, "schema_version");
  if (!version.is_string() || version.get<std::string>() != kWeightsSchemaVersion) {
    throw UnsupportedVersionError("weight file: unsupported schema version '" +
                                  (version.is_string() ? version.get<std::string>()
                                                       : version.dump()) +
                                  "' (expected '" + kWeightsSchemaVersion + "')");
  }

  const int horizon = require_int(doc, "horizon");
  const int mode_count = require_int(doc, "mode_count");
  const int state_dim = require_int(doc, "state_dim");
  const int basis_size = require_int(doc, "basis_size");
  if (horizon < 0 || mode_count < 1 || state_dim < 1 || basis_size < 1) {
    throw StructureError("weight file: non-positive header dimensions");
  }

  const json& basis_field = require_field(doc, "basis");
  if (!basis_field.is_string()) throw StructureError("weight file: 'basis' must be a string");
  BasisSet basis = BasisSet::parse_descriptor(basis_field.get<std::string>());
  if (basis.size() != basis_size) {
    throw BasisDescriptorError("weight file: basis descriptor yields " +
                               std::to_string(basis.size()) + " terms but header says " +
                               std::to_string(basis_size));
  }
  if (basis.input_dim() != state_dim) {
    throw BasisDescriptorError("weight file: basis input dimension " +
                               std::to_string(basis.input_dim()) + " != state_dim " +
                               std::to_string(state_dim));
  }

  ValueTable table(horizon, mode_count, std::move(basis));

  const json& rows = require_field(doc, "weights");
  if (!rows.is_array()) throw StructureError("weight file: 'weights' must be an array");
  const std::size_t expected =
      static_cast<std::size_t>(horizon + 1) * static_cast<std::size_t>(mode_count);
  if (rows.size() != expected) {
    throw StructureError("weight file: expected " + std::to_string(expected) +
                         " weight rows, found " + std::to_string(rows.size()));
  }
  std::size_t idx = 0;
  for (int k = 0; k <= horizon; ++k) {
    for (ModeIndex i = 1; i <= mode_count; ++i, ++idx) {
      const json& row = rows[idx];
      if (!row.is_object()) throw StructureError("weight file: weight row must be an object");
      if (require_int(row, "k") != k || require_int(row, "mode") != i) {
        throw StructureError("weight file: weight rows out of order at index " +
                             std::to_string(idx) + " (expected k=" + std::to_string(k) +
                             ", mode=" + std::to_string(i) + ")");
      }
      const json& wv = require_field(row, "w");
      if (!wv.is_array() || static_cast<int>(wv.size()) != basis_size) {
        throw StructureError("weight file: weight vector length mismatch at k=" +
                             std::to_string(k) + ", mode=" + std::to_string(i));
      }
      Eigen::VectorXd& w = table.weights(k, i);
      for (int t = 0; t < basis_size; ++t) {
        const json& entry = wv[static_cast<std::size_t>(t)];
        if (!entry.is_number()) {
          throw StructureError("weight file: non-numeric weight entry at k=" +
                               std::to_string(k) + ", mode=" + std::to_string(i));
        }
        const double v = entry.get<double>();
        if (!std::isfinite(v)) {
          throw StructureError("weight file: non-finite weight entry at k=" +
                               std::to_string(k) + ", mode=" + std::to_string(i));
        }
        w[t] = v;
      }
    }
  }

  if (const auto meta_it = doc.find("metadata"); meta_it != doc.end() && meta_it->is_object()) {
    const json& meta = *meta_it;
    if (meta.contains("trained_by") && meta["trained_by"].is_string()) {
      table.metadata.trained_by = meta["trained_by"].get<std::string>();
    }
    if (meta.contains("rng_seed") && meta["rng_seed"].is_number()) {
      table.metadata.rng_seed = meta["rng_seed"].get<std::uint64_t>();
    }
    if (meta.contains("sample_count") && meta["sample_count"].is_number_integer()) {
      table.metadata.sample_count = meta["sample_count"].get<int>();
    }
    if (meta.contains("ridge_lambda") && meta["ridge_lambda"].is_number()) {
      table.metadata.ridge_lambda = meta["ridge_lambda"].get<double>();
    }
    if (meta.contains("resample_per_stage") && meta["resample_per_stage"].is_boolean()) {
      table.metadata.resample_per_stage = meta["resample_per_stage"].get<bool>();
    }
    if (meta.contains("non_converged") && meta["non_converged"].is_array()) {
      for (const auto& pair : meta["non_converged"]) {
        if (pair.is_array() && pair.size() == 2 && pair[0].is_number_integer() &&
            pair[1].is_number_integer()) {
          table.metadata.non_converged.emplace_back(pair[0].get<int>(), pair[1].get<int>());
        }
      }
    }
    if (meta.contains("scenario")) table.metadata.scenario = meta["scenario"];
  }

  return table;
}

ValueTable load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StructureError("load: cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

}  // namespace switchdp
