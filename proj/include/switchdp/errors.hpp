#pragma once

#include <stdexcept>
#include <string>

namespace switchdp {

/// Malformed configuration input (CLI config documents, scenario parameters).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure while fitting value-function weights. Carries stage/mode
/// context in the message when available.
class TrainingError : public std::runtime_error {
 public:
  explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite state or other numeric failure during closed-loop simulation.
class SimulationError : public std::runtime_error {
 public:
  explicit SimulationError(const std::string& what) : std::runtime_error(what) {}
};

/// Enumeration request exceeding the configured budget cap.
class BudgetError : public std::runtime_error {
 public:
  explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

/// Base class for weight-file load failures.
class LoadError : public std::runtime_error {
 public:
  explicit LoadError(const std::string& what) : std::runtime_error(what) {}
};

/// The document declares a schema version this library does not support.
class UnsupportedVersionError : public LoadError {
 public:
  explicit UnsupportedVersionError(const std::string& what) : LoadError(what) {}
};

/// The document is syntactically or structurally malformed (missing fields,
/// wrong weight-row counts, non-finite entries).
class StructureError : public LoadError {
 public:
  explicit StructureError(const std::string& what) : LoadError(what) {}
};

/// The basis descriptor cannot be parsed or is inconsistent with the header.
class BasisDescriptorError : public LoadError {
 public:
  explicit BasisDescriptorError(const std::string& what) : LoadError(what) {}
};

}  // namespace switchdp
