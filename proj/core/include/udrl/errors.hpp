#pragma once

#include <stdexcept>
#include <string>

namespace udrl {

// Contract violations (bad indices, mismatched dimensions) throw
// std::invalid_argument / std::out_of_range. The types below are the
// recoverable conditions callers are expected to handle.

// Non-finite loss or network output; training cannot continue.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sampling requested from an empty replay buffer.
class NoDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Expected-reward relabeling hit a (state, action) pair with no estimate.
class EstimateMissingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Distillation found no episode satisfying the success rule.
class NothingToDistillError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid run configuration; field() names the offending JSON path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// File-format or filesystem failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace udrl
