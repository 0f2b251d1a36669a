#pragma once

#include <stdexcept>
#include <string>

namespace slt {

// Sampler failed the mixing gate (pooled ESS or split-chain ratio).
class NonMixingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A replication still failed mixing after the automatic budget doubling.
class ExperimentAborted : public std::runtime_error {
 public:
  ExperimentAborted(const std::string& msg, int n, int rep)
      : std::runtime_error(msg), n_(n), rep_(rep) {}
  int n() const { return n_; }
  int rep() const { return rep_; }

 private:
  int n_;
  int rep_;
};

// A theory prediction was requested that needs a constant the card does not
// carry (e.g. nu is unknown for the singular built-in).
class MissingConstantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Hessian of the loss is numerically singular at the requested point.
class SingularFisherError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No grid point satisfied the 0 < D <= eps constraint.
class EmptyGridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Config file / CLI validation failure; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg, int line = 0,
                       std::string field = {})
      : std::runtime_error(msg), line_(line), field_(std::move(field)) {}
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

}  // namespace slt
