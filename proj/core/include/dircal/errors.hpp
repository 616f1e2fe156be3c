#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace dircal {

/// Malformed arguments or data that violate a documented precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A mathematically undefined evaluation, e.g. log of a zero probability.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Unparseable file contents.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Optimization broke down. Carries the last iterate at which the objective
/// and its gradient were still finite.
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, Eigen::VectorXd last_finite = {})
      : std::runtime_error(what), last_finite_(std::move(last_finite)) {}

  const Eigen::VectorXd& last_finite_iterate() const { return last_finite_; }

 private:
  Eigen::VectorXd last_finite_;
};

}  // namespace dircal
