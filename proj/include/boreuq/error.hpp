#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace boreuq {

/// Argument outside an operation's precondition.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Interpolant queried outside its physical box (no extrapolation).
class OutOfDomain : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

/// A surplus batch is missing model values for required collocation points.
class IncompleteBatch : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The model evaluator failed; carries the physical point for reproduction.
class EvaluationError : public std::runtime_error {
public:
  EvaluationError(const std::string& what, std::vector<double> point)
      : std::runtime_error(what), point_(std::move(point)) {}
  const std::vector<double>& point() const noexcept { return point_; }

private:
  std::vector<double> point_;
};

class UnrepairableGeometry : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DegenerateParameters : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class SingularEvaluation : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InsufficientData : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed study configuration; `where` names the line or field.
class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string& where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(where) {}
  const std::string& where() const noexcept { return where_; }

private:
  std::string where_;
};

}  // namespace boreuq
