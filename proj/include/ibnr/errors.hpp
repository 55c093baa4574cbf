#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ibnr {

/// Category of a library failure. The CLI maps each one to a distinct exit code.
enum class ErrorKind {
  invalid_argument,
  schema_mismatch,
  unknown_estimator,
  convergence_failure,
  estimator_undefined,
  undefined_cohort,
  degenerate_fit,
  singular_design,
  undefined_distribution,
  io_error,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
public:
  explicit InvalidArgument(const std::string& message)
      : Error(ErrorKind::invalid_argument, message) {}
};

class SchemaError : public Error {
public:
  explicit SchemaError(const std::string& message)
      : Error(ErrorKind::schema_mismatch, message) {}
};

class UnknownEstimator : public Error {
public:
  explicit UnknownEstimator(const std::string& name)
      : Error(ErrorKind::unknown_estimator, "unknown estimator '" + name + "'") {}
};

/// Optimizer state at the point a fit gave up.
struct FitDiagnostics {
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  double log_likelihood = 0.0;
  bool ridge_applied = false;
  std::vector<std::string> warnings;
};

class ConvergenceFailure : public Error {
public:
  ConvergenceFailure(const std::string& message, FitDiagnostics diagnostics)
      : Error(ErrorKind::convergence_failure, message), diagnostics_(std::move(diagnostics)) {}

  const FitDiagnostics& diagnostics() const noexcept { return diagnostics_; }

private:
  FitDiagnostics diagnostics_;
};

class EstimatorUndefined : public Error {
public:
  explicit EstimatorUndefined(const std::string& message)
      : Error(ErrorKind::estimator_undefined, message) {}
};

class UndefinedCohort : public Error {
public:
  UndefinedCohort(const std::string& message, std::vector<int> cohorts)
      : Error(ErrorKind::undefined_cohort, message), cohorts_(std::move(cohorts)) {}

  const std::vector<int>& cohorts() const noexcept { return cohorts_; }

private:
  std::vector<int> cohorts_;
};

class DegenerateFit : public Error {
public:
  explicit DegenerateFit(const std::string& message)
      : Error(ErrorKind::degenerate_fit, message) {}
};

class SingularDesign : public Error {
public:
  explicit SingularDesign(const std::string& message)
      : Error(ErrorKind::singular_design, message) {}
};

class UndefinedDistribution : public Error {
public:
  explicit UndefinedDistribution(const std::string& message)
      : Error(ErrorKind::undefined_distribution, message) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string& message) : Error(ErrorKind::io_error, message) {}
};

}  // namespace ibnr
