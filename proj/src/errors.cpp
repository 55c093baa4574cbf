#include "ibnr/errors.hpp"

namespace ibnr {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::schema_mismatch: return "schema-mismatch";
    case ErrorKind::unknown_estimator: return "unknown-estimator";
    case ErrorKind::convergence_failure: return "convergence-failure";
    case ErrorKind::estimator_undefined: return "estimator-undefined";
    case ErrorKind::undefined_cohort: return "undefined-cohort";
    case ErrorKind::degenerate_fit: return "degenerate-fit";
    case ErrorKind::singular_design: return "singular-design";
    case ErrorKind::undefined_distribution: return "undefined-distribution";
    case ErrorKind::io_error: return "io-error";
  }
  return "unknown";
}

}  // namespace ibnr
