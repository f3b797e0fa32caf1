#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace thermosteer {

// Shared tolerance and solver configuration. A single record threads through
// construction checks, the eigensolver, and the interior-point solver so that
// library code and tests agree on one source of truth.
struct NumericConfig {
  double tol_herm = 1e-12;  // max |m(i,j) - conj(m(j,i))| accepted at construction
  double tol_psd = 1e-9;    // slack below zero tolerated in positivity checks
  double tol_eig = 1e-10;   // Jacobi off-diagonal convergence target (relative)

  // interior-point controls
  int max_iters = 200;
  double tol_gap = 5e-11;       // target relative duality gap
  double tol_feas = 1e-10;      // target relative equality residual
  double step_fraction = 0.98;  // fraction-to-boundary
  double infeas_ratio = 1e8;    // iterate blow-up ratio that triggers an infeasibility call
  int stagnation_window = 25;   // gap-stagnation iterations tolerated while diverging
  bool trace_iterates = false;  // per-iteration log to trace_stream
  std::ostream* trace_stream = nullptr;

  static const NumericConfig& defaults();
};

// ---------- error taxonomy ----------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalFailureError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct CapacityError : Error { using Error::Error; };

// Filter condition checks report which thermodynamic condition failed: "i" or "ii".
struct ConditionViolatedError : Error {
  ConditionViolatedError(std::string cond, const std::string& msg)
      : Error(msg), condition(std::move(cond)) {}
  std::string condition;
};
struct ZeroSuccessProbabilityError : Error { using Error::Error; };
struct NoAdmissibleHamiltonianError : Error { using Error::Error; };
struct NotSteerableError : Error { using Error::Error; };
struct NoAdvantageError : Error { using Error::Error; };

}  // namespace thermosteer
