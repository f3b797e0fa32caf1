#pragma once

#include <vector>

#include "thermosteer/hermitian.hpp"
#include "thermosteer/numeric.hpp"

namespace thermosteer {

// Equality standard form over a direct sum of Hermitian blocks:
//   minimize    sum_b tr(C_b X_b)
//   subject to  sum_b tr(A_{k,b} X_b) = b_k   (k = 1..m),   X_b >= 0.
// Scalars are 1x1 blocks. C and every A_k must be Hermitian blockwise.
struct SdpProblem {
  struct Constraint {
    std::vector<Matrix> A;  // one block each, shapes matching block_dims
    double b = 0.0;
  };
  std::vector<int> block_dims;
  std::vector<Matrix> C;
  std::vector<Constraint> constraints;
};

enum class SdpStatus { Optimal, PrimalInfeasible, DualInfeasible, NumericalFailure };

struct SdpSolution {
  std::vector<Matrix> X;  // primal blocks
  std::vector<Matrix> S;  // dual slack blocks
  Eigen::VectorXd y;      // one multiplier per input constraint; presolve-dropped rows carry 0
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double gap = 0.0;  // |primal_obj - dual_obj|
  SdpStatus status = SdpStatus::NumericalFailure;
  int iterations = 0;
};

// Primal-dual interior-point solve (HKM direction, Mehrotra predictor-corrector).
// Deterministic for identical inputs and config.
SdpSolution solve_sdp(const SdpProblem& p,
                      const NumericConfig& cfg = NumericConfig::defaults());

// Diamond norm of a Hermiticity-preserving map given the difference of
// trace-normalized Choi operators (out x in ordering); rescales by d_in
// internally so that a difference of two channels yields their full
// diamond distance in [0, 2].
double diamond_norm(const HermitianMatrix& delta_choi, int d_in, int d_out,
                    const NumericConfig& cfg = NumericConfig::defaults());

}  // namespace thermosteer
