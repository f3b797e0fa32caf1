#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "thermosteer/numeric.hpp"

namespace thermosteer {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;  // general complex matrix (Kraus operators, unitaries)
using RealVector = Eigen::VectorXd;

// Dense complex square matrix with a Hermiticity contract: construction rejects
// inputs whose deviation |m - m^dagger| exceeds tol_herm and stores the exactly
// symmetrized part, so downstream code may rely on m == m.adjoint().
class HermitianMatrix {
 public:
  explicit HermitianMatrix(const Matrix& m,
                           double tol_herm = NumericConfig::defaults().tol_herm);

  static HermitianMatrix identity(int dim);
  static HermitianMatrix zero(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& mat() const { return m_; }
  double trace() const { return m_.trace().real(); }

 private:
  Matrix m_;
};

// Real linear combinations of Hermitian matrices stay Hermitian; these skip revalidation.
HermitianMatrix operator+(const HermitianMatrix& a, const HermitianMatrix& b);
HermitianMatrix operator-(const HermitianMatrix& a, const HermitianMatrix& b);
HermitianMatrix operator*(double s, const HermitianMatrix& a);

// Hilbert-Schmidt inner product tr(a b); real for Hermitian arguments.
double hs_inner(const HermitianMatrix& a, const HermitianMatrix& b);

enum class Subsystem { A, B };

struct EigResult {
  RealVector values;  // ascending
  Matrix vectors;     // unitary, columns matched to values
};

// ---------- operations ----------

// Cyclic Jacobi eigendecomposition, m = V diag(values) V^dagger.
EigResult eig_hermitian(const HermitianMatrix& m,
                        const NumericConfig& cfg = NumericConfig::defaults());

// V diag(f(values)) V^dagger; f must be finite on the whole spectrum.
HermitianMatrix matrix_func(const HermitianMatrix& m,
                            const std::function<double(double)>& f,
                            const NumericConfig& cfg = NumericConfig::defaults());

// Trace over one tensor factor of a (dA x dB)-partitioned matrix.
HermitianMatrix partial_trace(const HermitianMatrix& m, int dA, int dB, Subsystem keep);

// Sum of absolute eigenvalues.
double trace_norm(const HermitianMatrix& m,
                  const NumericConfig& cfg = NumericConfig::defaults());

Matrix kron(const Matrix& a, const Matrix& b);
HermitianMatrix kron(const HermitianMatrix& a, const HermitianMatrix& b);

// Basis of the real space of d x d Hermitian matrices: d diagonal units, then
// the real/imaginary pair for every strict upper entry. Orthogonal but not
// normalized (off-diagonal elements have squared norm 2).
std::vector<Matrix> hermitian_operator_basis(int d);

// Smallest eigenvalue; positivity checks compare it against -tol_psd.
double min_eigenvalue(const HermitianMatrix& m,
                      const NumericConfig& cfg = NumericConfig::defaults());
bool is_psd(const HermitianMatrix& m,
            const NumericConfig& cfg = NumericConfig::defaults());

}  // namespace thermosteer
