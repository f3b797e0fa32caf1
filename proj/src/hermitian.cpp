#include "thermosteer/hermitian.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace thermosteer {

HermitianMatrix::HermitianMatrix(const Matrix& m, double tol_herm) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw ShapeError("HermitianMatrix: square matrix of dim >= 1 required");
  const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (dev > tol_herm) {
    std::ostringstream os;
    os << "HermitianMatrix: Hermiticity deviation " << dev << " exceeds " << tol_herm;
    throw ValidationError(os.str());
  }
  m_ = 0.5 * (m + m.adjoint());
}

HermitianMatrix HermitianMatrix::identity(int dim) {
  return HermitianMatrix(Matrix::Identity(dim, dim));
}

HermitianMatrix HermitianMatrix::zero(int dim) {
  return HermitianMatrix(Matrix::Zero(dim, dim));
}

HermitianMatrix operator+(const HermitianMatrix& a, const HermitianMatrix& b) {
  if (a.dim() != b.dim()) throw ShapeError("HermitianMatrix +: dimension mismatch");
  return HermitianMatrix(a.mat() + b.mat(), 1.0);
}

HermitianMatrix operator-(const HermitianMatrix& a, const HermitianMatrix& b) {
  if (a.dim() != b.dim()) throw ShapeError("HermitianMatrix -: dimension mismatch");
  return HermitianMatrix(a.mat() - b.mat(), 1.0);
}

HermitianMatrix operator*(double s, const HermitianMatrix& a) {
  return HermitianMatrix(s * a.mat(), 1.0);
}

double hs_inner(const HermitianMatrix& a, const HermitianMatrix& b) {
  if (a.dim() != b.dim()) throw ShapeError("hs_inner: dimension mismatch");
  return (a.mat().adjoint() * b.mat()).trace().real();
}

// ---------- eigendecomposition ----------

namespace {

// Frobenius norm of the strict upper triangle.
double off_diagonal_norm(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  double s = 0.0;
  for (int p = 0; p < n; ++p)
    for (int q = p + 1; q < n; ++q) s += std::norm(a(p, q));
  return std::sqrt(2.0 * s);
}

}  // namespace

EigResult eig_hermitian(const HermitianMatrix& m, const NumericConfig& cfg) {
  const int n = m.dim();
  Matrix a = m.mat();
  Matrix v = Matrix::Identity(n, n);
  const double scale = std::max(1.0, a.norm());
  const int max_sweeps = 64;

  // Sweep down to the rounding floor (quadratic convergence makes the extra
  // sweeps cheap); cfg.tol_eig only gates acceptance of a stalled iteration.
  const double floor_off = 1e-14 * scale * n;
  double off = off_diagonal_norm(a);
  double prev_off = std::numeric_limits<double>::infinity();
  int sweep = 0;
  for (; sweep < max_sweeps && off > floor_off && off < prev_off; ++sweep) {
    prev_off = off;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double r = std::abs(apq);
        if (r <= 1e-300) continue;
        // Unitary 2x2 rotation in the (p,q) plane annihilating a(p,q):
        // V = [[c, -s e^{i phi}], [s e^{-i phi}, c]] with apq = r e^{i phi}
        // and tan(2 theta) = 2r / (a_pp - a_qq).
        const Complex phase = apq / r;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (app - aqq) / (2.0 * r);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::hypot(1.0, tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (int k = 0; k < n; ++k) {  // A <- A V
          const Complex akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp + s * std::conj(phase) * akq;
          a(k, q) = -s * phase * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {  // A <- V^dagger A
          const Complex apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk + s * phase * aqk;
          a(q, k) = -s * std::conj(phase) * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {  // accumulate eigenvectors
          const Complex vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp + s * std::conj(phase) * vkq;
          v(k, q) = -s * phase * vkp + c * vkq;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = Complex(a(p, p).real(), 0.0);
        a(q, q) = Complex(a(q, q).real(), 0.0);
      }
    }
    off = off_diagonal_norm(a);
  }
  if (off > cfg.tol_eig * scale)
    throw NumericalFailureError("eig_hermitian: Jacobi sweeps did not converge");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return a(i, i).real() < a(j, j).real(); });

  EigResult out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]).real();
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

HermitianMatrix matrix_func(const HermitianMatrix& m,
                            const std::function<double(double)>& f,
                            const NumericConfig& cfg) {
  const EigResult e = eig_hermitian(m, cfg);
  RealVector fx(e.values.size());
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    fx[i] = f(e.values[i]);
    if (!std::isfinite(fx[i])) {
      std::ostringstream os;
      os << "matrix_func: f undefined at eigenvalue " << e.values[i];
      throw DomainError(os.str());
    }
  }
  Matrix out = e.vectors * fx.asDiagonal() * e.vectors.adjoint();
  out = 0.5 * (out + out.adjoint().eval());
  return HermitianMatrix(out, 1.0);
}

HermitianMatrix partial_trace(const HermitianMatrix& m, int dA, int dB, Subsystem keep) {
  if (dA < 1 || dB < 1 || m.dim() != dA * dB)
    throw ShapeError("partial_trace: dim must equal dA*dB");
  const Matrix& in = m.mat();
  if (keep == Subsystem::A) {
    Matrix out = Matrix::Zero(dA, dA);
    for (int i = 0; i < dA; ++i)
      for (int j = 0; j < dA; ++j)
        for (int k = 0; k < dB; ++k) out(i, j) += in(i * dB + k, j * dB + k);
    return HermitianMatrix(out, 1.0);
  }
  Matrix out = Matrix::Zero(dB, dB);
  for (int k = 0; k < dB; ++k)
    for (int l = 0; l < dB; ++l)
      for (int i = 0; i < dA; ++i) out(k, l) += in(i * dB + k, i * dB + l);
  return HermitianMatrix(out, 1.0);
}

double trace_norm(const HermitianMatrix& m, const NumericConfig& cfg) {
  return eig_hermitian(m, cfg).values.cwiseAbs().sum();
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

HermitianMatrix kron(const HermitianMatrix& a, const HermitianMatrix& b) {
  return HermitianMatrix(kron(a.mat(), b.mat()), 1.0);
}

std::vector<Matrix> hermitian_operator_basis(int d) {
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i) {
    Matrix e = Matrix::Zero(d, d);
    e(i, i) = 1.0;
    out.push_back(e);
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      Matrix re = Matrix::Zero(d, d);
      re(i, j) = 1.0;
      re(j, i) = 1.0;
      out.push_back(re);
      Matrix im = Matrix::Zero(d, d);
      im(i, j) = Complex(0.0, 1.0);
      im(j, i) = Complex(0.0, -1.0);
      out.push_back(im);
    }
  return out;
}

double min_eigenvalue(const HermitianMatrix& m, const NumericConfig& cfg) {
  return eig_hermitian(m, cfg).values[0];
}

bool is_psd(const HermitianMatrix& m, const NumericConfig& cfg) {
  return min_eigenvalue(m, cfg) >= -cfg.tol_psd;
}

}  // namespace thermosteer
