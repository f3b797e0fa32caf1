#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "thermosteer/hermitian.hpp"
#include "thermosteer/numeric.hpp"
#include "thermosteer/sdp.hpp"

using namespace thermosteer;

namespace {

const double kRoot2 = std::sqrt(2.0);

Matrix pauli(char which) {
  Matrix m(2, 2);
  switch (which) {
    case 'x': m << 0, 1, 1, 0; break;
    case 'y': m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0); break;
    default: m << 1, 0, 0, -1; break;
  }
  return m;
}

Matrix random_hermitian(int dim, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = Complex(g(rng), g(rng));
  return 0.5 * (m + m.adjoint().eval());
}

Matrix random_pd(int dim, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = Complex(g(rng), g(rng));
  return (m * m.adjoint() + 0.3 * Matrix::Identity(dim, dim)).eval();
}

// Random strictly feasible problem with known interior primal/dual points.
SdpProblem random_feasible(std::mt19937& rng, int* m_out = nullptr) {
  std::uniform_int_distribution<int> nblocks(1, 3);
  std::uniform_int_distribution<int> blockdim(1, 6);
  std::normal_distribution<double> g(0.0, 1.0);

  SdpProblem p;
  const int nb = nblocks(rng);
  for (int i = 0; i < nb; ++i) p.block_dims.push_back(blockdim(rng));

  int ntot = 0;
  for (int d : p.block_dims) ntot += d * d;
  std::uniform_int_distribution<int> nrows(1, std::min(15, ntot));
  const int m = nrows(rng);
  if (m_out) *m_out = m;

  std::vector<Matrix> x0, s0;
  for (int d : p.block_dims) {
    x0.push_back(random_pd(d, rng));
    s0.push_back(random_pd(d, rng));
  }
  Eigen::VectorXd y0(m);
  for (int k = 0; k < m; ++k) y0[k] = g(rng);

  for (int k = 0; k < m; ++k) {
    SdpProblem::Constraint c;
    double b = 0.0;
    for (int i = 0; i < nb; ++i) {
      c.A.push_back(random_hermitian(p.block_dims[i], rng));
      b += c.A.back().conjugate().cwiseProduct(x0[i]).sum().real();
    }
    c.b = b;
    p.constraints.push_back(std::move(c));
  }
  for (int i = 0; i < nb; ++i) {
    Matrix ci = s0[i];
    for (int k = 0; k < m; ++k) ci += y0[k] * p.constraints[k].A[i];
    p.C.push_back(ci);
  }
  return p;
}

double feasible_value(const SdpProblem& p, const std::vector<Matrix>& x) {
  double v = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    v += p.C[i].conjugate().cwiseProduct(x[i]).sum().real();
  return v;
}

void check_optimal_certificates(const SdpProblem& p, const SdpSolution& sol,
                                const NumericConfig& cfg) {
  REQUIRE(sol.status == SdpStatus::Optimal);
  CHECK(sol.gap <= 1e-7 * (1.0 + std::abs(sol.primal_obj)));
  CHECK(sol.dual_obj <= sol.primal_obj + 1e-9);
  for (std::size_t k = 0; k < p.constraints.size(); ++k) {
    double ax = 0.0;
    for (std::size_t i = 0; i < sol.X.size(); ++i)
      ax += p.constraints[k].A[i].conjugate().cwiseProduct(sol.X[i]).sum().real();
    CHECK(std::abs(ax - p.constraints[k].b) <= 1e-8);
  }
  for (std::size_t i = 0; i < sol.X.size(); ++i) {
    CHECK(min_eigenvalue(HermitianMatrix(sol.X[i], 1e-9), cfg) >= -cfg.tol_psd);
    CHECK(min_eigenvalue(HermitianMatrix(sol.S[i], 1e-9), cfg) >= -cfg.tol_psd);
  }
}

// Normalized Choi operator of a unitary channel, output (x) input ordering.
Matrix choi_of_unitary(const Matrix& u) {
  const int d = static_cast<int>(u.rows());
  Eigen::VectorXcd omega = Eigen::VectorXcd::Zero(d * d);
  for (int i = 0; i < d; ++i) omega[i * d + i] = 1.0;
  const Matrix ext = kron(u, Matrix::Identity(d, d));
  const Eigen::VectorXcd v = ext * omega;
  return (v * v.adjoint()).eval() / static_cast<double>(d);
}

}  // namespace

TEST_CASE("one-dimensional cone with no equalities") {
  SdpProblem p;
  p.block_dims = {1};
  p.C.push_back(Matrix::Identity(1, 1));

  const SdpSolution sol = solve_sdp(p);
  REQUIRE(sol.status == SdpStatus::Optimal);
  CHECK(std::abs(sol.primal_obj) <= 1e-8);
  CHECK(sol.X[0](0, 0).real() >= -1e-9);
  CHECK(sol.dual_obj == 0.0);
}

TEST_CASE("trace-one qubit with a vanishing Z moment") {
  SdpProblem p;
  p.block_dims = {2};
  p.C.push_back(Matrix::Identity(2, 2));
  p.constraints.push_back({{pauli('z')}, 0.0});
  p.constraints.push_back({{Matrix::Identity(2, 2)}, 1.0});

  const NumericConfig cfg = NumericConfig::defaults();
  const SdpSolution sol = solve_sdp(p, cfg);
  check_optimal_certificates(p, sol, cfg);
  CHECK(std::abs(sol.primal_obj - 1.0) <= 1e-7);
  // the central path lands on the analytic center of the optimal face
  CHECK((sol.X[0] - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-4);
}

TEST_CASE("presolve drops redundant rows and zeroes their multipliers") {
  SdpProblem p;
  p.block_dims = {2};
  p.C.push_back(Matrix::Identity(2, 2));
  p.constraints.push_back({{pauli('z')}, 0.0});
  p.constraints.push_back({{Matrix::Identity(2, 2)}, 1.0});
  // duplicate of row 1, then the sum of rows 0 and 1
  p.constraints.push_back({{Matrix::Identity(2, 2)}, 1.0});
  p.constraints.push_back({{(Matrix::Identity(2, 2) + pauli('z')).eval()}, 1.0});

  const NumericConfig cfg = NumericConfig::defaults();
  const SdpSolution sol = solve_sdp(p, cfg);
  check_optimal_certificates(p, sol, cfg);
  CHECK(std::abs(sol.primal_obj - 1.0) <= 1e-7);
  CHECK(sol.y.size() == 4);
  CHECK(sol.y[2] == 0.0);
  CHECK(sol.y[3] == 0.0);
}

TEST_CASE("presolve flags inconsistent duplicates") {
  SdpProblem p;
  p.block_dims = {2};
  p.C.push_back(Matrix::Identity(2, 2));
  p.constraints.push_back({{Matrix::Identity(2, 2)}, 1.0});
  p.constraints.push_back({{Matrix::Identity(2, 2)}, 2.0});

  const SdpSolution sol = solve_sdp(p);
  CHECK(sol.status == SdpStatus::PrimalInfeasible);
}

TEST_CASE("primal infeasibility detected by divergence") {
  SdpProblem p;
  p.block_dims = {1};
  p.C.push_back(Matrix::Identity(1, 1));
  p.constraints.push_back({{Matrix::Identity(1, 1)}, -1.0});

  const SdpSolution sol = solve_sdp(p);
  CHECK(sol.status == SdpStatus::PrimalInfeasible);
}

TEST_CASE("unbounded primal reported as dual infeasibility") {
  SdpProblem p;
  p.block_dims = {1};
  p.C.push_back((-Matrix::Identity(1, 1)).eval());

  const SdpSolution sol = solve_sdp(p);
  CHECK(sol.status == SdpStatus::DualInfeasible);
}

TEST_CASE("random strictly feasible ensemble meets the certified tolerances") {
  std::mt19937 rng(20240811);
  const NumericConfig cfg = NumericConfig::defaults();
  for (int trial = 0; trial < 30; ++trial) {
    const SdpProblem p = random_feasible(rng);
    const SdpSolution sol = solve_sdp(p, cfg);
    INFO("trial " << trial);
    check_optimal_certificates(p, sol, cfg);
  }
}

TEST_CASE("optimal value scales linearly in the objective and the rhs") {
  std::mt19937 rng(7);
  const NumericConfig cfg = NumericConfig::defaults();
  for (int trial = 0; trial < 5; ++trial) {
    const SdpProblem p = random_feasible(rng);
    const SdpSolution base = solve_sdp(p, cfg);
    REQUIRE(base.status == SdpStatus::Optimal);

    SdpProblem scaled_c = p;
    for (auto& c : scaled_c.C) c *= 2.5;
    const SdpSolution sc = solve_sdp(scaled_c, cfg);
    REQUIRE(sc.status == SdpStatus::Optimal);
    CHECK(std::abs(sc.primal_obj - 2.5 * base.primal_obj) <=
          1e-7 * (1.0 + std::abs(2.5 * base.primal_obj)));

    SdpProblem scaled_b = p;
    for (auto& c : scaled_b.constraints) c.b *= 0.5;
    const SdpSolution sb = solve_sdp(scaled_b, cfg);
    REQUIRE(sb.status == SdpStatus::Optimal);
    CHECK(std::abs(sb.primal_obj - 0.5 * base.primal_obj) <=
          1e-7 * (1.0 + std::abs(0.5 * base.primal_obj)));
  }
}

TEST_CASE("solver never beats a known feasible point") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    SdpProblem p = random_feasible(rng);
    // the solver's X for one objective stays feasible for a perturbed one
    const SdpSolution sol = solve_sdp(p);
    REQUIRE(sol.status == SdpStatus::Optimal);
    SdpProblem q = p;
    for (auto& c : q.C) c += 0.1 * Matrix::Identity(c.rows(), c.cols());
    const SdpSolution sol2 = solve_sdp(q);
    REQUIRE(sol2.status == SdpStatus::Optimal);
    CHECK(sol2.primal_obj <= feasible_value(q, sol.X) + 1e-6);
  }
}

TEST_CASE("repeat solves are bitwise deterministic") {
  std::mt19937 rng(4242);
  const SdpProblem p = random_feasible(rng);
  const SdpSolution a = solve_sdp(p);
  const SdpSolution b = solve_sdp(p);
  REQUIRE(a.status == SdpStatus::Optimal);
  CHECK(a.primal_obj == b.primal_obj);
  CHECK(a.dual_obj == b.dual_obj);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("shape and hermiticity validation") {
  SdpProblem p;
  p.block_dims = {2};
  p.C.push_back(Matrix::Identity(3, 3));
  CHECK_THROWS_AS(solve_sdp(p), ShapeError);

  SdpProblem q;
  q.block_dims = {2};
  Matrix bad(2, 2);
  bad << 1.0, Complex(0, 1), Complex(0, 1), 1.0;  // symmetric, not Hermitian
  q.C.push_back(bad);
  CHECK_THROWS_AS(solve_sdp(q), ValidationError);
}

// Steering robustness program for the two-Pauli assemblage, assembled by hand:
// blocks eta_1..eta_4 (one per deterministic strategy), then scalars q and s.
// Rows enforce sum_i D(a|x,i) eta_i + q (gamma p - sigma_{a|x}) = gamma p per
// Hermitian basis element, plus q + s = 1; objective is min -q.
TEST_CASE("steering robustness of the two-Pauli assemblage") {
  const Matrix gamma = 0.5 * Matrix::Identity(2, 2);
  std::vector<std::vector<Matrix>> sigma(2, std::vector<Matrix>(2));
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a) {
      const Matrix op = x == 0 ? pauli('x') : pauli('z');
      sigma[x][a] = 0.25 * (Matrix::Identity(2, 2) + (a == 0 ? 1.0 : -1.0) * op);
    }

  std::vector<Matrix> basis;
  {
    Matrix e00 = Matrix::Zero(2, 2), e11 = Matrix::Zero(2, 2);
    e00(0, 0) = 1.0;
    e11(1, 1) = 1.0;
    basis = {e00, e11, pauli('x'), pauli('y')};
  }

  SdpProblem p;
  p.block_dims = {2, 2, 2, 2, 1, 1};
  for (int i = 0; i < 4; ++i) p.C.push_back(Matrix::Zero(2, 2));
  p.C.push_back((-Matrix::Identity(1, 1)).eval());  // -q
  p.C.push_back(Matrix::Zero(1, 1));                // s

  const auto zero_row = [&]() {
    SdpProblem::Constraint c;
    for (int i = 0; i < 4; ++i) c.A.push_back(Matrix::Zero(2, 2));
    c.A.push_back(Matrix::Zero(1, 1));
    c.A.push_back(Matrix::Zero(1, 1));
    return c;
  };

  // strategy i maps (x0, x1) -> (i >> 1, i & 1)
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a)
      for (const Matrix& e : basis) {
        SdpProblem::Constraint row = zero_row();
        for (int i = 0; i < 4; ++i) {
          const int out = x == 0 ? (i >> 1) : (i & 1);
          if (out == a) row.A[i] = e;
        }
        const double p_ax = sigma[x][a].trace().real();
        const Matrix drift = p_ax * gamma - sigma[x][a];
        row.A[4](0, 0) = e.conjugate().cwiseProduct(drift).sum().real();
        row.b = p_ax * e.conjugate().cwiseProduct(gamma).sum().real();
        p.constraints.push_back(std::move(row));
      }
  SdpProblem::Constraint norm = zero_row();
  norm.A[4](0, 0) = 1.0;
  norm.A[5](0, 0) = 1.0;
  norm.b = 1.0;
  p.constraints.push_back(std::move(norm));

  const NumericConfig cfg = NumericConfig::defaults();
  const SdpSolution sol = solve_sdp(p, cfg);
  check_optimal_certificates(p, sol, cfg);
  const double q_star = -sol.primal_obj;
  CHECK(std::abs(q_star - 1.0 / kRoot2) <= 1e-6);
  CHECK(std::abs(-sol.dual_obj - 1.0 / kRoot2) <= 1e-6);
}

TEST_CASE("diamond norm of the zero map vanishes") {
  const HermitianMatrix zero(Matrix::Zero(4, 4), 0.0);
  CHECK(diamond_norm(zero, 2, 2) <= 1e-7);
}

TEST_CASE("diamond norm separates a phase gate from the identity") {
  Matrix u = Matrix::Identity(2, 2);
  u(1, 1) = Complex(0.0, 1.0);  // diag(1, e^{i pi/2})
  const Matrix delta = choi_of_unitary(u) - choi_of_unitary(Matrix::Identity(2, 2));
  const double value = diamond_norm(HermitianMatrix(delta, 1e-12), 2, 2);
  CHECK(std::abs(value - kRoot2) <= 1e-6);
}

TEST_CASE("diamond norm of identity vs full thermalisation matches a grid scan") {
  // Lambda(rho) = gamma tr(rho) with gamma = I/2 has normalized Choi gamma/2 (x) I/2
  const Matrix j_id = choi_of_unitary(Matrix::Identity(2, 2));
  const Matrix j_th = 0.25 * Matrix::Identity(4, 4);
  const Matrix delta = j_id - j_th;
  const double value = diamond_norm(HermitianMatrix(delta, 1e-12), 2, 2);
  CHECK(std::abs(value - 1.5) <= 1e-6);

  // covariance reduces the input search to Schmidt angle; scan is a lower bound
  const NumericConfig cfg = NumericConfig::defaults();
  double best = 0.0;
  const int npts = 2001;
  for (int k = 0; k < npts; ++k) {
    const double theta = 0.25 * M_PI * k / (npts - 1);
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4);
    psi[0] = std::cos(theta);
    psi[3] = std::sin(theta);
    const Matrix rho = psi * psi.adjoint();
    const Matrix tau = partial_trace(HermitianMatrix(rho, 1e-12), 2, 2, Subsystem::B).mat();
    const Matrix h = rho - kron(0.5 * Matrix::Identity(2, 2), tau);
    const double tn = trace_norm(HermitianMatrix(h, 1e-10), cfg);
    best = std::max(best, tn);
  }
  CHECK(best <= value + 1e-7);
  CHECK(std::abs(value - best) <= 1e-4);
}

TEST_CASE("diamond norm validates the choi dimension") {
  const HermitianMatrix zero(Matrix::Zero(4, 4), 0.0);
  CHECK_THROWS_AS(diamond_norm(zero, 2, 3), ShapeError);
}
