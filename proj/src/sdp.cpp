#include "thermosteer/sdp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <tuple>
#include <vector>

namespace thermosteer {

namespace {

using BlockVec = std::vector<Matrix>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// tr(a b) for blockwise Hermitian a, b (real by Hermiticity).
double block_dot(const BlockVec& a, const BlockVec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i].conjugate().cwiseProduct(b[i]).sum().real();
  return s;
}

double block_max_abs(const BlockVec& a) {
  double s = 0.0;
  for (const Matrix& blk : a) s = std::max(s, blk.cwiseAbs().maxCoeff());
  return s;
}

BlockVec identity_blocks(const std::vector<int>& dims, double scale) {
  BlockVec out;
  out.reserve(dims.size());
  for (int d : dims) out.push_back(scale * Matrix::Identity(d, d));
  return out;
}

// Isometric real parametrization: dot(vec(a), vec(b)) = tr(a b) for Hermitian blocks.
Eigen::VectorXd herm_vec(const BlockVec& a, int nparams) {
  Eigen::VectorXd v(nparams);
  const double r2 = std::sqrt(2.0);
  int at = 0;
  for (const Matrix& blk : a) {
    const int d = static_cast<int>(blk.rows());
    for (int i = 0; i < d; ++i) v[at++] = blk(i, i).real();
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        v[at++] = r2 * blk(i, j).real();
        v[at++] = r2 * blk(i, j).imag();
      }
  }
  return v;
}

// Smallest eigenvalue of a numerically Hermitian matrix.
double lambda_min(const Matrix& w, const NumericConfig& cfg) {
  const HermitianMatrix h(0.5 * (w + w.adjoint().eval()), kInf);
  return eig_hermitian(h, cfg).values[0];
}

// Largest alpha in (0, 1] with X + alpha*D >= 0, scaled by the boundary fraction.
// Cholesky is the fast path; near the cone boundary it can fail on a matrix
// that is still positive, so fall back to an eigendecomposition with the
// spectrum clamped away from zero.
double step_length(const Matrix& x, const Matrix& d, double fraction,
                   const NumericConfig& cfg) {
  Matrix w;
  Eigen::LLT<Matrix> llt(x);
  if (llt.info() == Eigen::Success) {
    const Matrix l = llt.matrixL();
    w = l.triangularView<Eigen::Lower>().solve(d);
    w = l.triangularView<Eigen::Lower>().solve(w.adjoint()).adjoint();
  } else {
    const EigResult e = eig_hermitian(HermitianMatrix(x, kInf), cfg);
    const double floor = 1e-16 * std::max(1.0, e.values.cwiseAbs().maxCoeff());
    Eigen::VectorXd inv_sqrt(e.values.size());
    for (Eigen::Index i = 0; i < e.values.size(); ++i)
      inv_sqrt[i] = 1.0 / std::sqrt(std::max(e.values[i], floor));
    const Matrix xih = e.vectors * inv_sqrt.asDiagonal() * e.vectors.adjoint();
    w = xih * d * xih;
  }
  const double lmin = lambda_min(w, cfg);
  if (lmin >= 0.0) return 1.0;
  return std::min(1.0, -fraction / lmin);
}

struct PresolveResult {
  std::vector<int> kept;
  bool inconsistent = false;
};

// Modified Gram-Schmidt rank filter over constraint rows; keeps the earliest
// independent rows and verifies that every dropped row is consistent in b.
PresolveResult presolve_rows(const SdpProblem& p) {
  PresolveResult out;
  const int m = static_cast<int>(p.constraints.size());
  int nparams = 0;
  for (int d : p.block_dims) nparams += d * d;

  Eigen::MatrixXd rows(nparams, m);
  for (int k = 0; k < m; ++k) rows.col(k) = herm_vec(p.constraints[k].A, nparams);

  std::vector<Eigen::VectorXd> basis;
  std::vector<int> dropped;
  for (int k = 0; k < m; ++k) {
    Eigen::VectorXd v = rows.col(k);
    const double n0 = v.norm();
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : basis) v -= u.dot(v) * u;
    if (n0 > 1e-14 && v.norm() > 1e-9 * n0) {
      basis.push_back(v / v.norm());
      out.kept.push_back(k);
    } else {
      dropped.push_back(k);
    }
  }
  if (dropped.empty()) return out;

  const int r = static_cast<int>(out.kept.size());
  Eigen::MatrixXd keptmat(nparams, r);
  Eigen::VectorXd keptb(r);
  for (int i = 0; i < r; ++i) {
    keptmat.col(i) = rows.col(out.kept[i]);
    keptb[i] = p.constraints[out.kept[i]].b;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(keptmat);
  for (int k : dropped) {
    const Eigen::VectorXd alpha = qr.solve(rows.col(k));
    const double br = p.constraints[k].b;
    if (std::abs(br - alpha.dot(keptb)) > 1e-8 * (1.0 + std::abs(br))) {
      out.inconsistent = true;
      return out;
    }
  }
  return out;
}

void validate_problem(const SdpProblem& p, const NumericConfig& cfg) {
  if (p.block_dims.empty()) throw ShapeError("solve_sdp: no blocks");
  for (int d : p.block_dims)
    if (d < 1) throw ShapeError("solve_sdp: block dims must be >= 1");
  const auto check_blocks = [&](const BlockVec& v, const char* what) {
    if (v.size() != p.block_dims.size())
      throw ShapeError(std::string("solve_sdp: block count mismatch in ") + what);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i].rows() != p.block_dims[i] || v[i].cols() != p.block_dims[i])
        throw ShapeError(std::string("solve_sdp: block shape mismatch in ") + what);
      if ((v[i] - v[i].adjoint()).cwiseAbs().maxCoeff() > cfg.tol_herm)
        throw ValidationError(std::string("solve_sdp: non-Hermitian block in ") + what);
    }
  };
  check_blocks(p.C, "objective");
  for (const auto& c : p.constraints) {
    check_blocks(c.A, "constraint");
    if (!std::isfinite(c.b)) throw ValidationError("solve_sdp: non-finite rhs");
  }
}

struct Residuals {
  Eigen::VectorXd rp;  // b - A(X)
  BlockVec rd;         // C - A^T(y) - S
  double pinf_abs = 0.0;
  double dinf_abs = 0.0;
};

}  // namespace

SdpSolution solve_sdp(const SdpProblem& p, const NumericConfig& cfg) {
  validate_problem(p, cfg);

  SdpSolution sol;
  sol.y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.constraints.size()));

  const PresolveResult pre = presolve_rows(p);
  if (pre.inconsistent) {
    sol.status = SdpStatus::PrimalInfeasible;
    return sol;
  }
  const int m = static_cast<int>(pre.kept.size());
  const int nb = static_cast<int>(p.block_dims.size());
  int ntot = 0;
  for (int d : p.block_dims) ntot += d;

  // symmetrized copies of the data
  BlockVec c(nb);
  for (int i = 0; i < nb; ++i) c[i] = 0.5 * (p.C[i] + p.C[i].adjoint().eval());
  std::vector<BlockVec> rows(m);
  Eigen::VectorXd b(m);
  for (int k = 0; k < m; ++k) {
    const auto& src = p.constraints[pre.kept[k]];
    rows[k].resize(nb);
    for (int i = 0; i < nb; ++i) rows[k][i] = 0.5 * (src.A[i] + src.A[i].adjoint().eval());
    b[k] = src.b;
  }
  const double bmax = m > 0 ? b.cwiseAbs().maxCoeff() : 0.0;
  const double cmax = block_max_abs(c);

  const double tau = 1.0 + cmax;
  BlockVec X = identity_blocks(p.block_dims, tau);
  BlockVec S = identity_blocks(p.block_dims, tau);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

  const auto compute_residuals = [&](const BlockVec& xx, const Eigen::VectorXd& yy,
                                     const BlockVec& ss) {
    Residuals r;
    r.rp.resize(m);
    for (int k = 0; k < m; ++k) r.rp[k] = b[k] - block_dot(rows[k], xx);
    r.rd.resize(nb);
    for (int i = 0; i < nb; ++i) {
      Matrix acc = c[i] - ss[i];
      for (int k = 0; k < m; ++k) acc -= yy[k] * rows[k][i];
      r.rd[i] = acc;
    }
    r.pinf_abs = m > 0 ? r.rp.cwiseAbs().maxCoeff() : 0.0;
    r.dinf_abs = block_max_abs(r.rd);
    return r;
  };

  const auto spec_level_ok = [&](double pobj, double gap, const Residuals& r) {
    return gap <= 1e-7 * (1.0 + std::abs(pobj)) && r.pinf_abs <= 1e-8 &&
           r.dinf_abs <= 1e-7 * (1.0 + cmax);
  };

  const auto finish = [&](SdpStatus status, int iters) {
    sol.X = X;
    sol.S = S;
    for (int k = 0; k < m; ++k) sol.y[pre.kept[k]] = y[k];
    sol.primal_obj = block_dot(c, X);
    sol.dual_obj = m > 0 ? b.dot(y) : 0.0;
    sol.gap = std::abs(sol.primal_obj - sol.dual_obj);
    sol.status = status;
    sol.iterations = iters;
    return sol;
  };

  // The merit-best iterate seen so far. Near the floating-point floor the
  // Schur system loses definiteness and further steps can corrupt an already
  // excellent iterate, so salvage paths fall back to this snapshot.
  struct BestIterate {
    BlockVec X, S;
    Eigen::VectorXd y;
    Residuals res;
    double pobj = 0.0;
    double gap = kInf;
    double score = kInf;
    bool valid = false;
  } best;

  const auto consider_best = [&](const Residuals& r, double pobj, double dobj) {
    const double gap = std::abs(pobj - dobj);
    const double relgap = gap / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double score =
        std::max({relgap, r.pinf_abs / (1.0 + bmax), r.dinf_abs / (1.0 + cmax)});
    if (!best.valid || score < best.score)
      best = {X, S, y, r, pobj, gap, score, true};
  };

  const auto best_spec_ok = [&]() {
    return best.valid && spec_level_ok(best.pobj, best.gap, best.res);
  };

  const auto adopt_best = [&]() {
    X = best.X;
    S = best.S;
    y = best.y;
  };

  // Improving-ray certificates. A large y that is nearly dual-feasible as a
  // ray with b.y > 0 proves primal infeasibility; a large X ray in the kernel
  // of A with negative objective proves the primal unbounded (dual infeasible).
  const auto detect_ray = [&]() {
    if (m > 0 && y.lpNorm<Eigen::Infinity>() > 1e4 * (1.0 + bmax)) {
      const Eigen::VectorXd yn = y / y.norm();
      double lmax = -kInf;
      for (int i = 0; i < nb; ++i) {
        Matrix acc = Matrix::Zero(p.block_dims[i], p.block_dims[i]);
        for (int k = 0; k < m; ++k) acc += yn[k] * rows[k][i];
        lmax = std::max(lmax, -lambda_min(Matrix(-acc), cfg));
      }
      if (lmax <= 1e-6 && b.dot(yn) >= 1e-6) return SdpStatus::PrimalInfeasible;
    }
    const double xnorm = block_max_abs(X);
    if (xnorm > 1e4 * tau) {
      BlockVec xn(nb);
      for (int i = 0; i < nb; ++i) xn[i] = X[i] / xnorm;
      double aerr = 0.0;
      for (int k = 0; k < m; ++k) aerr = std::max(aerr, std::abs(block_dot(rows[k], xn)));
      if (aerr <= 1e-6 && block_dot(c, xn) <= -1e-6) return SdpStatus::DualInfeasible;
    }
    return SdpStatus::NumericalFailure;  // no ray found
  };

  const auto classify_divergence = [&]() {
    const SdpStatus ray = detect_ray();
    if (ray != SdpStatus::NumericalFailure) return ray;
    if (m > 0 && y.lpNorm<Eigen::Infinity>() > cfg.infeas_ratio * (1.0 + bmax))
      return SdpStatus::PrimalInfeasible;
    if (block_max_abs(X) > cfg.infeas_ratio * tau) return SdpStatus::DualInfeasible;
    return SdpStatus::NumericalFailure;
  };

  double best_relgap = kInf;
  int stall = 0;
  int tiny_steps = 0;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const Residuals res = compute_residuals(X, y, S);
    const double pobj = block_dot(c, X);
    const double dobj = m > 0 ? b.dot(y) : 0.0;
    const double gap = std::abs(pobj - dobj);
    const double relgap = gap / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double mu = block_dot(X, S) / ntot;

    if (cfg.trace_iterates && cfg.trace_stream) {
      (*cfg.trace_stream) << "iter " << iter << " pobj " << pobj << " dobj " << dobj
                          << " gap " << gap << " pinf " << res.pinf_abs << " dinf "
                          << res.dinf_abs << " mu " << mu << "\n";
    }

    consider_best(res, pobj, dobj);

    const bool feas_tight = res.pinf_abs <= cfg.tol_feas * (1.0 + bmax) &&
                            res.dinf_abs <= cfg.tol_feas * (1.0 + cmax);
    if (relgap <= cfg.tol_gap && feas_tight) return finish(SdpStatus::Optimal, iter);

    const SdpStatus ray = detect_ray();
    if (ray != SdpStatus::NumericalFailure) return finish(ray, iter);

    if (relgap < 0.9 * best_relgap) {
      best_relgap = relgap;
      stall = 0;
    } else {
      ++stall;
    }
    // progress has flattened out at the numerical floor: accept the best
    // iterate if it already certifies optimality at the contract thresholds
    if (stall >= 8 && best_spec_ok()) {
      adopt_best();
      return finish(SdpStatus::Optimal, iter);
    }
    if (stall >= cfg.stagnation_window) {
      if (m > 0 && y.lpNorm<Eigen::Infinity>() > cfg.infeas_ratio * (1.0 + bmax))
        return finish(SdpStatus::PrimalInfeasible, iter);
      if (block_max_abs(X) > cfg.infeas_ratio * tau)
        return finish(SdpStatus::DualInfeasible, iter);
      if (stall >= 4 * cfg.stagnation_window)
        return finish(SdpStatus::NumericalFailure, iter);
    }

    // factor S and X blockwise
    std::vector<Eigen::LLT<Matrix>> slft(nb);
    BlockVec sinv(nb);
    bool ok = true;
    for (int i = 0; i < nb; ++i) {
      slft[i].compute(S[i]);
      if (slft[i].info() != Eigen::Success) {
        ok = false;
        break;
      }
      sinv[i] = slft[i].solve(Matrix::Identity(p.block_dims[i], p.block_dims[i]));
      sinv[i] = 0.5 * (sinv[i] + sinv[i].adjoint().eval());
    }
    if (!ok) {
      // factorization breakdown: the best iterate may already be good enough
      if (best_spec_ok()) {
        adopt_best();
        return finish(SdpStatus::Optimal, iter);
      }
      return finish(classify_divergence(), iter);
    }

    // Schur complement M_kl = Re tr(A_k X A_l S^{-1}), symmetric positive definite
    Eigen::MatrixXd schur = Eigen::MatrixXd::Zero(m, m);
    std::vector<BlockVec> xasi(m);
    for (int l = 0; l < m; ++l) {
      xasi[l].resize(nb);
      for (int i = 0; i < nb; ++i) xasi[l][i] = X[i] * rows[l][i] * sinv[i];
      for (int k = 0; k < m; ++k) {
        double acc = 0.0;
        for (int i = 0; i < nb; ++i)
          acc += rows[k][i].conjugate().cwiseProduct(xasi[l][i]).sum().real();
        schur(k, l) = acc;
      }
    }
    schur = 0.5 * (schur + schur.transpose().eval());
    Eigen::LDLT<Eigen::MatrixXd> schur_f;
    if (m > 0) {
      schur_f.compute(schur);
      if (schur_f.info() != Eigen::Success) {
        if (best_spec_ok()) {
          adopt_best();
          return finish(SdpStatus::Optimal, iter);
        }
        return finish(classify_divergence(), iter);
      }
    }

    // rhs building blocks shared by predictor and corrector
    Eigen::VectorXd a_sinv(m), a_xrdsi(m);
    for (int k = 0; k < m; ++k) {
      double s1 = 0.0, s2 = 0.0;
      for (int i = 0; i < nb; ++i) {
        s1 += rows[k][i].conjugate().cwiseProduct(sinv[i]).sum().real();
        const Matrix t = X[i] * res.rd[i] * sinv[i];
        s2 += rows[k][i].conjugate().cwiseProduct(t).sum().real();
      }
      a_sinv[k] = s1;
      a_xrdsi[k] = s2;
    }

    // Solves the HKM system for a given centering sigma and corrector K,
    // returning (dx, dy, ds).
    const auto hkm_direction = [&](double sigma_mu, const BlockVec* corr)
        -> std::tuple<BlockVec, Eigen::VectorXd, BlockVec> {
      Eigen::VectorXd rhs = b - sigma_mu * a_sinv + a_xrdsi;
      if (corr) {
        for (int k = 0; k < m; ++k) {
          double s = 0.0;
          for (int i = 0; i < nb; ++i) {
            const Matrix t = (*corr)[i] * sinv[i];
            s += rows[k][i].conjugate().cwiseProduct(t).sum().real();
          }
          rhs[k] += s;
        }
      }
      Eigen::VectorXd dy = Eigen::VectorXd::Zero(m);
      if (m > 0) {
        dy = schur_f.solve(rhs);
        dy += schur_f.solve(rhs - schur * dy);  // one refinement step
      }
      BlockVec ds(nb), dx(nb);
      for (int i = 0; i < nb; ++i) {
        Matrix acc = res.rd[i];
        for (int k = 0; k < m; ++k) acc -= dy[k] * rows[k][i];
        ds[i] = 0.5 * (acc + acc.adjoint().eval());
        Matrix raw = sigma_mu * sinv[i] - X[i] - X[i] * ds[i] * sinv[i];
        if (corr) raw -= (*corr)[i] * sinv[i];
        dx[i] = 0.5 * (raw + raw.adjoint().eval());
      }
      return {dx, dy, ds};
    };

    const auto block_steps = [&](const BlockVec& base, const BlockVec& dir) {
      double a = 1.0;
      for (int i = 0; i < nb; ++i)
        a = std::min(a, step_length(base[i], dir[i], cfg.step_fraction, cfg));
      return a;
    };

    // predictor (affine scaling)
    const auto affine = hkm_direction(0.0, nullptr);
    const BlockVec& dxa = std::get<0>(affine);
    const BlockVec& dsa = std::get<2>(affine);
    const double apa = block_steps(X, dxa);
    const double ada = block_steps(S, dsa);

    double mu_aff = 0.0;
    for (int i = 0; i < nb; ++i) {
      const Matrix xa = X[i] + apa * dxa[i];
      const Matrix sa = S[i] + ada * dsa[i];
      mu_aff += xa.conjugate().cwiseProduct(sa).sum().real();
    }
    mu_aff /= ntot;
    double sigma = std::pow(std::max(0.0, mu_aff / mu), 3);
    sigma = std::min(1.0, sigma);

    // corrector
    BlockVec corr(nb);
    for (int i = 0; i < nb; ++i) corr[i] = dxa[i] * dsa[i];
    auto [dx, dy, ds] = hkm_direction(sigma * mu, &corr);
    const double ap = block_steps(X, dx);
    const double ad = block_steps(S, ds);

    if (cfg.trace_iterates && cfg.trace_stream)
      (*cfg.trace_stream) << "  sigma " << sigma << " alpha_p " << ap << " alpha_d " << ad
                          << "\n";

    for (int i = 0; i < nb; ++i) {
      X[i] += ap * dx[i];
      S[i] += ad * ds[i];
      X[i] = 0.5 * (X[i] + X[i].adjoint().eval());
      S[i] = 0.5 * (S[i] + S[i].adjoint().eval());
    }
    y += ad * dy;

    tiny_steps = (ap < 1e-6 && ad < 1e-6) ? tiny_steps + 1 : 0;
    if (tiny_steps >= 3 || (ap < 1e-10 && ad < 1e-10)) {
      const Residuals r2 = compute_residuals(X, y, S);
      consider_best(r2, block_dot(c, X), m > 0 ? b.dot(y) : 0.0);
      if (best_spec_ok()) {
        adopt_best();
        return finish(SdpStatus::Optimal, iter + 1);
      }
      return finish(classify_divergence(), iter + 1);
    }
  }

  // iteration cap: accept only a certifiably optimal iterate
  const Residuals res = compute_residuals(X, y, S);
  consider_best(res, block_dot(c, X), m > 0 ? b.dot(y) : 0.0);
  if (best_spec_ok()) {
    adopt_best();
    return finish(SdpStatus::Optimal, cfg.max_iters);
  }
  return finish(classify_divergence(), cfg.max_iters);
}

// ---------- diamond norm ----------

double diamond_norm(const HermitianMatrix& delta_choi, int d_in, int d_out,
                    const NumericConfig& cfg) {
  const int D = d_in * d_out;
  if (delta_choi.dim() != D) throw ShapeError("diamond_norm: choi dim must be d_in*d_out");
  const Matrix j = static_cast<double>(d_in) * delta_choi.mat();

  // Watrous dual:  minimize (|tr_out Y0|_inf + |tr_out Y1|_inf)/2
  //                subject to [[Y0, -J], [-J^dagger, Y1]] >= 0
  // encoded with blocks G(2D), U0(d_in), U1(d_in), t0, t1 where
  // U_i = t_i I - tr_out(Y_i) >= 0 pins the operator norms.
  SdpProblem p;
  p.block_dims = {2 * D, d_in, d_in, 1, 1};
  p.C.resize(5);
  p.C[0] = Matrix::Zero(2 * D, 2 * D);
  p.C[1] = Matrix::Zero(d_in, d_in);
  p.C[2] = Matrix::Zero(d_in, d_in);
  p.C[3] = 0.5 * Matrix::Identity(1, 1);
  p.C[4] = 0.5 * Matrix::Identity(1, 1);

  const auto empty_row = [&]() {
    SdpProblem::Constraint c;
    c.A.resize(5);
    c.A[0] = Matrix::Zero(2 * D, 2 * D);
    c.A[1] = Matrix::Zero(d_in, d_in);
    c.A[2] = Matrix::Zero(d_in, d_in);
    c.A[3] = Matrix::Zero(1, 1);
    c.A[4] = Matrix::Zero(1, 1);
    return c;
  };

  // off-diagonal block of G pinned to -J entrywise
  for (int r = 0; r < D; ++r)
    for (int s = 0; s < D; ++s) {
      SdpProblem::Constraint re = empty_row();
      re.A[0](r, D + s) = 1.0;
      re.A[0](D + s, r) = 1.0;
      re.b = -2.0 * j(r, s).real();
      p.constraints.push_back(std::move(re));

      SdpProblem::Constraint im = empty_row();
      im.A[0](r, D + s) = Complex(0.0, 1.0);
      im.A[0](D + s, r) = Complex(0.0, -1.0);
      im.b = -2.0 * j(r, s).imag();
      p.constraints.push_back(std::move(im));
    }

  // tr_out(Y_i) + U_i - t_i I = 0 against a Hermitian basis on the input space
  const auto basis = hermitian_operator_basis(d_in);
  for (int which = 0; which < 2; ++which) {
    const int off = which * D;
    for (const Matrix& f : basis) {
      SdpProblem::Constraint row = empty_row();
      row.A[0].block(off, off, D, D) = kron(Matrix::Identity(d_out, d_out), f);
      row.A[1 + which] = f;
      row.A[3 + which](0, 0) = -f.trace();
      row.b = 0.0;
      p.constraints.push_back(std::move(row));
    }
  }

  const SdpSolution sol = solve_sdp(p, cfg);
  if (sol.status != SdpStatus::Optimal)
    throw NumericalFailureError("diamond_norm: SDP did not reach optimality");
  return sol.primal_obj;
}

}  // namespace thermosteer
