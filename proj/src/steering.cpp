#include "thermosteer/steering.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "thermosteer/sdp.hpp"

namespace thermosteer {

namespace {

// computed quantities are Hermitian by construction; symmetrize away rounding
HermitianMatrix herm(const Matrix& m) {
  return HermitianMatrix(0.5 * (m + m.adjoint().eval()), std::numeric_limits<double>::infinity());
}

double real_trace(const Matrix& m) { return m.trace().real(); }

// clamp the spectrum at zero; used to polish solver iterates into exact cone
// members before handing them out as certificates
HermitianMatrix psd_part(const HermitianMatrix& m, const NumericConfig& cfg) {
  const EigResult e = eig_hermitian(m, cfg);
  RealVector clamped = e.values;
  for (Eigen::Index i = 0; i < clamped.size(); ++i) clamped[i] = std::max(clamped[i], 0.0);
  return herm(e.vectors * clamped.asDiagonal() * e.vectors.adjoint());
}

void check_inputs(const Assemblage& sigma, const HermitianMatrix& gamma,
                  const NumericConfig& cfg) {
  if (gamma.dim() != sigma.dim())
    throw ShapeError("sr_gamma: gamma dimension must match the assemblage");
  if (std::abs(gamma.trace() - 1.0) > 1e-9)
    throw DomainError("sr_gamma: gamma must have unit trace");
  if (min_eigenvalue(gamma, cfg) <= cfg.tol_psd)
    throw DomainError("sr_gamma: gamma must be full-rank");
}

// Joint program over (eta_i, q, s):
//   minimize -q
//   sum_i D(a|x,i) eta_i + q (p_{a|x} gamma - sigma_{a|x}) = p_{a|x} gamma,
//   q + s = 1,  eta_i >= 0,  q >= 0,  s >= 0,
// expanded row-wise against the Hermitian operator basis. The optimum is
// q* = 2^{-SR_gamma}.
struct SrProgram {
  SdpProblem problem;
  int n_basis = 0;
  int rows_main = 0;   // (a,x,k) at row (x*|a| + a)*n_basis + k
  int rows_match = 0;  // optional trace rows, (a,x) at rows_main + x*|a| + a
};

SrProgram build_sr_program(const Assemblage& sigma, const HermitianMatrix& gamma,
                           const DeterministicStrategySet& strat, bool match_statistics) {
  const int d = sigma.dim();
  const int na = sigma.n_outcomes();
  const int nx = sigma.n_settings();
  const int ni = strat.count();
  const auto basis = hermitian_operator_basis(d);

  SrProgram prog;
  prog.n_basis = static_cast<int>(basis.size());
  prog.rows_main = na * nx * prog.n_basis;
  prog.rows_match = match_statistics ? na * nx : 0;

  SdpProblem& p = prog.problem;
  p.block_dims.assign(ni, d);
  p.block_dims.push_back(1);
  p.block_dims.push_back(1);
  for (int dim : p.block_dims) p.C.push_back(Matrix::Zero(dim, dim));
  p.C[ni](0, 0) = -1.0;

  const auto empty_row = [&p]() {
    SdpProblem::Constraint row;
    for (int dim : p.block_dims) row.A.push_back(Matrix::Zero(dim, dim));
    return row;
  };

  for (int x = 0; x < nx; ++x)
    for (int a = 0; a < na; ++a) {
      const double prob = sigma.probability(a, x);
      const Matrix drift = prob * gamma.mat() - sigma.at(a, x).mat();
      for (int k = 0; k < prog.n_basis; ++k) {
        SdpProblem::Constraint row = empty_row();
        for (int i = 0; i < ni; ++i)
          if (strat.d(a, x, i)) row.A[i] = basis[k];
        row.A[ni](0, 0) = real_trace(basis[k] * drift);
        row.b = prob * real_trace(basis[k] * gamma.mat());
        p.constraints.push_back(std::move(row));
      }
    }

  if (match_statistics)
    for (int x = 0; x < nx; ++x)
      for (int a = 0; a < na; ++a) {
        const double prob = sigma.probability(a, x);
        SdpProblem::Constraint row = empty_row();
        for (int i = 0; i < ni; ++i)
          if (strat.d(a, x, i)) row.A[i] = Matrix::Identity(d, d);
        row.A[ni](0, 0) = prob * gamma.trace() - prob;
        row.b = prob * gamma.trace();
        p.constraints.push_back(std::move(row));
      }

  SdpProblem::Constraint norm = empty_row();
  norm.A[ni](0, 0) = 1.0;
  norm.A[ni + 1](0, 0) = 1.0;
  norm.b = 1.0;
  p.constraints.push_back(std::move(norm));
  return prog;
}

struct SolvedSr {
  DeterministicStrategySet strat;
  SrProgram prog;
  SdpSolution sol;
  double q_star;
  double sr;
};

SolvedSr solve_sr(const Assemblage& sigma, const HermitianMatrix& gamma, bool match_statistics,
                  const NumericConfig& cfg) {
  check_inputs(sigma, gamma, cfg);
  DeterministicStrategySet strat =
      enumerate_strategies(sigma.n_outcomes(), sigma.n_settings());
  SrProgram prog = build_sr_program(sigma, gamma, strat, match_statistics);
  SdpSolution sol = solve_sdp(prog.problem, cfg);
  if (sol.status != SdpStatus::Optimal)
    throw NumericalFailureError("sr_gamma: robustness SDP did not reach optimality");

  double q = sol.X[strat.count()](0, 0).real();
  if (!(q > 0.0))
    throw NumericalFailureError("sr_gamma: robustness SDP returned a non-positive weight");
  q = std::min(q, 1.0);
  const double sr = std::max(0.0, -std::log2(q));
  return {std::move(strat), std::move(prog), std::move(sol), q, sr};
}

}  // namespace

// ---------- deterministic strategies ----------

DeterministicStrategySet::DeterministicStrategySet(int n_outcomes, int n_settings, int cap)
    : n_outcomes_(n_outcomes), n_settings_(n_settings) {
  if (n_outcomes < 1 || n_settings < 1)
    throw DomainError("enumerate_strategies: outcome and setting counts must be positive");
  long long count = 1;
  for (int x = 0; x < n_settings; ++x) {
    count *= n_outcomes;
    if (count > cap) {
      std::ostringstream msg;
      msg << "enumerate_strategies: |a|^|x| = " << n_outcomes << "^" << n_settings
          << " exceeds the cap " << cap;
      throw CapacityError(msg.str());
    }
  }
  strategies_.reserve(static_cast<std::size_t>(count));
  for (long long i = 0; i < count; ++i) {
    std::vector<int> f(n_settings);
    long long rest = i;
    for (int x = n_settings - 1; x >= 0; --x) {
      f[x] = static_cast<int>(rest % n_outcomes);
      rest /= n_outcomes;
    }
    strategies_.push_back(std::move(f));
  }
}

DeterministicStrategySet enumerate_strategies(int n_outcomes, int n_settings, int cap) {
  return DeterministicStrategySet(n_outcomes, n_settings, cap);
}

// ---------- LHS models ----------

LhsModel::LhsModel(std::vector<HermitianMatrix> etas, const NumericConfig& cfg)
    : etas_(std::move(etas)) {
  if (etas_.empty()) throw ShapeError("LhsModel: at least one hidden state required");
  const int d = etas_[0].dim();
  double total = 0.0;
  for (const HermitianMatrix& e : etas_) {
    if (e.dim() != d) throw ShapeError("LhsModel: hidden-state dimension mismatch");
    if (min_eigenvalue(e, cfg) < -cfg.tol_psd)
      throw ValidationError("LhsModel: hidden state is not positive semidefinite");
    total += e.trace();
  }
  if (std::abs(total - 1.0) > 1e-8)
    throw ValidationError("LhsModel: hidden-state weights must sum to one");
}

Assemblage LhsModel::realize(int n_outcomes, int n_settings, const NumericConfig& cfg) const {
  const DeterministicStrategySet strat = enumerate_strategies(n_outcomes, n_settings);
  if (strat.count() != static_cast<int>(etas_.size()))
    throw ShapeError("LhsModel: strategy count does not match the number of hidden states");
  const int d = etas_[0].dim();
  std::vector<std::vector<HermitianMatrix>> members;
  for (int x = 0; x < n_settings; ++x) {
    std::vector<HermitianMatrix> row;
    for (int a = 0; a < n_outcomes; ++a) {
      Matrix sum = Matrix::Zero(d, d);
      for (int i = 0; i < strat.count(); ++i)
        if (strat.d(a, x, i)) sum += etas_[i].mat();
      row.push_back(herm(sum));
    }
    members.push_back(std::move(row));
  }
  return Assemblage(std::move(members), cfg);
}

// ---------- witnesses ----------

SteeringWitness::SteeringWitness(std::vector<std::vector<HermitianMatrix>> ys, double omega,
                                 const HermitianMatrix& gamma,
                                 const std::vector<std::vector<double>>& probabilities,
                                 const NumericConfig& cfg)
    : ys_(std::move(ys)), probabilities_(probabilities), omega_(omega) {
  if (ys_.empty() || ys_[0].empty())
    throw ShapeError("SteeringWitness: at least one setting and one outcome required");
  const int nx = static_cast<int>(ys_.size());
  const int na = static_cast<int>(ys_[0].size());
  const int d = ys_[0][0].dim();
  for (const auto& setting : ys_) {
    if (static_cast<int>(setting.size()) != na)
      throw ShapeError("SteeringWitness: ragged outcome counts across settings");
    for (const HermitianMatrix& y : setting)
      if (y.dim() != d) throw ShapeError("SteeringWitness: operator dimension mismatch");
  }
  if (gamma.dim() != d)
    throw ShapeError("SteeringWitness: gamma dimension must match the operators");
  if (static_cast<int>(probabilities.size()) != nx)
    throw ShapeError("SteeringWitness: probability table shape mismatch");
  for (const auto& row : probabilities)
    if (static_cast<int>(row.size()) != na)
      throw ShapeError("SteeringWitness: probability table shape mismatch");

  if (!(omega_ >= 0.0)) throw ValidationError("SteeringWitness: omega must be non-negative");

  const DeterministicStrategySet strat = enumerate_strategies(na, nx);
  for (int i = 0; i < strat.count(); ++i) {
    Matrix s = Matrix::Zero(d, d);
    for (int x = 0; x < nx; ++x) s += ys_[x][strat.strategies()[i][x]].mat();
    if (min_eigenvalue(herm(s), cfg) < -cfg.tol_psd)
      throw ValidationError("SteeringWitness: infeasible against a deterministic strategy");
  }

  value_ = omega_;
  for (int x = 0; x < nx; ++x)
    for (int a = 0; a < na; ++a)
      value_ += probabilities[x][a] * real_trace(ys_[x][a].mat() * gamma.mat());
}

double SteeringWitness::pairing(const Assemblage& sigma) const {
  if (sigma.n_settings() != n_settings() || sigma.n_outcomes() != n_outcomes() ||
      sigma.dim() != ys_[0][0].dim())
    throw ShapeError("SteeringWitness: assemblage shape does not match the witness");
  double total = 0.0;
  for (int x = 0; x < n_settings(); ++x)
    for (int a = 0; a < n_outcomes(); ++a)
      total += real_trace(ys_[x][a].mat() * sigma.at(a, x).mat());
  return total;
}

// ---------- robustness ----------

SrResult sr_gamma(const Assemblage& sigma, const HermitianMatrix& gamma,
                  const NumericConfig& cfg) {
  SolvedSr s = solve_sr(sigma, gamma, false, cfg);
  std::vector<HermitianMatrix> etas;
  etas.reserve(static_cast<std::size_t>(s.strat.count()));
  for (int i = 0; i < s.strat.count(); ++i) etas.push_back(psd_part(herm(s.sol.X[i]), cfg));
  return {s.sr, s.q_star, LhsModel(std::move(etas), cfg)};
}

SteeringWitness sr_gamma_dual(const Assemblage& sigma, const HermitianMatrix& gamma,
                              const NumericConfig& cfg) {
  const SolvedSr s = solve_sr(sigma, gamma, false, cfg);
  const int d = sigma.dim();
  const int na = sigma.n_outcomes();
  const int nx = sigma.n_settings();
  const auto basis = hermitian_operator_basis(d);

  // row multipliers fold into Y_{a|x} = -sum_k y_{(a,x,k)} E_k and the
  // normalization multiplier into omega = -nu
  std::vector<std::vector<HermitianMatrix>> ys;
  std::vector<std::vector<double>> probabilities;
  for (int x = 0; x < nx; ++x) {
    std::vector<HermitianMatrix> row;
    std::vector<double> prow;
    for (int a = 0; a < na; ++a) {
      Matrix y = Matrix::Zero(d, d);
      const int base = (x * na + a) * s.prog.n_basis;
      for (int k = 0; k < s.prog.n_basis; ++k) y -= s.sol.y[base + k] * basis[k];
      row.push_back(herm(y));
      prow.push_back(sigma.probability(a, x));
    }
    ys.push_back(std::move(row));
    probabilities.push_back(std::move(prow));
  }
  const double omega = std::max(0.0, -s.sol.y[s.sol.y.size() - 1]);

  // deterministic feasibility polish: a uniform shift Y -> Y + delta I moves
  // every strategy sum by delta |x| I, so the smallest shift that clears the
  // worst solver residual keeps the certificate exactly feasible
  double worst = 0.0;
  for (int i = 0; i < s.strat.count(); ++i) {
    Matrix sum = Matrix::Zero(d, d);
    for (int x = 0; x < nx; ++x) sum += ys[x][s.strat.strategies()[i][x]].mat();
    worst = std::min(worst, min_eigenvalue(herm(sum), cfg));
  }
  if (worst < 0.0) {
    const double delta = -worst / nx;
    for (auto& row : ys)
      for (HermitianMatrix& y : row) y = herm(y.mat() + delta * Matrix::Identity(d, d));
  }

  return SteeringWitness(std::move(ys), omega, gamma, probabilities, cfg);
}

LhsMembership lhs_membership(const Assemblage& sigma, const HermitianMatrix& gamma,
                             bool match_statistics, const NumericConfig& cfg) {
  SolvedSr s = solve_sr(sigma, gamma, match_statistics, cfg);
  if (s.sr > 1e-7) return {false, std::nullopt, 1.0 - s.q_star};

  // unmix the certificate back to sigma itself: the flat part admits the
  // product-weight model w_i = prod_x p(f_i(x)|x), so
  // eta'_i = (eta_i - (1-q) w_i gamma) / q realizes sigma exactly
  const double q = s.q_star;
  std::vector<HermitianMatrix> etas;
  etas.reserve(static_cast<std::size_t>(s.strat.count()));
  for (int i = 0; i < s.strat.count(); ++i) {
    double w = 1.0;
    for (int x = 0; x < sigma.n_settings(); ++x)
      w *= sigma.probability(s.strat.strategies()[i][x], x);
    const Matrix eta = (s.sol.X[i] - (1.0 - q) * w * gamma.mat()) / q;
    etas.push_back(psd_part(herm(eta), cfg));
  }
  return {true, LhsModel(std::move(etas), cfg), 0.0};
}

}  // namespace thermosteer
