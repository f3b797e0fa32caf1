#include "thermosteer/work.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <utility>

#include "thermosteer/sdp.hpp"

namespace thermosteer {

namespace {

// computed quantities are Hermitian by construction; symmetrize away rounding
HermitianMatrix herm(const Matrix& m) {
  return HermitianMatrix(0.5 * (m + m.adjoint().eval()), std::numeric_limits<double>::infinity());
}

// clamp the spectrum at zero; polishes solver iterates into exact cone members
HermitianMatrix psd_part(const HermitianMatrix& m, const NumericConfig& cfg) {
  const EigResult e = eig_hermitian(m, cfg);
  RealVector clamped = e.values;
  for (Eigen::Index i = 0; i < clamped.size(); ++i) clamped[i] = std::max(clamped[i], 0.0);
  return herm(e.vectors * clamped.asDiagonal() * e.vectors.adjoint());
}

void check_state(const HermitianMatrix& rho, const NumericConfig& cfg, const char* who) {
  if (std::abs(rho.trace() - 1.0) > 1e-9)
    throw DomainError(std::string(who) + ": state must have unit trace");
  if (min_eigenvalue(rho, cfg) < -cfg.tol_psd)
    throw ValidationError(std::string(who) + ": state must be positive semidefinite");
}

void check_temperature(double t_kelvin, const char* who) {
  if (!(t_kelvin > 0.0) || !std::isfinite(t_kelvin))
    throw DomainError(std::string(who) + ": temperature must be positive and finite");
}

double kbt_of(double t_kelvin) { return ThermalContext::kB * t_kelvin; }

// ln tr(e^{-h/kBT}) with energies shifted by the ground energy first, so wide
// spectra cannot overflow the exponential
double log_partition(const HermitianMatrix& h, double kbt, const NumericConfig& cfg) {
  const EigResult e = eig_hermitian(h, cfg);
  const double e_min = e.values.minCoeff();
  double z = 0.0;
  for (Eigen::Index k = 0; k < e.values.size(); ++k)
    z += std::exp(-(e.values[k] - e_min) / kbt);
  return std::log(z) - e_min / kbt;
}

void check_family_shape(const Assemblage& sigma, const HermitianMatrix& gamma,
                        const HamiltonianFamily& fam_h, const char* who) {
  if (gamma.dim() != sigma.dim())
    throw ShapeError(std::string(who) + ": gamma dimension must match the assemblage");
  if (fam_h.dim() != sigma.dim())
    throw ShapeError(std::string(who) + ": Hamiltonian dimension must match the assemblage");
  if (fam_h.n_outcomes() != sigma.n_outcomes() || fam_h.n_settings() != sigma.n_settings())
    throw ShapeError(std::string(who) + ": Hamiltonian family must cover every (a,x) pair");
}

// tr(sigma_{a|x}) with the strict-positivity hypothesis enforced
std::vector<std::vector<double>> collect_probabilities(const Assemblage& sigma,
                                                       const char* who) {
  std::vector<std::vector<double>> p(sigma.n_settings(),
                                     std::vector<double>(sigma.n_outcomes(), 0.0));
  for (int x = 0; x < sigma.n_settings(); ++x)
    for (int a = 0; a < sigma.n_outcomes(); ++a) {
      p[x][a] = sigma.probability(a, x);
      if (p[x][a] <= 1e-15) {
        std::ostringstream msg;
        msg << who << ": tr(sigma_{" << a << "|" << x << "}) must be strictly positive";
        throw DomainError(msg.str());
      }
    }
  return p;
}

}  // namespace

HamiltonianFamily::HamiltonianFamily(std::vector<std::vector<HermitianMatrix>> members)
    : hs_(std::move(members)) {
  if (hs_.empty() || hs_[0].empty())
    throw ShapeError("HamiltonianFamily: needs at least one setting and one outcome");
  n_settings_ = static_cast<int>(hs_.size());
  n_outcomes_ = static_cast<int>(hs_[0].size());
  dim_ = hs_[0][0].dim();
  for (const auto& row : hs_) {
    if (static_cast<int>(row.size()) != n_outcomes_)
      throw ShapeError("HamiltonianFamily: outcome count must not depend on the setting");
    for (const auto& h : row) {
      if (h.dim() != dim_)
        throw ShapeError("HamiltonianFamily: all members must share one dimension");
      if (!h.mat().allFinite())
        throw ValidationError("HamiltonianFamily: members must have finite entries");
    }
  }
}

HamiltonianFamily HamiltonianFamily::zero(int n_outcomes, int n_settings, int dim) {
  if (n_outcomes < 1 || n_settings < 1 || dim < 1)
    throw ShapeError("HamiltonianFamily: counts and dimension must be positive");
  std::vector<std::vector<HermitianMatrix>> members(
      n_settings, std::vector<HermitianMatrix>(n_outcomes, HermitianMatrix::zero(dim)));
  return HamiltonianFamily(std::move(members));
}

HamiltonianFamily HamiltonianFamily::pauli_xz(double delta, double t_kelvin) {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw DomainError("pauli_xz: delta must be positive and finite");
  check_temperature(t_kelvin, "pauli_xz");
  const double scale = kbt_of(t_kelvin) * delta;
  Matrix x(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  z << 1, 0, 0, -1;
  std::vector<std::vector<HermitianMatrix>> members(2);
  for (int a = 0; a < 2; ++a) {
    const double sign = (a == 0) ? 1.0 : -1.0;
    members[0].push_back(HermitianMatrix(sign * scale * x));
    members[1].push_back(HermitianMatrix(sign * scale * z));
  }
  return HamiltonianFamily(std::move(members));
}

const HermitianMatrix& HamiltonianFamily::at(int a, int x) const {
  if (a < 0 || a >= n_outcomes_ || x < 0 || x >= n_settings_)
    throw ShapeError("HamiltonianFamily: (a,x) out of range");
  return hs_[x][a];
}

double work_ext(const HermitianMatrix& rho, const HermitianMatrix& h, double t_kelvin,
                const NumericConfig& cfg) {
  if (h.dim() != rho.dim())
    throw ShapeError("work_ext: Hamiltonian dimension must match the state");
  check_temperature(t_kelvin, "work_ext");
  check_state(rho, cfg, "work_ext");

  const EigResult e = eig_hermitian(rho, cfg);
  double entropy_term = 0.0;  // tr(rho log2 rho), with 0 log 0 = 0
  for (Eigen::Index k = 0; k < e.values.size(); ++k)
    if (e.values[k] > 1e-15) entropy_term += e.values[k] * std::log2(e.values[k]);

  // tr(rho log2 gamma_H) through H's spectrum: log gamma_H = -H/kBT - ln Z,
  // exactly, because H commutes with its thermal state. Diagonalizing gamma_H
  // instead would put the eigensolver's absolute tolerance on thermal weights
  // that can be exponentially small, and the log would amplify it.
  const double kbt = kbt_of(t_kelvin);
  const double log2_gamma_term =
      (-hs_inner(h, rho) / kbt - log_partition(h, kbt, cfg)) / std::log(2.0);

  const double bits = entropy_term - log2_gamma_term;
  const double w = kbt * std::log(2.0) * bits;
  if (w < -1e-9)
    throw NumericalFailureError("work_ext: relative entropy evaluated negative");
  return std::max(w, 0.0);
}

double w_inf(const HermitianMatrix& rho, double t_kelvin, const NumericConfig& cfg) {
  return work_ext(rho, HermitianMatrix::zero(rho.dim()), t_kelvin, cfg);
}

double delta(const HermitianMatrix& rho, const HermitianMatrix& h, double t_kelvin,
             const NumericConfig& cfg) {
  if (h.dim() != rho.dim())
    throw ShapeError("delta: Hamiltonian dimension must match the state");
  check_temperature(t_kelvin, "delta");
  check_state(rho, cfg, "delta");
  const double kbt = kbt_of(t_kelvin);
  return hs_inner(h, rho) +
         kbt * (log_partition(h, kbt, cfg) - std::log(static_cast<double>(rho.dim())));
}

WorkReport delta_bar(const Assemblage& sigma, const HermitianMatrix& gamma,
                     const HamiltonianFamily& fam_h, double t_kelvin, double eta,
                     const NumericConfig& cfg) {
  check_family_shape(sigma, gamma, fam_h, "delta_bar");
  check_temperature(t_kelvin, "delta_bar");
  check_state(gamma, cfg, "delta_bar");
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw DomainError("delta_bar: eta must be positive and finite");
  const auto p = collect_probabilities(sigma, "delta_bar");

  const int nx = sigma.n_settings();
  WorkReport report;
  double definitional = 0.0;
  double linear = 0.0;
  for (int x = 0; x < nx; ++x)
    for (int a = 0; a < sigma.n_outcomes(); ++a) {
      const HermitianMatrix& h = fam_h.at(a, x);
      const HermitianMatrix member = (1.0 / p[x][a]) * sigma.at(a, x);
      WorkRow row;
      row.a = a;
      row.x = x;
      row.probability = p[x][a] / nx;
      row.w_ext = work_ext(member, h, t_kelvin, cfg);
      row.w_inf = work_ext(member, HermitianMatrix::zero(member.dim()), t_kelvin, cfg);
      row.delta = delta(member, h, t_kelvin, cfg);
      definitional += row.probability * (row.delta - delta(gamma, h, t_kelvin, cfg));
      linear += (hs_inner(h, sigma.at(a, x)) - p[x][a] * hs_inner(h, gamma)) / nx;
      report.rows.push_back(row);
    }

  // the two evaluations must agree; absolute floor of 1e-9 eV because the
  // definitional log-sum path carries rounding that a strict relative test at
  // sub-nano-eV scales would flag spuriously
  const double tol = 1e-9 * std::max({1.0, std::abs(definitional), std::abs(linear)});
  if (std::abs(definitional - linear) > tol) {
    std::ostringstream msg;
    msg << "delta_bar: four-batch aggregate " << definitional
        << " disagrees with the linear form " << linear;
    throw NumericalFailureError(msg.str());
  }

  // report the linear value; it avoids the log-sum cancellation entirely
  report.delta_bar = linear;
  report.eta_threshold = eta;
  report.in_h_eta = report.delta_bar >= kbt_of(t_kelvin) * eta;
  return report;
}

LhsWorkOptimum lhs_work_optimum(const Assemblage& sigma, const HermitianMatrix& gamma,
                                const HamiltonianFamily& fam_h, double t_kelvin,
                                const NumericConfig& cfg) {
  check_family_shape(sigma, gamma, fam_h, "lhs_work_optimum");
  check_temperature(t_kelvin, "lhs_work_optimum");
  check_state(gamma, cfg, "lhs_work_optimum");
  const auto p = collect_probabilities(sigma, "lhs_work_optimum");

  const int na = sigma.n_outcomes();
  const int nx = sigma.n_settings();
  const int d = sigma.dim();
  const DeterministicStrategySet strat = enumerate_strategies(na, nx);

  // constant part of the objective: the gamma term only depends on the
  // matched statistics, not on the optimization variable
  double c0 = 0.0;
  for (int x = 0; x < nx; ++x)
    for (int a = 0; a < na; ++a) c0 += p[x][a] * hs_inner(fam_h.at(a, x), gamma);
  c0 /= nx;

  // per-strategy objective blocks G_i = sum_x H_{f_i(x)|x}
  std::vector<HermitianMatrix> g;
  double scale = 0.0;
  for (int i = 0; i < strat.count(); ++i) {
    HermitianMatrix gi = HermitianMatrix::zero(d);
    for (int x = 0; x < nx; ++x) gi = gi + fam_h.at(strat.strategies()[i][x], x);
    scale = std::max(scale, gi.mat().norm());
    g.push_back(gi);
  }

  if (scale <= 0.0) {
    // the variable part vanishes identically; any statistics-matched ensemble
    // attains the constant, so hand back the product-weight one
    std::vector<HermitianMatrix> etas;
    for (int i = 0; i < strat.count(); ++i) {
      double w = 1.0;
      for (int x = 0; x < nx; ++x) w *= p[x][strat.strategies()[i][x]];
      etas.push_back(w * gamma);
    }
    return {-c0, LhsModel(std::move(etas), cfg)};
  }

  SdpProblem prob;
  prob.block_dims.assign(strat.count(), d);
  // normalize the objective so the interior-point tolerances act on an O(1)
  // problem whatever the physical energy scale is
  for (int i = 0; i < strat.count(); ++i) prob.C.push_back(-g[i].mat() / (nx * scale));
  for (int x = 0; x < nx; ++x)
    for (int a = 0; a < na; ++a) {
      SdpProblem::Constraint row;
      for (int i = 0; i < strat.count(); ++i)
        row.A.push_back(strat.d(a, x, i) ? Matrix::Identity(d, d).eval()
                                         : Matrix::Zero(d, d).eval());
      row.b = p[x][a];
      prob.constraints.push_back(std::move(row));
    }

  const SdpSolution sol = solve_sdp(prob, cfg);
  if (sol.status != SdpStatus::Optimal)
    throw NumericalFailureError("lhs_work_optimum: interior-point solve did not converge");

  double value = -c0;
  std::vector<HermitianMatrix> etas;
  for (int i = 0; i < strat.count(); ++i) {
    const HermitianMatrix eta_i = psd_part(herm(sol.X[i]), cfg);
    value += hs_inner(g[i], eta_i) / nx;
    etas.push_back(eta_i);
  }
  return {value, LhsModel(std::move(etas), cfg)};
}

double max_delta_bar_lhs(const Assemblage& sigma, const HermitianMatrix& gamma,
                         const HamiltonianFamily& fam_h, double t_kelvin,
                         const NumericConfig& cfg) {
  return lhs_work_optimum(sigma, gamma, fam_h, t_kelvin, cfg).value;
}

WorkAdvantage sr_from_work(const Assemblage& sigma, const HermitianMatrix& gamma,
                           const std::vector<HamiltonianFamily>& candidates, double eta,
                           double t_kelvin, const NumericConfig& cfg) {
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw DomainError("sr_from_work: eta must be positive and finite");
  check_temperature(t_kelvin, "sr_from_work");
  const SrResult sr = sr_gamma(sigma, gamma, cfg);
  if (sr.sr <= 1e-7)
    throw NotSteerableError("sr_from_work: assemblage admits an unsteerable model");

  std::optional<WorkAdvantage> best;
  for (const HamiltonianFamily& fam : candidates) {
    const WorkReport report = delta_bar(sigma, gamma, fam, t_kelvin, eta, cfg);
    if (!report.in_h_eta) continue;
    const double denom = max_delta_bar_lhs(sigma, gamma, fam, t_kelvin, cfg);
    // mixing 2^{-sr} sigma with the flat ensemble keeps the statistics and
    // stays unsteerable, so the denominator inherits strict positivity
    if (denom <= 0.0)
      throw NumericalFailureError("sr_from_work: unsteerable maximum came out nonpositive");
    const double ratio = report.delta_bar / denom;
    if (!best || ratio > best->ratio) best = WorkAdvantage{ratio, fam};
  }
  if (!best)
    throw NoAdmissibleHamiltonianError(
        "sr_from_work: no candidate reaches the kBT eta figure-of-merit floor");
  return *best;
}

CertificateResult certificate_hamiltonians(const Assemblage& sigma,
                                           const HermitianMatrix& gamma, double t_kelvin,
                                           const NumericConfig& cfg) {
  check_temperature(t_kelvin, "certificate_hamiltonians");
  const SrResult sr = sr_gamma(sigma, gamma, cfg);
  if (sr.sr <= 1e-7)
    throw NoAdvantageError(
        "certificate_hamiltonians: no advantage, the assemblage is unsteerable");

  const SteeringWitness witness = sr_gamma_dual(sigma, gamma, cfg);
  const double kbt = kbt_of(t_kelvin);
  const int nx = sigma.n_settings();
  std::vector<std::vector<HermitianMatrix>> members(nx);
  for (int x = 0; x < nx; ++x)
    for (int a = 0; a < sigma.n_outcomes(); ++a)
      members[x].push_back((-kbt * nx) * witness.y(a, x));

  CertificateResult result{HamiltonianFamily(std::move(members)), 0.0, 0.0, 0.0};
  result.quantum = delta_bar(sigma, gamma, result.family, t_kelvin, 1e-3, cfg).delta_bar;
  result.classical = max_delta_bar_lhs(sigma, gamma, result.family, t_kelvin, cfg);
  result.gap = result.quantum - result.classical;
  return result;
}

double tmin_from_work(double t0, const CertificateResult& cert) {
  if (!(t0 > 0.0) || !std::isfinite(t0))
    throw DomainError("tmin_from_work: t0 must be positive and finite");
  if (cert.quantum <= 0.0 || cert.classical <= 0.0)
    throw DomainError("tmin_from_work: certificate sides must be strictly positive");
  return t0 * std::log(cert.quantum / cert.classical);
}

double tmin_from_work(const Assemblage& sigma, const HermitianMatrix& gamma, double t0,
                      double t_kelvin, const NumericConfig& cfg) {
  if (!(t0 > 0.0) || !std::isfinite(t0))
    throw DomainError("tmin_from_work: t0 must be positive and finite");
  const SrResult sr = sr_gamma(sigma, gamma, cfg);
  if (sr.sr <= 1e-7)
    throw NotSteerableError("tmin_from_work: assemblage admits an unsteerable model");
  return tmin_from_work(t0, certificate_hamiltonians(sigma, gamma, t_kelvin, cfg));
}

std::vector<WorkSweepRow> work_sweep(const Assemblage& sigma, const HermitianMatrix& gamma,
                                     double t_kelvin, const std::vector<double>& deltas,
                                     const NumericConfig& cfg) {
  if (sigma.n_outcomes() != 2 || sigma.n_settings() != 2 || sigma.dim() != 2)
    throw ShapeError("work_sweep: the worked example needs a two-outcome qubit pair");
  check_temperature(t_kelvin, "work_sweep");
  const SrResult sr = sr_gamma(sigma, gamma, cfg);
  if (sr.sr <= 1e-7)
    throw NotSteerableError("work_sweep: assemblage admits an unsteerable model");

  std::vector<WorkSweepRow> rows;
  for (double d : deltas) {
    const HamiltonianFamily fam = HamiltonianFamily::pauli_xz(d, t_kelvin);
    const WorkReport report = delta_bar(sigma, gamma, fam, t_kelvin, 1e-3, cfg);
    if (report.delta_bar <= 0.0)
      throw DomainError("work_sweep: the X/Z family extracts no advantage from this assemblage");
    const LhsWorkOptimum opt = lhs_work_optimum(sigma, gamma, fam, t_kelvin, cfg);
    const Assemblage tau = opt.model.realize(2, 2, cfg);

    WorkSweepRow row;
    row.delta = d;
    row.quantum_value = 0.0;
    for (const WorkRow& r : report.rows) row.quantum_value += r.delta;
    row.quantum_value /= sigma.n_settings();
    row.classical_bound = 0.0;
    for (int x = 0; x < 2; ++x)
      for (int a = 0; a < 2; ++a) {
        const double p = tau.probability(a, x);
        row.classical_bound += delta((1.0 / p) * tau.at(a, x), fam.at(a, x), t_kelvin, cfg);
      }
    row.classical_bound /= sigma.n_settings();
    row.ratio = report.delta_bar / opt.value;
    row.sr = sr.sr;
    row.t_min_over_t0 = std::log(row.ratio);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace thermosteer
