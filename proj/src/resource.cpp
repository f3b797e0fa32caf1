#include "thermosteer/resource.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace thermosteer {

namespace {

HermitianMatrix herm(const Matrix& m) { return HermitianMatrix(m); }

void check_stochastic_row(const std::vector<double>& row, const char* what) {
  double sum = 0.0;
  for (double v : row) {
    if (!std::isfinite(v) || v < -1e-12)
      throw ValidationError(std::string(what) + ": entries must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError(std::string(what) + ": rows must sum to one");
}

void check_square_tp(const QuantumChannelChoi& ch, const char* what) {
  if (ch.d_in() != ch.d_out())
    throw ShapeError(std::string(what) + ": channel must act on one system");
  if (!ch.is_trace_preserving())
    throw ValidationError(std::string(what) + ": channel must be trace preserving");
}

void check_gibbs(const QuantumChannelChoi& ch, const HermitianMatrix& gamma, const char* what,
                 const NumericConfig& cfg) {
  const GibbsCheck g = is_gibbs_preserving(ch, gamma, cfg);
  if (!g.preserving) {
    std::ostringstream msg;
    msg << what << ": channel moves the thermal state (residual " << g.residual << ")";
    throw ValidationError(msg.str());
  }
}

std::vector<double> random_simplex_point(int n, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(n);
  double sum = 0.0;
  for (double& v : w) {
    v = e(rng);
    sum += v;
  }
  for (double& v : w) v /= sum;
  return w;
}

}  // namespace

// ---------- deterministic allowed operations ----------

DeterministicAllowedOperation::DeterministicAllowedOperation(
    std::vector<std::vector<double>> pre_classical,
    std::vector<std::vector<std::vector<std::vector<double>>>> post_classical,
    QuantumChannelChoi pre_channel, QuantumChannelChoi post_channel, const NumericConfig& cfg)
    : pre_(std::move(pre_classical)),
      post_(std::move(post_classical)),
      pre_channel_(std::move(pre_channel)),
      post_channel_(std::move(post_channel)) {
  (void)cfg;
  if (pre_.empty() || pre_[0].empty())
    throw ShapeError("DeterministicAllowedOperation: empty pre_classical kernel");
  const std::size_t ny = pre_[0].size();
  for (const auto& row : pre_) {
    if (row.size() != ny) throw ShapeError("DeterministicAllowedOperation: ragged pre_classical");
    check_stochastic_row(row, "DeterministicAllowedOperation pre_classical");
  }

  if (post_.size() != pre_.size())
    throw ShapeError("DeterministicAllowedOperation: post_classical must cover every setting");
  if (post_[0].empty() || post_[0][0].empty() || post_[0][0][0].empty())
    throw ShapeError("DeterministicAllowedOperation: empty post_classical kernel");
  const std::size_t nb = post_[0][0].size();
  const std::size_t na = post_[0][0][0].size();
  for (const auto& per_y : post_) {
    if (per_y.size() != ny)
      throw ShapeError("DeterministicAllowedOperation: post_classical must cover every y");
    for (const auto& per_b : per_y) {
      if (per_b.size() != nb)
        throw ShapeError("DeterministicAllowedOperation: ragged post_classical");
      for (const auto& row : per_b) {
        if (row.size() != na)
          throw ShapeError("DeterministicAllowedOperation: ragged post_classical");
        check_stochastic_row(row, "DeterministicAllowedOperation post_classical");
      }
    }
  }

  check_square_tp(pre_channel_, "DeterministicAllowedOperation pre_channel");
  check_square_tp(post_channel_, "DeterministicAllowedOperation post_channel");
  if (pre_channel_.d_in() != post_channel_.d_in())
    throw ShapeError("DeterministicAllowedOperation: channels must share one dimension");
}

DeterministicAllowedOperation DeterministicAllowedOperation::identity(int n_outcomes,
                                                                      int n_settings, int dim) {
  if (n_outcomes < 1 || n_settings < 1)
    throw DomainError("DeterministicAllowedOperation: counts must be positive");
  std::vector<std::vector<double>> pre(n_settings, std::vector<double>(n_settings, 0.0));
  for (int x = 0; x < n_settings; ++x) pre[x][x] = 1.0;
  std::vector<std::vector<std::vector<std::vector<double>>>> post(
      n_settings,
      std::vector<std::vector<std::vector<double>>>(
          n_settings, std::vector<std::vector<double>>(
                          n_outcomes, std::vector<double>(n_outcomes, 0.0))));
  for (int x = 0; x < n_settings; ++x)
    for (int y = 0; y < n_settings; ++y)
      for (int b = 0; b < n_outcomes; ++b) post[x][y][b][b] = 1.0;
  const QuantumChannelChoi id = identity_channel(dim);
  return DeterministicAllowedOperation(std::move(pre), std::move(post), id, id);
}

InstrumentFamily apply_dao(const DeterministicAllowedOperation& op, const InstrumentFamily& fam,
                           const HermitianMatrix& gamma, const NumericConfig& cfg) {
  if (op.dim() != fam.dim() || gamma.dim() != fam.dim())
    throw ShapeError("apply_dao: operation, family and gamma dimensions must match");
  if (op.n_settings_in() != fam.n_settings() || op.n_outcomes_in() != fam.n_outcomes())
    throw ShapeError("apply_dao: classical kernel shape does not match the family");
  check_gibbs(op.pre_channel(), gamma, "apply_dao pre_channel", cfg);
  check_gibbs(op.post_channel(), gamma, "apply_dao post_channel", cfg);

  const int d = fam.dim();
  // Choi operators of Q o E_{b|y} o P, reused across all (a, x)
  std::vector<std::vector<Matrix>> comp(fam.n_settings());
  for (int y = 0; y < fam.n_settings(); ++y)
    for (int b = 0; b < fam.n_outcomes(); ++b)
      comp[y].push_back(
          channel_compose(op.post_channel(),
                          channel_compose(fam.filter(b, y), op.pre_channel(), cfg), cfg)
              .choi()
              .mat());

  std::vector<std::vector<QuantumChannelChoi>> filters(op.n_settings_out());
  for (int x = 0; x < op.n_settings_out(); ++x)
    for (int a = 0; a < op.n_outcomes_out(); ++a) {
      Matrix j = Matrix::Zero(d * d, d * d);
      for (int y = 0; y < fam.n_settings(); ++y)
        for (int b = 0; b < fam.n_outcomes(); ++b)
          j += op.post_classical(a, x, y, b) * op.pre_classical(y, x) * comp[y][b];
      filters[x].emplace_back(herm(j), d, d, cfg);
    }
  return InstrumentFamily::from_choi(std::move(filters), cfg);
}

DeterministicAllowedOperation compose_dao(const DeterministicAllowedOperation& second,
                                          const DeterministicAllowedOperation& first,
                                          const NumericConfig& cfg) {
  if (second.n_settings_in() != first.n_settings_out() ||
      second.n_outcomes_in() != first.n_outcomes_out() || second.dim() != first.dim())
    throw ShapeError("compose_dao: inner interfaces must match");

  const int nx = second.n_settings_out();
  const int ny1 = first.n_settings_in();
  const int nb1 = first.n_outcomes_in();
  const int na = second.n_outcomes_out();
  const int mid_y = first.n_settings_out();
  const int mid_b = first.n_outcomes_out();

  std::vector<std::vector<double>> pre(nx, std::vector<double>(ny1, 0.0));
  for (int x = 0; x < nx; ++x)
    for (int y1 = 0; y1 < ny1; ++y1)
      for (int y2 = 0; y2 < mid_y; ++y2)
        pre[x][y1] += second.pre_classical(y2, x) * first.pre_classical(y1, y2);

  // joint weight W(a, y1 | x, b1) factorizes as post_sum * pre_sum because the
  // inner outcome kernel is normalized; unused y1 rows fall back to uniform
  std::vector<std::vector<std::vector<std::vector<double>>>> post(
      nx, std::vector<std::vector<std::vector<double>>>(
              ny1, std::vector<std::vector<double>>(nb1, std::vector<double>(na, 0.0))));
  for (int x = 0; x < nx; ++x)
    for (int y1 = 0; y1 < ny1; ++y1)
      for (int b1 = 0; b1 < nb1; ++b1)
        for (int a = 0; a < na; ++a) {
          double w = 0.0;
          for (int y2 = 0; y2 < mid_y; ++y2)
            for (int b2 = 0; b2 < mid_b; ++b2)
              w += second.pre_classical(y2, x) * first.pre_classical(y1, y2) *
                   first.post_classical(b2, y2, y1, b1) * second.post_classical(a, x, y2, b2);
          post[x][y1][b1][a] =
              pre[x][y1] > 1e-15 ? w / pre[x][y1] : 1.0 / static_cast<double>(na);
        }

  QuantumChannelChoi pre_channel =
      channel_compose(first.pre_channel(), second.pre_channel(), cfg);
  QuantumChannelChoi post_channel =
      channel_compose(second.post_channel(), first.post_channel(), cfg);
  return DeterministicAllowedOperation(std::move(pre), std::move(post), std::move(pre_channel),
                                       std::move(post_channel), cfg);
}

// ---------- LF1 filters ----------

Lf1Filter::Lf1Filter(Matrix k, const NumericConfig& cfg) : k_(std::move(k)) {
  if (k_.rows() < 1 || k_.rows() != k_.cols())
    throw ShapeError("Lf1Filter: Kraus operator must be square");
  if (!k_.allFinite()) throw ValidationError("Lf1Filter: Kraus entries must be finite");
  const double top = eig_hermitian(herm(k_.adjoint() * k_), cfg).values.maxCoeff();
  if (top > 1.0 + 1e-10)
    throw ValidationError("Lf1Filter: K^dag K must not exceed the identity");
}

double Lf1Filter::success_probability(const HermitianMatrix& gamma) const {
  if (gamma.dim() != dim()) throw ShapeError("Lf1Filter: gamma dimension mismatch");
  return (k_ * gamma.mat() * k_.adjoint()).trace().real();
}

Lf1Filter compose_lf1(const Lf1Filter& second, const Lf1Filter& first,
                      const NumericConfig& cfg) {
  if (second.dim() != first.dim()) throw ShapeError("compose_lf1: dimensions must match");
  return Lf1Filter(second.k() * first.k(), cfg);
}

Assemblage apply_lf1(const Lf1Filter& f, const Assemblage& sigma, const HermitianMatrix& gamma,
                     bool enforce_conditions, const NumericConfig& cfg) {
  if (sigma.dim() != f.dim() || gamma.dim() != f.dim())
    throw ShapeError("apply_lf1: filter, assemblage and gamma dimensions must match");
  const double p = f.success_probability(gamma);
  if (p < 1e-14)
    throw ZeroSuccessProbabilityError("apply_lf1: filter never succeeds on gamma");

  const Matrix& k = f.k();
  if (enforce_conditions) {
    const double drift = trace_norm(herm(k * gamma.mat() * k.adjoint() / p - gamma.mat()), cfg);
    if (drift > 1e-9) {
      std::ostringstream msg;
      msg << "apply_lf1: filter changes the thermal state (residual " << drift << ")";
      throw ConditionViolatedError("ii", msg.str());
    }
    for (int x = 0; x < sigma.n_settings(); ++x)
      for (int a = 0; a < sigma.n_outcomes(); ++a) {
        const Matrix& s = sigma.at(a, x).mat();
        const double kept = (k * s * k.adjoint()).trace().real() / p;
        if (std::abs(kept - sigma.probability(a, x)) > 1e-8) {
          std::ostringstream msg;
          msg << "apply_lf1: filter changes p(" << a << "|" << x << ") by "
              << kept - sigma.probability(a, x);
          throw ConditionViolatedError("i", msg.str());
        }
      }
  }

  std::vector<std::vector<HermitianMatrix>> members(sigma.n_settings());
  for (int x = 0; x < sigma.n_settings(); ++x)
    for (int a = 0; a < sigma.n_outcomes(); ++a)
      members[x].push_back(herm(k * sigma.at(a, x).mat() * k.adjoint() / p));
  return Assemblage(std::move(members), cfg);
}

// ---------- monotonicity audit ----------

MonotoneReport monotone_audit(const InstrumentFamily& fam, const HermitianMatrix& gamma,
                              const ThermalisationSchedule& sched,
                              const std::vector<DeterministicAllowedOperation>& ops,
                              const std::vector<Lf1Filter>& filters, bool permissive,
                              const NumericConfig& cfg) {
  // reject invalid operations before any row is produced
  for (const auto& op : ops) {
    check_gibbs(op.pre_channel(), gamma, "monotone_audit pre_channel", cfg);
    check_gibbs(op.post_channel(), gamma, "monotone_audit post_channel", cfg);
  }
  for (const auto& f : filters)
    if (f.success_probability(gamma) < 1e-14)
      throw ZeroSuccessProbabilityError("monotone_audit: filter never succeeds on gamma");

  const Assemblage sigma = apply_instrument(fam, gamma, cfg);
  const double sr_before = sr_gamma(sigma, gamma, cfg).sr;
  const double tm_before = sched.h_inv(std::pow(2.0, -sr_before));

  MonotoneReport report;
  auto push_row = [&](std::string label, double sr_after, bool certified) {
    MonotoneRow row;
    row.operation = std::move(label);
    row.sr_before = sr_before;
    row.sr_after = sr_after;
    row.t_min_before = tm_before;
    row.t_min_after = sched.h_inv(std::pow(2.0, -sr_after));
    row.certified = certified;
    row.pass = sr_after <= sr_before + 1e-6 && row.t_min_after <= row.t_min_before + 1e-6;
    report.all_pass = report.all_pass && row.pass;
    report.rows.push_back(std::move(row));
  };

  for (std::size_t k = 0; k < ops.size(); ++k) {
    const Assemblage after = apply_instrument(apply_dao(ops[k], fam, gamma, cfg), gamma, cfg);
    push_row("dao#" + std::to_string(k), sr_gamma(after, gamma, cfg).sr, true);
  }
  for (std::size_t k = 0; k < filters.size(); ++k) {
    bool certified = true;
    Assemblage after = [&] {
      try {
        return apply_lf1(filters[k], sigma, gamma, true, cfg);
      } catch (const ConditionViolatedError&) {
        if (!permissive) throw;
        certified = false;
        return apply_lf1(filters[k], sigma, gamma, false, cfg);
      }
    }();
    push_row("lf1#" + std::to_string(k), sr_gamma(after, gamma, cfg).sr, certified);
  }
  return report;
}

// ---------- samplers ----------

Matrix random_gamma_commuting_unitary(const HermitianMatrix& gamma, std::mt19937_64& rng,
                                      const NumericConfig& cfg) {
  const EigResult e = eig_hermitian(gamma, cfg);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  Matrix phases = Matrix::Zero(gamma.dim(), gamma.dim());
  for (int i = 0; i < gamma.dim(); ++i) phases(i, i) = std::polar(1.0, angle(rng));
  return e.vectors * phases * e.vectors.adjoint();
}

QuantumChannelChoi random_gibbs_preserving_channel(const HermitianMatrix& gamma,
                                                   std::mt19937_64& rng,
                                                   const NumericConfig& cfg) {
  const int d = gamma.dim();
  const int n_unitaries = 2;
  const std::vector<double> w = random_simplex_point(n_unitaries + 1, rng);
  Matrix j = w[0] * thermalising_channel(gamma, d).choi().mat();
  for (int k = 0; k < n_unitaries; ++k)
    j += w[k + 1] *
         choi_of_map({random_gamma_commuting_unitary(gamma, rng, cfg)}, cfg).choi().mat();
  return QuantumChannelChoi(herm(j), d, d, cfg);
}

DeterministicAllowedOperation random_dao(int n_outcomes, int n_settings,
                                         const HermitianMatrix& gamma, std::mt19937_64& rng,
                                         const NumericConfig& cfg) {
  if (n_outcomes < 1 || n_settings < 1)
    throw DomainError("random_dao: counts must be positive");
  std::vector<std::vector<double>> pre;
  for (int x = 0; x < n_settings; ++x) pre.push_back(random_simplex_point(n_settings, rng));
  std::vector<std::vector<std::vector<std::vector<double>>>> post(
      n_settings, std::vector<std::vector<std::vector<double>>>(
                      n_settings, std::vector<std::vector<double>>(n_outcomes)));
  for (int x = 0; x < n_settings; ++x)
    for (int y = 0; y < n_settings; ++y)
      for (int b = 0; b < n_outcomes; ++b)
        post[x][y][b] = random_simplex_point(n_outcomes, rng);
  QuantumChannelChoi pre_ch = random_gibbs_preserving_channel(gamma, rng, cfg);
  QuantumChannelChoi post_ch = random_gibbs_preserving_channel(gamma, rng, cfg);
  return DeterministicAllowedOperation(std::move(pre), std::move(post), std::move(pre_ch),
                                       std::move(post_ch), cfg);
}

Lf1Filter random_lf1(const HermitianMatrix& gamma, std::mt19937_64& rng,
                     const NumericConfig& cfg) {
  std::uniform_real_distribution<double> prob(0.2, 1.0);
  return Lf1Filter(std::sqrt(prob(rng)) * random_gamma_commuting_unitary(gamma, rng, cfg), cfg);
}

}  // namespace thermosteer
