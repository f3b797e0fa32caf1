#include "thermosteer/quantum.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace thermosteer {

namespace {

// computed quantities are Hermitian by construction; symmetrize away rounding
HermitianMatrix herm(const Matrix& m) {
  return HermitianMatrix(0.5 * (m + m.adjoint().eval()), std::numeric_limits<double>::infinity());
}

Matrix phi_plus(int d) {
  Matrix j = Matrix::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) j(i * d + i, k * d + k) = 1.0 / d;
  return j;
}

// Phi(rho) = d_in * tr_in[(I (x) rho^T) J]; linear, so rho may be any matrix.
Matrix apply_choi_raw(const Matrix& j, int d_in, int d_out, const Matrix& rho) {
  const Matrix big = kron(Matrix::Identity(d_out, d_out), rho.transpose()) * j;
  Matrix out = Matrix::Zero(d_out, d_out);
  for (int o1 = 0; o1 < d_out; ++o1)
    for (int o2 = 0; o2 < d_out; ++o2) {
      Complex s = 0.0;
      for (int i = 0; i < d_in; ++i) s += big(o1 * d_in + i, o2 * d_in + i);
      out(o1, o2) = s;
    }
  return static_cast<double>(d_in) * out;
}

}  // namespace

// ---------- thermal context ----------

ThermalContext::ThermalContext(HermitianMatrix h, double t_kelvin)
    : hamiltonian(std::move(h)), temperature(t_kelvin) {
  if (!std::isfinite(temperature) || temperature <= 0.0)
    throw DomainError("ThermalContext: temperature must be finite and strictly positive");
}

HermitianMatrix thermal_state(const ThermalContext& ctx, const NumericConfig& cfg) {
  const EigResult e = eig_hermitian(ctx.hamiltonian, cfg);
  const double beta = 1.0 / ctx.kbt();
  const double emin = e.values[0];
  RealVector w(e.values.size());
  double z = 0.0;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    w[i] = std::exp(-beta * (e.values[i] - emin));
    z += w[i];
  }
  const Matrix g = e.vectors * (w / z).asDiagonal() * e.vectors.adjoint();
  return herm(g);
}

// ---------- channels ----------

QuantumChannelChoi::QuantumChannelChoi(HermitianMatrix choi, int d_in, int d_out,
                                       const NumericConfig& cfg)
    : choi_(std::move(choi)), d_in_(d_in), d_out_(d_out) {
  if (d_in_ < 1 || d_out_ < 1 || choi_.dim() != d_in_ * d_out_)
    throw ShapeError("QuantumChannelChoi: choi dim must equal d_in*d_out");
  if (min_eigenvalue(choi_, cfg) < -cfg.tol_psd)
    throw ValidationError("QuantumChannelChoi: choi operator is not positive semidefinite");
}

double QuantumChannelChoi::trace_preserving_residual() const {
  const HermitianMatrix marginal = partial_trace(choi_, d_out_, d_in_, Subsystem::B);
  const Matrix diff = marginal.mat() - Matrix::Identity(d_in_, d_in_) / d_in_;
  return trace_norm(herm(diff));
}

QuantumChannelChoi identity_channel(int d) {
  if (d < 1) throw ShapeError("identity_channel: dimension must be positive");
  return QuantumChannelChoi(herm(phi_plus(d)), d, d);
}

QuantumChannelChoi thermalising_channel(const HermitianMatrix& gamma, int d_in) {
  if (d_in < 1) throw ShapeError("thermalising_channel: dimension must be positive");
  const Matrix j = kron(gamma.mat(), Matrix::Identity(d_in, d_in)) / d_in;
  return QuantumChannelChoi(herm(j), d_in, gamma.dim());
}

QuantumChannelChoi choi_of_map(const std::vector<Matrix>& kraus, const NumericConfig& cfg) {
  if (kraus.empty()) throw ShapeError("choi_of_map: empty Kraus list");
  const int d_out = static_cast<int>(kraus[0].rows());
  const int d_in = static_cast<int>(kraus[0].cols());
  Eigen::VectorXcd omega = Eigen::VectorXcd::Zero(d_in * d_in);
  for (int i = 0; i < d_in; ++i) omega[i * d_in + i] = 1.0;

  Matrix j = Matrix::Zero(d_out * d_in, d_out * d_in);
  for (const Matrix& k : kraus) {
    if (k.rows() != d_out || k.cols() != d_in)
      throw ShapeError("choi_of_map: inconsistent Kraus shapes");
    const Eigen::VectorXcd v = kron(k, Matrix::Identity(d_in, d_in)) * omega;
    j += v * v.adjoint();
  }
  return QuantumChannelChoi(herm(j / d_in), d_in, d_out, cfg);
}

HermitianMatrix map_of_choi(const QuantumChannelChoi& ch, const HermitianMatrix& rho,
                            const NumericConfig& cfg) {
  (void)cfg;
  if (rho.dim() != ch.d_in()) throw ShapeError("map_of_choi: state dim must match d_in");
  return herm(apply_choi_raw(ch.choi().mat(), ch.d_in(), ch.d_out(), rho.mat()));
}

HermitianMatrix apply_choi(const HermitianMatrix& choi, int d_in, int d_out,
                           const HermitianMatrix& rho) {
  if (d_in < 1 || d_out < 1 || choi.dim() != d_in * d_out)
    throw ShapeError("apply_choi: Choi dimension must equal d_out * d_in");
  if (rho.dim() != d_in) throw ShapeError("apply_choi: state dim must match d_in");
  return herm(apply_choi_raw(choi.mat(), d_in, d_out, rho.mat()));
}

QuantumChannelChoi channel_compose(const QuantumChannelChoi& second,
                                   const QuantumChannelChoi& first, const NumericConfig& cfg) {
  if (first.d_out() != second.d_in())
    throw ShapeError("channel_compose: inner dimensions must match");
  const int d_in = first.d_in();
  const int d_out = second.d_out();
  Matrix j = Matrix::Zero(d_out * d_in, d_out * d_in);
  for (int i1 = 0; i1 < d_in; ++i1)
    for (int i2 = 0; i2 < d_in; ++i2) {
      Matrix e = Matrix::Zero(d_in, d_in);
      e(i1, i2) = 1.0;
      const Matrix mid = apply_choi_raw(first.choi().mat(), first.d_in(), first.d_out(), e);
      const Matrix out = apply_choi_raw(second.choi().mat(), second.d_in(), second.d_out(), mid);
      j += kron(out, e);
    }
  return QuantumChannelChoi(herm(j / d_in), d_in, d_out, cfg);
}

QuantumChannelChoi channel_tensor(const QuantumChannelChoi& a, const QuantumChannelChoi& b,
                                  const NumericConfig& cfg) {
  const int aout = a.d_out(), ain = a.d_in(), bout = b.d_out(), bin = b.d_in();
  const int din = ain * bin;
  const Matrix& ja = a.choi().mat();
  const Matrix& jb = b.choi().mat();
  Matrix j(aout * bout * din, aout * bout * din);
  for (int oa = 0; oa < aout; ++oa)
    for (int ob = 0; ob < bout; ++ob)
      for (int ia = 0; ia < ain; ++ia)
        for (int ib = 0; ib < bin; ++ib) {
          const int row = (oa * bout + ob) * din + (ia * bin + ib);
          for (int oa2 = 0; oa2 < aout; ++oa2)
            for (int ob2 = 0; ob2 < bout; ++ob2)
              for (int ia2 = 0; ia2 < ain; ++ia2)
                for (int ib2 = 0; ib2 < bin; ++ib2) {
                  const int col = (oa2 * bout + ob2) * din + (ia2 * bin + ib2);
                  j(row, col) =
                      ja(oa * ain + ia, oa2 * ain + ia2) * jb(ob * bin + ib, ob2 * bin + ib2);
                }
        }
  return QuantumChannelChoi(herm(j), din, aout * bout, cfg);
}

HermitianMatrix isotropic_state(int d, double eps) {
  if (d < 1) throw ShapeError("isotropic_state: dimension must be positive");
  if (!std::isfinite(eps) || eps < 0.0 || eps > 1.0)
    throw DomainError("isotropic_state: eps must lie in [0, 1]");
  const Matrix m =
      (1.0 - eps) * phi_plus(d) + (eps / (d * d)) * Matrix::Identity(d * d, d * d);
  return herm(m);
}

GibbsCheck is_gibbs_preserving(const QuantumChannelChoi& ch, const HermitianMatrix& gamma,
                               const NumericConfig& cfg) {
  const HermitianMatrix mapped = map_of_choi(ch, gamma, cfg);
  const double residual = trace_norm(herm(mapped.mat() - gamma.mat()), cfg);
  return {residual <= 1e-9, residual};
}

// ---------- instrument families ----------

InstrumentFamily::InstrumentFamily(std::vector<std::vector<QuantumChannelChoi>> filters,
                                   int dim)
    : filters_(std::move(filters)),
      n_outcomes_(static_cast<int>(filters_[0].size())),
      n_settings_(static_cast<int>(filters_.size())),
      dim_(dim) {}

InstrumentFamily InstrumentFamily::from_choi(
    std::vector<std::vector<QuantumChannelChoi>> filters, const NumericConfig& cfg) {
  if (filters.empty() || filters[0].empty())
    throw ShapeError("InstrumentFamily: at least one setting and one outcome required");
  const std::size_t na = filters[0].size();
  const int dim = filters[0][0].d_in();
  for (const auto& setting : filters) {
    if (setting.size() != na)
      throw ShapeError("InstrumentFamily: ragged outcome counts across settings");
    for (const auto& f : setting)
      if (f.d_in() != dim || f.d_out() != dim)
        throw ShapeError("InstrumentFamily: filters must share one square system dimension");
  }

  // every setting must sum to a trace-preserving channel
  std::vector<Matrix> averages;
  for (std::size_t x = 0; x < filters.size(); ++x) {
    Matrix sum = Matrix::Zero(dim * dim, dim * dim);
    for (const auto& f : filters[x]) sum += f.choi().mat();
    const QuantumChannelChoi avg(herm(sum), dim, dim, cfg);
    if (!avg.is_trace_preserving()) {
      std::ostringstream msg;
      msg << "InstrumentFamily: setting " << x << " does not sum to a trace-preserving"
          << " channel (residual " << avg.trace_preserving_residual() << ")";
      throw ValidationError(msg.str());
    }
    averages.push_back(sum);
  }

  // all settings must share one average channel
  for (std::size_t x = 0; x < averages.size(); ++x)
    for (std::size_t y = x + 1; y < averages.size(); ++y) {
      const double dist = trace_norm(herm(averages[x] - averages[y]), cfg);
      if (dist > 1e-9) {
        std::ostringstream msg;
        msg << "InstrumentFamily: settings " << x << " and " << y
            << " have different average channels (distance " << dist << ")";
        throw ValidationError(msg.str());
      }
    }
  return InstrumentFamily(std::move(filters), dim);
}

InstrumentFamily InstrumentFamily::from_kraus(
    const std::vector<std::vector<std::vector<Matrix>>>& kraus, const NumericConfig& cfg) {
  std::vector<std::vector<QuantumChannelChoi>> filters;
  for (const auto& setting : kraus) {
    std::vector<QuantumChannelChoi> row;
    for (const auto& ops : setting) row.push_back(choi_of_map(ops, cfg));
    filters.push_back(std::move(row));
  }
  return from_choi(std::move(filters), cfg);
}

InstrumentFamily InstrumentFamily::from_povm(
    const std::vector<std::vector<HermitianMatrix>>& povms, const NumericConfig& cfg) {
  std::vector<std::vector<QuantumChannelChoi>> filters;
  for (const auto& setting : povms) {
    if (setting.empty()) throw ShapeError("InstrumentFamily: empty POVM");
    const int dim = setting[0].dim();
    Matrix total = Matrix::Zero(dim, dim);
    std::vector<QuantumChannelChoi> row;
    for (const auto& e : setting) {
      if (e.dim() != dim) throw ShapeError("InstrumentFamily: POVM element dim mismatch");
      if (min_eigenvalue(e, cfg) < -cfg.tol_psd)
        throw ValidationError("InstrumentFamily: POVM element is not positive semidefinite");
      total += e.mat();
      const HermitianMatrix root =
          matrix_func(e, [](double l) { return std::sqrt(std::max(0.0, l)); }, cfg);
      row.push_back(choi_of_map({root.mat()}, cfg));
    }
    if (trace_norm(herm(total - Matrix::Identity(dim, dim)), cfg) > 1e-9)
      throw ValidationError("InstrumentFamily: POVM does not sum to the identity");
    filters.push_back(std::move(row));
  }
  return from_choi(std::move(filters), cfg);
}

const QuantumChannelChoi& InstrumentFamily::filter(int a, int x) const {
  if (x < 0 || x >= n_settings_ || a < 0 || a >= n_outcomes_)
    throw DomainError("InstrumentFamily: filter index out of range");
  return filters_[x][a];
}

QuantumChannelChoi InstrumentFamily::average_channel(const NumericConfig& cfg) const {
  Matrix sum = Matrix::Zero(dim_ * dim_, dim_ * dim_);
  for (const auto& f : filters_[0]) sum += f.choi().mat();
  return QuantumChannelChoi(herm(sum), dim_, dim_, cfg);
}

// ---------- assemblages ----------

Assemblage::Assemblage(std::vector<std::vector<HermitianMatrix>> members,
                       const NumericConfig& cfg)
    : members_(std::move(members)) {
  if (members_.empty() || members_[0].empty())
    throw ShapeError("Assemblage: at least one setting and one outcome required");
  n_settings_ = static_cast<int>(members_.size());
  n_outcomes_ = static_cast<int>(members_[0].size());
  dim_ = members_[0][0].dim();

  std::vector<Matrix> reduced;
  for (int x = 0; x < n_settings_; ++x) {
    if (static_cast<int>(members_[x].size()) != n_outcomes_)
      throw ShapeError("Assemblage: ragged outcome counts across settings");
    Matrix sum = Matrix::Zero(dim_, dim_);
    for (int a = 0; a < n_outcomes_; ++a) {
      const HermitianMatrix& s = members_[x][a];
      if (s.dim() != dim_) throw ShapeError("Assemblage: member dimension mismatch");
      if (min_eigenvalue(s, cfg) < -cfg.tol_psd)
        throw ValidationError("Assemblage: member is not positive semidefinite");
      sum += s.mat();
    }
    if (std::abs(sum.trace().real() - 1.0) > 1e-9)
      throw ValidationError("Assemblage: reduced state must have unit trace");
    reduced.push_back(sum);
  }
  for (int x = 0; x < n_settings_; ++x)
    for (int y = x + 1; y < n_settings_; ++y)
      if (trace_norm(herm(reduced[x] - reduced[y]), cfg) > 1e-9)
        throw ValidationError("Assemblage: reduced state differs across settings");
}

const HermitianMatrix& Assemblage::at(int a, int x) const {
  if (x < 0 || x >= n_settings_ || a < 0 || a >= n_outcomes_)
    throw DomainError("Assemblage: member index out of range");
  return members_[x][a];
}

HermitianMatrix Assemblage::reduced() const {
  Matrix sum = Matrix::Zero(dim_, dim_);
  for (const auto& s : members_[0]) sum += s.mat();
  return herm(sum);
}

Assemblage apply_instrument(const InstrumentFamily& fam, const HermitianMatrix& rho,
                            const NumericConfig& cfg) {
  if (rho.dim() != fam.dim())
    throw ShapeError("apply_instrument: state dimension must match the family");
  std::vector<std::vector<HermitianMatrix>> members;
  for (int x = 0; x < fam.n_settings(); ++x) {
    std::vector<HermitianMatrix> row;
    for (int a = 0; a < fam.n_outcomes(); ++a)
      row.push_back(map_of_choi(fam.filter(a, x), rho, cfg));
    members.push_back(std::move(row));
  }
  return Assemblage(std::move(members), cfg);
}

InstrumentFamily extend_with_ancilla(const InstrumentFamily& fam, const NumericConfig& cfg) {
  const QuantumChannelChoi id = identity_channel(fam.dim());
  std::vector<std::vector<QuantumChannelChoi>> filters;
  for (int x = 0; x < fam.n_settings(); ++x) {
    std::vector<QuantumChannelChoi> row;
    for (int a = 0; a < fam.n_outcomes(); ++a)
      row.push_back(channel_tensor(fam.filter(a, x), id, cfg));
    filters.push_back(std::move(row));
  }
  return InstrumentFamily::from_choi(std::move(filters), cfg);
}

}  // namespace thermosteer
