#include "thermosteer/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "thermosteer/sdp.hpp"

namespace thermosteer {

namespace {

HermitianMatrix herm(const Matrix& m) { return HermitianMatrix(m); }

// log-spaced validation grid over (horizon * 1e-4, horizon]
std::vector<double> validation_grid(double horizon) {
  std::vector<double> grid;
  grid.reserve(64);
  for (int k = 0; k < 64; ++k)
    grid.push_back(horizon * std::pow(10.0, -4.0 * (1.0 - k / 63.0)));
  return grid;
}

// Choi of rho -> c * rho + (1 - c) * tr(rho) gamma, trace-1 normalization
HermitianMatrix affine_choi(const HermitianMatrix& gamma, double c) {
  const int d = gamma.dim();
  const Matrix id_part = identity_channel(d).choi().mat();
  const Matrix flat_part = kron(gamma.mat(), Matrix::Identity(d, d) / d);
  return herm(c * id_part + (1.0 - c) * flat_part);
}

}  // namespace

// ---------- thermalisation schedules ----------

ThermalisationSchedule::ThermalisationSchedule(std::function<double(double)> h,
                                               std::function<double(double)> h_inv,
                                               double horizon)
    : h_(std::move(h)), inv_(std::move(h_inv)), horizon_(horizon) {
  validate();
}

void ThermalisationSchedule::validate() const {
  if (!std::isfinite(horizon_) || horizon_ <= 0.0)
    throw DomainError("ThermalisationSchedule: horizon must be positive and finite");
  if (std::abs(h_(0.0) - 1.0) > 1e-9)
    throw ValidationError("ThermalisationSchedule: h(0) must equal 1");

  // Strict decrease is only demanded while h is meaningfully above zero;
  // below the 1e-9 floor the samples may tie without invalidating the pair.
  const std::vector<double> grid = validation_grid(horizon_);
  double prev = 1.0;
  for (double t : grid) {
    const double v = h_(t);
    if (!std::isfinite(v) || v < -1e-9 || v > 1.0 + 1e-9)
      throw ValidationError("ThermalisationSchedule: h must map into [0, 1]");
    if (prev > 1e-9 && v >= prev)
      throw ValidationError("ThermalisationSchedule: h must be strictly decreasing");
    if (prev <= 1e-9 && v > prev)
      throw ValidationError("ThermalisationSchedule: h must be non-increasing");
    prev = v;
  }
  if (h_(horizon_) >= 1e-6)
    throw ValidationError("ThermalisationSchedule: h(horizon) must fall below 1e-6");

  for (double t : grid) {
    const double v = h_(t);
    if (v <= 1e-9) continue;  // below the floor the preimage is not unique
    const double back = inv_(v);
    if (!std::isfinite(back) || std::abs(back - t) > 1e-9 * std::max(1.0, t))
      throw ValidationError("ThermalisationSchedule: h_inv does not invert h");
  }
}

ThermalisationSchedule ThermalisationSchedule::partial(double t0) {
  if (!std::isfinite(t0) || t0 <= 0.0)
    throw DomainError("ThermalisationSchedule: t0 must be positive and finite");
  auto h = [t0](double t) { return std::exp(-t / t0); };
  auto inv = [t0](double q) { return -t0 * std::log(q); };
  return ThermalisationSchedule(h, inv, 20.0 * t0);
}

ThermalisationSchedule ThermalisationSchedule::custom(std::function<double(double)> h,
                                                      std::function<double(double)> h_inv,
                                                      double horizon) {
  if (!h || !h_inv) throw ValidationError("ThermalisationSchedule: callable expected");
  return ThermalisationSchedule(std::move(h), std::move(h_inv), horizon);
}

ThermalisationSchedule ThermalisationSchedule::custom(std::function<double(double)> h,
                                                      double horizon) {
  if (!h) throw ValidationError("ThermalisationSchedule: callable expected");
  if (!std::isfinite(horizon) || horizon <= 0.0)
    throw DomainError("ThermalisationSchedule: horizon must be positive and finite");
  auto inv = [h, horizon](double q) {
    double lo = 0.0;
    double hi = horizon;
    int expand = 0;
    while (h(hi) > q) {
      hi *= 2.0;
      if (++expand > 64)
        throw NumericalFailureError("ThermalisationSchedule: h never reaches the target");
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-10 * std::max(hi, 1e-300); ++it) {
      const double mid = 0.5 * (lo + hi);
      (h(mid) >= q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  return ThermalisationSchedule(std::move(h), inv, horizon);
}

double ThermalisationSchedule::h(double t) const {
  if (!std::isfinite(t) || t < 0.0)
    throw DomainError("ThermalisationSchedule: time must be non-negative");
  return h_(t);
}

double ThermalisationSchedule::h_inv(double q) const {
  if (!std::isfinite(q) || q <= 0.0 || q > 1.0 + 1e-12)
    throw DomainError("ThermalisationSchedule: h_inv argument must lie in (0, 1]");
  return std::max(0.0, inv_(std::min(q, 1.0)));
}

// ---------- thermalisation of assemblages ----------

Assemblage thermalise_h(const Assemblage& sigma, const HermitianMatrix& gamma, double h,
                        const NumericConfig& cfg) {
  if (gamma.dim() != sigma.dim())
    throw ShapeError("thermalise_h: gamma dimension must match the assemblage");
  if (std::abs(gamma.trace() - 1.0) > 1e-9)
    throw DomainError("thermalise_h: gamma must have unit trace");
  if (!std::isfinite(h) || h < 0.0 || h > 1.0)
    throw DomainError("thermalise_h: h must lie in [0, 1]");
  std::vector<std::vector<HermitianMatrix>> members;
  for (int x = 0; x < sigma.n_settings(); ++x) {
    std::vector<HermitianMatrix> row;
    for (int a = 0; a < sigma.n_outcomes(); ++a) {
      const HermitianMatrix& s = sigma.at(a, x);
      row.push_back(herm(h * s.mat() + (1.0 - h) * s.trace() * gamma.mat()));
    }
    members.push_back(std::move(row));
  }
  return Assemblage(std::move(members), cfg);
}

Assemblage thermalise(const Assemblage& sigma, const HermitianMatrix& gamma,
                      const ThermalisationSchedule& sched, double t, const NumericConfig& cfg) {
  return thermalise_h(sigma, gamma, sched.h(t), cfg);
}

// ---------- survival time ----------

double t_min(const Assemblage& sigma, const HermitianMatrix& gamma,
             const ThermalisationSchedule& sched, const NumericConfig& cfg) {
  const SrResult res = sr_gamma(sigma, gamma, cfg);
  return sched.h_inv(std::pow(2.0, -res.sr));
}

double t_min(const InstrumentFamily& fam, const ThermalContext& ctx,
             const ThermalisationSchedule& sched, const NumericConfig& cfg) {
  const HermitianMatrix gamma = thermal_state(ctx, cfg);
  return t_min(apply_instrument(fam, gamma, cfg), gamma, sched, cfg);
}

// ---------- Davies map ----------

QuantumChannelChoi davies_map(double p, double a, double g, double t,
                              const NumericConfig& cfg) {
  if (!std::isfinite(p) || p <= 0.0 || p >= 1.0)
    throw DomainError("davies_map: ground population must lie strictly inside (0, 1)");
  if (!std::isfinite(a) || !std::isfinite(g) || a < 0.0 || g < 0.5 * a)
    throw DomainError("davies_map: rates must satisfy 0 <= a/2 <= g");
  if (!std::isfinite(t) || t < 0.0)
    throw DomainError("davies_map: time must be non-negative");

  const double ea = std::exp(-a * t);
  const double eg = std::exp(-g * t);
  // action on rho: populations relax towards (p, 1 - p) at rate a while the
  // coherences shrink by exp(-g t)
  Matrix j = Matrix::Zero(4, 4);
  j(0, 0) = 0.5 * (1.0 - (1.0 - p) * (1.0 - ea));  // |0><0| -> |0><0|
  j(2, 2) = 0.5 * (1.0 - p) * (1.0 - ea);          // |0><0| -> |1><1|
  j(1, 1) = 0.5 * p * (1.0 - ea);                  // |1><1| -> |0><0|
  j(3, 3) = 0.5 * (1.0 - p * (1.0 - ea));          // |1><1| -> |1><1|
  j(0, 3) = 0.5 * eg;                              // coherence survival
  j(3, 0) = 0.5 * eg;
  return QuantumChannelChoi(herm(j), 2, 2, cfg);
}

// ---------- evolutions and t* ----------

Evolution schedule_evolution(const HermitianMatrix& gamma, const ThermalisationSchedule& sched) {
  if (std::abs(gamma.trace() - 1.0) > 1e-9)
    throw DomainError("schedule_evolution: gamma must have unit trace");
  auto choi_at = [gamma, sched](double t) { return affine_choi(gamma, sched.h(t)); };
  return Evolution{choi_at, gamma.dim(), "schedule"};
}

Evolution envelope_evolution(const HermitianMatrix& gamma, std::function<double(double)> c,
                             std::string label) {
  if (std::abs(gamma.trace() - 1.0) > 1e-9)
    throw DomainError("envelope_evolution: gamma must have unit trace");
  if (!c) throw ValidationError("envelope_evolution: callable expected");
  auto choi_at = [gamma, c](double t) { return affine_choi(gamma, c(t)); };
  return Evolution{choi_at, gamma.dim(), std::move(label)};
}

namespace {

// deterministic grid of pure states used when a map fails the CP check:
// basis kets plus the two superpositions of every pair
std::vector<HermitianMatrix> probe_states(int d) {
  std::vector<HermitianMatrix> states;
  for (int i = 0; i < d; ++i) {
    Matrix m = Matrix::Zero(d, d);
    m(i, i) = 1.0;
    states.push_back(HermitianMatrix(m));
  }
  for (int i = 0; i < d; ++i)
    for (int k = i + 1; k < d; ++k) {
      Eigen::VectorXcd plus = Eigen::VectorXcd::Zero(d);
      plus[i] = 1.0 / std::sqrt(2.0);
      plus[k] = 1.0 / std::sqrt(2.0);
      states.push_back(HermitianMatrix(plus * plus.adjoint()));
      Eigen::VectorXcd phase = Eigen::VectorXcd::Zero(d);
      phase[i] = 1.0 / std::sqrt(2.0);
      phase[k] = Complex(0.0, 1.0 / std::sqrt(2.0));
      states.push_back(HermitianMatrix(phase * phase.adjoint()));
    }
  return states;
}

struct TStarContext {
  const Assemblage* sigma;
  const HermitianMatrix* gamma;
  const Evolution* ev;
  const NumericConfig* cfg;
  bool positivity_only = false;
  double last_sr = 0.0;
};

bool steerable_at(TStarContext& ctx, double t) {
  const int d = ctx.ev->dim;
  const HermitianMatrix j = ctx.ev->choi_at(t);
  if (j.dim() != d * d) throw ShapeError("find_t_star: Choi dimension mismatch");

  const Matrix marginal = partial_trace(j, d, d, Subsystem::B).mat();
  if (trace_norm(herm(marginal - Matrix::Identity(d, d) / d), *ctx.cfg) > 1e-9)
    throw ValidationError("find_t_star: evolution is not trace preserving");

  if (min_eigenvalue(j, *ctx.cfg) < -ctx.cfg->tol_psd) {
    // not CP; accept the map only if it at least preserves positivity on a
    // spot-check grid of pure states
    for (const HermitianMatrix& rho : probe_states(d)) {
      const HermitianMatrix out = apply_choi(j, d, d, rho);
      if (min_eigenvalue(out, *ctx.cfg) < -1e-7)
        throw ValidationError("find_t_star: map is not positive on the state grid");
    }
    ctx.positivity_only = true;
  }

  std::vector<std::vector<HermitianMatrix>> members;
  for (int x = 0; x < ctx.sigma->n_settings(); ++x) {
    std::vector<HermitianMatrix> row;
    for (int a = 0; a < ctx.sigma->n_outcomes(); ++a)
      row.push_back(apply_choi(j, d, d, ctx.sigma->at(a, x)));
    members.push_back(std::move(row));
  }
  const Assemblage evolved(std::move(members), *ctx.cfg);
  ctx.last_sr = sr_gamma(evolved, *ctx.gamma, *ctx.cfg).sr;
  return ctx.last_sr > 1e-7;
}

}  // namespace

TStarScan find_t_star(const Assemblage& sigma, const HermitianMatrix& gamma, const Evolution& ev,
                      double t_max, int grid_points, const NumericConfig& cfg) {
  if (!std::isfinite(t_max) || t_max <= 0.0)
    throw DomainError("find_t_star: t_max must be positive and finite");
  if (grid_points < 2) throw DomainError("find_t_star: at least two grid intervals required");
  if (!ev.choi_at) throw ValidationError("find_t_star: evolution has no map");
  if (ev.dim != sigma.dim())
    throw ShapeError("find_t_star: evolution dimension must match the assemblage");

  TStarContext ctx{&sigma, &gamma, &ev, &cfg};
  TStarScan scan;

  // drift check: an evolution that does not end near full thermalisation makes
  // the scan window suspect, so flag it rather than fail
  const HermitianMatrix target = thermalising_channel(gamma, ev.dim).choi();
  const HermitianMatrix end = ev.choi_at(t_max);
  if (end.dim() == target.dim()) {
    const double drift = diamond_norm(herm(end.mat() - target.mat()), ev.dim, ev.dim, cfg);
    scan.thermalisation_warning = drift >= 0.05;
  } else {
    scan.thermalisation_warning = true;
  }

  std::vector<double> ts;
  std::vector<bool> steer;
  for (int k = 0; k <= grid_points; ++k) {
    const double t = t_max * k / grid_points;
    ts.push_back(t);
    steer.push_back(steerable_at(ctx, t));
  }
  const double sr_end = steer.back() ? ctx.last_sr : 0.0;

  // refine every verdict flip by bisection down to 1e-3 * t_max
  std::vector<char> to_member;
  for (size_t k = 0; k + 1 < ts.size(); ++k) {
    if (steer[k] == steer[k + 1]) continue;
    double lo = ts[k], hi = ts[k + 1];
    bool lo_steer = steer[k];
    while (hi - lo > 1e-3 * t_max) {
      const double mid = 0.5 * (lo + hi);
      if (steerable_at(ctx, mid) == lo_steer)
        lo = mid;
      else
        hi = mid;
    }
    scan.crossings.push_back(0.5 * (lo + hi));
    to_member.push_back(lo_steer ? 1 : 0);
  }

  if (steer.back()) {
    scan.margin_at_t_max = 1.0 - std::pow(2.0, -sr_end);
  } else if (scan.crossings.empty()) {
    scan.t_star = 0.0;
  } else {
    for (size_t k = scan.crossings.size(); k-- > 0;)
      if (to_member[k]) {
        scan.t_star = scan.crossings[k];
        break;
      }
  }
  scan.positivity_only = ctx.positivity_only;
  return scan;
}

}  // namespace thermosteer
