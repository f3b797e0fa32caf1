#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "thermosteer/quantum.hpp"
#include "thermosteer/steering.hpp"

namespace thermosteer {

// Monotone interpolation h(t) between the identity (h = 1 at t = 0) and full
// thermalisation (h -> 0). Construction validates the pair (h, h_inv) on a
// logarithmic time grid up to `horizon`; a schedule that fails any check never
// comes into existence, so downstream code can trust h without re-checking.
class ThermalisationSchedule {
 public:
  // h(t) = exp(-t / t0)
  static ThermalisationSchedule partial(double t0);

  // caller supplies both directions; horizon is the largest time the pair is
  // certified for (h(horizon) must already be below 1e-6)
  static ThermalisationSchedule custom(std::function<double(double)> h,
                                       std::function<double(double)> h_inv, double horizon);

  // inverse recovered by bisection on [0, horizon] to 1e-10 relative width
  static ThermalisationSchedule custom(std::function<double(double)> h, double horizon);

  double h(double t) const;       // t >= 0
  double h_inv(double q) const;   // q in (0, 1]
  double horizon() const { return horizon_; }

 private:
  ThermalisationSchedule(std::function<double(double)> h, std::function<double(double)> h_inv,
                         double horizon);
  void validate() const;

  std::function<double(double)> h_;
  std::function<double(double)> inv_;
  double horizon_;
};

// sigma_{a|x} -> h sigma_{a|x} + (1 - h) p_{a|x} gamma. Outcome probabilities
// are preserved exactly because gamma has unit trace.
Assemblage thermalise_h(const Assemblage& sigma, const HermitianMatrix& gamma, double h,
                        const NumericConfig& cfg = NumericConfig::defaults());
Assemblage thermalise(const Assemblage& sigma, const HermitianMatrix& gamma,
                      const ThermalisationSchedule& sched, double t,
                      const NumericConfig& cfg = NumericConfig::defaults());

// Survival time of steerability under the schedule: the first t at which the
// thermalised assemblage admits a local-hidden-state model. Members return 0.
double t_min(const Assemblage& sigma, const HermitianMatrix& gamma,
             const ThermalisationSchedule& sched,
             const NumericConfig& cfg = NumericConfig::defaults());
double t_min(const InstrumentFamily& fam, const ThermalContext& ctx,
             const ThermalisationSchedule& sched,
             const NumericConfig& cfg = NumericConfig::defaults());

// Qubit Davies map with ground population p, relaxation rate a and dephasing
// rate g, valid for 0 <= a/2 <= g. At g = a it coincides with partial
// thermalisation towards diag(p, 1 - p) at rate g.
QuantumChannelChoi davies_map(double p, double a, double g, double t,
                              const NumericConfig& cfg = NumericConfig::defaults());

// Time-parametrised family of maps given by raw Choi operators. The operators
// are not validated here: find_t_star checks trace preservation itself and
// tolerates maps that are positive but not completely positive.
struct Evolution {
  std::function<HermitianMatrix(double)> choi_at;
  int dim = 0;
  std::string label;
};

Evolution schedule_evolution(const HermitianMatrix& gamma, const ThermalisationSchedule& sched);
Evolution envelope_evolution(const HermitianMatrix& gamma, std::function<double(double)> c,
                             std::string label);

struct TStarScan {
  std::optional<double> t_star;   // empty when still steerable at t_max
  std::vector<double> crossings;  // every steerable <-> member flip, ascending
  double margin_at_t_max = 0.0;   // 1 - 2^{-sr}(t_max) when inconclusive
  bool thermalisation_warning = false;  // map at t_max is far from gamma tr(.)
  bool positivity_only = false;         // some scanned map was not CP
};

// Scans [0, t_max] on a uniform grid, then bisects every verdict flip down to
// width 1e-3 * t_max. t_star is the last steerable -> member crossing.
TStarScan find_t_star(const Assemblage& sigma, const HermitianMatrix& gamma, const Evolution& ev,
                      double t_max, int grid_points = 60,
                      const NumericConfig& cfg = NumericConfig::defaults());

}  // namespace thermosteer
