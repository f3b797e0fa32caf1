#pragma once

#include <vector>

#include "thermosteer/hermitian.hpp"
#include "thermosteer/numeric.hpp"
#include "thermosteer/quantum.hpp"
#include "thermosteer/steering.hpp"

namespace thermosteer {

// Quench Hamiltonians H_{a|x}, one per outcome/setting pair, in eV. Members
// are Hermitian by type; construction only adds the finiteness gate.
class HamiltonianFamily {
 public:
  // members[x][a], rectangular, all of one dimension
  explicit HamiltonianFamily(std::vector<std::vector<HermitianMatrix>> members);

  static HamiltonianFamily zero(int n_outcomes, int n_settings, int dim);
  // H_{a|0} = (-1)^a kBT delta X and H_{a|1} = (-1)^a kBT delta Z: Pauli
  // observables at the energy scale kBT delta
  static HamiltonianFamily pauli_xz(double delta, double t_kelvin);

  int n_outcomes() const { return n_outcomes_; }
  int n_settings() const { return n_settings_; }
  int dim() const { return dim_; }
  const HermitianMatrix& at(int a, int x) const;

 private:
  std::vector<std::vector<HermitianMatrix>> hs_;  // [x][a]
  int n_outcomes_;
  int n_settings_;
  int dim_;
};

// Optimal average work extractable from rho against Hamiltonian h at
// temperature t_kelvin: kBT ln2 times the relative entropy (in bits) between
// rho and the thermal state of h. Never negative; the thermal state is
// full-rank so the support condition always holds.
double work_ext(const HermitianMatrix& rho, const HermitianMatrix& h, double t_kelvin,
                const NumericConfig& cfg = NumericConfig::defaults());

// work extractable from information content alone: work_ext against h = 0
double w_inf(const HermitianMatrix& rho, double t_kelvin,
             const NumericConfig& cfg = NumericConfig::defaults());

// Deficit-type work value tr(h rho) + kBT ln tr(e^{-h/kBT}) - kBT ln d;
// identical to work_ext - w_inf, evaluated in closed form.
double delta(const HermitianMatrix& rho, const HermitianMatrix& h, double t_kelvin,
             const NumericConfig& cfg = NumericConfig::defaults());

// one (a,x) cell of the four-batch experiment, all energies in eV
struct WorkRow {
  int a = 0;
  int x = 0;
  double probability = 0.0;  // P(a,x) = tr(sigma_{a|x}) / n_settings
  double w_ext = 0.0;        // work_ext of the normalized member against H_{a|x}
  double w_inf = 0.0;        // same against the zero Hamiltonian
  double delta = 0.0;        // deficit of the normalized member
};

struct WorkReport {
  std::vector<WorkRow> rows;
  double delta_bar = 0.0;      // eV; figure-of-merit of the four-batch scheme
  double eta_threshold = 0.0;  // the dimensionless eta the membership test used
  bool in_h_eta = false;       // delta_bar >= kBT eta
};

// Four-batch figure-of-merit: sum over (a,x) of P(a,x) times the deficit gap
// between the normalized member and gamma. Also evaluated through the linear
// form sum tr[H_{a|x}(sigma_{a|x} - tr(sigma_{a|x}) gamma)] / n_settings; the
// two must agree, and the better-conditioned linear value is the one reported.
WorkReport delta_bar(const Assemblage& sigma, const HermitianMatrix& gamma,
                     const HamiltonianFamily& fam_h, double t_kelvin, double eta = 1e-3,
                     const NumericConfig& cfg = NumericConfig::defaults());

struct LhsWorkOptimum {
  double value;    // eV; the exact maximum of the figure-of-merit
  LhsModel model;  // an attaining unsteerable ensemble with matched statistics
};

// Maximum of the figure-of-merit over unsteerable assemblages reproducing
// sigma's outcome statistics, solved exactly as an SDP over one sub-normalized
// state per deterministic strategy with trace-matching rows.
LhsWorkOptimum lhs_work_optimum(const Assemblage& sigma, const HermitianMatrix& gamma,
                                const HamiltonianFamily& fam_h, double t_kelvin,
                                const NumericConfig& cfg = NumericConfig::defaults());

double max_delta_bar_lhs(const Assemblage& sigma, const HermitianMatrix& gamma,
                         const HamiltonianFamily& fam_h, double t_kelvin,
                         const NumericConfig& cfg = NumericConfig::defaults());

struct WorkAdvantage {
  double ratio;             // best quantum-to-classical figure-of-merit ratio
  HamiltonianFamily family; // the candidate attaining it
};

// Best work-extraction advantage over the admitted candidates: families whose
// figure-of-merit reaches kBT eta compete on delta_bar / max_delta_bar_lhs.
// The ratio never exceeds 2^{sr}; equality needs the certificate family.
WorkAdvantage sr_from_work(const Assemblage& sigma, const HermitianMatrix& gamma,
                           const std::vector<HamiltonianFamily>& candidates, double eta,
                           double t_kelvin,
                           const NumericConfig& cfg = NumericConfig::defaults());

struct CertificateResult {
  HamiltonianFamily family;  // H_{a|x} = -kBT n_settings Y_{a|x} from the dual witness
  double quantum = 0.0;      // eV; figure-of-merit of sigma under the family
  double classical = 0.0;    // eV; unsteerable maximum under the same family
  double gap = 0.0;          // quantum - classical, strictly positive when steerable
};

// Witness-induced Hamiltonians certifying the advantage, with both sides of
// the strict gap recomputed by independent solves. The witness gauge is not
// canonical, so compare gaps rather than matrices.
CertificateResult certificate_hamiltonians(const Assemblage& sigma,
                                           const HermitianMatrix& gamma, double t_kelvin,
                                           const NumericConfig& cfg = NumericConfig::defaults());

// Incompatibility survival time under partial thermalisation with unit time
// t0, recovered from the certified advantage: t0 ln(quantum / classical).
double tmin_from_work(double t0, const CertificateResult& cert);
double tmin_from_work(const Assemblage& sigma, const HermitianMatrix& gamma, double t0,
                      double t_kelvin, const NumericConfig& cfg = NumericConfig::defaults());

// one swept energy scale of the Pauli worked example
struct WorkSweepRow {
  double delta = 0.0;            // dimensionless scale parameter
  double classical_bound = 0.0;  // eV; aggregate deficit at the unsteerable optimum
  double quantum_value = 0.0;    // eV; aggregate deficit of sigma itself
  double ratio = 0.0;            // figure-of-merit ratio, 2^{sr} at the optimum
  double sr = 0.0;               // bits, constant across the sweep
  double t_min_over_t0 = 0.0;    // ln(ratio)
};

// Sweep of the qubit X/Z worked example across energy scales. The aggregates
// are the per-setting averages sum_{a,x} deficit / n_settings, the quantities
// the closed-form classical and quantum bounds refer to.
std::vector<WorkSweepRow> work_sweep(const Assemblage& sigma, const HermitianMatrix& gamma,
                                     double t_kelvin, const std::vector<double>& deltas,
                                     const NumericConfig& cfg = NumericConfig::defaults());

}  // namespace thermosteer
