#pragma once

#include <random>
#include <string>
#include <vector>

#include "thermosteer/quantum.hpp"
#include "thermosteer/steering.hpp"
#include "thermosteer/thermo.hpp"

namespace thermosteer {

// Free pre/post-processing of an instrument family:
//   F(E)_{a|x} = sum_{y,b} post(a|x,y,b) pre(y|x)  Q o E_{b|y} o P
// with row-stochastic classical kernels and trace-preserving channels P, Q.
// Whether P and Q preserve the active thermal state is only decidable once
// gamma is known, so that check lives in apply_dao.
class DeterministicAllowedOperation {
 public:
  // pre_classical[x][y], post_classical[x][y][b][a]
  DeterministicAllowedOperation(
      std::vector<std::vector<double>> pre_classical,
      std::vector<std::vector<std::vector<std::vector<double>>>> post_classical,
      QuantumChannelChoi pre_channel, QuantumChannelChoi post_channel,
      const NumericConfig& cfg = NumericConfig::defaults());

  static DeterministicAllowedOperation identity(int n_outcomes, int n_settings, int dim);

  int n_settings_out() const { return static_cast<int>(pre_.size()); }
  int n_settings_in() const { return static_cast<int>(pre_[0].size()); }
  int n_outcomes_in() const { return static_cast<int>(post_[0][0].size()); }
  int n_outcomes_out() const { return static_cast<int>(post_[0][0][0].size()); }
  int dim() const { return pre_channel_.d_in(); }

  double pre_classical(int y, int x) const { return pre_[x][y]; }
  double post_classical(int a, int x, int y, int b) const { return post_[x][y][b][a]; }
  const QuantumChannelChoi& pre_channel() const { return pre_channel_; }
  const QuantumChannelChoi& post_channel() const { return post_channel_; }

 private:
  std::vector<std::vector<double>> pre_;
  std::vector<std::vector<std::vector<std::vector<double>>>> post_;
  QuantumChannelChoi pre_channel_;
  QuantumChannelChoi post_channel_;
};

// Rejects (ValidationError) when either channel moves gamma; a rejected
// operation is never partially applied.
InstrumentFamily apply_dao(const DeterministicAllowedOperation& op, const InstrumentFamily& fam,
                           const HermitianMatrix& gamma,
                           const NumericConfig& cfg = NumericConfig::defaults());

// first acts on the family before second; the composite is again a valid
// operation (classical kernels renormalized, channels composed)
DeterministicAllowedOperation compose_dao(const DeterministicAllowedOperation& second,
                                          const DeterministicAllowedOperation& first,
                                          const NumericConfig& cfg = NumericConfig::defaults());

// Single-Kraus stochastic filter K with K^dag K <= I. Success probability on
// the thermal state is tr(K gamma K^dag).
class Lf1Filter {
 public:
  explicit Lf1Filter(Matrix k, const NumericConfig& cfg = NumericConfig::defaults());

  const Matrix& k() const { return k_; }
  int dim() const { return static_cast<int>(k_.rows()); }
  double success_probability(const HermitianMatrix& gamma) const;

 private:
  Matrix k_;
};

Lf1Filter compose_lf1(const Lf1Filter& second, const Lf1Filter& first,
                      const NumericConfig& cfg = NumericConfig::defaults());

// omega_{a|x} = K sigma_{a|x} K^dag / p_gamma. With enforce_conditions the
// filter must leave the statistics (i) and the thermal state (ii) untouched;
// violations raise ConditionViolatedError naming the condition.
Assemblage apply_lf1(const Lf1Filter& f, const Assemblage& sigma, const HermitianMatrix& gamma,
                     bool enforce_conditions = true,
                     const NumericConfig& cfg = NumericConfig::defaults());

struct MonotoneRow {
  std::string operation;
  double sr_before = 0.0;
  double sr_after = 0.0;
  double t_min_before = 0.0;
  double t_min_after = 0.0;
  bool certified = true;  // false when a filter was applied with conditions waived
  bool pass = false;      // after <= before + 1e-6 for both monotones
};

struct MonotoneReport {
  std::vector<MonotoneRow> rows;
  bool all_pass = true;
};

// Applies every operation to the family steered from gamma and records how the
// robustness and the survival time respond. With permissive set, filters that
// violate their thermodynamic conditions are still applied but marked
// non-certified; otherwise the violation propagates as an error.
MonotoneReport monotone_audit(const InstrumentFamily& fam, const HermitianMatrix& gamma,
                              const ThermalisationSchedule& sched,
                              const std::vector<DeterministicAllowedOperation>& ops,
                              const std::vector<Lf1Filter>& filters, bool permissive = false,
                              const NumericConfig& cfg = NumericConfig::defaults());

// samplers for the randomized monotonicity suites; all draws come from the
// given engine so runs are reproducible by seed
Matrix random_gamma_commuting_unitary(const HermitianMatrix& gamma, std::mt19937_64& rng,
                                      const NumericConfig& cfg = NumericConfig::defaults());
QuantumChannelChoi random_gibbs_preserving_channel(const HermitianMatrix& gamma,
                                                   std::mt19937_64& rng,
                                                   const NumericConfig& cfg =
                                                       NumericConfig::defaults());
DeterministicAllowedOperation random_dao(int n_outcomes, int n_settings,
                                         const HermitianMatrix& gamma, std::mt19937_64& rng,
                                         const NumericConfig& cfg = NumericConfig::defaults());
Lf1Filter random_lf1(const HermitianMatrix& gamma, std::mt19937_64& rng,
                     const NumericConfig& cfg = NumericConfig::defaults());

}  // namespace thermosteer
