#pragma once

#include <vector>

#include "thermosteer/hermitian.hpp"
#include "thermosteer/numeric.hpp"

namespace thermosteer {

// Hamiltonian in eV, temperature in kelvin. The derived thermal state is
// always full-rank because T is finite and strictly positive.
struct ThermalContext {
  static constexpr double kB = 8.617333262e-5;  // eV per kelvin

  HermitianMatrix hamiltonian;
  double temperature;

  ThermalContext(HermitianMatrix h, double t_kelvin);

  double kbt() const { return kB * temperature; }
};

// gamma = exp(-H/kBT) / tr exp(-H/kBT); energies are shifted by the ground
// energy before exponentiation so large spectra cannot overflow.
HermitianMatrix thermal_state(const ThermalContext& ctx,
                              const NumericConfig& cfg = NumericConfig::defaults());

// Trace-1 Choi operator on out (x) in: J = (1/d_in) sum_ij Phi(E_ij) (x) E_ij.
// A map is trace-preserving iff tr_out(J) = I/d_in. Filters (trace
// non-increasing maps) use the same representation; only positivity is a
// construction invariant.
class QuantumChannelChoi {
 public:
  QuantumChannelChoi(HermitianMatrix choi, int d_in, int d_out,
                     const NumericConfig& cfg = NumericConfig::defaults());

  const HermitianMatrix& choi() const { return choi_; }
  int d_in() const { return d_in_; }
  int d_out() const { return d_out_; }

  double trace_preserving_residual() const;  // |tr_out(J) - I/d_in|_1
  bool is_trace_preserving() const { return trace_preserving_residual() <= 1e-9; }

 private:
  HermitianMatrix choi_;
  int d_in_;
  int d_out_;
};

QuantumChannelChoi identity_channel(int d);
// rho -> gamma tr(rho); J = gamma (x) I/d_in.
QuantumChannelChoi thermalising_channel(const HermitianMatrix& gamma, int d_in);

QuantumChannelChoi choi_of_map(const std::vector<Matrix>& kraus,
                               const NumericConfig& cfg = NumericConfig::defaults());
HermitianMatrix map_of_choi(const QuantumChannelChoi& ch, const HermitianMatrix& rho,
                            const NumericConfig& cfg = NumericConfig::defaults());
// same contraction for a raw Choi operator; accepts maps that are merely
// Hermiticity-preserving (no complete-positivity gate)
HermitianMatrix apply_choi(const HermitianMatrix& choi, int d_in, int d_out,
                           const HermitianMatrix& rho);

// second applied after first
QuantumChannelChoi channel_compose(const QuantumChannelChoi& second,
                                   const QuantumChannelChoi& first,
                                   const NumericConfig& cfg = NumericConfig::defaults());
// (Phi_a (x) Phi_b) with composite spaces ordered (out_a out_b) x (in_a in_b)
QuantumChannelChoi channel_tensor(const QuantumChannelChoi& a, const QuantumChannelChoi& b,
                                  const NumericConfig& cfg = NumericConfig::defaults());

// (1-eps)|Phi+><Phi+| + eps I/d^2 on the doubled space; eps in [0,1], full
// rank for eps > 0.
HermitianMatrix isotropic_state(int d, double eps);

struct GibbsCheck {
  bool preserving;
  double residual;  // |ch(gamma) - gamma|_1
};
GibbsCheck is_gibbs_preserving(const QuantumChannelChoi& ch, const HermitianMatrix& gamma,
                               const NumericConfig& cfg = NumericConfig::defaults());

// Jointly implemented filters E_{a|x} on one system: every setting sums to a
// trace-preserving channel and all settings share the same average channel
// within 1e-9 in Choi trace distance; violations are rejected at construction.
class InstrumentFamily {
 public:
  // filters indexed [x][a]
  static InstrumentFamily from_choi(std::vector<std::vector<QuantumChannelChoi>> filters,
                                    const NumericConfig& cfg = NumericConfig::defaults());
  // kraus[x][a] is the Kraus list of filter a|x
  static InstrumentFamily from_kraus(
      const std::vector<std::vector<std::vector<Matrix>>>& kraus,
      const NumericConfig& cfg = NumericConfig::defaults());
  // povms[x][a] are POVM elements; filter a|x is rho -> sqrt(E) rho sqrt(E)
  static InstrumentFamily from_povm(const std::vector<std::vector<HermitianMatrix>>& povms,
                                    const NumericConfig& cfg = NumericConfig::defaults());

  int n_outcomes() const { return n_outcomes_; }
  int n_settings() const { return n_settings_; }
  int dim() const { return dim_; }
  const QuantumChannelChoi& filter(int a, int x) const;
  const std::vector<std::vector<QuantumChannelChoi>>& filters() const { return filters_; }
  QuantumChannelChoi average_channel(const NumericConfig& cfg = NumericConfig::defaults()) const;

 private:
  InstrumentFamily(std::vector<std::vector<QuantumChannelChoi>> filters, int dim);

  std::vector<std::vector<QuantumChannelChoi>> filters_;  // [x][a]
  int n_outcomes_;
  int n_settings_;
  int dim_;
};

// Sub-normalized steered states sigma_{a|x} with a setting-independent
// reduced state of unit trace.
class Assemblage {
 public:
  // members indexed [x][a]
  Assemblage(std::vector<std::vector<HermitianMatrix>> members,
             const NumericConfig& cfg = NumericConfig::defaults());

  int n_outcomes() const { return n_outcomes_; }
  int n_settings() const { return n_settings_; }
  int dim() const { return dim_; }
  const HermitianMatrix& at(int a, int x) const;
  const std::vector<std::vector<HermitianMatrix>>& members() const { return members_; }
  double probability(int a, int x) const { return at(a, x).trace(); }
  HermitianMatrix reduced() const;  // sum_a sigma_{a|0}

 private:
  std::vector<std::vector<HermitianMatrix>> members_;  // [x][a]
  int n_outcomes_;
  int n_settings_;
  int dim_;
};

Assemblage apply_instrument(const InstrumentFamily& fam, const HermitianMatrix& rho,
                            const NumericConfig& cfg = NumericConfig::defaults());

// {E_{a|x} (x) I_E} with d_E equal to the system dimension.
InstrumentFamily extend_with_ancilla(const InstrumentFamily& fam,
                                     const NumericConfig& cfg = NumericConfig::defaults());

}  // namespace thermosteer
