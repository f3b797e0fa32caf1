#pragma once

#include <optional>
#include <vector>

#include "thermosteer/hermitian.hpp"
#include "thermosteer/numeric.hpp"
#include "thermosteer/quantum.hpp"

namespace thermosteer {

// All |a|^{|x|} deterministic response functions x -> a, ordered
// lexicographically by the tuple (f(0), ..., f(|x|-1)).
class DeterministicStrategySet {
 public:
  DeterministicStrategySet(int n_outcomes, int n_settings, int cap = 4096);

  int n_outcomes() const { return n_outcomes_; }
  int n_settings() const { return n_settings_; }
  int count() const { return static_cast<int>(strategies_.size()); }
  const std::vector<std::vector<int>>& strategies() const { return strategies_; }
  // D(a|x,i) = 1 iff strategy i answers a on setting x
  bool d(int a, int x, int i) const { return strategies_[i][x] == a; }

 private:
  int n_outcomes_;
  int n_settings_;
  std::vector<std::vector<int>> strategies_;  // [i][x]
};

DeterministicStrategySet enumerate_strategies(int n_outcomes, int n_settings, int cap = 4096);

// Local-hidden-state ensemble: one sub-normalized state per deterministic
// strategy, total weight one.
class LhsModel {
 public:
  explicit LhsModel(std::vector<HermitianMatrix> etas,
                    const NumericConfig& cfg = NumericConfig::defaults());

  const std::vector<HermitianMatrix>& etas() const { return etas_; }

  // sigma_{a|x} = sum_i D(a|x,i) eta_i for the strategy set of matching size
  Assemblage realize(int n_outcomes, int n_settings,
                     const NumericConfig& cfg = NumericConfig::defaults()) const;

 private:
  std::vector<HermitianMatrix> etas_;
};

// Dual certificate of the robustness SDP. Feasibility means
// sum_{a,x} D(a|x,i) Y_{a|x} is positive semidefinite for every strategy i;
// the objective value is sum_{a,x} tr(Y_{a|x} gamma) p_{a|x} + omega.
class SteeringWitness {
 public:
  // probabilities[x][a] are the weights p_{a|x} entering the objective
  SteeringWitness(std::vector<std::vector<HermitianMatrix>> ys, double omega,
                  const HermitianMatrix& gamma,
                  const std::vector<std::vector<double>>& probabilities,
                  const NumericConfig& cfg = NumericConfig::defaults());

  int n_outcomes() const { return static_cast<int>(ys_[0].size()); }
  int n_settings() const { return static_cast<int>(ys_.size()); }
  const HermitianMatrix& y(int a, int x) const { return ys_[x][a]; }
  const std::vector<std::vector<HermitianMatrix>>& ys() const { return ys_; }
  const std::vector<std::vector<double>>& probabilities() const { return probabilities_; }
  double omega() const { return omega_; }
  double value() const { return value_; }

  // sum_{a,x} tr(Y_{a|x} sigma_{a|x})
  double pairing(const Assemblage& sigma) const;

 private:
  std::vector<std::vector<HermitianMatrix>> ys_;  // [x][a]
  std::vector<std::vector<double>> probabilities_;
  double omega_;
  double value_;
};

struct SrResult {
  double sr;       // thermalisation steering robustness, bits
  double q_star;   // 2^{-sr}, the optimal mixing weight
  LhsModel model;  // certifies {q* sigma_{a|x} + (1-q*) p_{a|x} gamma} in LHS
};

// Largest q such that q sigma + (1-q) {p_{a|x} gamma} stays unsteerable,
// solved as one joint SDP over (q, eta_i); sr = -log2 q.
SrResult sr_gamma(const Assemblage& sigma, const HermitianMatrix& gamma,
                  const NumericConfig& cfg = NumericConfig::defaults());

SteeringWitness sr_gamma_dual(const Assemblage& sigma, const HermitianMatrix& gamma,
                              const NumericConfig& cfg = NumericConfig::defaults());

struct LhsMembership {
  bool member;
  std::optional<LhsModel> model;  // reproduces sigma itself when member
  double margin;                  // 1 - 2^{-sr} when not a member, else 0
};

// match_statistics appends the |a|*|x| trace rows pinning tr(sum_i D eta_i)
// to p_{a|x}; they are implied by the full matrix constraints and exist for
// parity with the statistics-matched LHS set used downstream.
LhsMembership lhs_membership(const Assemblage& sigma, const HermitianMatrix& gamma,
                             bool match_statistics = false,
                             const NumericConfig& cfg = NumericConfig::defaults());

}  // namespace thermosteer
