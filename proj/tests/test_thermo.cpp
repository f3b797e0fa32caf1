#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "thermosteer/hermitian.hpp"
#include "thermosteer/quantum.hpp"
#include "thermosteer/steering.hpp"
#include "thermosteer/thermo.hpp"

using namespace thermosteer;

namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kLnSqrt2 = 0.5 * std::log(2.0);

Eigen::Vector2cd ket_plus() { return Eigen::Vector2cd(1.0 / kSqrt2, 1.0 / kSqrt2); }
Eigen::Vector2cd ket_minus() { return Eigen::Vector2cd(1.0 / kSqrt2, -1.0 / kSqrt2); }
Eigen::Vector2cd ket_z(int a) { return a == 0 ? Eigen::Vector2cd(1.0, 0.0) : Eigen::Vector2cd(0.0, 1.0); }

// eigenprojectors of X (x = 0) and Z (x = 1), outcome a
Matrix pauli_projector(int a, int x) {
  const Eigen::Vector2cd v = x == 0 ? (a == 0 ? ket_plus() : ket_minus()) : ket_z(a);
  return v * v.adjoint();
}

HermitianMatrix half_state() { return HermitianMatrix(Matrix::Identity(2, 2) / 2.0); }

Assemblage pauli_assemblage() {
  std::vector<std::vector<HermitianMatrix>> members(2);
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a) members[x].emplace_back(0.5 * pauli_projector(a, x));
  return Assemblage(std::move(members));
}

Assemblage flat_of(const Assemblage& sigma, const HermitianMatrix& gamma) {
  std::vector<std::vector<HermitianMatrix>> members(sigma.n_settings());
  for (int x = 0; x < sigma.n_settings(); ++x)
    for (int a = 0; a < sigma.n_outcomes(); ++a)
      members[x].emplace_back(sigma.probability(a, x) * gamma.mat());
  return Assemblage(std::move(members));
}

double assemblage_distance(const Assemblage& a, const Assemblage& b) {
  double total = 0.0;
  for (int x = 0; x < a.n_settings(); ++x)
    for (int out = 0; out < a.n_outcomes(); ++out)
      total += trace_norm(HermitianMatrix(a.at(out, x).mat() - b.at(out, x).mat(), 1.0));
  return total;
}

// coin flip then prepare the Pauli eigenstate: E_{a|x}(rho) = tr(rho) P_{a|x} / 2
InstrumentFamily pauli_preparation_family() {
  std::vector<std::vector<std::vector<Matrix>>> kraus(2);
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a) {
      const Eigen::Vector2cd target = x == 0 ? (a == 0 ? ket_plus() : ket_minus()) : ket_z(a);
      std::vector<Matrix> ops;
      for (int k = 0; k < 2; ++k) ops.push_back(target * ket_z(k).adjoint() / kSqrt2);
      kraus[x].push_back(ops);
    }
  return InstrumentFamily::from_kraus(kraus);
}

// both settings measure Z, outcomes relabeled; compatible by construction
InstrumentFamily relabeled_z_family() {
  const HermitianMatrix p0(pauli_projector(0, 1));
  const HermitianMatrix p1(pauli_projector(1, 1));
  return InstrumentFamily::from_povm({{p0, p1}, {p1, p0}});
}

double sr_of(const Assemblage& sigma) { return sr_gamma(sigma, half_state()).sr; }

}  // namespace

// ---------- schedules ----------

TEST_CASE("partial thermalisation schedule inverts its exponential") {
  const ThermalisationSchedule sched = ThermalisationSchedule::partial(2.0);
  CHECK(sched.horizon() == doctest::Approx(40.0));
  CHECK(sched.h(0.0) == doctest::Approx(1.0));
  CHECK(sched.h(2.0 * std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sched.h_inv(0.5) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(sched.h_inv(1.0) == 0.0);

  CHECK_THROWS_AS(ThermalisationSchedule::partial(0.0), DomainError);
  CHECK_THROWS_AS(ThermalisationSchedule::partial(-1.0), DomainError);
  CHECK_THROWS_AS(ThermalisationSchedule::partial(std::nan("")), DomainError);
  CHECK_THROWS_AS(sched.h(-0.1), DomainError);
  CHECK_THROWS_AS(sched.h_inv(0.0), DomainError);
  CHECK_THROWS_AS(sched.h_inv(1.5), DomainError);
  CHECK_THROWS_AS(sched.h_inv(std::nan("")), DomainError);
}

TEST_CASE("custom schedules accept an analytic or bisection inverse") {
  // h(t) = 1 / (1 + t) reaches 1e-6 only around t = 1e6
  auto h = [](double t) { return 1.0 / (1.0 + t); };
  auto inv = [](double q) { return 1.0 / q - 1.0; };
  const ThermalisationSchedule exact = ThermalisationSchedule::custom(h, inv, 2e6);
  CHECK(exact.h_inv(1.0 / kSqrt2) == doctest::Approx(kSqrt2 - 1.0).epsilon(1e-12));

  const ThermalisationSchedule bisected = ThermalisationSchedule::custom(h, 2e6);
  CHECK(bisected.h_inv(0.5) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(bisected.h_inv(1.0 / kSqrt2) == doctest::Approx(kSqrt2 - 1.0).epsilon(1e-8));
  CHECK(bisected.h_inv(1e-5) == doctest::Approx(1e5 - 1.0).epsilon(1e-8));
}

TEST_CASE("schedule validation rejects non-schedules") {
  auto expo = [](double t) { return std::exp(-t); };
  // h(0) far from 1
  CHECK_THROWS_AS(ThermalisationSchedule::custom([](double t) { return 0.9 * std::exp(-t); }, 40.0),
                  ValidationError);
  // not decreasing
  CHECK_THROWS_AS(ThermalisationSchedule::custom([](double) { return 1.0; }, 40.0),
                  ValidationError);
  // leaves [0, 1]
  CHECK_THROWS_AS(ThermalisationSchedule::custom([](double t) { return 1.0 - t / 10.0; }, 40.0),
                  ValidationError);
  // never reaches the 1e-6 mark inside the horizon
  CHECK_THROWS_AS(ThermalisationSchedule::custom(expo, 5.0), ValidationError);
  // inverse that does not match h
  CHECK_THROWS_AS(
      ThermalisationSchedule::custom(expo, [](double q) { return -2.0 * std::log(q); }, 40.0),
      ValidationError);
  CHECK_THROWS_AS(ThermalisationSchedule::custom(nullptr, 40.0), ValidationError);
  CHECK_THROWS_AS(ThermalisationSchedule::custom(expo, -1.0), DomainError);
}

// ---------- thermalising assemblages ----------

TEST_CASE("thermalise_h interpolates between the assemblage and its flat companion") {
  const Assemblage sigma = pauli_assemblage();
  const HermitianMatrix gamma = half_state();

  CHECK(assemblage_distance(thermalise_h(sigma, gamma, 1.0), sigma) < 1e-14);
  CHECK(assemblage_distance(thermalise_h(sigma, gamma, 0.0), flat_of(sigma, gamma)) < 1e-14);

  const Assemblage mid = thermalise_h(sigma, gamma, 0.3);
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a) {
      CHECK(mid.probability(a, x) == doctest::Approx(sigma.probability(a, x)).epsilon(1e-14));
      const Matrix want = 0.3 * sigma.at(a, x).mat() + 0.7 * 0.5 * gamma.mat();
      CHECK(trace_norm(HermitianMatrix(mid.at(a, x).mat() - want, 1.0)) < 1e-14);
    }

  CHECK_THROWS_AS(thermalise_h(sigma, gamma, -0.1), DomainError);
  CHECK_THROWS_AS(thermalise_h(sigma, gamma, 1.1), DomainError);
  CHECK_THROWS_AS(thermalise_h(sigma, HermitianMatrix(0.9 * Matrix::Identity(2, 2) / 2.0), 0.5),
                  DomainError);
  CHECK_THROWS_AS(thermalise_h(sigma, HermitianMatrix::identity(3), 0.5), ShapeError);
}

TEST_CASE("thermalised robustness follows the visibility law down to the boundary") {
  const Assemblage sigma = pauli_assemblage();
  const HermitianMatrix gamma = half_state();

  CHECK(std::pow(2.0, sr_of(thermalise_h(sigma, gamma, 0.9))) ==
        doctest::Approx(0.9 * kSqrt2).epsilon(1e-6));
  CHECK(sr_of(thermalise_h(sigma, gamma, 1.0 / kSqrt2)) < 1e-5);
  CHECK(sr_of(thermalise_h(sigma, gamma, 0.6)) < 1e-7);
}

TEST_CASE("thermalise through a schedule matches its evolution Choi") {
  const Assemblage sigma = pauli_assemblage();
  const HermitianMatrix gamma = half_state();
  const ThermalisationSchedule sched = ThermalisationSchedule::partial(1.5);
  const Evolution ev = schedule_evolution(gamma, sched);

  for (double t : {0.0, 0.4, 1.3, 6.0}) {
    const Assemblage direct = thermalise(sigma, gamma, sched, t);
    for (int x = 0; x < 2; ++x)
      for (int a = 0; a < 2; ++a) {
        const HermitianMatrix mapped = apply_choi(ev.choi_at(t), 2, 2, sigma.at(a, x));
        CHECK(trace_norm(HermitianMatrix(direct.at(a, x).mat() - mapped.mat(), 1.0)) < 1e-12);
      }
  }
  CHECK_THROWS_AS(thermalise(sigma, gamma, sched, -0.5), DomainError);
}

// ---------- survival times ----------

TEST_CASE("t_min under partial thermalisation is t0 ln sqrt(2) for the Pauli pair") {
  const Assemblage sigma = pauli_assemblage();
  const HermitianMatrix gamma = half_state();

  for (double t0 : {1.0, 2.0, 0.25}) {
    const ThermalisationSchedule sched = ThermalisationSchedule::partial(t0);
    CHECK(t_min(sigma, gamma, sched) == doctest::Approx(t0 * kLnSqrt2).epsilon(1e-5));
  }

  // rational schedule: h(t) = 1 / (1 + t) gives t_min = sqrt(2) - 1
  const ThermalisationSchedule rational = ThermalisationSchedule::custom(
      [](double t) { return 1.0 / (1.0 + t); }, [](double q) { return 1.0 / q - 1.0; }, 2e6);
  CHECK(t_min(sigma, gamma, rational) == doctest::Approx(kSqrt2 - 1.0).epsilon(1e-5));
}

TEST_CASE("survival time identity h(t_min) = 2^{-sr} holds for both schedule kinds") {
  const Assemblage sigma = pauli_assemblage();
  const HermitianMatrix gamma = half_state();
  const double sr = sr_of(sigma);

  const ThermalisationSchedule partial = ThermalisationSchedule::partial(3.0);
  const ThermalisationSchedule rational = ThermalisationSchedule::custom(
      [](double t) { return 1.0 / (1.0 + t); }, [](double q) { return 1.0 / q - 1.0; }, 2e6);
  for (const ThermalisationSchedule* sched : {&partial, &rational}) {
    const double t = t_min(sigma, gamma, *sched);
    CHECK(std::abs(sched->h(t) - std::pow(2.0, -sr)) < 1e-7);
  }
  // under h = exp(-t/t0) the survival time is just sr in units of t0 ln 2
  CHECK(t_min(sigma, gamma, partial) / (3.0 * std::log(2.0)) == doctest::Approx(sr).epsilon(1e-7));
}

TEST_CASE("family-level t_min agrees with the assemblage it steers") {
  const ThermalContext ctx(HermitianMatrix::zero(2), 300.0);
  const ThermalisationSchedule sched = ThermalisationSchedule::partial(1.0);

  // coin-flip preparation family steers the Pauli assemblage from gamma = I/2
  CHECK(t_min(pauli_preparation_family(), ctx, sched) ==
        doctest::Approx(kLnSqrt2).epsilon(1e-5));

  // a compatible family survives no time at all
  CHECK(t_min(relabeled_z_family(), ctx, sched) < 1e-6);
}

TEST_CASE("steerability switches off across t_min and never returns") {
  const Assemblage sigma = pauli_assemblage();
  const HermitianMatrix gamma = half_state();
  const ThermalisationSchedule sched = ThermalisationSchedule::partial(1.0);
  const double tm = t_min(sigma, gamma, sched);

  CHECK(sr_of(thermalise(sigma, gamma, sched, 0.95 * tm)) > 1e-7);
  CHECK(sr_of(thermalise(sigma, gamma, sched, 1.05 * tm)) < 1e-6);

  double prev = sr_of(sigma);
  for (double t : {0.1, 0.2, 0.3, 0.4, 0.6, 1.0}) {
    const double now = sr_of(thermalise(sigma, gamma, sched, t));
    CHECK(now <= prev + 1e-9);
    prev = now;
  }
}

// ---------- Davies maps ----------

TEST_CASE("davies map starts at the identity and relaxes populations at rate a") {
  const QuantumChannelChoi at_zero = davies_map(0.3, 1.0, 1.0, 0.0);
  CHECK(trace_norm(HermitianMatrix(at_zero.choi().mat() - identity_channel(2).choi().mat(), 1.0)) <
        1e-12);

  // excited state decays towards ground population p
  const double p = 0.3, t = 0.7;
  const HermitianMatrix excited(ket_z(1) * ket_z(1).adjoint());
  const HermitianMatrix out = map_of_choi(davies_map(p, 1.0, 1.0, t), excited);
  CHECK(out.mat()(0, 0).real() == doctest::Approx(p * (1.0 - std::exp(-t))).epsilon(1e-12));

  // pure dephasing (a = 0) leaves populations alone and damps coherence
  const HermitianMatrix plus(ket_plus() * ket_plus().adjoint());
  const HermitianMatrix dephased = map_of_choi(davies_map(0.4, 0.0, 2.0, 0.5), plus);
  CHECK(dephased.mat()(0, 0).real() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(dephased.mat()(0, 1).real() == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("davies map with equal rates is partial thermalisation") {
  for (double p : {0.3, 0.5, 0.8})
    for (double g : {0.5, 1.0, 2.0}) {
      Matrix gm = Matrix::Zero(2, 2);
      gm(0, 0) = p;
      gm(1, 1) = 1.0 - p;
      const Evolution ev = schedule_evolution(HermitianMatrix(gm),
                                              ThermalisationSchedule::partial(1.0 / g));
      for (double t : {0.1, 1.0, 5.0}) {
        const QuantumChannelChoi davies = davies_map(p, g, g, t);
        CHECK(trace_norm(HermitianMatrix(davies.choi().mat() - ev.choi_at(t).mat(), 1.0)) <
              1e-10);
      }
    }

  // long times land on the thermalising channel
  Matrix gm = Matrix::Zero(2, 2);
  gm(0, 0) = 0.3;
  gm(1, 1) = 0.7;
  const QuantumChannelChoi late = davies_map(0.3, 1.0, 1.0, 40.0);
  const QuantumChannelChoi reset = thermalising_channel(HermitianMatrix(gm), 2);
  CHECK(trace_norm(HermitianMatrix(late.choi().mat() - reset.choi().mat(), 1.0)) < 1e-15);
}

TEST_CASE("davies map stays CPTP across its admissible parameter range") {
  for (double p : {0.2, 0.5, 0.9})
    for (auto [a, g] : std::vector<std::pair<double, double>>{{2.0, 1.0}, {1.0, 1.0},
                                                              {0.5, 1.0}, {0.0, 1.0}})
      for (double t : {0.0, 0.3, 2.0}) {
        const QuantumChannelChoi ch = davies_map(p, a, g, t);
        CHECK(ch.trace_preserving_residual() < 1e-12);
        CHECK(min_eigenvalue(ch.choi()) > -1e-10);
      }

  CHECK_THROWS_AS(davies_map(0.0, 1.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(davies_map(1.0, 1.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(davies_map(std::nan(""), 1.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(davies_map(0.5, -1.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(davies_map(0.5, 2.0, 0.9, 1.0), DomainError);  // g < a/2
  CHECK_THROWS_AS(davies_map(0.5, 1.0, 1.0, -0.1), DomainError);
}

// ---------- evolutions and t* ----------

TEST_CASE("schedule and envelope evolutions produce the affine Choi family") {
  const HermitianMatrix gamma = half_state();
  const Evolution sched_ev = schedule_evolution(gamma, ThermalisationSchedule::partial(1.0));
  CHECK(trace_norm(HermitianMatrix(sched_ev.choi_at(0.0).mat() - identity_channel(2).choi().mat(),
                                   1.0)) < 1e-12);
  CHECK(trace_norm(HermitianMatrix(sched_ev.choi_at(50.0).mat() -
                                   thermalising_channel(gamma, 2).choi().mat(), 1.0)) < 1e-12);

  const Evolution env = envelope_evolution(gamma, [](double) { return 0.5; }, "half");
  const Matrix want = 0.5 * identity_channel(2).choi().mat() +
                      0.5 * kron(gamma.mat(), Matrix::Identity(2, 2) / 2.0);
  CHECK(trace_norm(HermitianMatrix(env.choi_at(3.0).mat() - want, 1.0)) < 1e-14);
  CHECK(env.label == "half");

  CHECK_THROWS_AS(schedule_evolution(HermitianMatrix::identity(2),
                                     ThermalisationSchedule::partial(1.0)),
                  DomainError);
  CHECK_THROWS_AS(envelope_evolution(gamma, nullptr, "none"), ValidationError);
}

TEST_CASE("find_t_star recovers the partial-thermalisation survival time") {
  const Assemblage sigma = pauli_assemblage();
  const HermitianMatrix gamma = half_state();
  const Evolution ev = schedule_evolution(gamma, ThermalisationSchedule::partial(1.0));

  // short window: crossing well resolved, but the map never fully thermalises
  const TStarScan tight = find_t_star(sigma, gamma, ev, 1.0, 40);
  REQUIRE(tight.t_star.has_value());
  CHECK(*tight.t_star == doctest::Approx(kLnSqrt2).epsilon(2e-3));
  CHECK(tight.crossings.size() == 1);
  CHECK(tight.thermalisation_warning);
  CHECK_FALSE(tight.positivity_only);

  // full window: no warning, coarser bisection floor
  const TStarScan wide = find_t_star(sigma, gamma, ev, 20.0, 40);
  REQUIRE(wide.t_star.has_value());
  CHECK(*wide.t_star == doctest::Approx(kLnSqrt2).epsilon(0.05));
  CHECK_FALSE(wide.thermalisation_warning);
}

TEST_CASE("find_t_star reports an immediate member as t* = 0") {
  const Assemblage sigma = pauli_assemblage();
  const HermitianMatrix gamma = half_state();
  const Evolution ev = schedule_evolution(gamma, ThermalisationSchedule::partial(1.0));

  const TStarScan scan = find_t_star(flat_of(sigma, gamma), gamma, ev, 1.0, 10);
  REQUIRE(scan.t_star.has_value());
  CHECK(*scan.t_star == 0.0);
  CHECK(scan.crossings.empty());
}

TEST_CASE("find_t_star locates the oscillatory envelope crossing") {
  const Assemblage sigma = pauli_assemblage();
  const HermitianMatrix gamma = half_state();
  // decaying cosine envelope: dips below 1/sqrt(2) once and never recovers
  const Evolution ev = envelope_evolution(
      gamma, [](double t) { return std::exp(-t) * (1.0 + std::cos(10.0 * t)) / 2.0; },
      "decaying cosine");

  const TStarScan scan = find_t_star(sigma, gamma, ev, 1.0, 60);
  REQUIRE(scan.t_star.has_value());
  CHECK(*scan.t_star == doctest::Approx(0.09771568600852).epsilon(2e-2));
  CHECK(std::abs(*scan.t_star - 0.09771568600852) < 1e-3);
  CHECK(scan.crossings.size() == 1);
  CHECK_FALSE(scan.positivity_only);
}

TEST_CASE("find_t_star flags maps that are positive but not completely positive") {
  const Assemblage sigma = pauli_assemblage();
  const HermitianMatrix gamma = half_state();
  // c runs down to -0.4: past c = -1/3 the affine map leaves the CP cone yet
  // stays positive on states
  const Evolution ev =
      envelope_evolution(gamma, [](double t) { return 1.0 - 1.4 * t; }, "overshoot");

  const TStarScan scan = find_t_star(sigma, gamma, ev, 1.0, 50);
  REQUIRE(scan.t_star.has_value());
  CHECK(*scan.t_star == doctest::Approx(0.20920944200961).epsilon(1e-2));
  CHECK(scan.positivity_only);
}

TEST_CASE("find_t_star reports the margin when the window is inconclusive") {
  const Assemblage sigma = pauli_assemblage();
  const HermitianMatrix gamma = half_state();
  const Evolution slow = schedule_evolution(gamma, ThermalisationSchedule::partial(100.0));

  const TStarScan scan = find_t_star(sigma, gamma, slow, 1.0, 10);
  CHECK_FALSE(scan.t_star.has_value());
  CHECK(scan.crossings.empty());
  CHECK(scan.thermalisation_warning);
  // sr at t_max satisfies 2^{sr} = h sqrt(2) with h = exp(-1/100)
  const double expected = 1.0 - 1.0 / (std::exp(-0.01) * kSqrt2);
  CHECK(scan.margin_at_t_max == doctest::Approx(expected).epsilon(1e-4));
}

TEST_CASE("find_t_star validates its inputs and the maps it scans") {
  const Assemblage sigma = pauli_assemblage();
  const HermitianMatrix gamma = half_state();
  const Evolution ev = schedule_evolution(gamma, ThermalisationSchedule::partial(1.0));

  CHECK_THROWS_AS(find_t_star(sigma, gamma, ev, 0.0, 10), DomainError);
  CHECK_THROWS_AS(find_t_star(sigma, gamma, ev, 1.0, 1), DomainError);

  Evolution wrong_dim = ev;
  wrong_dim.dim = 3;
  CHECK_THROWS_AS(find_t_star(sigma, gamma, wrong_dim, 1.0, 10), ShapeError);

  // trace-decreasing map
  Evolution leaky = ev;
  leaky.choi_at = [](double) {
    return HermitianMatrix(0.5 * identity_channel(2).choi().mat(), 1.0);
  };
  CHECK_THROWS_AS(find_t_star(sigma, gamma, leaky, 1.0, 10), ValidationError);

  // negative map: c = -2 sends pure states to indefinite operators
  const Evolution bad = envelope_evolution(gamma, [](double) { return -2.0; }, "negative");
  CHECK_THROWS_AS(find_t_star(sigma, gamma, bad, 1.0, 10), ValidationError);
}
