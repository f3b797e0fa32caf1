// Python facade: plain functions over numpy arrays. Members and operator
// grids are nested lists indexed [setting][outcome]; complex matrices map to
// numpy complex128. Heavier plumbing (scenario files, audits) stays with the
// command-line tool.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <vector>

#include "thermosteer/sdp.hpp"
#include "thermosteer/steering.hpp"
#include "thermosteer/thermo.hpp"
#include "thermosteer/work.hpp"

namespace py = pybind11;
using namespace thermosteer;

namespace {

using Grid = std::vector<std::vector<Matrix>>;

Assemblage assemblage_of(const Grid& members) {
  std::vector<std::vector<HermitianMatrix>> ms;
  ms.reserve(members.size());
  for (const auto& row : members) {
    std::vector<HermitianMatrix> hs;
    hs.reserve(row.size());
    for (const Matrix& m : row) hs.emplace_back(m);
    ms.push_back(std::move(hs));
  }
  return Assemblage(std::move(ms));
}

HamiltonianFamily family_of(const Grid& hams) {
  std::vector<std::vector<HermitianMatrix>> ms;
  ms.reserve(hams.size());
  for (const auto& row : hams) {
    std::vector<HermitianMatrix> hs;
    hs.reserve(row.size());
    for (const Matrix& m : row) hs.emplace_back(m);
    ms.push_back(std::move(hs));
  }
  return HamiltonianFamily(std::move(ms));
}

Grid grid_of_family(const HamiltonianFamily& fam) {
  Grid out(static_cast<std::size_t>(fam.n_settings()));
  for (int x = 0; x < fam.n_settings(); ++x) {
    for (int a = 0; a < fam.n_outcomes(); ++a) out[x].push_back(fam.at(a, x).mat());
  }
  return out;
}

py::dict row_dict(const WorkSweepRow& r) {
  py::dict d;
  d["delta"] = r.delta;
  d["classical_bound"] = r.classical_bound;
  d["quantum_value"] = r.quantum_value;
  d["ratio"] = r.ratio;
  d["sr"] = r.sr;
  d["t_min_over_t0"] = r.t_min_over_t0;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "thermalisation steering robustness, survival times, work certificates";

  m.attr("K_BOLTZMANN_EV") = ThermalContext::kB;

  m.def(
      "thermal_state",
      [](const Matrix& hamiltonian, double t_kelvin) {
        return thermal_state(ThermalContext(HermitianMatrix(hamiltonian), t_kelvin)).mat();
      },
      py::arg("hamiltonian"), py::arg("t_kelvin"),
      "Boltzmann state exp(-H/kBT)/Z for H in eV and T in kelvin.");

  m.def(
      "isotropic_state", [](int d, double eps) { return isotropic_state(d, eps).mat(); },
      py::arg("d"), py::arg("eps"),
      "(1-eps)|Phi+><Phi+| + eps I/d^2 on the doubled space.");

  m.def(
      "eigh",
      [](const Matrix& mat) {
        const EigResult e = eig_hermitian(HermitianMatrix(mat));
        return py::make_tuple(e.values, e.vectors);
      },
      py::arg("matrix"), "Jacobi eigendecomposition of a Hermitian matrix.");

  m.def(
      "sr",
      [](const Grid& members, const Matrix& gamma) {
        const SrResult r = sr_gamma(assemblage_of(members), HermitianMatrix(gamma));
        std::vector<Matrix> etas;
        for (const HermitianMatrix& eta : r.model.etas()) etas.push_back(eta.mat());
        py::dict d;
        d["sr"] = r.sr;
        d["q_star"] = r.q_star;
        d["etas"] = etas;
        return d;
      },
      py::arg("members"), py::arg("gamma"),
      "Thermalisation steering robustness in bits; members indexed [x][a].");

  m.def(
      "sr_dual",
      [](const Grid& members, const Matrix& gamma) {
        const HermitianMatrix g(gamma);
        const Assemblage sigma = assemblage_of(members);
        const SteeringWitness w = sr_gamma_dual(sigma, g);
        Grid ys(static_cast<std::size_t>(w.n_settings()));
        for (int x = 0; x < w.n_settings(); ++x) {
          for (int a = 0; a < w.n_outcomes(); ++a) ys[x].push_back(w.y(a, x).mat());
        }
        py::dict d;
        d["value"] = w.value();
        d["omega"] = w.omega();
        d["pairing"] = w.pairing(sigma);
        d["ys"] = ys;
        return d;
      },
      py::arg("members"), py::arg("gamma"), "Dual witness certifying the robustness.");

  m.def(
      "lhs_member",
      [](const Grid& members, const Matrix& gamma, bool match_statistics) {
        const LhsMembership r =
            lhs_membership(assemblage_of(members), HermitianMatrix(gamma), match_statistics);
        py::dict d;
        d["member"] = r.member;
        d["margin"] = r.margin;
        return d;
      },
      py::arg("members"), py::arg("gamma"), py::arg("match_statistics") = false,
      "Local-hidden-state membership with steering margin when outside.");

  m.def(
      "t_min_partial",
      [](const Grid& members, const Matrix& gamma, double t0) {
        return t_min(assemblage_of(members), HermitianMatrix(gamma),
                     ThermalisationSchedule::partial(t0));
      },
      py::arg("members"), py::arg("gamma"), py::arg("t0"),
      "Survival time under h(t) = exp(-t/t0).");

  m.def(
      "t_min_custom",
      [](const Grid& members, const Matrix& gamma, const std::function<double(double)>& h,
         double horizon) {
        return t_min(assemblage_of(members), HermitianMatrix(gamma),
                     ThermalisationSchedule::custom(h, horizon));
      },
      py::arg("members"), py::arg("gamma"), py::arg("h"), py::arg("horizon"),
      "Survival time under a caller-supplied schedule h(t).");

  m.def(
      "find_t_star_envelope",
      [](const Grid& members, const Matrix& gamma, const std::function<double(double)>& c,
         double t_max, int grid_points) {
        const HermitianMatrix g(gamma);
        const TStarScan scan = find_t_star(assemblage_of(members), g,
                                           envelope_evolution(g, c, "envelope"), t_max,
                                           grid_points);
        py::dict d;
        d["t_star"] = scan.t_star ? py::cast(*scan.t_star) : py::none();
        d["crossings"] = scan.crossings;
        d["margin_at_t_max"] = scan.margin_at_t_max;
        d["thermalisation_warning"] = scan.thermalisation_warning;
        d["positivity_only"] = scan.positivity_only;
        return d;
      },
      py::arg("members"), py::arg("gamma"), py::arg("c"), py::arg("t_max"),
      py::arg("grid_points") = 60,
      "Steerability horizon under the affine evolution with envelope c(t).");

  m.def(
      "davies_choi",
      [](double p, double a, double g, double t) { return davies_map(p, a, g, t).choi().mat(); },
      py::arg("p"), py::arg("a"), py::arg("g"), py::arg("t"),
      "Choi operator (out x in, trace 1) of the qubit Davies map.");

  m.def(
      "diamond_norm",
      [](const Matrix& delta_choi, int d_in, int d_out) {
        return diamond_norm(HermitianMatrix(delta_choi), d_in, d_out);
      },
      py::arg("delta_choi"), py::arg("d_in"), py::arg("d_out"),
      "Diamond norm of a Hermiticity-preserving map from its trace-normalized Choi.");

  m.def(
      "pauli_hamiltonians",
      [](double delta, double t_kelvin) {
        return grid_of_family(HamiltonianFamily::pauli_xz(delta, t_kelvin));
      },
      py::arg("delta"), py::arg("t_kelvin"),
      "The two-setting X/Z Hamiltonian family at deficit scale delta.");

  m.def(
      "delta_bar",
      [](const Grid& members, const Matrix& gamma, const Grid& hamiltonians, double t_kelvin,
         double eta) {
        const WorkReport r = delta_bar(assemblage_of(members), HermitianMatrix(gamma),
                                       family_of(hamiltonians), t_kelvin, eta);
        py::list rows;
        for (const WorkRow& row : r.rows) {
          py::dict e;
          e["a"] = row.a;
          e["x"] = row.x;
          e["probability"] = row.probability;
          e["w_ext"] = row.w_ext;
          e["w_inf"] = row.w_inf;
          e["delta"] = row.delta;
          rows.append(e);
        }
        py::dict d;
        d["delta_bar"] = r.delta_bar;
        d["eta_threshold"] = r.eta_threshold;
        d["in_h_eta"] = r.in_h_eta;
        d["rows"] = rows;
        return d;
      },
      py::arg("members"), py::arg("gamma"), py::arg("hamiltonians"), py::arg("t_kelvin"),
      py::arg("eta") = 1e-3, "Four-batch averaged work-deficit advantage in eV.");

  m.def(
      "work_sweep",
      [](const Grid& members, const Matrix& gamma, double t_kelvin,
         const std::vector<double>& deltas) {
        py::list out;
        for (const WorkSweepRow& r :
             work_sweep(assemblage_of(members), HermitianMatrix(gamma), t_kelvin, deltas)) {
          out.append(row_dict(r));
        }
        return out;
      },
      py::arg("members"), py::arg("gamma"), py::arg("t_kelvin"), py::arg("deltas"),
      "Classical bound, quantum value and ratio per deficit scale.");

  m.def(
      "certificate",
      [](const Grid& members, const Matrix& gamma, double t_kelvin) {
        const CertificateResult cert =
            certificate_hamiltonians(assemblage_of(members), HermitianMatrix(gamma), t_kelvin);
        py::dict d;
        d["quantum"] = cert.quantum;
        d["classical"] = cert.classical;
        d["gap"] = cert.gap;
        d["hamiltonians"] = grid_of_family(cert.family);
        return d;
      },
      py::arg("members"), py::arg("gamma"), py::arg("t_kelvin"),
      "Witness-derived Hamiltonian family whose advantage ratio is 2^sr.");

  m.def(
      "sr_from_work",
      [](const Grid& members, const Matrix& gamma, const std::vector<Grid>& candidates,
         double eta, double t_kelvin) {
        std::vector<HamiltonianFamily> fams;
        fams.reserve(candidates.size());
        for (const Grid& g : candidates) fams.push_back(family_of(g));
        const WorkAdvantage adv =
            sr_from_work(assemblage_of(members), HermitianMatrix(gamma), fams, eta, t_kelvin);
        py::dict d;
        d["ratio"] = adv.ratio;
        d["hamiltonians"] = grid_of_family(adv.family);
        return d;
      },
      py::arg("members"), py::arg("gamma"), py::arg("candidates"), py::arg("eta"),
      py::arg("t_kelvin"), "Best advantage ratio over admissible candidate families.");
}
