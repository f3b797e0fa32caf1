// Scenario-driven front end: reads a JSON scenario, runs one of the solver
// pipelines (sr, tmin, work, audit, tstar) and emits canonical JSON or CSV.
// Exit codes: 0 success, 2 solver failure, 3 validation or domain error.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "thermosteer/serialize.hpp"

namespace ts = thermosteer;
using ts::json;

namespace {

struct Scenario {
  int dim = 0;
  double temperature = 0.0;
  ts::HermitianMatrix hamiltonian = ts::HermitianMatrix::zero(1);
  ts::HermitianMatrix gamma = ts::HermitianMatrix::zero(1);
  std::optional<ts::InstrumentFamily> instruments;
  std::optional<ts::ThermalisationSchedule> schedule;
  json schedule_echo;
  std::vector<std::pair<double, double>> envelope;  // empty: evolve by schedule
  int audit_n = 200;
  unsigned long long audit_seed = 7;
  std::vector<ts::Matrix> audit_filters;  // appended after the sampled ones
  std::string output_path;                // overridden by --out
};

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ts::ValidationError("scenario: cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ts::ValidationError("scenario: '" + path + "' is not valid JSON: " + e.what());
  }
}

// coin-flip preparation instruments E_{a|x}(rho) = tr(rho) P_{a|x} / 2 for the
// X and Z bases; both settings average to full thermalisation toward I/2 and
// the steered assemblage is the two-Pauli one regardless of the input state
ts::InstrumentFamily projective_pauli_family(int dim, const ts::NumericConfig& cfg) {
  if (dim != 2) {
    throw ts::ValidationError("scenario: the projective-pauli preset is qubit-only");
  }
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Vector2cd targets[2][2];
  targets[0][0] << s, s;    // +x
  targets[0][1] << s, -s;   // -x
  targets[1][0] << 1, 0;    // +z
  targets[1][1] << 0, 1;    // -z
  std::vector<std::vector<std::vector<ts::Matrix>>> kraus(2);
  for (int x = 0; x < 2; ++x) {
    for (int a = 0; a < 2; ++a) {
      std::vector<ts::Matrix> ops;
      for (int k = 0; k < 2; ++k) {
        ts::Matrix ket = ts::Matrix::Zero(2, 1);
        ket(k, 0) = 1.0;
        ops.push_back(targets[x][a] * ket.adjoint() / std::sqrt(2.0));
      }
      kraus[x].push_back(std::move(ops));
    }
  }
  return ts::InstrumentFamily::from_kraus(kraus, cfg);
}

ts::InstrumentFamily instruments_from_json(const json& j, int dim,
                                           const ts::NumericConfig& cfg) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "projective-pauli") return projective_pauli_family(dim, cfg);
  if (kind == "kraus") {
    const int na = j.at("n_outcomes").get<int>();
    const int nx = j.at("n_settings").get<int>();
    if (na <= 0 || nx <= 0) {
      throw ts::ValidationError("scenario: instrument shape must be positive");
    }
    std::vector<std::vector<std::vector<ts::Matrix>>> kraus(nx);
    for (int x = 0; x < nx; ++x) {
      for (int a = 0; a < na; ++a) {
        const std::string key = std::to_string(a) + "|" + std::to_string(x);
        const json& ops_j = j.at("operators").at(key);
        if (!ops_j.is_array() || ops_j.empty()) {
          throw ts::ValidationError("scenario: operator list for '" + key + "' is empty");
        }
        std::vector<ts::Matrix> ops;
        for (const json& op : ops_j) ops.push_back(ts::complex_matrix_from_json(op));
        kraus[x].push_back(std::move(ops));
      }
    }
    return ts::InstrumentFamily::from_kraus(kraus, cfg);
  }
  if (kind == "choi") {
    json fam = j;
    fam["dim"] = dim;
    return ts::instrument_family_from_json(fam, cfg);
  }
  throw ts::ValidationError("scenario: unknown instrument kind '" + kind + "'");
}

Scenario load_scenario(const std::string& path, const ts::NumericConfig& cfg) {
  const json j = load_json_file(path);
  Scenario sc;

  const json& system = j.at("system");
  sc.dim = system.at("dim").get<int>();
  if (sc.dim < 2) throw ts::ValidationError("scenario: system dim must be at least 2");
  sc.temperature = system.at("temperature").get<double>();
  sc.hamiltonian = system.contains("hamiltonian")
                       ? ts::matrix_from_json(system.at("hamiltonian"), cfg)
                       : ts::HermitianMatrix::zero(sc.dim);
  if (sc.hamiltonian.dim() != sc.dim) {
    throw ts::ValidationError("scenario: hamiltonian dimension does not match system dim");
  }
  sc.gamma = ts::thermal_state(ts::ThermalContext(sc.hamiltonian, sc.temperature), cfg);

  sc.instruments = instruments_from_json(j.at("instruments"), sc.dim, cfg);
  if (sc.instruments->dim() != sc.dim) {
    throw ts::ValidationError("scenario: instrument dimension does not match system dim");
  }

  if (j.contains("schedule")) {
    sc.schedule_echo = j.at("schedule");
    sc.schedule = ts::schedule_from_json(sc.schedule_echo);
  }

  if (j.contains("evolution")) {
    const json& ev = j.at("evolution");
    const std::string kind = ev.at("kind").get<std::string>();
    if (kind == "envelope-table") {
      for (const json& s : ev.at("samples")) {
        if (!s.is_array() || s.size() != 2) {
          throw ts::ValidationError("scenario: envelope samples must be [t, c] pairs");
        }
        const double t = s[0].get<double>();
        const double c = s[1].get<double>();
        if (!sc.envelope.empty() && t <= sc.envelope.back().first) {
          throw ts::ValidationError("scenario: envelope times must strictly increase");
        }
        if (c < -1e-12 || c > 1.0 + 1e-12) {
          throw ts::ValidationError("scenario: envelope values must lie in [0, 1]");
        }
        sc.envelope.emplace_back(t, c);
      }
      if (sc.envelope.size() < 2 || sc.envelope.front().first != 0.0 ||
          std::abs(sc.envelope.front().second - 1.0) > 1e-12) {
        throw ts::ValidationError("scenario: envelope tables must start at (0, 1)");
      }
    } else if (kind != "schedule") {
      throw ts::ValidationError("scenario: unknown evolution kind '" + kind + "'");
    }
  }

  if (j.contains("operations") && j.at("operations").contains("audit")) {
    const json& audit = j.at("operations").at("audit");
    if (audit.contains("n")) sc.audit_n = audit.at("n").get<int>();
    if (audit.contains("seed")) sc.audit_seed = audit.at("seed").get<unsigned long long>();
    if (audit.contains("filters")) {
      for (const json& k : audit.at("filters")) {
        sc.audit_filters.push_back(ts::complex_matrix_from_json(k));
      }
    }
  }
  if (j.contains("output")) sc.output_path = j.at("output").get<std::string>();
  return sc;
}

ts::NumericConfig apply_tol_overrides(const std::string& overrides) {
  ts::NumericConfig cfg = ts::NumericConfig::defaults();
  if (overrides.empty()) return cfg;
  std::size_t pos = 0;
  while (pos < overrides.size()) {
    const std::size_t comma = overrides.find(',', pos);
    const std::string item =
        overrides.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    pos = comma == std::string::npos ? overrides.size() : comma + 1;
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ts::ValidationError("tol-overrides: expected key=value, got '" + item + "'");
    }
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    try {
      if (key == "tol_herm") cfg.tol_herm = std::stod(value);
      else if (key == "tol_psd") cfg.tol_psd = std::stod(value);
      else if (key == "tol_eig") cfg.tol_eig = std::stod(value);
      else if (key == "max_iters") cfg.max_iters = std::stoi(value);
      else if (key == "tol_gap") cfg.tol_gap = std::stod(value);
      else if (key == "tol_feas") cfg.tol_feas = std::stod(value);
      else if (key == "step_fraction") cfg.step_fraction = std::stod(value);
      else if (key == "infeas_ratio") cfg.infeas_ratio = std::stod(value);
      else if (key == "stagnation_window") cfg.stagnation_window = std::stoi(value);
      else throw ts::ValidationError("tol-overrides: unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw ts::ValidationError("tol-overrides: cannot parse value '" + value + "'");
    } catch (const std::out_of_range&) {
      throw ts::ValidationError("tol-overrides: value '" + value + "' is out of range");
    }
  }
  return cfg;
}

void write_output(const std::string& content, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ts::ValidationError("output: cannot open '" + out_path + "' for writing");
  out << content;
  if (!out) throw ts::ValidationError("output: short write to '" + out_path + "'");
}

ts::ThermalisationSchedule require_schedule(const Scenario& sc) {
  if (!sc.schedule) {
    throw ts::ValidationError("scenario: this command requires a schedule block");
  }
  return *sc.schedule;
}

// ---------- commands ----------

json cmd_sr(const Scenario& sc, const ts::NumericConfig& cfg) {
  const ts::Assemblage sigma = ts::apply_instrument(*sc.instruments, sc.gamma, cfg);
  const ts::SrResult r = ts::sr_gamma(sigma, sc.gamma, cfg);
  const ts::SteeringWitness w = ts::sr_gamma_dual(sigma, sc.gamma, cfg);
  return json{{"certified_gap", std::abs(w.value() - r.q_star)},
              {"q_star", r.q_star},
              {"sr", r.sr},
              {"witness", ts::witness_json(w, sc.gamma)}};
}

json cmd_tmin(const Scenario& sc, const ts::NumericConfig& cfg) {
  const ts::ThermalisationSchedule sched = require_schedule(sc);
  const ts::Assemblage sigma = ts::apply_instrument(*sc.instruments, sc.gamma, cfg);
  const ts::SrResult r = ts::sr_gamma(sigma, sc.gamma, cfg);
  return json{{"schedule", sc.schedule_echo},
              {"sr", r.sr},
              {"t_min", ts::t_min(sigma, sc.gamma, sched, cfg)}};
}

std::vector<ts::WorkSweepRow> sweep_rows(const ts::Assemblage& sigma,
                                         const ts::HermitianMatrix& gamma, double t_kelvin,
                                         const std::vector<double>& deltas,
                                         const ts::NumericConfig& cfg) {
  std::vector<ts::WorkSweepRow> rows(deltas.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const unsigned n_workers = std::max(
      1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                             static_cast<unsigned>(deltas.size())));
  std::vector<std::thread> workers;
  workers.reserve(n_workers);
  for (unsigned w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < deltas.size(); i = next++) {
        try {
          rows[i] = ts::work_sweep(sigma, gamma, t_kelvin, {deltas[i]}, cfg)[0];
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& w : workers) w.join();
  if (first_error) std::rethrow_exception(first_error);
  return rows;
}

json cmd_work_point(const Scenario& sc, double delta, const ts::NumericConfig& cfg) {
  const ts::Assemblage sigma = ts::apply_instrument(*sc.instruments, sc.gamma, cfg);
  const ts::WorkSweepRow row = ts::work_sweep(sigma, sc.gamma, sc.temperature, {delta}, cfg)[0];
  const ts::HamiltonianFamily fam = ts::HamiltonianFamily::pauli_xz(delta, sc.temperature);
  const ts::WorkReport report = ts::delta_bar(sigma, sc.gamma, fam, sc.temperature, 1e-3, cfg);
  return json{{"classical_bound", row.classical_bound},
              {"delta", delta},
              {"kbt", ts::ThermalContext::kB * sc.temperature},
              {"quantum_value", row.quantum_value},
              {"ratio", row.ratio},
              {"report", ts::work_report_json(report)},
              {"sr", row.sr},
              {"t_min_over_t0", row.t_min_over_t0}};
}

json cmd_audit(const Scenario& sc, int n, unsigned long long seed, bool permissive,
               const ts::NumericConfig& cfg) {
  if (n < 0) throw ts::ValidationError("audit: trial count must be non-negative");
  const ts::ThermalisationSchedule sched = require_schedule(sc);
  std::mt19937_64 rng(seed);
  std::vector<ts::DeterministicAllowedOperation> ops;
  ops.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    ops.push_back(ts::random_dao(sc.instruments->n_outcomes(), sc.instruments->n_settings(),
                                 sc.gamma, rng, cfg));
  }
  std::vector<ts::Lf1Filter> filters;
  filters.reserve(static_cast<std::size_t>(n) + sc.audit_filters.size());
  for (int k = 0; k < n; ++k) filters.push_back(ts::random_lf1(sc.gamma, rng, cfg));
  for (const ts::Matrix& k : sc.audit_filters) filters.emplace_back(k, cfg);
  const ts::MonotoneReport report =
      ts::monotone_audit(*sc.instruments, sc.gamma, sched, ops, filters, permissive, cfg);

  // human-readable rendering on stderr; the JSON payload stays machine-owned
  std::fprintf(stderr, "%-10s %12s %12s %14s %14s  %-9s %s\n", "operation", "sr_before",
               "sr_after", "t_min_before", "t_min_after", "certified", "pass");
  for (const ts::MonotoneRow& r : report.rows) {
    std::fprintf(stderr, "%-10s %12.6g %12.6g %14.6g %14.6g  %-9s %s\n", r.operation.c_str(),
                 r.sr_before, r.sr_after, r.t_min_before, r.t_min_after,
                 r.certified ? "yes" : "NO", r.pass ? "pass" : "FAIL");
  }
  std::fprintf(stderr, "%zu rows, %s\n", report.rows.size(),
               report.all_pass ? "all pass" : "some FAIL");
  return ts::monotone_report_json(report);
}

json cmd_tstar(const Scenario& sc, double t_max, int grid, const ts::NumericConfig& cfg) {
  const ts::Assemblage sigma = ts::apply_instrument(*sc.instruments, sc.gamma, cfg);
  ts::Evolution ev;
  double default_t_max = 0.0;
  if (!sc.envelope.empty()) {
    const auto samples = sc.envelope;
    auto c_fn = [samples](double t) {
      if (t <= samples.front().first) return samples.front().second;
      if (t >= samples.back().first) return samples.back().second;
      const auto hi = std::upper_bound(
          samples.begin(), samples.end(), t,
          [](double v, const std::pair<double, double>& s) { return v < s.first; });
      const auto lo = hi - 1;
      const double w = (t - lo->first) / (hi->first - lo->first);
      return (1.0 - w) * lo->second + w * hi->second;
    };
    ev = ts::envelope_evolution(sc.gamma, c_fn, "envelope-table");
    default_t_max = sc.envelope.back().first;
  } else {
    const ts::ThermalisationSchedule sched = require_schedule(sc);
    ev = ts::schedule_evolution(sc.gamma, sched);
    default_t_max = sched.horizon();
  }
  if (t_max <= 0.0) t_max = default_t_max;
  const ts::TStarScan scan = ts::find_t_star(sigma, sc.gamma, ev, t_max, grid, cfg);
  json out = ts::t_star_scan_json(scan);
  out["t_max"] = t_max;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thermalisation steering toolbox"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string scenario_path;
  std::string out_path;
  std::string tol_overrides;
  unsigned long long seed = 7;
  bool seed_given = false;
  app.add_option("--scenario", scenario_path, "scenario JSON file")->required();
  app.add_option("--out", out_path, "output path (default: stdout)");
  app.add_option("--seed", seed, "seed for all randomized suites")
      ->each([&](const std::string&) { seed_given = true; });
  app.add_option("--tol-overrides", tol_overrides,
                 "comma-separated numeric overrides, e.g. tol_gap=1e-11,max_iters=300");

  CLI::App* sub_sr = app.add_subcommand("sr", "thermalisation steering robustness");
  CLI::App* sub_tmin = app.add_subcommand("tmin", "incompatibility survival time");
  CLI::App* sub_work = app.add_subcommand("work", "work-extraction report or sweep");
  CLI::App* sub_audit = app.add_subcommand("audit", "randomized monotonicity audit");
  CLI::App* sub_tstar = app.add_subcommand("tstar", "steerability horizon scan");

  double delta = 0.0;
  std::string sweep_spec;
  CLI::Option* delta_opt = sub_work->add_option("--delta", delta, "deficit scale");
  CLI::Option* sweep_opt =
      sub_work->add_option("--sweep", sweep_spec, "lo:hi:n sweep, emits CSV");
  delta_opt->excludes(sweep_opt);

  int audit_n = -1;
  bool permissive = false;
  sub_audit->add_option("--n", audit_n, "operations per suite (default from scenario or 200)");
  sub_audit->add_flag("--permissive", permissive,
                      "apply condition-violating filters and mark them non-certified");

  double t_max = 0.0;
  int grid = 60;
  sub_tstar->add_option("--t-max", t_max, "scan horizon (default from scenario)");
  sub_tstar->add_option("--grid", grid, "scan grid points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  try {
    const ts::NumericConfig cfg = apply_tol_overrides(tol_overrides);
    const Scenario sc = load_scenario(scenario_path, cfg);
    const std::string target = out_path.empty() ? sc.output_path : out_path;

    if (sub_work->parsed() && !sweep_spec.empty()) {
      double lo = 0.0, hi = 0.0;
      int n = 0;
      if (std::sscanf(sweep_spec.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3 || n < 2 ||
          !(lo < hi)) {
        throw ts::ValidationError("work: --sweep expects lo:hi:n with lo < hi and n >= 2");
      }
      std::vector<double> deltas(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        deltas[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
      }
      const ts::Assemblage sigma = ts::apply_instrument(*sc.instruments, sc.gamma, cfg);
      write_output(
          ts::work_sweep_csv(sweep_rows(sigma, sc.gamma, sc.temperature, deltas, cfg)),
          target);
      return 0;
    }

    json out;
    if (sub_sr->parsed()) {
      out = cmd_sr(sc, cfg);
    } else if (sub_tmin->parsed()) {
      out = cmd_tmin(sc, cfg);
    } else if (sub_work->parsed()) {
      if (delta_opt->count() == 0) {
        throw ts::ValidationError("work: either --delta or --sweep is required");
      }
      out = cmd_work_point(sc, delta, cfg);
    } else if (sub_audit->parsed()) {
      const int n = audit_n >= 0 ? audit_n : sc.audit_n;
      out = cmd_audit(sc, n, seed_given ? seed : sc.audit_seed, permissive, cfg);
    } else {
      out = cmd_tstar(sc, t_max, grid, cfg);
    }
    write_output(ts::canonical_dump(out), target);
    return 0;
  } catch (const ts::NumericalFailureError& e) {
    std::cerr << "thermosteer: solver failure: " << e.what() << "\n";
    return 2;
  } catch (const ts::Error& e) {
    std::cerr << "thermosteer: " << e.what() << "\n";
    return 3;
  } catch (const json::exception& e) {
    std::cerr << "thermosteer: malformed document: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "thermosteer: internal failure: " << e.what() << "\n";
    return 2;
  }
}
