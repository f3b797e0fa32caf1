#include "thermosteer/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

namespace thermosteer {

namespace {

std::string key_ax(int a, int x) { return std::to_string(a) + "|" + std::to_string(x); }

// "a|x" -> (a, x); malformed keys surface as ValidationError, not silent skips
std::pair<int, int> parse_key_ax(const std::string& key) {
  const auto bar = key.find('|');
  if (bar == std::string::npos || bar == 0 || bar + 1 == key.size()) {
    throw ValidationError("serialize: member key '" + key + "' is not of the form a|x");
  }
  try {
    const int a = std::stoi(key.substr(0, bar));
    const int x = std::stoi(key.substr(bar + 1));
    if (a < 0 || x < 0) throw ValidationError("serialize: negative index in key '" + key + "'");
    return {a, x};
  } catch (const std::invalid_argument&) {
    throw ValidationError("serialize: member key '" + key + "' is not numeric");
  } catch (const std::out_of_range&) {
    throw ValidationError("serialize: member key '" + key + "' is out of range");
  }
}

json entries_json(const Matrix& m) {
  json entries = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      entries.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    }
  }
  return entries;
}

Matrix entries_from_json(const json& entries, int rows, int cols) {
  if (!entries.is_array() || static_cast<int>(entries.size()) != rows * cols) {
    throw ValidationError("serialize: matrix entry count does not match its shape");
  }
  Matrix m(rows, cols);
  int k = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c, ++k) {
      const json& e = entries[k];
      if (!e.is_array() || e.size() != 2) {
        throw ValidationError("serialize: complex entries must be [re, im] pairs");
      }
      m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

int positive_int_field(const json& j, const char* name) {
  const json& v = j.at(name);
  if (!v.is_number_integer() || v.get<long long>() <= 0) {
    throw ValidationError(std::string("serialize: field '") + name +
                          "' must be a positive integer");
  }
  return v.get<int>();
}

// Collects {"a|x": value} into a dense [x][a] grid; every cell must be
// present exactly once and the index ranges must be contiguous from zero.
template <typename T, typename Decode>
std::vector<std::vector<T>> dense_grid(const json& obj, int n_outcomes, int n_settings,
                                       const Decode& decode) {
  if (!obj.is_object()) throw ValidationError("serialize: keyed collection must be an object");
  std::vector<std::vector<bool>> seen(n_settings, std::vector<bool>(n_outcomes, false));
  for (const auto& item : obj.items()) {
    const auto [a, x] = parse_key_ax(item.key());
    if (a >= n_outcomes || x >= n_settings) {
      throw ValidationError("serialize: key '" + item.key() + "' is outside the declared shape");
    }
    seen[x][a] = true;
  }
  for (int x = 0; x < n_settings; ++x) {
    for (int a = 0; a < n_outcomes; ++a) {
      if (!seen[x][a]) throw ValidationError("serialize: missing member key '" + key_ax(a, x) + "'");
    }
  }
  std::vector<std::vector<T>> grid;
  grid.reserve(n_settings);
  for (int x = 0; x < n_settings; ++x) {
    std::vector<T> row;
    row.reserve(n_outcomes);
    for (int a = 0; a < n_outcomes; ++a) row.push_back(decode(obj.at(key_ax(a, x))));
    grid.push_back(std::move(row));
  }
  return grid;
}

std::string format_double(double v) {
  if (!std::isfinite(v)) {
    throw ValidationError("serialize: non-finite numbers cannot be represented in JSON");
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void dump_rec(const json& j, std::string& out) {
  switch (j.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& item : j.items()) {  // nlohmann objects iterate key-sorted
        if (!first) out += ',';
        first = false;
        out += json(item.key()).dump();
        out += ':';
        dump_rec(item.value(), out);
      }
      out += '}';
      return;
    }
    case json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i > 0) out += ',';
        dump_rec(j[i], out);
      }
      out += ']';
      return;
    }
    case json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    case json::value_t::number_integer:
      out += std::to_string(j.get<long long>());
      return;
    case json::value_t::number_unsigned:
      out += std::to_string(j.get<unsigned long long>());
      return;
    case json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      return;
    case json::value_t::string:
      out += j.dump();
      return;
    case json::value_t::null:
      out += "null";
      return;
    default:
      throw ValidationError("serialize: unsupported JSON value type");
  }
}

json hamiltonian_family_json(const HamiltonianFamily& fam) {
  json members = json::object();
  for (int x = 0; x < fam.n_settings(); ++x) {
    for (int a = 0; a < fam.n_outcomes(); ++a) {
      members[key_ax(a, x)] = matrix_json(fam.at(a, x));
    }
  }
  return json{{"dim", fam.dim()},
              {"n_outcomes", fam.n_outcomes()},
              {"n_settings", fam.n_settings()},
              {"members", members}};
}

}  // namespace

json matrix_json(const HermitianMatrix& m) {
  return json{{"dim", m.dim()}, {"entries", entries_json(m.mat())}};
}

HermitianMatrix matrix_from_json(const json& j, const NumericConfig& cfg) {
  const int dim = positive_int_field(j, "dim");
  return HermitianMatrix(entries_from_json(j.at("entries"), dim, dim), cfg.tol_herm);
}

json complex_matrix_json(const Matrix& m) {
  return json{{"rows", static_cast<int>(m.rows())},
              {"cols", static_cast<int>(m.cols())},
              {"entries", entries_json(m)}};
}

Matrix complex_matrix_from_json(const json& j) {
  const int rows = positive_int_field(j, "rows");
  const int cols = positive_int_field(j, "cols");
  return entries_from_json(j.at("entries"), rows, cols);
}

json assemblage_json(const Assemblage& sigma) {
  json members = json::object();
  for (int x = 0; x < sigma.n_settings(); ++x) {
    for (int a = 0; a < sigma.n_outcomes(); ++a) {
      members[key_ax(a, x)] = matrix_json(sigma.at(a, x));
    }
  }
  return json{{"dim", sigma.dim()},
              {"n_outcomes", sigma.n_outcomes()},
              {"n_settings", sigma.n_settings()},
              {"members", members}};
}

Assemblage assemblage_from_json(const json& j, const NumericConfig& cfg) {
  const int na = positive_int_field(j, "n_outcomes");
  const int nx = positive_int_field(j, "n_settings");
  auto members = dense_grid<HermitianMatrix>(
      j.at("members"), na, nx, [&](const json& m) { return matrix_from_json(m, cfg); });
  return Assemblage(std::move(members), cfg);
}

json instrument_family_json(const InstrumentFamily& fam) {
  json filters = json::object();
  for (int x = 0; x < fam.n_settings(); ++x) {
    for (int a = 0; a < fam.n_outcomes(); ++a) {
      filters[key_ax(a, x)] = matrix_json(fam.filter(a, x).choi());
    }
  }
  return json{{"dim", fam.dim()},
              {"n_outcomes", fam.n_outcomes()},
              {"n_settings", fam.n_settings()},
              {"filters", filters}};
}

InstrumentFamily instrument_family_from_json(const json& j, const NumericConfig& cfg) {
  const int na = positive_int_field(j, "n_outcomes");
  const int nx = positive_int_field(j, "n_settings");
  const int dim = positive_int_field(j, "dim");
  auto filters = dense_grid<QuantumChannelChoi>(j.at("filters"), na, nx, [&](const json& m) {
    return QuantumChannelChoi(matrix_from_json(m, cfg), dim, dim, cfg);
  });
  return InstrumentFamily::from_choi(std::move(filters), cfg);
}

json lhs_model_json(const LhsModel& model) {
  json etas = json::array();
  for (const auto& eta : model.etas()) etas.push_back(matrix_json(eta));
  return json{{"etas", etas}};
}

LhsModel lhs_model_from_json(const json& j, const NumericConfig& cfg) {
  const json& etas_j = j.at("etas");
  if (!etas_j.is_array() || etas_j.empty()) {
    throw ValidationError("serialize: lhs model requires a non-empty eta array");
  }
  std::vector<HermitianMatrix> etas;
  etas.reserve(etas_j.size());
  for (const json& e : etas_j) etas.push_back(matrix_from_json(e, cfg));
  return LhsModel(std::move(etas), cfg);
}

json witness_json(const SteeringWitness& w, const HermitianMatrix& gamma) {
  json ys = json::object();
  json probs = json::object();
  for (int x = 0; x < w.n_settings(); ++x) {
    for (int a = 0; a < w.n_outcomes(); ++a) {
      ys[key_ax(a, x)] = matrix_json(w.y(a, x));
      probs[key_ax(a, x)] = w.probabilities()[x][a];
    }
  }
  return json{{"gamma", matrix_json(gamma)},
              {"omega", w.omega()},
              {"probabilities", probs},
              {"value", w.value()},
              {"ys", ys}};
}

SteeringWitness witness_from_json(const json& j, const NumericConfig& cfg) {
  const json& ys_j = j.at("ys");
  if (!ys_j.is_object() || ys_j.empty()) {
    throw ValidationError("serialize: witness requires keyed Y operators");
  }
  int na = 0;
  int nx = 0;
  for (const auto& item : ys_j.items()) {
    const auto [a, x] = parse_key_ax(item.key());
    na = std::max(na, a + 1);
    nx = std::max(nx, x + 1);
  }
  auto ys = dense_grid<HermitianMatrix>(ys_j, na, nx,
                                        [&](const json& m) { return matrix_from_json(m, cfg); });
  auto probs = dense_grid<double>(j.at("probabilities"), na, nx, [](const json& p) {
    if (!p.is_number()) throw ValidationError("serialize: probabilities must be numbers");
    return p.get<double>();
  });
  return SteeringWitness(std::move(ys), j.at("omega").get<double>(),
                         matrix_from_json(j.at("gamma"), cfg), probs, cfg);
}

json sr_result_json(const SrResult& r) {
  return json{{"model", lhs_model_json(r.model)}, {"q_star", r.q_star}, {"sr", r.sr}};
}

json work_report_json(const WorkReport& report) {
  json rows = json::array();
  for (const WorkRow& r : report.rows) {
    rows.push_back(json{{"a", r.a},
                        {"x", r.x},
                        {"probability", r.probability},
                        {"w_ext", r.w_ext},
                        {"w_inf", r.w_inf},
                        {"delta", r.delta}});
  }
  return json{{"delta_bar", report.delta_bar},
              {"eta_threshold", report.eta_threshold},
              {"in_h_eta", report.in_h_eta},
              {"rows", rows}};
}

json certificate_json(const CertificateResult& cert) {
  return json{{"classical", cert.classical},
              {"gap", cert.gap},
              {"hamiltonians", hamiltonian_family_json(cert.family)},
              {"quantum", cert.quantum}};
}

json monotone_report_json(const MonotoneReport& report) {
  json rows = json::array();
  for (const MonotoneRow& r : report.rows) {
    rows.push_back(json{{"operation", r.operation},
                        {"sr_before", r.sr_before},
                        {"sr_after", r.sr_after},
                        {"t_min_before", r.t_min_before},
                        {"t_min_after", r.t_min_after},
                        {"certified", r.certified},
                        {"pass", r.pass}});
  }
  return json{{"all_pass", report.all_pass}, {"rows", rows}};
}

json t_star_scan_json(const TStarScan& scan) {
  json crossings = json::array();
  for (double c : scan.crossings) crossings.push_back(c);
  json t_star;  // null when the scan stayed steerable through t_max
  if (scan.t_star.has_value()) t_star = *scan.t_star;
  return json{{"crossings", crossings},
              {"margin_at_t_max", scan.margin_at_t_max},
              {"positivity_only", scan.positivity_only},
              {"t_star", t_star},
              {"thermalisation_warning", scan.thermalisation_warning}};
}

json schedule_json_partial(double t0) { return json{{"kind", "partial"}, {"t0", t0}}; }

ThermalisationSchedule schedule_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "partial") {
    return ThermalisationSchedule::partial(j.at("t0").get<double>());
  }
  if (kind != "custom-table") {
    throw ValidationError("serialize: unknown schedule kind '" + kind + "'");
  }
  const json& samples_j = j.at("samples");
  if (!samples_j.is_array() || samples_j.size() < 2) {
    throw ValidationError("serialize: custom-table schedules need at least two samples");
  }
  std::vector<double> ts;
  std::vector<double> hs;
  ts.reserve(samples_j.size());
  hs.reserve(samples_j.size());
  for (const json& s : samples_j) {
    if (!s.is_array() || s.size() != 2) {
      throw ValidationError("serialize: schedule samples must be [t, h] pairs");
    }
    const double t = s[0].get<double>();
    const double h = s[1].get<double>();
    if (!ts.empty() && t <= ts.back()) {
      throw ValidationError("serialize: schedule sample times must strictly increase");
    }
    if (h <= 0.0) {
      throw ValidationError("serialize: sampled h values must be strictly positive");
    }
    ts.push_back(t);
    hs.push_back(h);
  }
  if (ts.front() != 0.0 || std::abs(hs.front() - 1.0) > 1e-12) {
    throw ValidationError("serialize: schedule tables must start at (0, 1)");
  }
  // log-linear interpolation keeps sampled strict decrease strict everywhere
  // in between; past the last sample the final segment's decay continues
  auto h_fn = [ts, hs](double t) {
    if (t <= ts.front()) return hs.front();
    std::size_t hi = std::upper_bound(ts.begin(), ts.end(), t) - ts.begin();
    if (hi >= ts.size()) hi = ts.size() - 1;
    const std::size_t lo = hi - 1;
    const double slope = (std::log(hs[hi]) - std::log(hs[lo])) / (ts[hi] - ts[lo]);
    return std::exp(std::log(hs[lo]) + slope * (t - ts[lo]));
  };
  return ThermalisationSchedule::custom(h_fn, ts.back());
}

std::string canonical_dump(const json& j) {
  std::string out;
  dump_rec(j, out);
  out += '\n';
  return out;
}

std::string work_sweep_csv(const std::vector<WorkSweepRow>& rows) {
  std::string out = "delta,classical_bound,quantum_value,ratio,sr,t_min_over_t0\n";
  for (const WorkSweepRow& r : rows) {
    out += format_double(r.delta);
    out += ',';
    out += format_double(r.classical_bound);
    out += ',';
    out += format_double(r.quantum_value);
    out += ',';
    out += format_double(r.ratio);
    out += ',';
    out += format_double(r.sr);
    out += ',';
    out += format_double(r.t_min_over_t0);
    out += '\n';
  }
  return out;
}

}  // namespace thermosteer
