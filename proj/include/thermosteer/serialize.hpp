#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "thermosteer/quantum.hpp"
#include "thermosteer/resource.hpp"
#include "thermosteer/steering.hpp"
#include "thermosteer/thermo.hpp"
#include "thermosteer/work.hpp"

namespace thermosteer {

using json = nlohmann::json;

// Shared schema: complex entries as [re, im] pairs in row-major order.
// Hermitian matrices carry {"dim", "entries"}; general complex matrices
// (Kraus operators) carry {"rows", "cols", "entries"}. Indexed collections
// key members "a|x". Round-trips preserve values exactly, not just to the
// documented 1e-15.
json matrix_json(const HermitianMatrix& m);
HermitianMatrix matrix_from_json(const json& j,
                                 const NumericConfig& cfg = NumericConfig::defaults());

json complex_matrix_json(const Matrix& m);
Matrix complex_matrix_from_json(const json& j);

json assemblage_json(const Assemblage& sigma);
Assemblage assemblage_from_json(const json& j,
                                const NumericConfig& cfg = NumericConfig::defaults());

json instrument_family_json(const InstrumentFamily& fam);
InstrumentFamily instrument_family_from_json(const json& j,
                                             const NumericConfig& cfg = NumericConfig::defaults());

json lhs_model_json(const LhsModel& model);
LhsModel lhs_model_from_json(const json& j,
                             const NumericConfig& cfg = NumericConfig::defaults());

// gamma and the probability weights ride along so the witness can be
// revalidated (and its value recomputed) on the way back in
json witness_json(const SteeringWitness& w, const HermitianMatrix& gamma);
SteeringWitness witness_from_json(const json& j,
                                  const NumericConfig& cfg = NumericConfig::defaults());

json sr_result_json(const SrResult& r);

json work_report_json(const WorkReport& report);
json certificate_json(const CertificateResult& cert);
json monotone_report_json(const MonotoneReport& report);
json t_star_scan_json(const TStarScan& scan);

// {"kind": "partial", "t0": ...} or {"kind": "custom-table", "samples":
// [[t, h], ...]}; tables are interpolated log-linearly in h, so sampled
// values must be strictly positive
json schedule_json_partial(double t0);
ThermalisationSchedule schedule_from_json(const json& j);

// Canonical text form: keys sorted, floats printed with 17 significant
// digits, no whitespace beyond a trailing newline. Equal documents always
// produce equal bytes; non-finite numbers are rejected.
std::string canonical_dump(const json& j);

// CSV with a header row, comma separator, dot decimal, 17-significant-digit
// floats; one row per sweep point in input order
std::string work_sweep_csv(const std::vector<WorkSweepRow>& rows);

}  // namespace thermosteer
