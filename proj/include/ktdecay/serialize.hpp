#ifndef KTDECAY_SERIALIZE_HPP
#define KTDECAY_SERIALIZE_HPP

#include <string>

#include <json.hpp>

#include "ktdecay/analysis.hpp"
#include "ktdecay/operators.hpp"
#include "ktdecay/rates.hpp"

namespace ktdecay {

/// Fixed float formatting used everywhere text is emitted: %.17g, enough
/// digits to round-trip any double.
std::string format_double(double v);

/// Deterministic JSON writer: keys in sorted order (nlohmann's default
/// object), numbers printed with %.17g, non-finite numbers as null.
/// indent < 0 produces compact single-line output.
std::string dump_fixed(const nlohmann::json& j, int indent = 2);

/// Rate JSON: {"variant":"poly","coefficient":C,"alpha":a}
///          | {"variant":"exp","alpha":a}
///          | {"variant":"tabulated","samples":[[eps,value],...]}
nlohmann::json rate_to_json(const RateFunction& m);
RateFunction rate_from_json(const nlohmann::json& j);

/// Operator JSON:
///   {"variant":"dense","entries":[[[re,im],...],...]}
/// | {"variant":"diagonal","eigenvalues":[[re,im],...],"allow_unit":bool?}
/// | {"variant":"spectral_curve","alpha":a,"n":n,"theta_min":t0?,"theta_max":t1?}
/// | {"variant":"shift","weights":[...],"n":n}
nlohmann::json operator_to_json(const OperatorSpec& spec);
OperatorSpec operator_from_json(const nlohmann::json& j);

nlohmann::json hypotheses_to_json(const HypothesisReport& rep);
nlohmann::json report_to_json(const DecayReport& rep);

/// CSV rows (n, d_n, predicted, ratio) over [calib_lo, valid_hi].
std::string report_to_csv(const DecayReport& rep);

} // namespace ktdecay

#endif
