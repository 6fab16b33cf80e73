#include "ktdecay/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <variant>

#include "ktdecay/errors.hpp"

namespace ktdecay {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

void escape_string(const std::string& s, std::string& out) {
    out += '"';
    for (const char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

void dump_rec(const json& j, int indent, int depth, std::string& out) {
    const std::string nl = indent < 0 ? "" : "\n";
    const std::string pad = indent < 0 ? "" : std::string(indent * (depth + 1), ' ');
    const std::string padc = indent < 0 ? "" : std::string(indent * depth, ' ');
    switch (j.type()) {
        case json::value_t::null: out += "null"; break;
        case json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; break;
        case json::value_t::number_integer:
        case json::value_t::number_unsigned: out += j.dump(); break;
        case json::value_t::number_float: {
            const double v = j.get<double>();
            out += std::isfinite(v) ? format_double(v) : "null";
            break;
        }
        case json::value_t::string: escape_string(j.get<std::string>(), out); break;
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                break;
            }
            out += "[" + nl;
            for (std::size_t i = 0; i < j.size(); ++i) {
                out += pad;
                dump_rec(j[i], indent, depth + 1, out);
                if (i + 1 < j.size()) out += ",";
                out += nl;
            }
            out += padc + "]";
            break;
        }
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                break;
            }
            out += "{" + nl;
            std::size_t i = 0;
            for (auto it = j.begin(); it != j.end(); ++it, ++i) {
                out += pad;
                escape_string(it.key(), out);
                out += indent < 0 ? ":" : ": ";
                dump_rec(it.value(), indent, depth + 1, out);
                if (i + 1 < j.size()) out += ",";
                out += nl;
            }
            out += padc + "}";
            break;
        }
        default: out += "null";
    }
}

json complex_to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw InputError("complex entry must be a [re, im] number pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

} // namespace

std::string dump_fixed(const json& j, int indent) {
    std::string out;
    dump_rec(j, indent, 0, out);
    return out;
}

json rate_to_json(const RateFunction& m) {
    json j;
    if (const auto* p = std::get_if<RateFunction::Poly>(&m.shape())) {
        j["variant"] = "poly";
        j["coefficient"] = p->scale;
        j["alpha"] = p->alpha;
    } else if (const auto* e = std::get_if<RateFunction::Exp>(&m.shape())) {
        j["variant"] = "exp";
        j["alpha"] = e->alpha;
    } else {
        const auto& t = std::get<RateFunction::Tabulated>(m.shape());
        j["variant"] = "tabulated";
        json samples = json::array();
        for (const auto& s : t.samples) samples.push_back(json::array({s.eps, s.value}));
        j["samples"] = std::move(samples);
    }
    return j;
}

RateFunction rate_from_json(const json& j) {
    try {
        const std::string variant = j.at("variant").get<std::string>();
        if (variant == "poly")
            return RateFunction::poly(j.at("coefficient").get<double>(),
                                      j.at("alpha").get<double>());
        if (variant == "exp") return RateFunction::exponential(j.at("alpha").get<double>());
        if (variant == "tabulated") {
            std::vector<RateSample> samples;
            for (const auto& row : j.at("samples")) {
                if (!row.is_array() || row.size() != 2)
                    throw InputError("tabulated sample must be an [eps, value] pair");
                samples.push_back({row[0].get<double>(), row[1].get<double>()});
            }
            return RateFunction::tabulated(std::move(samples));
        }
        throw InputError("unknown rate variant '" + variant + "'");
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed rate JSON: ") + e.what());
    }
}

json operator_to_json(const OperatorSpec& spec) {
    json j;
    if (const auto* d = std::get_if<OperatorSpec::Dense>(&spec.shape())) {
        j["variant"] = "dense";
        json rows = json::array();
        for (std::size_t i = 0; i < d->matrix.dim(); ++i) {
            json row = json::array();
            for (std::size_t k = 0; k < d->matrix.dim(); ++k)
                row.push_back(complex_to_json(d->matrix(i, k)));
            rows.push_back(std::move(row));
        }
        j["entries"] = std::move(rows);
    } else if (const auto* dg = std::get_if<OperatorSpec::Diagonal>(&spec.shape())) {
        j["variant"] = "diagonal";
        json eig = json::array();
        for (const auto& z : dg->eigenvalues) eig.push_back(complex_to_json(z));
        j["eigenvalues"] = std::move(eig);
        if (dg->allow_unit) j["allow_unit"] = true;
    } else if (const auto* sc = std::get_if<OperatorSpec::SpectralCurve>(&spec.shape())) {
        j["variant"] = "spectral_curve";
        j["alpha"] = sc->alpha;
        j["n"] = sc->n;
        j["theta_min"] = sc->theta_min;
        j["theta_max"] = sc->theta_max;
    } else {
        const auto& sh = std::get<OperatorSpec::Shift>(spec.shape());
        j["variant"] = "shift";
        j["weights"] = sh.weights;
        j["n"] = sh.n;
    }
    return j;
}

OperatorSpec operator_from_json(const json& j) {
    try {
        const std::string variant = j.at("variant").get<std::string>();
        if (variant == "dense") {
            const json& rows = j.at("entries");
            if (!rows.is_array() || rows.empty())
                throw InputError("dense operator needs a nonempty entries array");
            const std::size_t n = rows.size();
            ComplexMatrix m(n);
            for (std::size_t i = 0; i < n; ++i) {
                if (!rows[i].is_array() || rows[i].size() != n)
                    throw InputError("dense operator entries must form a square matrix");
                for (std::size_t k = 0; k < n; ++k) m(i, k) = complex_from_json(rows[i][k]);
            }
            return OperatorSpec::dense(std::move(m));
        }
        if (variant == "diagonal") {
            std::vector<Complex> eig;
            for (const auto& z : j.at("eigenvalues")) eig.push_back(complex_from_json(z));
            const bool allow_unit = j.value("allow_unit", false);
            return OperatorSpec::diagonal(std::move(eig), allow_unit);
        }
        if (variant == "spectral_curve")
            return OperatorSpec::spectral_curve(
                j.at("alpha").get<double>(), j.at("n").get<long>(),
                j.value("theta_min", 1e-4), j.value("theta_max", 1.0));
        if (variant == "shift")
            return OperatorSpec::shift(j.at("weights").get<std::vector<double>>(),
                                       j.at("n").get<long>());
        throw InputError("unknown operator variant '" + variant + "'");
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed operator JSON: ") + e.what());
    }
}

json hypotheses_to_json(const HypothesisReport& rep) {
    json j;
    j["partial_sums_bounded"] = to_string(rep.partial_sums_bounded);
    j["sup_partial_sums"] = rep.sup_partial_sums;
    j["partial_sum_trend"] = rep.partial_sum_trend;
    j["power_bounded"] = to_string(rep.power_bounded);
    j["power_bound"] = rep.power_bound;
    j["power_trend"] = rep.power_trend;
    j["singularity_locations"] = rep.singularity_locations;
    j["dom_fun_constant"] =
        rep.dom_fun_constant ? json(*rep.dom_fun_constant) : json(nullptr);
    j["window"] = rep.window;
    return j;
}

json report_to_json(const DecayReport& rep) {
    json j;
    j["verdict"] = to_string(rep.verdict);
    j["fitted_c"] = rep.fitted_c;
    j["worst_valid_ratio"] = rep.worst_valid_ratio;
    j["first_violation"] =
        rep.first_violation >= 0 ? json(rep.first_violation) : json(nullptr);
    j["empirical"] = rep.empirical
                         ? json{{"exponent", rep.empirical->exponent},
                                {"residual", rep.empirical->residual}}
                         : json(nullptr);
    j["hypotheses"] = hypotheses_to_json(rep.hypotheses);
    j["envelope"] = rep.envelope ? rate_to_json(*rep.envelope) : json(nullptr);
    j["orbit"] = rep.orbit.values;
    j["power_bound"] = rep.orbit.power_bound;
    j["predicted_start"] = rep.options.calib_lo;
    j["predicted"] = rep.predicted;
    json eps = json::array();
    for (const auto& e : rep.schedule)
        eps.push_back(e.pre_asymptotic ? json(nullptr) : json(*e.eps));
    j["epsilon_schedule"] = std::move(eps);
    j["warnings"] = rep.warnings;
    j["options"] = json{{"c", rep.options.c},
                        {"calib", json::array({rep.options.calib_lo, rep.options.calib_hi})},
                        {"valid", json::array({rep.options.valid_lo, rep.options.valid_hi})},
                        {"grid_size", rep.options.grid_size},
                        {"theta_min", rep.options.theta_min},
                        {"theta_max", rep.options.theta_max}};
    return j;
}

std::string report_to_csv(const DecayReport& rep) {
    std::ostringstream out;
    out << "n,d_n,predicted,ratio\n";
    for (std::size_t i = 0; i < rep.predicted.size(); ++i) {
        const long n = rep.options.calib_lo + static_cast<long>(i);
        const double d = n < static_cast<long>(rep.orbit.values.size())
                             ? rep.orbit.values[n]
                             : std::numeric_limits<double>::quiet_NaN();
        const double p = rep.predicted[i];
        out << n << "," << format_double(d) << "," << format_double(p) << ","
            << format_double(d / p) << "\n";
    }
    return out.str();
}

} // namespace ktdecay
