#include "ktdecay/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ktdecay {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEpsFloor = 1e-12;        // inversion bracket lower end
constexpr int kMaxBisect = 200;
constexpr double kMatchTol = 1e-10;        // relative match required after inversion

void check_eval_domain(double eps) {
    if (!(eps > 0.0) || !(eps <= kPi))
        throw DomainError("rate evaluation point must lie in (0, pi], got " +
                          std::to_string(eps));
}

// log(1 + e^q), stable for any q.
double log1p_exp(double q) {
    return q > 0.0 ? q + std::log1p(std::exp(-q)) : std::log1p(std::exp(q));
}

} // namespace

RateFunction::RateFunction(std::variant<Poly, Exp, Tabulated> shape)
    : shape_(std::move(shape)) {}

RateFunction RateFunction::poly(double scale, double alpha) {
    if (!(scale >= 1.0) || !std::isfinite(scale))
        throw DomainError("poly rate needs scale >= 1 so that m(pi) >= 1");
    if (!(alpha >= 1.0) || !std::isfinite(alpha))
        throw DomainError("poly rate needs alpha >= 1");
    return RateFunction(Poly{scale, alpha});
}

RateFunction RateFunction::exponential(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw DomainError("exponential rate needs alpha > 0");
    return RateFunction(Exp{alpha});
}

RateFunction RateFunction::tabulated(std::vector<RateSample> samples) {
    if (samples.empty())
        throw InputError("tabulated rate needs at least one sample");
    std::sort(samples.begin(), samples.end(),
              [](const RateSample& a, const RateSample& b) { return a.eps < b.eps; });
    for (auto& s : samples) {
        if (!(s.eps > 0.0) || !(s.eps <= kPi))
            throw DomainError("tabulated rate sample eps must lie in (0, pi]");
        if (!std::isfinite(s.value) || s.value <= 0.0)
            throw DomainError("tabulated rate sample value must be positive and finite");
        s.value = std::max(s.value, 1.0);
    }
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (samples[i].eps == samples[i - 1].eps)
            throw DomainError("tabulated rate sample eps values must be distinct");
        if (samples[i].value > samples[i - 1].value)
            throw DomainError("tabulated rate values must be non-increasing in eps");
    }
    return RateFunction(Tabulated{std::move(samples)});
}

RateFunction RateFunction::constant(double value) {
    double v = std::max(value, 1.0);
    return tabulated({{kEpsFloor, v}, {kPi, v}});
}

double RateFunction::log_value(double eps) const {
    check_eval_domain(eps);
    if (const auto* p = std::get_if<Poly>(&shape_))
        return std::log(p->scale) + p->alpha * (std::log(kPi) - std::log(eps));
    if (const auto* e = std::get_if<Exp>(&shape_))
        return std::pow(eps, -e->alpha);
    const auto& t = std::get<Tabulated>(shape_).samples;
    if (eps <= t.front().eps) return std::log(t.front().value);
    if (eps >= t.back().eps) return std::log(t.back().value);
    // locate segment, interpolate in (log eps, log m)
    auto it = std::upper_bound(t.begin(), t.end(), eps,
                               [](double v, const RateSample& s) { return v < s.eps; });
    const RateSample& hi = *it;
    const RateSample& lo = *(it - 1);
    double w = (std::log(eps) - std::log(lo.eps)) / (std::log(hi.eps) - std::log(lo.eps));
    return (1.0 - w) * std::log(lo.value) + w * std::log(hi.value);
}

double RateFunction::operator()(double eps) const {
    return std::exp(log_value(eps));
}

DerivedRate::DerivedRate(RateFunction base, Kind kind, int k)
    : base_(std::move(base)), kind_(kind), k_(k) {}

DerivedRate DerivedRate::mlog(RateFunction base) {
    return DerivedRate(std::move(base), Kind::mlog, 0);
}

DerivedRate DerivedRate::mk(RateFunction base, int k) {
    if (k < 1) throw ParameterError("mk derived rate needs k >= 1");
    return DerivedRate(std::move(base), Kind::mk, k);
}

double DerivedRate::log_value(double eps) const {
    double lm = base_.log_value(eps);
    double q = lm - std::log(eps);   // log(m/eps), >= log(1/pi)
    if (kind_ == Kind::mk)
        return lm + q / static_cast<double>(k_);
    // log( m * log(1 + m/eps) )
    return lm + std::log(log1p_exp(q));
}

double derived_eval_log(const DerivedRate& d, double eps) {
    return d.log_value(eps);
}

double derived_eval(const DerivedRate& d, double eps) {
    return std::exp(d.log_value(eps));
}

double invert_rate_log(const DerivedRate& d, double log_y) {
    if (!std::isfinite(log_y))
        throw DomainError("inversion query must be finite in log scale");
    const double f_pi = d.log_value(kPi);
    if (log_y <= f_pi) {
        // ties resolve toward the largest eps, so an exact hit returns pi
        if (log_y < f_pi - kMatchTol)
            throw RangeError("inversion query lies below the rate's value at eps = pi");
        return kPi;
    }
    double lo = std::log(kEpsFloor);
    double hi = std::log(kPi);
    if (d.log_value(kEpsFloor) < log_y)
        throw NumericError("inversion query exceeds the rate's value at the eps floor 1e-12");
    // f(exp(lo)) >= log_y > f(exp(hi)) and f is non-increasing in eps
    for (int it = 0; it < kMaxBisect && hi - lo > 1e-15; ++it) {
        double mid = 0.5 * (lo + hi);
        if (d.log_value(std::exp(mid)) >= log_y)
            lo = mid;
        else
            hi = mid;
    }
    double eps = std::exp(lo);
    // The bracket is the certificate: f(exp(lo)) >= log_y > f(exp(hi)) with
    // hi - lo <= ~1e-15, so eps matches the true preimage to one part in
    // 1e-15 of log eps.  A flat value-match tolerance would misfire on steep
    // rates (exp shapes at small eps), where one ulp of log eps moves the
    // value by arbitrarily more than any fixed tolerance.
    if (d.log_value(eps) < log_y - kMatchTol)
        throw NumericError("rate inversion did not converge to the query value");
    return eps;
}

double invert_rate(const DerivedRate& d, double y) {
    if (!(y > 0.0))
        throw DomainError("inversion query must be positive");
    return invert_rate_log(d, std::log(y));
}

PredictedBound predicted_bound_ck(const RateFunction& m, int k, double c, long n) {
    if (k < 1) throw ParameterError("finitely-smooth regime needs order k >= 1");
    if (!(c > 0.0)) throw ParameterError("finitely-smooth regime needs c > 0");
    if (n < 1) throw ParameterError("prediction index must satisfy n >= 1");
    DerivedRate d = DerivedRate::mk(m, k);
    double q = std::log(c) + std::log(static_cast<double>(n));
    // 1e-12 slack so queries meant to hit the value at eps = pi exactly do
    // not land on the pre-asymptotic side through rounding alone
    if (q < d.log_value(kPi) - 1e-12)
        return {true, std::nullopt};
    return {false, invert_rate_log(d, q)};
}

PredictedBound predicted_bound_smooth(const RateFunction& m, double c, long n) {
    if (!(c > 0.0) || !(c < 1.0))
        throw ParameterError("smooth regime needs c in (0, 1)");
    if (n < 1) throw ParameterError("prediction index must satisfy n >= 1");
    DerivedRate d = DerivedRate::mlog(m);
    double q = std::log(c) + std::log(static_cast<double>(n));
    if (q < d.log_value(kPi) - 1e-12)
        return {true, std::nullopt};
    return {false, invert_rate_log(d, q) + 1.0 / static_cast<double>(n)};
}

ProofBudget proof_budget(const RateFunction& m, double eps, long n, double c) {
    if (!(c > 0.0)) throw ParameterError("proof budget needs c > 0");
    if (n < 1) throw ParameterError("proof budget needs n >= 1");
    double mv = m(eps);
    double cn = c * static_cast<double>(n);
    ProofBudget b;
    b.order = static_cast<long>(std::floor(cn / mv));
    b.principal = mv * std::exp(-cn / mv);
    b.remainder = mv / (static_cast<double>(n) * static_cast<double>(n));
    return b;
}

} // namespace ktdecay
