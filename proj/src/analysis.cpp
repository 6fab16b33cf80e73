#include "ktdecay/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <utility>

#include "ktdecay/errors.hpp"

namespace ktdecay {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kGrowthSlopeLimit = 0.1;  // log-log slope above which a sup is called unbounded
constexpr double kScanThreshold = 10.0;
constexpr double kProbeRadius = 1.01;      // |z| for the sequence transform probe
constexpr long kMinProbeTerms = 2000;      // 1.01^-2000 ~ 2e-9 truncation

// Least-squares slope of log v against log n; residual is the RMS deviation.
std::pair<double, double> loglog_fit(const std::vector<std::pair<long, double>>& pts) {
    const std::size_t n = pts.size();
    double sx = 0, sy = 0;
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = std::log(static_cast<double>(pts[i].first));
        ys[i] = std::log(pts[i].second);
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxx > 0 ? sxy / sxx : 0.0;
    const double intercept = my - slope * mx;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ys[i] - (slope * xs[i] + intercept);
        rss += r * r;
    }
    return {slope, std::sqrt(rss / n)};
}

// Growth trend of a running-sup series sampled at (n, sup) points: the
// log-log slope over the upper three quarters of the window.  Series that
// are identically zero are trivially bounded (slope 0).
struct Trend {
    double slope = 0.0;
    Verdict3 verdict = Verdict3::Inconclusive;
};

Trend classify_growth(const std::vector<std::pair<long, double>>& samples, long window) {
    Trend t;
    std::vector<std::pair<long, double>> pts;
    for (const auto& s : samples)
        if (s.first >= std::max<long>(2, window / 4) && s.second > 0.0) pts.push_back(s);
    bool all_zero = true;
    for (const auto& s : samples)
        if (s.second != 0.0) all_zero = false;
    if (all_zero) {
        t.slope = 0.0;
        t.verdict = Verdict3::HoldsOnWindow;
        return t;
    }
    if (pts.size() < 8) {
        t.verdict = Verdict3::Inconclusive;
        return t;
    }
    t.slope = loglog_fit(pts).first;
    t.verdict = t.slope > kGrowthSlopeLimit ? Verdict3::Fails : Verdict3::HoldsOnWindow;
    return t;
}

std::vector<double> scan_grid() {
    std::vector<double> grid;
    for (int i = 0; i < 64; ++i) {
        const double t = 0.5 + (kPi - 0.5) * static_cast<double>(i) / 63.0;
        grid.push_back(t);
        grid.push_back(-t);
    }
    return grid;
}

double factorial_d(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

} // namespace

std::string to_string(Verdict3 v) {
    switch (v) {
        case Verdict3::HoldsOnWindow: return "holds_on_window";
        case Verdict3::Fails: return "fails";
        default: return "inconclusive";
    }
}

std::string to_string(CertifyVerdict v) {
    switch (v) {
        case CertifyVerdict::Certified: return "certified";
        case CertifyVerdict::Violated: return "violated";
        default: return "pre_asymptotic";
    }
}

bool HypothesisReport::any_failure() const { return !first_failure().empty(); }

std::string HypothesisReport::first_failure() const {
    if (partial_sums_bounded == Verdict3::Fails) return "partial sums unbounded";
    if (power_bounded == Verdict3::Fails) return "operator powers unbounded";
    if (!singularity_locations.empty())
        return "boundary singularity away from angle 0 (first at theta = " +
               std::to_string(singularity_locations.front()) + ")";
    return "";
}

HypothesisReport check_hypotheses(const OperatorSpec& spec, long window) {
    if (window < 100)
        throw ParameterError("hypothesis window must span at least 100 terms");
    HypothesisReport rep;
    rep.window = window;

    std::vector<std::pair<long, double>> s_sup, p_sup;  // (n, running sup)
    double run_s = 0.0, run_p = 0.0;
    if (const auto* eig = spec.diagonal_entries()) {
        const std::size_t d = eig->size();
        std::vector<Complex> pw(d, Complex(1.0));  // lambda^n
        for (long n = 0; n <= window; ++n) {
            double pn = 0.0, sn = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                pn = std::max(pn, std::abs(pw[j]));
                sn = std::max(sn, std::abs(Complex(1.0) - pw[j] * (*eig)[j]));
                if (n < window) pw[j] *= (*eig)[j];
            }
            run_p = std::max(run_p, pn);
            run_s = std::max(run_s, sn);
            p_sup.emplace_back(n, run_p);
            s_sup.emplace_back(n, run_s);
        }
    } else {
        // Dense: sample the (expensive) norms on a stride; at most ~257 points.
        const long stride = std::max<long>(1, window / 256);
        ComplexMatrix t = spec.to_dense();
        ComplexMatrix q = ComplexMatrix::identity(t.dim());  // T^n
        bool diverged = false;
        for (long n = 0; n <= window; ++n) {
            if (n % stride == 0 || n == window) {
                if (!q.all_finite()) {
                    diverged = true;
                    break;
                }
                run_p = std::max(run_p, operator_norm(q));
                run_s = std::max(run_s,
                                 operator_norm(ComplexMatrix::identity(t.dim()) - (t * q)));
                p_sup.emplace_back(n, run_p);
                s_sup.emplace_back(n, run_s);
            }
            if (n < window) q = t * q;
        }
        if (diverged) {
            rep.power_bounded = Verdict3::Fails;
            rep.partial_sums_bounded = Verdict3::Fails;
            rep.power_bound = std::numeric_limits<double>::infinity();
            rep.sup_partial_sums = std::numeric_limits<double>::infinity();
            return rep;
        }
    }
    rep.power_bound = run_p;
    rep.sup_partial_sums = run_s;
    const Trend pt = classify_growth(p_sup, window);
    rep.power_trend = pt.slope;
    rep.power_bounded = pt.verdict;
    const Trend st = classify_growth(s_sup, window);
    rep.partial_sum_trend = st.slope;
    rep.partial_sums_bounded = st.verdict;

    rep.singularity_locations = singularity_scan(spec, scan_grid(), kScanThreshold);
    std::sort(rep.singularity_locations.begin(), rep.singularity_locations.end());

    // Fit the derivative-domination constant
    //   ||F^(j)(e^{i theta})|| <= C j! |theta| m(|theta|)^{j+1}
    // against an envelope from resolvent samples, over orders j <= 5 on a
    // subsample of the profile angles (both signs).
    const ResolventProfile prof = resolvent_profile(spec, 40, 1e-3);
    const RateFunction env = fit_envelope(prof.samples);
    const std::size_t step = std::max<std::size_t>(1, prof.samples.size() / 12);
    double cfit = 0.0;
    bool fitted = false;
    for (std::size_t i = 0; i < prof.samples.size(); i += step) {
        const double theta = prof.samples[i].theta;
        for (int sign = -1; sign <= 1; sign += 2) {
            for (int j = 0; j <= 5; ++j) {
                double fj;
                try {
                    fj = boundary_derivative_norm(spec, j, sign * theta);
                } catch (const SingularityError&) {
                    break;  // angle sits on the spectrum; already flagged by the scan
                }
                const double denom =
                    factorial_d(j) * theta * std::pow(env(theta), j + 1);
                if (std::isfinite(denom) && denom > 0.0) {
                    cfit = std::max(cfit, fj / denom);
                    fitted = true;
                }
            }
        }
    }
    if (fitted) rep.dom_fun_constant = cfit;
    return rep;
}

HypothesisReport check_hypotheses(Sequence& x, long window) {
    if (window < 100)
        throw ParameterError("hypothesis window must span at least 100 terms");
    HypothesisReport rep;
    rep.window = window;

    std::vector<std::pair<long, double>> s_sup;
    double run_s = 0.0;
    for (long n = 0; n <= window; ++n) {
        run_s = std::max(run_s, sup_norm(x.partial_sum(n)));
        s_sup.emplace_back(n, run_s);
    }
    rep.sup_partial_sums = run_s;
    const Trend st = classify_growth(s_sup, window);
    rep.partial_sum_trend = st.slope;
    rep.partial_sums_bounded = st.verdict;

    // Power-boundedness concerns an operator; a bare sequence provides no
    // evidence either way.
    rep.power_bounded = Verdict3::Inconclusive;
    rep.power_bound = 0.0;

    // Probe the transform G_x(z) = sum_n x_n z^{-n-1} just outside the unit
    // circle; a boundary singularity at angle theta shows up as sup-norm
    // growth past 10/|theta| at z = 1.01 e^{i theta}.
    const long terms = std::max(window, kMinProbeTerms);
    const std::size_t d = x.dim();
    for (const double theta : scan_grid()) {
        const Complex zinv = Complex(1.0) / std::polar(kProbeRadius, theta);
        std::vector<Complex> acc(d, Complex(0.0));
        Complex w = zinv;
        for (long n = 0; n <= terms; ++n) {
            const std::vector<Complex>& xv = x.value(n);
            for (std::size_t i = 0; i < d; ++i) acc[i] += xv[i] * w;
            w *= zinv;
        }
        if (sup_norm(acc) > kScanThreshold / std::fabs(theta))
            rep.singularity_locations.push_back(theta);
    }
    std::sort(rep.singularity_locations.begin(), rep.singularity_locations.end());
    return rep;
}

std::vector<ScheduleEntry> epsilon_schedule(const RateFunction& m, DerivedRate::Kind kind,
                                            int order, double c,
                                            const std::vector<long>& n_list) {
    std::optional<DerivedRate> d;
    if (kind == DerivedRate::Kind::mlog) {
        if (!(c > 0.0) || !(c < 1.0))
            throw ParameterError("smooth-regime constant c must lie in (0, 1)");
        d = DerivedRate::mlog(m);
    } else {
        if (!(c > 0.0)) throw ParameterError("finite-order constant c must be positive");
        d = DerivedRate::mk(m, order);
    }
    const double floor_log = derived_eval_log(*d, kPi);
    std::vector<ScheduleEntry> out;
    out.reserve(n_list.size());
    for (const long n : n_list) {
        if (n < 1) throw ParameterError("schedule indices must be >= 1");
        ScheduleEntry e;
        e.n = n;
        const double ly = std::log(c) + std::log(static_cast<double>(n));
        if (ly < floor_log - 1e-12)
            e.pre_asymptotic = true;
        else
            e.eps = invert_rate_log(*d, ly);
        out.push_back(e);
    }
    return out;
}

SlopeEstimate slope_estimate(const std::vector<double>& values, long n1, long n2) {
    if (n1 < 1 || n2 < 2 * n1 || n2 >= static_cast<long>(values.size()))
        throw ParameterError("slope window must satisfy 1 <= n1, 2*n1 <= n2 < size");
    std::vector<std::pair<long, double>> pts;
    for (long n = n1; n <= n2; ++n) {
        if (!(values[n] > 0.0))
            throw InputError("slope estimation requires positive values on the window");
        pts.emplace_back(n, values[n]);
    }
    const auto [slope, residual] = loglog_fit(pts);
    return {slope, residual};
}

CertifySeriesResult certify_series(const std::vector<double>& d, const RateFunction& m,
                                   double c, long calib_lo, long calib_hi, long valid_lo,
                                   long valid_hi) {
    if (!(c > 0.0) || !(c < 1.0))
        throw ParameterError("certification constant c must lie in (0, 1)");
    if (calib_lo < 1 || calib_hi < calib_lo || valid_lo <= calib_hi || valid_hi < valid_lo)
        throw ParameterError(
            "windows must satisfy 1 <= calib_lo <= calib_hi < valid_lo <= valid_hi");
    if (valid_hi >= static_cast<long>(d.size()))
        throw ParameterError("decay series is shorter than the validation window");

    CertifySeriesResult res;
    res.predicted.assign(valid_hi - calib_lo + 1, std::numeric_limits<double>::quiet_NaN());
    bool any_pre = false;
    for (long n = calib_lo; n <= valid_hi; ++n) {
        const PredictedBound pb = predicted_bound_smooth(m, c, n);
        if (pb.pre_asymptotic)
            any_pre = true;
        else
            res.predicted[n - calib_lo] = *pb.value;
    }
    if (any_pre) {
        res.verdict = CertifyVerdict::PreAsymptotic;
        return res;
    }

    double fitted = 0.0;
    for (long n = calib_lo; n <= calib_hi; ++n)
        fitted = std::max(fitted, d[n] / res.predicted[n - calib_lo]);
    res.fitted_c = fitted;

    res.verdict = CertifyVerdict::Certified;
    for (long n = valid_lo; n <= valid_hi; ++n) {
        const double pred = res.predicted[n - calib_lo];
        const double ratio = d[n] / pred;
        res.worst_valid_ratio = std::max(res.worst_valid_ratio, ratio);
        // a hair of slack so the fitted constant itself never "violates"
        if (d[n] > fitted * pred * (1.0 + 1e-12) && res.first_violation < 0) {
            res.first_violation = n;
            res.verdict = CertifyVerdict::Violated;
        }
    }
    return res;
}

DecayReport certify_decay(const OperatorSpec& spec, const CertifyOptions& opt) {
    if (opt.grid_size < 2) throw ParameterError("resolvent grid needs at least 2 points");
    DecayReport rep;
    rep.options = opt;

    const long hyp_window =
        spec.diagonal_entries() ? std::max<long>(100, opt.valid_hi)
                                : std::max<long>(100, std::min<long>(opt.valid_hi, 400));
    rep.hypotheses = check_hypotheses(spec, hyp_window);
    if (rep.hypotheses.any_failure())
        throw HypothesisError("certification refused: " + rep.hypotheses.first_failure(),
                              rep.hypotheses.first_failure());

    const ResolventProfile prof =
        resolvent_profile(spec, opt.grid_size, opt.theta_min, opt.theta_max);
    rep.envelope = fit_envelope(prof.samples);
    rep.orbit = orbit_decay(spec, opt.valid_hi);

    const CertifySeriesResult core =
        certify_series(rep.orbit.values, *rep.envelope, opt.c, opt.calib_lo, opt.calib_hi,
                       opt.valid_lo, opt.valid_hi);
    rep.predicted = core.predicted;
    rep.fitted_c = core.fitted_c;
    rep.verdict = core.verdict;
    rep.first_violation = core.first_violation;
    rep.worst_valid_ratio = core.worst_valid_ratio;

    std::vector<long> ns;
    for (long n = opt.calib_lo; n <= opt.valid_hi; ++n) ns.push_back(n);
    rep.schedule = epsilon_schedule(*rep.envelope, DerivedRate::Kind::mlog, 0, opt.c, ns);

    try {
        rep.empirical = slope_estimate(rep.orbit.values, opt.valid_lo, opt.valid_hi);
    } catch (const Error&) {
        rep.warnings.push_back(
            "empirical exponent unavailable: validation window too short or "
            "contains nonpositive orbit values");
    }

    if (opt.valid_hi > spec.dim() / 10)
        rep.warnings.push_back(
            "validation window reaches past dim/10; a fixed finite model decays "
            "exponentially there and may understate the asymptotic rate");
    return rep;
}

} // namespace ktdecay
