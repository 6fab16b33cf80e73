#ifndef KTDECAY_ANALYSIS_HPP
#define KTDECAY_ANALYSIS_HPP

#include <optional>
#include <string>
#include <vector>

#include "ktdecay/kernels.hpp"
#include "ktdecay/operators.hpp"
#include "ktdecay/rates.hpp"

namespace ktdecay {

/// Window-qualified verdict: numerical evidence can support or refute a
/// hypothesis on a finite window but never proves it.
enum class Verdict3 { HoldsOnWindow, Fails, Inconclusive };

enum class CertifyVerdict { Certified, Violated, PreAsymptotic };

std::string to_string(Verdict3 v);
std::string to_string(CertifyVerdict v);

/// Evidence about the decay-theorem hypotheses gathered on [0, window]:
/// bounded partial sums, power-boundedness (operators only), absence of
/// boundary singularities away from angle 0, and a fitted constant for the
/// derivative-domination bound ||F^(j)|| <= C j! |theta| m(|theta|)^{j+1}.
struct HypothesisReport {
    Verdict3 partial_sums_bounded = Verdict3::Inconclusive;
    double sup_partial_sums = 0.0;
    double partial_sum_trend = 0.0;  // log-log slope of the running sup
    Verdict3 power_bounded = Verdict3::Inconclusive;
    double power_bound = 0.0;
    double power_trend = 0.0;
    std::vector<double> singularity_locations;
    std::optional<double> dom_fun_constant;
    long window = 0;

    bool any_failure() const;
    /// Name of the first failing hypothesis, empty when none fails.
    /// A flagged boundary singularity counts as a failure.
    std::string first_failure() const;
};

/// Operator form: orbit partial sums telescope to I - T^{n+1}; power norms
/// tracked directly; singularity scan on |theta| in [0.5, pi] (threshold
/// 10/|theta|); derivative-domination constant fitted for orders j <= 5
/// against an envelope from resolvent samples.  For dense variants the
/// norm series is sampled on a stride so at most ~256 norm computations
/// are performed. Requires window >= 100.
HypothesisReport check_hypotheses(const OperatorSpec& spec, long window);

/// Sequence form: partial sums from the cached sums; power-boundedness is
/// not applicable (Inconclusive); singularities probed via the truncated
/// transform G_x(1.01 e^{i theta}) flagged where sup-norm > 10/|theta|.
HypothesisReport check_hypotheses(Sequence& x, long window);

struct ScheduleEntry {
    long n = 0;
    bool pre_asymptotic = false;
    std::optional<double> eps;  // set iff !pre_asymptotic
};

/// Cutoff schedule eps_n solving  derived(m)(eps_n) = c*n  for each n.
/// kind selects the derived rate: mlog requires c in (0,1); mk requires
/// c > 0 and order >= 1.  Entries where c*n falls below the derived value
/// at eps = pi are marked pre-asymptotic.
std::vector<ScheduleEntry> epsilon_schedule(const RateFunction& m, DerivedRate::Kind kind,
                                            int order, double c,
                                            const std::vector<long>& n_list);

struct SlopeEstimate {
    double exponent = 0.0;
    double residual = 0.0;  // RMS deviation of the log-log fit
};

/// Least-squares slope of log values[n] against log n over n in [n1, n2].
/// Requires n1 >= 1, n2 >= 2*n1, n2 < values.size() and positive values on
/// the window (InputError otherwise).
SlopeEstimate slope_estimate(const std::vector<double>& values, long n1, long n2);

/// Calibrate-then-validate certification of a decay series d_n against the
/// smooth-regime prediction  predicted(n) = mlog^{-1}(c n) + 1/n:
/// the constant is fitted as max over the calibration window of
/// d_n / predicted(n), then d_n <= fitted_c * predicted(n) is asserted on
/// the disjoint validation window to its right.
struct CertifySeriesResult {
    CertifyVerdict verdict = CertifyVerdict::PreAsymptotic;
    double fitted_c = 0.0;
    /// predicted(n) for n in [calib_lo, valid_hi] (NaN where pre-asymptotic).
    std::vector<double> predicted;
    long first_violation = -1;
    double worst_valid_ratio = 0.0;  // max over valid of d_n / predicted(n)
};

CertifySeriesResult certify_series(const std::vector<double>& d, const RateFunction& m,
                                   double c, long calib_lo, long calib_hi, long valid_lo,
                                   long valid_hi);

struct CertifyOptions {
    double c = 0.5;          // admissible interval (0, 1)
    long calib_lo = 50;
    long calib_hi = 100;
    long valid_lo = 101;
    long valid_hi = 1000;
    int grid_size = 60;      // resolvent profile resolution
    double theta_min = 1e-4;
    double theta_max = 0.0;  // 0 selects pi
};

/// Full certification record for one operator run.
struct DecayReport {
    HypothesisReport hypotheses;
    OrbitSeries orbit;
    std::optional<RateFunction> envelope;
    std::vector<ScheduleEntry> schedule;  // n in [calib_lo, valid_hi]
    std::vector<double> predicted;        // same alignment as schedule
    double fitted_c = 0.0;
    std::optional<SlopeEstimate> empirical;
    CertifyVerdict verdict = CertifyVerdict::PreAsymptotic;
    long first_violation = -1;
    double worst_valid_ratio = 0.0;
    std::vector<std::string> warnings;
    CertifyOptions options;  // echoed configuration
};

/// Pipeline: hypothesis checks (refusal via HypothesisError when one
/// fails), resolvent envelope fit, orbit decay, series certification,
/// slope estimate on the validation window, cutoff schedule.  A warning is
/// recorded when the validation window leaves the finite model's
/// pre-exponential regime (valid_hi > dim/10).
DecayReport certify_decay(const OperatorSpec& spec, const CertifyOptions& opt = {});

} // namespace ktdecay

#endif
