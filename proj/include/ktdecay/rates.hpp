#ifndef KTDECAY_RATES_HPP
#define KTDECAY_RATES_HPP

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ktdecay/errors.hpp"

namespace ktdecay {

/// One tabulated point (eps, value) of a rate function.
struct RateSample {
    double eps;
    double value;
};

/// A resolvent-growth rate function m : (0, pi] -> [1, inf), continuous and
/// non-increasing.  Three concrete shapes are supported:
///
///   poly(C, alpha)   m(eps) = C * (pi/eps)^alpha,    C >= 1, alpha >= 1
///   exponential(a)   m(eps) = exp(eps^-a),           a > 0
///   tabulated(...)   piecewise-linear interpolation of (log eps, log m)
///                    between samples, clamped below by 1, constant
///                    extension outside the sampled range
///
/// Evaluation anywhere outside (0, pi] is a DomainError.  All shapes are
/// also evaluable in log scale, which stays finite where the plain value
/// overflows double (exp shapes at small eps).
class RateFunction {
  public:
    struct Poly {
        double scale;   // C
        double alpha;
    };
    struct Exp {
        double alpha;
    };
    struct Tabulated {
        std::vector<RateSample> samples;   // ascending eps, values clamped >= 1
    };

    static RateFunction poly(double scale, double alpha);
    static RateFunction exponential(double alpha);
    static RateFunction tabulated(std::vector<RateSample> samples);
    /// Constant rate max(value, 1) on all of (0, pi].
    static RateFunction constant(double value);

    /// m(eps); may be +inf if the value exceeds double range.
    double operator()(double eps) const;
    /// log m(eps), finite for all eps in (0, pi].
    double log_value(double eps) const;

    const std::variant<Poly, Exp, Tabulated>& shape() const { return shape_; }

  private:
    explicit RateFunction(std::variant<Poly, Exp, Tabulated> shape);
    std::variant<Poly, Exp, Tabulated> shape_;
};

/// Derived rates built from a base rate m:
///
///   mlog    m(eps) * log(1 + m(eps)/eps)
///   mk(k)   m(eps) * (m(eps)/eps)^(1/k),  k >= 1
///
/// Both are continuous, non-increasing and invertible on their range.
class DerivedRate {
  public:
    enum class Kind { mlog, mk };

    static DerivedRate mlog(RateFunction base);
    static DerivedRate mk(RateFunction base, int k);

    Kind kind() const { return kind_; }
    int order() const { return k_; }
    const RateFunction& base() const { return base_; }

    double log_value(double eps) const;

  private:
    DerivedRate(RateFunction base, Kind kind, int k);
    RateFunction base_;
    Kind kind_;
    int k_;
};

/// Evaluate a derived rate; may be +inf if the value exceeds double range.
double derived_eval(const DerivedRate& d, double eps);

/// log of derived_eval, finite on all of (0, pi].
double derived_eval_log(const DerivedRate& d, double eps);

/// Invert a derived rate: the largest eps in [1e-12, pi] with
/// derived_eval(d, eps) = y, found by bisection on log eps (at most 200
/// iterations).  The converged bracket certifies the preimage to one part
/// in 1e-15 of log eps; a broken bracket invariant after convergence is a
/// NumericError.  A query below the value at eps = pi is a RangeError.
double invert_rate(const DerivedRate& d, double y);

/// Same inversion with the query given as log y; usable where y itself
/// overflows double.
double invert_rate_log(const DerivedRate& d, double log_y);

/// A decay prediction for one index n.  When c*n falls below the derived
/// rate's value at eps = pi the sequence has not yet entered the regime the
/// rate resolves, and no finite prediction is made.
struct PredictedBound {
    bool pre_asymptotic = false;
    std::optional<double> value;   // set iff !pre_asymptotic
};

/// Predicted decay bound in the finitely-smooth regime of order k >= 1:
/// the inverse of mk(k) at c*n, for any c > 0.
PredictedBound predicted_bound_ck(const RateFunction& m, int k, double c, long n);

/// Predicted decay bound in the smooth regime: the inverse of mlog at c*n
/// plus 1/n, for c in (0, 1).
PredictedBound predicted_bound_smooth(const RateFunction& m, double c, long n);

/// Budget split of the decay estimate at cutoff scale eps:
///   order       largest usable smoothness order, floor(c*n / m(eps))
///   principal   m(eps) * exp(-c*n / m(eps))
///   remainder   m(eps) / n^2
/// When c*n = mlog(eps) the principal equals eps*m(eps)/(eps+m(eps)) <= eps.
struct ProofBudget {
    long order;
    double principal;
    double remainder;
};

ProofBudget proof_budget(const RateFunction& m, double eps, long n, double c);

} // namespace ktdecay

#endif
