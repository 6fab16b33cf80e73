#ifndef KTDECAY_KERNELS_HPP
#define KTDECAY_KERNELS_HPP

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ktdecay/linalg.hpp"
#include "ktdecay/operators.hpp"
#include "ktdecay/rates.hpp"

namespace ktdecay {

/// Frequency cutoff family used to smooth a sequence: a plateau function
/// psi_eps on [-pi, pi] that vanishes for |theta| <= eps, ramps up on
/// eps <= |theta| <= 2*eps and equals 1 outside, together with its Fourier
/// coefficient table y_n (|n| <= coeff_count) and the complementary table
/// z_n of 1 - psi_eps.
///
/// Two variants:
///  - piecewise_linear: the ramp is linear; coefficients in closed form.
///  - smooth: the ramp is the standard C^infinity partition function
///    h(s) = g(s)/(g(s)+g(1-s)) with g(s) = exp(-1/s); coefficients by
///    oscillation-aware adaptive quadrature.
class KernelFamily {
public:
    enum class Variant { PiecewiseLinear, SmoothCutoff };

    /// eps in (0, pi/2]. coeff_count <= 0 selects the default table size
    /// ceil(100/eps), which keeps the coefficient l1 tail below ~0.01.
    static KernelFamily piecewise_linear(double eps, long coeff_count = 0);
    static KernelFamily smooth(double eps, long coeff_count = 0);

    Variant variant() const { return variant_; }
    double epsilon() const { return eps_; }
    long coeff_count() const { return static_cast<long>(y_.size()) - 1; }

    /// Pointwise cutoff value; even in theta.
    double psi(double theta) const;

    /// Fourier coefficient y_n of psi_eps; symmetric in n.
    /// Throws RangeError for |n| > coeff_count.
    double coeff(long n) const;

    /// Coefficient z_n of the complement 1 - psi_eps:
    /// z_0 = 1 - y_0 and z_n = -y_n otherwise.
    double complement_coeff(long n) const;

    /// Upper estimate of the l1 tail sum_{|k| > n} |y_k|, of the form
    /// scale/n. Exact 4/(pi*eps*n) bound for the piecewise-linear family;
    /// fitted (conservative) 1/n^2-envelope tail for the smooth family.
    double l1_tail_bound(long n) const;

    /// Smallest table size whose l1 tail is <= per_unit_tol.
    long required_coeff_count(double per_unit_tol) const;

private:
    KernelFamily() = default;
    Variant variant_ = Variant::PiecewiseLinear;
    double eps_ = 0.0;
    std::vector<double> y_;    // y_0 .. y_N
    double tail_scale_ = 0.0;  // l1 tail bound = tail_scale_ / n
};

/// Standalone C^infinity ramp h(s): 0 for s <= 0, 1 for s >= 1.
double smooth_ramp(double s);

/// Density of the complement-coefficient increments for the
/// piecewise-linear family:
///   phi(t) = (2/pi) * ((cos 2t - cos t)/t^3 + (sin 2t - sin(t)/2)/t^2),
/// phi(0) = 0. Evaluated in product-difference form with a Taylor guard
/// near 0, where the two O(1/t) halves cancel to O(t).
double phi_eval(double t);

struct ZDiffIdentity {
    double lhs;  // z_n - z_{n-1} from the coefficient table
    double rhs;  // eps * integral of phi over [eps*(n-1), eps*n]
};

/// Verifiable identity z_n - z_{n-1} = eps * int_{eps(n-1)}^{eps n} phi(t) dt
/// for the piecewise-linear family. Throws RangeError if either index is
/// outside the table and ParameterError for a smooth-family argument.
ZDiffIdentity z_diff_identity(const KernelFamily& fam, long n);

/// Max-entry norm of a complex vector.
double sup_norm(const std::vector<Complex>& v);

/// Lazily generated vector-valued sequence x_n in C^d (n >= 0) with cached
/// values, cached partial sums s_n = sum_{k<=n} x_k, and running sup
/// estimates. The generator is invoked exactly once per index, in
/// increasing order, so stateful (incremental) generators are safe.
class Sequence {
public:
    using Generator = std::function<std::vector<Complex>(long)>;

    Sequence(Generator gen, std::size_t dim);

    static Sequence ones();                 // x_n = 1 (partial sums unbounded)
    static Sequence alternating();          // x_n = (-1)^n
    static Sequence impulse();              // x_0 = 1, x_n = 0 otherwise
    static Sequence geometric(Complex mu);  // x_n = mu^n (1 - mu), |mu| < 1
    /// Finitely supported sequence; zero beyond the given prefix.
    static Sequence from_values(std::vector<std::vector<Complex>> prefix, std::size_t dim);
    /// Entries of T^n (I - T): eigenvalue-wise for diagonal-form operators,
    /// flattened d x d entries for dense ones.
    static Sequence operator_orbit(const OperatorSpec& op);

    std::size_t dim() const { return dim_; }
    const std::vector<Complex>& value(long n);
    std::vector<Complex> partial_sum(long n);
    /// max over 0 <= j <= n_max of sup_norm(s_j).
    double sup_partial_sum(long n_max);
    /// max over 0 <= j <= n_max of sup_norm(x_j).
    double sup_value(long n_max);

private:
    void extend(long n);
    Generator gen_;
    std::size_t dim_;
    std::vector<std::vector<Complex>> values_;
    std::vector<Complex> running_sum_;
    std::vector<std::vector<Complex>> partial_;
    double sup_partial_ = 0.0;
    double sup_value_ = 0.0;
};

/// Boundary samples of the first-moment transform: a callable
/// theta -> F(e^{i theta}) in C^d on [-pi, 0) union (0, pi].
struct BoundarySampler {
    std::function<std::vector<Complex>(double)> eval;
    std::size_t dim = 1;
};

/// Smoothed sequence x^eps over n in [n_begin, n_end]:
///   x^eps_n = sum_{j >= 0} x_j y_{n-j},
/// truncated to |n - j| <= coeff_count. The omitted mass is bounded by
/// sup||x|| * l1_tail_bound(coeff_count) with sup||x|| estimated from the
/// accessed range plus a probe window beyond it; if that bound exceeds
/// tol, throws ToleranceError carrying the required table size.
std::vector<std::vector<Complex>> convolve(Sequence& x, const KernelFamily& fam,
                                           long n_begin, long n_end, double tol = 1e-6);

/// Spectral form of the smoothed sequence:
///   x^eps_n = (1/2pi) int_{eps <= |theta| <= pi}
///                 e^{i (n+1) theta} psi_eps(theta) F(e^{i theta}) d theta,
/// by adaptive quadrature with panels <= pi/(4 max(1,|n|)).
/// Non-finite boundary samples raise InputError.
std::vector<Complex> spectral_form(const BoundarySampler& F, const KernelFamily& fam,
                                   long n, double tol = 1e-8);

/// sup-norm gaps ||x_n - x^eps_n|| over [n_begin, n_end].
std::vector<double> approximation_gap(Sequence& x, const KernelFamily& fam,
                                      long n_begin, long n_end, double tol = 1e-6);

/// Exact-rational verification of the integration-by-parts coefficient
/// bounds used in the decay budget:
///   A = n!/(n+k)!                       <= n^-k
///   B = n!/(n+k-1)! sum_{j=1}^k 1/(n+j) <= k n^-k
///   C_j = n!/(n+j+1)! sum_{l=1}^{j+1} 1/(n+l) <= (j+1) n^-(j+2),  0<=j<=k-2.
struct CoefficientBounds {
    double a = 0.0;
    double b = 0.0;
    std::vector<double> c;
    std::string a_exact;  // "p/q"
    std::string b_exact;
    std::vector<std::string> c_exact;
    bool bounds_ok = false;
};

/// Requires 1 <= n <= 100 and 1 <= k <= 20 (exact arithmetic window);
/// outside it throws RangeError.
CoefficientBounds coefficient_bounds_check(long n, long k);

/// Decay budget D + E for the smoothed sequence at (eps, n): principal
/// term plus remainder from the k-fold integration-by-parts expansion
/// with k = floor(c n / m(eps)).
double smooth_decay_budget(const RateFunction& m, double eps, long n, double c);

} // namespace ktdecay

#endif
