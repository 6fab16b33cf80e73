#include "ktdecay/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <boost/multiprecision/cpp_int.hpp>

#include "ktdecay/errors.hpp"
#include "ktdecay/quadrature.hpp"

namespace ktdecay {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kCoeffQuadTol = 1e-10;

long default_coeff_count(double eps) {
    return static_cast<long>(std::ceil(100.0 / eps));
}

void validate_eps(double eps) {
    if (!(eps > 0.0) || !(eps <= kPi / 2.0))
        throw DomainError("kernel cutoff width must lie in (0, pi/2]");
}

} // namespace

double smooth_ramp(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double g = std::exp(-1.0 / s);
    const double gc = std::exp(-1.0 / (1.0 - s));
    return g / (g + gc);
}

KernelFamily KernelFamily::piecewise_linear(double eps, long coeff_count) {
    validate_eps(eps);
    if (coeff_count <= 0) coeff_count = default_coeff_count(eps);
    KernelFamily fam;
    fam.variant_ = Variant::PiecewiseLinear;
    fam.eps_ = eps;
    fam.y_.resize(coeff_count + 1);
    fam.y_[0] = 1.0 - 1.5 * eps / kPi;
    for (long n = 1; n <= coeff_count; ++n) {
        // cos(2 n eps) - cos(n eps) in product form (better conditioned).
        const double a = n * eps;
        const double num = -2.0 * std::sin(1.5 * a) * std::sin(0.5 * a);
        fam.y_[n] = num / (eps * kPi * static_cast<double>(n) * static_cast<double>(n));
    }
    // |y_n| <= 2/(pi eps n^2), so the two-sided tail beyond N is <= 4/(pi eps N).
    fam.tail_scale_ = 4.0 / (kPi * eps);
    return fam;
}

KernelFamily KernelFamily::smooth(double eps, long coeff_count) {
    validate_eps(eps);
    if (coeff_count <= 0) coeff_count = default_coeff_count(eps);
    KernelFamily fam;
    fam.variant_ = Variant::SmoothCutoff;
    fam.eps_ = eps;
    fam.y_.resize(coeff_count + 1);
    double peak = 0.0;
    for (long n = 0; n <= coeff_count; ++n) {
        const double nd = static_cast<double>(n);
        auto ramp = [eps, nd](double theta) {
            return std::cos(nd * theta) * smooth_ramp(theta / eps - 1.0);
        };
        const double panel = std::min(kPi / (4.0 * std::max(1.0, nd)), eps / 8.0);
        const double ramp_part = quad::adaptive_simpson(ramp, eps, 2.0 * eps, kCoeffQuadTol, panel);
        const double plateau = (n == 0) ? (kPi - 2.0 * eps) : (-std::sin(2.0 * nd * eps) / nd);
        fam.y_[n] = (ramp_part + plateau) / kPi;
        if (n >= 1) peak = std::max(peak, nd * nd * std::fabs(fam.y_[n]));
    }
    // Smooth cutoff coefficients decay faster than any power, so the largest
    // n^2 |y_n| over the table dominates the tail envelope.
    fam.tail_scale_ = 2.0 * peak;
    return fam;
}

double KernelFamily::psi(double theta) const {
    const double a = std::fabs(theta);
    if (a <= eps_) return 0.0;
    if (a >= 2.0 * eps_) return 1.0;
    const double s = a / eps_ - 1.0;
    return variant_ == Variant::PiecewiseLinear ? s : smooth_ramp(s);
}

double KernelFamily::coeff(long n) const {
    const long a = n < 0 ? -n : n;
    if (a > coeff_count())
        throw RangeError("coefficient index " + std::to_string(n) +
                         " outside table of size " + std::to_string(coeff_count()));
    return y_[a];
}

double KernelFamily::complement_coeff(long n) const {
    const double yn = coeff(n);
    return n == 0 ? 1.0 - yn : -yn;
}

double KernelFamily::l1_tail_bound(long n) const {
    if (n <= 0) throw ParameterError("tail bound requires a positive index");
    return tail_scale_ / static_cast<double>(n);
}

long KernelFamily::required_coeff_count(double per_unit_tol) const {
    if (!(per_unit_tol > 0.0)) throw ParameterError("tolerance must be positive");
    return static_cast<long>(std::ceil(tail_scale_ / per_unit_tol));
}

double phi_eval(double t) {
    const double at = std::fabs(t);
    if (at < 1e-4) {
        // Odd-series expansion of the bracket; the two halves are each
        // O(1/t) and cancel to O(t), so the direct formula is unusable here.
        const double t2 = t * t;
        return (2.0 / kPi) * t * (-0.625 + t2 * (0.175 - t2 * (17.0 / 896.0)));
    }
    const double c = -2.0 * std::sin(1.5 * t) * std::sin(0.5 * t);  // cos 2t - cos t
    const double s = std::sin(t) * (2.0 * std::cos(t) - 0.5);       // sin 2t - sin(t)/2
    return (2.0 / kPi) * (c / (t * t * t) + s / (t * t));
}

ZDiffIdentity z_diff_identity(const KernelFamily& fam, long n) {
    if (fam.variant() != KernelFamily::Variant::PiecewiseLinear)
        throw ParameterError("increment identity is defined for the piecewise-linear family");
    ZDiffIdentity out;
    out.lhs = fam.complement_coeff(n) - fam.complement_coeff(n - 1);
    const double eps = fam.epsilon();
    out.rhs = eps * quad::adaptive_simpson([](double t) { return phi_eval(t); },
                                           eps * static_cast<double>(n - 1),
                                           eps * static_cast<double>(n), 1e-12, 0.25);
    return out;
}

double sup_norm(const std::vector<Complex>& v) {
    double m = 0.0;
    for (const auto& x : v) m = std::max(m, std::abs(x));
    return m;
}

Sequence::Sequence(Generator gen, std::size_t dim) : gen_(std::move(gen)), dim_(dim) {
    if (dim_ == 0) throw ParameterError("sequence dimension must be positive");
    running_sum_.assign(dim_, Complex(0.0));
}

void Sequence::extend(long n) {
    if (n < 0) throw RangeError("sequence index must be nonnegative");
    while (static_cast<long>(values_.size()) <= n) {
        const long idx = static_cast<long>(values_.size());
        std::vector<Complex> v = gen_(idx);
        if (v.size() != dim_)
            throw InputError("sequence generator returned a value of wrong dimension");
        for (std::size_t i = 0; i < dim_; ++i) running_sum_[i] += v[i];
        partial_.push_back(running_sum_);
        sup_value_ = std::max(sup_value_, sup_norm(v));
        sup_partial_ = std::max(sup_partial_, sup_norm(running_sum_));
        values_.push_back(std::move(v));
    }
}

const std::vector<Complex>& Sequence::value(long n) {
    extend(n);
    return values_[n];
}

std::vector<Complex> Sequence::partial_sum(long n) {
    extend(n);
    return partial_[n];
}

double Sequence::sup_partial_sum(long n_max) {
    extend(n_max);
    double m = 0.0;
    for (long j = 0; j <= n_max; ++j) m = std::max(m, sup_norm(partial_[j]));
    return m;
}

double Sequence::sup_value(long n_max) {
    extend(n_max);
    double m = 0.0;
    for (long j = 0; j <= n_max; ++j) m = std::max(m, sup_norm(values_[j]));
    return m;
}

Sequence Sequence::ones() {
    return Sequence([](long) { return std::vector<Complex>{Complex(1.0)}; }, 1);
}

Sequence Sequence::alternating() {
    return Sequence(
        [](long n) { return std::vector<Complex>{Complex(n % 2 == 0 ? 1.0 : -1.0)}; }, 1);
}

Sequence Sequence::impulse() {
    return Sequence([](long n) { return std::vector<Complex>{Complex(n == 0 ? 1.0 : 0.0)}; }, 1);
}

Sequence Sequence::geometric(Complex mu) {
    if (std::abs(mu) >= 1.0)
        throw DomainError("geometric sequence ratio must satisfy |mu| < 1");
    auto pw = std::make_shared<Complex>(1.0);
    const Complex scale = Complex(1.0) - mu;
    return Sequence(
        [pw, mu, scale](long) {
            const Complex v = *pw * scale;
            *pw *= mu;
            return std::vector<Complex>{v};
        },
        1);
}

Sequence Sequence::from_values(std::vector<std::vector<Complex>> prefix, std::size_t dim) {
    for (const auto& row : prefix)
        if (row.size() != dim) throw InputError("sequence prefix row has wrong dimension");
    auto data = std::make_shared<std::vector<std::vector<Complex>>>(std::move(prefix));
    return Sequence(
        [data, dim](long n) {
            if (n < static_cast<long>(data->size())) return (*data)[n];
            return std::vector<Complex>(dim, Complex(0.0));
        },
        dim);
}

Sequence Sequence::operator_orbit(const OperatorSpec& op) {
    if (const auto* eig = op.diagonal_entries()) {
        const std::size_t d = eig->size();
        auto lam = std::make_shared<std::vector<Complex>>(*eig);
        auto pw = std::make_shared<std::vector<Complex>>(d, Complex(1.0));
        return Sequence(
            [lam, pw, d](long) {
                std::vector<Complex> v(d);
                for (std::size_t j = 0; j < d; ++j) {
                    v[j] = (*pw)[j] * (Complex(1.0) - (*lam)[j]);
                    (*pw)[j] *= (*lam)[j];
                }
                return v;
            },
            d);
    }
    ComplexMatrix t = op.to_dense();
    const std::size_t d = t.dim();
    auto state = std::make_shared<ComplexMatrix>(ComplexMatrix::identity(d) - t);
    auto mat = std::make_shared<ComplexMatrix>(std::move(t));
    return Sequence(
        [state, mat, d](long n) {
            if (n > 0) *state = (*mat) * (*state);
            std::vector<Complex> flat(d * d);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) flat[i * d + j] = (*state)(i, j);
            return flat;
        },
        d * d);
}

std::vector<std::vector<Complex>> convolve(Sequence& x, const KernelFamily& fam,
                                           long n_begin, long n_end, double tol) {
    if (n_begin < 0 || n_end < n_begin)
        throw ParameterError("convolution range must satisfy 0 <= n_begin <= n_end");
    if (!(tol > 0.0)) throw ParameterError("convolution tolerance must be positive");
    const long big_n = fam.coeff_count();
    const long probe = std::min<long>(big_n, 512);
    const double sup_x = x.sup_value(n_end + big_n + probe);
    if (sup_x > 0.0) {
        const double tail = fam.l1_tail_bound(big_n) * sup_x;
        if (tail > tol)
            throw ToleranceError("coefficient table too small: truncation tail bound " +
                                     std::to_string(tail) + " exceeds tolerance " +
                                     std::to_string(tol),
                                 fam.required_coeff_count(tol / sup_x));
    }
    const std::size_t d = x.dim();
    std::vector<std::vector<Complex>> out;
    out.reserve(n_end - n_begin + 1);
    for (long n = n_begin; n <= n_end; ++n) {
        std::vector<Complex> acc(d, Complex(0.0));
        const long j_lo = std::max<long>(0, n - big_n);
        const long j_hi = n + big_n;
        for (long j = j_lo; j <= j_hi; ++j) {
            const double y = fam.coeff(n - j);
            if (y == 0.0) continue;
            const std::vector<Complex>& xv = x.value(j);
            for (std::size_t i = 0; i < d; ++i) acc[i] += xv[i] * y;
        }
        out.push_back(std::move(acc));
    }
    return out;
}

std::vector<Complex> spectral_form(const BoundarySampler& F, const KernelFamily& fam,
                                   long n, double tol) {
    if (!F.eval) throw ParameterError("boundary sampler has no callable");
    if (!(tol > 0.0)) throw ParameterError("tolerance must be positive");
    const double eps = fam.epsilon();
    const std::size_t d = F.dim;
    auto integrand = [&](double theta) {
        std::vector<Complex> fv = F.eval(theta);
        if (fv.size() != d) throw InputError("boundary sample has wrong dimension");
        for (const auto& v : fv)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw InputError("boundary sample is not finite at theta = " +
                                 std::to_string(theta));
        const Complex osc =
            std::polar(fam.psi(theta), static_cast<double>(n + 1) * theta);
        for (auto& v : fv) v *= osc;
        return fv;
    };
    const double panel = kPi / (4.0 * std::max<double>(1.0, std::fabs(static_cast<double>(n))));
    const double raw_tol = tol * kPi;  // each half-line integral to tol * pi
    std::vector<Complex> pos = quad::adaptive_simpson(integrand, eps, kPi, raw_tol, panel);
    std::vector<Complex> neg = quad::adaptive_simpson(integrand, -kPi, -eps, raw_tol, panel);
    std::vector<Complex> out(d);
    for (std::size_t i = 0; i < d; ++i) out[i] = (pos[i] + neg[i]) / (2.0 * kPi);
    return out;
}

std::vector<double> approximation_gap(Sequence& x, const KernelFamily& fam,
                                      long n_begin, long n_end, double tol) {
    const std::vector<std::vector<Complex>> smoothed = convolve(x, fam, n_begin, n_end, tol);
    std::vector<double> out;
    out.reserve(smoothed.size());
    for (long n = n_begin; n <= n_end; ++n) {
        const std::vector<Complex>& xv = x.value(n);
        const std::vector<Complex>& sv = smoothed[n - n_begin];
        double m = 0.0;
        for (std::size_t i = 0; i < xv.size(); ++i) m = std::max(m, std::abs(xv[i] - sv[i]));
        out.push_back(m);
    }
    return out;
}

CoefficientBounds coefficient_bounds_check(long n, long k) {
    using boost::multiprecision::cpp_int;
    using boost::multiprecision::cpp_rational;
    if (n < 1 || n > 100 || k < 1 || k > 20)
        throw RangeError("coefficient bounds require 1 <= n <= 100 and 1 <= k <= 20");

    auto as_string = [](const cpp_rational& q) {
        return numerator(q).str() + "/" + denominator(q).str();
    };

    // A = n!/(n+k)! = 1/((n+1)...(n+k))
    cpp_rational a(1);
    for (long i = n + 1; i <= n + k; ++i) a /= i;

    // B = n!/(n+k-1)! * sum_{j=1}^{k} 1/(n+j)
    cpp_rational b(0);
    for (long j = 1; j <= k; ++j) b += cpp_rational(1, n + j);
    for (long i = n + 1; i <= n + k - 1; ++i) b /= i;

    CoefficientBounds out;
    out.a = a.convert_to<double>();
    out.b = b.convert_to<double>();
    out.a_exact = as_string(a);
    out.b_exact = as_string(b);

    const cpp_int nk = boost::multiprecision::pow(cpp_int(n), static_cast<unsigned>(k));
    bool ok = a * nk <= 1 && b * nk <= k;

    for (long j = 0; j + 2 <= k; ++j) {
        // C_j = n!/(n+j+1)! * sum_{l=1}^{j+1} 1/(n+l)
        cpp_rational c(0);
        for (long l = 1; l <= j + 1; ++l) c += cpp_rational(1, n + l);
        for (long i = n + 1; i <= n + j + 1; ++i) c /= i;
        out.c.push_back(c.convert_to<double>());
        out.c_exact.push_back(as_string(c));
        const cpp_int nj =
            boost::multiprecision::pow(cpp_int(n), static_cast<unsigned>(j + 2));
        ok = ok && c * nj <= j + 1;
    }
    out.bounds_ok = ok;
    return out;
}

double smooth_decay_budget(const RateFunction& m, double eps, long n, double c) {
    const ProofBudget pb = proof_budget(m, eps, n, c);
    return pb.principal + pb.remainder;
}

} // namespace ktdecay
