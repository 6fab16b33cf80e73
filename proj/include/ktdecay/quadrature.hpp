#ifndef KTDECAY_QUADRATURE_HPP
#define KTDECAY_QUADRATURE_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace ktdecay {
namespace quad {

// Small vector-space shims so one adaptive Simpson serves double, complex
// and vector-of-complex integrands.

inline double q_abs(double v) { return std::fabs(v); }
inline double q_abs(const std::complex<double>& v) { return std::abs(v); }
inline double q_abs(const std::vector<std::complex<double>>& v) {
    double m = 0.0;
    for (const auto& x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double q_zero(const double&) { return 0.0; }
inline std::complex<double> q_zero(const std::complex<double>&) { return {}; }
inline std::vector<std::complex<double>> q_zero(const std::vector<std::complex<double>>& v) {
    return std::vector<std::complex<double>>(v.size());
}

inline double q_axpy(double a, double x, double y) { return a * x + y; }
inline std::complex<double> q_axpy(double a, const std::complex<double>& x,
                                   const std::complex<double>& y) {
    return a * x + y;
}
inline std::vector<std::complex<double>> q_axpy(double a,
                                                const std::vector<std::complex<double>>& x,
                                                const std::vector<std::complex<double>>& y) {
    std::vector<std::complex<double>> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + y[i];
    return out;
}

inline double q_diff_norm(double a, double b) { return std::fabs(a - b); }
inline double q_diff_norm(const std::complex<double>& a, const std::complex<double>& b) {
    return std::abs(a - b);
}
inline double q_diff_norm(const std::vector<std::complex<double>>& a,
                          const std::vector<std::complex<double>>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

template <class F, class T>
T simpson_recurse(F& f, double a, double b, const T& fa, const T& fm, const T& fb,
                  const T& whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double h = b - a;
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const T flm = f(lm), frm = f(rm);
    T left = q_axpy(h / 12.0, fa, q_zero(fa));
    left = q_axpy(4.0 * h / 12.0, flm, left);
    left = q_axpy(h / 12.0, fm, left);
    T right = q_axpy(h / 12.0, fm, q_zero(fm));
    right = q_axpy(4.0 * h / 12.0, frm, right);
    right = q_axpy(h / 12.0, fb, right);
    T sum = q_axpy(1.0, left, right);
    if (depth <= 0 || q_diff_norm(sum, whole) <= 15.0 * tol)
        return q_axpy(1.0 / 15.0, q_axpy(1.0, sum, q_axpy(-1.0, whole, q_zero(whole))), sum);
    T l = simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
    T r = simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    return q_axpy(1.0, l, r);
}

/// Adaptive Simpson integration of f over [a, b] to absolute tolerance tol.
/// The interval is first split into panels no wider than max_panel (which
/// bounds oscillation per panel); each panel is then refined adaptively.
template <class F>
auto adaptive_simpson(F f, double a, double b, double tol, double max_panel,
                      int max_depth = 28) -> decltype(f(a)) {
    using T = decltype(f(a));
    if (a == b) return q_zero(f(a));
    const int panels = std::max(1, static_cast<int>(std::ceil(std::fabs(b - a) / max_panel)));
    const double step = (b - a) / panels;
    const double panel_tol = tol / panels;
    T total = q_zero(f(a));
    for (int p = 0; p < panels; ++p) {
        double pa = a + p * step, pb = a + (p + 1) * step;
        double pm = 0.5 * (pa + pb);
        T fa = f(pa), fm = f(pm), fb = f(pb);
        T whole = q_axpy((pb - pa) / 6.0, fa, q_zero(fa));
        whole = q_axpy(4.0 * (pb - pa) / 6.0, fm, whole);
        whole = q_axpy((pb - pa) / 6.0, fb, whole);
        total = q_axpy(1.0, simpson_recurse(f, pa, pb, fa, fm, fb, whole, panel_tol, max_depth),
                       total);
    }
    return total;
}

} // namespace quad
} // namespace ktdecay

#endif
