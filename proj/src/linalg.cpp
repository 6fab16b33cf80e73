#include "ktdecay/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ktdecay {

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::diagonal(const std::vector<Complex>& entries) {
    ComplexMatrix m(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
    return m;
}

ComplexMatrix ComplexMatrix::operator*(const ComplexMatrix& rhs) const {
    ComplexMatrix out(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t k = 0; k < n_; ++k) {
            Complex aik = a_[i * n_ + k];
            if (aik == Complex{}) continue;
            const Complex* brow = &rhs.a_[k * n_];
            Complex* orow = &out.a_[i * n_];
            for (std::size_t j = 0; j < n_; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

ComplexMatrix ComplexMatrix::operator-(const ComplexMatrix& rhs) const {
    ComplexMatrix out(n_);
    for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] = a_[i] - rhs.a_[i];
    return out;
}

ComplexMatrix ComplexMatrix::operator+(const ComplexMatrix& rhs) const {
    ComplexMatrix out(n_);
    for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] = a_[i] + rhs.a_[i];
    return out;
}

ComplexMatrix ComplexMatrix::scaled(Complex factor) const {
    ComplexMatrix out(n_);
    for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] = a_[i] * factor;
    return out;
}

bool ComplexMatrix::all_finite() const {
    for (const Complex& v : a_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

namespace {

// splitmix64: deterministic seed vector independent of libstdc++ internals
std::uint64_t splitmix64(std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double unit_interval(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

double norm2(const std::vector<Complex>& v) {
    double s = 0.0;
    for (const Complex& x : v) s += std::norm(x);
    return std::sqrt(s);
}

} // namespace

double operator_norm(const ComplexMatrix& a) {
    const std::size_t n = a.dim();
    if (n == 0) return 0.0;
    if (!a.all_finite())
        throw std::invalid_argument("operator_norm: matrix has non-finite entries");

    double maxabs = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            maxabs = std::max(maxabs, std::abs(a(i, j)));
    if (maxabs == 0.0) return 0.0;

    std::uint64_t state = 0x6b79646563617953ULL;
    std::vector<Complex> v(n), w(n), u(n);
    for (auto& x : v)
        x = Complex(unit_interval(splitmix64(state)) - 0.5,
                    unit_interval(splitmix64(state)) - 0.5);
    double nv = norm2(v);
    for (auto& x : v) x /= nv;

    double sigma2 = 0.0;
    int stagnant = 0;
    for (int iter = 0; iter < 20000; ++iter) {
        // w = A v ; u = A^H w  (one power step on A^H A)
        for (std::size_t i = 0; i < n; ++i) {
            Complex s{};
            for (std::size_t j = 0; j < n; ++j) s += a(i, j) * v[j];
            w[i] = s;
        }
        double nw = norm2(w);
        double s2 = nw * nw;   // Rayleigh quotient of A^H A at unit v
        for (std::size_t j = 0; j < n; ++j) {
            Complex s{};
            for (std::size_t i = 0; i < n; ++i) s += std::conj(a(i, j)) * w[i];
            u[j] = s;
        }
        double nu = norm2(u);
        if (nu == 0.0) return std::sqrt(s2);
        for (std::size_t j = 0; j < n; ++j) v[j] = u[j] / nu;

        if (std::fabs(s2 - sigma2) <= 1e-12 * std::max(s2, 1e-300)) {
            if (++stagnant >= 2) return std::sqrt(s2);
        } else {
            stagnant = 0;
        }
        sigma2 = s2;
    }
    return std::sqrt(sigma2);
}

ComplexMatrix inverse(const ComplexMatrix& a, bool& singular) {
    const std::size_t n = a.dim();
    singular = false;
    ComplexMatrix lu = a;
    ComplexMatrix inv = ComplexMatrix::identity(n);

    double maxabs = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            maxabs = std::max(maxabs, std::abs(lu(i, j)));
    const double tiny = 1e-14 * std::max(maxabs, 1.0);

    // forward elimination with partial pivoting, applied to [lu | inv]
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::abs(lu(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            double m = std::abs(lu(r, col));
            if (m > best) { best = m; piv = r; }
        }
        if (best < tiny) { singular = true; return inv; }
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(lu(piv, j), lu(col, j));
                std::swap(inv(piv, j), inv(col, j));
            }
        }
        Complex d = lu(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            Complex f = lu(r, col) / d;
            if (f == Complex{}) continue;
            for (std::size_t j = col; j < n; ++j) lu(r, j) -= f * lu(col, j);
            for (std::size_t j = 0; j < n; ++j) inv(r, j) -= f * inv(col, j);
        }
    }
    // back substitution
    for (std::size_t col = n; col-- > 0;) {
        Complex d = lu(col, col);
        for (std::size_t j = 0; j < n; ++j) inv(col, j) /= d;
        for (std::size_t r = 0; r < col; ++r) {
            Complex f = lu(r, col);
            if (f == Complex{}) continue;
            for (std::size_t j = 0; j < n; ++j) inv(r, j) -= f * inv(col, j);
        }
    }
    return inv;
}

} // namespace ktdecay
