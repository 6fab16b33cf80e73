#ifndef KTDECAY_LINALG_HPP
#define KTDECAY_LINALG_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace ktdecay {

using Complex = std::complex<double>;

/// Minimal dense complex matrix (row-major square storage).
class ComplexMatrix {
  public:
    ComplexMatrix() = default;
    explicit ComplexMatrix(std::size_t n) : n_(n), a_(n * n) {}

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix diagonal(const std::vector<Complex>& entries);

    std::size_t dim() const { return n_; }
    Complex& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

    ComplexMatrix operator*(const ComplexMatrix& rhs) const;
    ComplexMatrix operator-(const ComplexMatrix& rhs) const;
    ComplexMatrix operator+(const ComplexMatrix& rhs) const;
    ComplexMatrix scaled(Complex factor) const;

    bool all_finite() const;

  private:
    std::size_t n_ = 0;
    std::vector<Complex> a_;
};

/// Largest singular value, computed by power iteration on A*A with a fixed
/// deterministic seed and 1e-12 stagnation threshold.  Accuracy is limited
/// by the top singular-value gap; matrices with a cluster of nearly (but
/// not exactly) equal top singular values converge slowly.
double operator_norm(const ComplexMatrix& a);

/// Inverse by Gaussian elimination with partial pivoting.  A pivot below
/// 1e-14 times the largest entry magnitude signals a (near-)singular
/// matrix; `singular` is set and the result is unspecified.
ComplexMatrix inverse(const ComplexMatrix& a, bool& singular);

} // namespace ktdecay

#endif
