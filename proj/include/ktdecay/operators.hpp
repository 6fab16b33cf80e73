#ifndef KTDECAY_OPERATORS_HPP
#define KTDECAY_OPERATORS_HPP

#include <optional>
#include <variant>
#include <vector>

#include "ktdecay/errors.hpp"
#include "ktdecay/linalg.hpp"
#include "ktdecay/rates.hpp"

namespace ktdecay {

/// Specification of a bounded operator on a finite-dimensional space.
///
/// All variants must be contractive-compatible with the decay machinery:
/// diagonal-like variants require |lambda| <= 1 with unimodular eigenvalues
/// other than 1 rejected outright; 1 itself is rejected unless explicitly
/// permitted at construction.  Dense entries are validated finite only; a
/// non-power-bounded dense operator is reported, not rejected.
class OperatorSpec {
  public:
    struct Dense {
        ComplexMatrix matrix;
    };
    struct Diagonal {
        std::vector<Complex> eigenvalues;
        bool allow_unit = false;
    };
    /// lambda_j = (1 - theta_j^alpha) e^{i theta_j} on an n-point log-spaced
    /// grid theta_j in [theta_min, theta_max], 0 < theta_min < theta_max <= 1.
    struct SpectralCurve {
        double alpha = 2.0;
        long n = 0;
        double theta_min = 1e-4;
        double theta_max = 1.0;
    };
    /// Truncated weighted shift on C^n: T e_j = w_j e_{j+1}, weights in (0,1].
    struct Shift {
        std::vector<double> weights;   // n-1 weights
        long n = 0;
    };

    static OperatorSpec dense(ComplexMatrix matrix);
    static OperatorSpec diagonal(std::vector<Complex> eigenvalues, bool allow_unit = false);
    static OperatorSpec spectral_curve(double alpha, long n, double theta_min = 1e-4,
                                       double theta_max = 1.0);
    static OperatorSpec shift(std::vector<double> weights, long n);

    /// Eigenvalues when the spec is diagonal-like (diagonal or spectral curve).
    const std::vector<Complex>* diagonal_entries() const;
    /// Materialize as a dense matrix (any variant).
    ComplexMatrix to_dense() const;
    long dim() const;

    const std::variant<Dense, Diagonal, SpectralCurve, Shift>& shape() const { return shape_; }

  private:
    explicit OperatorSpec(std::variant<Dense, Diagonal, SpectralCurve, Shift> shape);
    void validate_diagonal_like(const std::vector<Complex>& eig, bool allow_unit) const;
    std::variant<Dense, Diagonal, SpectralCurve, Shift> shape_;
    std::vector<Complex> cached_eigenvalues_;   // for diagonal-like variants
};

/// The orbit-difference norms d_n = ||T^n (I - T)|| for n = 0..n_max,
/// together with the largest power norm seen on the window.
struct OrbitSeries {
    std::vector<double> values;          // index n = 0..n_max
    double power_bound = 1.0;            // sup_{n <= n_max} ||T^n||
    std::optional<long> divergent_at;    // first n where the iteration overflowed
};

/// max_{0 <= n <= n_max} ||T^n||; analytic for diagonal-like variants.
double power_bound(const OperatorSpec& spec, long n_max);

/// Orbit decay series (closed form for diagonal-like variants, iterated
/// matrix products for dense ones).
OrbitSeries orbit_decay(const OperatorSpec& spec, long n_max);

/// ||(e^{i theta} I - T)^{-1}||; theta in [-pi, pi] with e^{i theta} required
/// to stay at distance > 1e-14 from the spectrum (SingularityError otherwise).
double resolvent_norm(const OperatorSpec& spec, double theta);

/// Grid angles where the resolvent exceeds threshold / |theta|, plus angles
/// where evaluation hits the singularity guard.  An empty result on a grid
/// away from 0 supports "no unimodular spectrum except possibly 1".
std::vector<double> singularity_scan(const OperatorSpec& spec,
                                     const std::vector<double>& grid,
                                     double threshold);

/// One resolvent sample at angle theta in (0, pi] (norm merged over both
/// signs of theta when sampled via resolvent_profile).
struct ResolventSample {
    double theta;
    double norm;
};

struct ResolventProfile {
    std::vector<ResolventSample> samples;   // ascending theta
};

/// Sample ||R(e^{i theta})|| on a log-spaced grid of `grid_size` angles in
/// [theta_min, theta_max], both signs, merged by max at each |theta|.
ResolventProfile resolvent_profile(const OperatorSpec& spec, int grid_size,
                                   double theta_min = 1e-4, double theta_max = 0.0);

/// Majorant rate fitted to resolvent samples: at each sampled eps the
/// envelope is max(1, 1/eps, largest sampled norm at angles >= eps), made
/// into a tabulated RateFunction.  Values are non-increasing in eps and
/// dominate every sample at angles >= eps by construction; the 1/eps floor
/// is anchored down to eps = 1e-12 so it holds pointwise on the whole
/// inversion bracket, not just at the sampled angles.
RateFunction fit_envelope(const std::vector<ResolventSample>& samples);

/// ||F^(k)(e^{i theta})|| for the boundary function F(z) = (I-T) R(z, T):
/// F^(k)(z) = (-1)^k k! R(z,T)^k (I + (1-z) R(z,T)).
double boundary_derivative_norm(const OperatorSpec& spec, int k, double theta);

} // namespace ktdecay

#endif
