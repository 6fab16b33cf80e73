#include "ktdecay/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace ktdecay {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSingularityGuard = 1e-14;

Complex unit_circle(double theta) {
    return Complex(std::cos(theta), std::sin(theta));
}

} // namespace

OperatorSpec::OperatorSpec(std::variant<Dense, Diagonal, SpectralCurve, Shift> shape)
    : shape_(std::move(shape)) {
    if (const auto* d = std::get_if<Diagonal>(&shape_)) {
        cached_eigenvalues_ = d->eigenvalues;
    } else if (const auto* sc = std::get_if<SpectralCurve>(&shape_)) {
        cached_eigenvalues_.reserve(static_cast<std::size_t>(sc->n));
        const double llo = std::log(sc->theta_min);
        const double lhi = std::log(sc->theta_max);
        for (long j = 0; j < sc->n; ++j) {
            double t = sc->n == 1 ? 0.0
                                  : static_cast<double>(j) / static_cast<double>(sc->n - 1);
            double theta = std::exp(llo + t * (lhi - llo));
            cached_eigenvalues_.push_back((1.0 - std::pow(theta, sc->alpha)) *
                                          unit_circle(theta));
        }
    }
}

void OperatorSpec::validate_diagonal_like(const std::vector<Complex>& eig,
                                          bool allow_unit) const {
    for (const Complex& l : eig) {
        if (!std::isfinite(l.real()) || !std::isfinite(l.imag()))
            throw DomainError("eigenvalues must be finite");
        double a = std::abs(l);
        if (a > 1.0)
            throw DomainError("eigenvalue modulus exceeds 1: |" + std::to_string(l.real()) +
                              (l.imag() < 0 ? "" : "+") + std::to_string(l.imag()) + "i| > 1");
        if (a >= 1.0 - 1e-15) {
            if (l == Complex(1.0, 0.0)) {
                if (!allow_unit)
                    throw DomainError(
                        "eigenvalue 1 must be explicitly permitted (allow_unit)");
            } else if (a == 1.0) {
                throw DomainError("unimodular eigenvalue distinct from 1 is not admissible");
            }
        }
    }
}

OperatorSpec OperatorSpec::dense(ComplexMatrix matrix) {
    if (matrix.dim() == 0) throw InputError("dense operator needs dimension >= 1");
    if (!matrix.all_finite()) throw DomainError("dense operator entries must be finite");
    return OperatorSpec(Dense{std::move(matrix)});
}

OperatorSpec OperatorSpec::diagonal(std::vector<Complex> eigenvalues, bool allow_unit) {
    if (eigenvalues.empty()) throw InputError("diagonal operator needs at least one eigenvalue");
    OperatorSpec spec(Diagonal{std::move(eigenvalues), allow_unit});
    spec.validate_diagonal_like(spec.cached_eigenvalues_, allow_unit);
    return spec;
}

OperatorSpec OperatorSpec::spectral_curve(double alpha, long n, double theta_min,
                                          double theta_max) {
    if (!(alpha >= 1.0)) throw DomainError("spectral curve needs alpha >= 1");
    if (n < 1) throw InputError("spectral curve needs a grid of at least one point");
    if (!(theta_min > 0.0) || !(theta_min < theta_max) || !(theta_max <= 1.0))
        throw DomainError("spectral curve needs 0 < theta_min < theta_max <= 1");
    OperatorSpec spec(SpectralCurve{alpha, n, theta_min, theta_max});
    spec.validate_diagonal_like(spec.cached_eigenvalues_, false);
    return spec;
}

OperatorSpec OperatorSpec::shift(std::vector<double> weights, long n) {
    if (n < 1) throw InputError("shift operator needs dimension >= 1");
    if (static_cast<long>(weights.size()) == n) weights.pop_back();   // last weight truncated away
    if (static_cast<long>(weights.size()) != n - 1)
        throw InputError("shift operator needs n-1 (or n) weights");
    for (double w : weights)
        if (!(w > 0.0) || !(w <= 1.0))
            throw DomainError("shift weights must lie in (0, 1]");
    return OperatorSpec(Shift{std::move(weights), n});
}

const std::vector<Complex>* OperatorSpec::diagonal_entries() const {
    if (std::holds_alternative<Diagonal>(shape_) || std::holds_alternative<SpectralCurve>(shape_))
        return &cached_eigenvalues_;
    return nullptr;
}

ComplexMatrix OperatorSpec::to_dense() const {
    if (const auto* d = std::get_if<Dense>(&shape_)) return d->matrix;
    if (const auto* s = std::get_if<Shift>(&shape_)) {
        ComplexMatrix m(static_cast<std::size_t>(s->n));
        for (std::size_t i = 0; i + 1 < static_cast<std::size_t>(s->n); ++i)
            m(i + 1, i) = s->weights[i];
        return m;
    }
    return ComplexMatrix::diagonal(cached_eigenvalues_);
}

long OperatorSpec::dim() const {
    if (const auto* d = std::get_if<Dense>(&shape_)) return static_cast<long>(d->matrix.dim());
    if (const auto* s = std::get_if<Shift>(&shape_)) return s->n;
    return static_cast<long>(cached_eigenvalues_.size());
}

double power_bound(const OperatorSpec& spec, long n_max) {
    if (n_max < 0) throw ParameterError("power bound horizon must be >= 0");
    if (const auto* eig = spec.diagonal_entries()) {
        double r = 0.0;
        for (const Complex& l : *eig) r = std::max(r, std::abs(l));
        return r <= 1.0 ? 1.0 : std::pow(r, static_cast<double>(n_max));
    }
    ComplexMatrix t = spec.to_dense();
    ComplexMatrix p = ComplexMatrix::identity(t.dim());
    double best = 1.0;
    for (long n = 1; n <= n_max; ++n) {
        p = t * p;
        if (!p.all_finite()) return std::numeric_limits<double>::infinity();
        best = std::max(best, operator_norm(p));
    }
    return best;
}

OrbitSeries orbit_decay(const OperatorSpec& spec, long n_max) {
    if (n_max < 0) throw ParameterError("orbit horizon must be >= 0");
    OrbitSeries out;
    out.values.reserve(static_cast<std::size_t>(n_max) + 1);

    if (const auto* eig = spec.diagonal_entries()) {
        const std::size_t m = eig->size();
        std::vector<double> mod(m), gap(m), pw(m, 1.0);
        double r = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            mod[j] = std::abs((*eig)[j]);
            gap[j] = std::abs(Complex(1.0, 0.0) - (*eig)[j]);
            r = std::max(r, mod[j]);
        }
        out.power_bound = r <= 1.0 ? 1.0 : std::pow(r, static_cast<double>(n_max));
        for (long n = 0; n <= n_max; ++n) {
            double d = 0.0;
            for (std::size_t j = 0; j < m; ++j) d = std::max(d, pw[j] * gap[j]);
            out.values.push_back(d);
            for (std::size_t j = 0; j < m; ++j) pw[j] *= mod[j];
        }
        return out;
    }

    ComplexMatrix t = spec.to_dense();
    ComplexMatrix p = ComplexMatrix::identity(t.dim()) - t;   // T^n applied to (I-T)
    ComplexMatrix q = ComplexMatrix::identity(t.dim());       // T^n, for the power bound
    out.power_bound = 1.0;
    for (long n = 0; n <= n_max; ++n) {
        if (!p.all_finite()) {
            out.divergent_at = n;
            break;
        }
        out.values.push_back(operator_norm(p));
        if (n < n_max) {
            p = t * p;
            q = t * q;
            if (q.all_finite())
                out.power_bound = std::max(out.power_bound, operator_norm(q));
            else
                out.power_bound = std::numeric_limits<double>::infinity();
        }
    }
    return out;
}

double resolvent_norm(const OperatorSpec& spec, double theta) {
    if (!(std::fabs(theta) <= kPi) || !std::isfinite(theta))
        throw DomainError("resolvent angle must lie in [-pi, pi]");
    const Complex z = unit_circle(theta);
    if (const auto* eig = spec.diagonal_entries()) {
        double best = 0.0;
        for (const Complex& l : *eig) {
            double dist = std::abs(z - l);
            if (dist < kSingularityGuard)
                throw SingularityError(
                    "evaluation point within 1e-14 of an eigenvalue at theta = " +
                        std::to_string(theta),
                    theta);
            best = std::max(best, 1.0 / dist);
        }
        return best;
    }
    ComplexMatrix t = spec.to_dense();
    ComplexMatrix zi = ComplexMatrix::identity(t.dim()).scaled(z) - t;
    bool singular = false;
    ComplexMatrix r = inverse(zi, singular);
    if (singular)
        throw SingularityError(
            "resolvent system is numerically singular at theta = " + std::to_string(theta),
            theta);
    return operator_norm(r);
}

std::vector<double> singularity_scan(const OperatorSpec& spec,
                                     const std::vector<double>& grid,
                                     double threshold) {
    if (!(threshold > 0.0)) throw ParameterError("scan threshold must be positive");
    std::vector<double> flagged;
    for (double theta : grid) {
        if (!(std::fabs(theta) > 0.0) || std::fabs(theta) > kPi)
            throw DomainError("scan grid angles must lie in [-pi, pi] \\ {0}");
        double bound = threshold / std::fabs(theta);
        try {
            if (resolvent_norm(spec, theta) > bound) flagged.push_back(theta);
        } catch (const SingularityError&) {
            flagged.push_back(theta);
        }
    }
    return flagged;
}

ResolventProfile resolvent_profile(const OperatorSpec& spec, int grid_size,
                                   double theta_min, double theta_max) {
    if (grid_size < 2) throw ParameterError("profile grid needs at least two angles");
    if (theta_max <= 0.0) theta_max = kPi;
    if (!(theta_min > 0.0) || !(theta_min < theta_max) || !(theta_max <= kPi))
        throw DomainError("profile grid needs 0 < theta_min < theta_max <= pi");
    ResolventProfile out;
    out.samples.reserve(static_cast<std::size_t>(grid_size));
    const double llo = std::log(theta_min), lhi = std::log(theta_max);
    for (int i = 0; i < grid_size; ++i) {
        double theta = std::exp(llo + (lhi - llo) * static_cast<double>(i) /
                                          static_cast<double>(grid_size - 1));
        // exp(log x) may land one ulp outside the bracket
        theta = std::clamp(theta, theta_min, theta_max);
        double n1 = resolvent_norm(spec, theta);
        double n2 = resolvent_norm(spec, -theta);
        out.samples.push_back({theta, std::max(n1, n2)});
    }
    return out;
}

RateFunction fit_envelope(const std::vector<ResolventSample>& samples) {
    if (samples.empty()) throw InputError("envelope fit needs at least one sample");
    std::map<double, double> by_angle;   // |theta| -> max sampled norm
    for (const auto& s : samples) {
        double a = std::fabs(s.theta);
        if (!(a > 0.0) || a > kPi)
            throw DomainError("envelope sample angles must lie in (0, pi] up to sign");
        if (!std::isfinite(s.norm) || s.norm < 0.0)
            throw DomainError("envelope sample norms must be finite and non-negative");
        auto [it, fresh] = by_angle.emplace(a, s.norm);
        if (!fresh) it->second = std::max(it->second, s.norm);
    }
    std::vector<RateSample> table;
    table.reserve(by_angle.size());
    for (const auto& [eps, norm] : by_angle) table.push_back({eps, norm});
    // running max from the right = max over sampled angles >= eps, then floors
    double run = 0.0;
    for (std::size_t i = table.size(); i-- > 0;) {
        run = std::max(run, table[i].value);
        table[i].value = std::max({1.0, 1.0 / table[i].eps, run});
    }
    // The 1/eps floor must hold pointwise, not just at samples: anchor it at
    // the inversion bracket floor so the log-log interpolation below the
    // smallest sample stays above 1/eps (a tabulated rate would otherwise
    // extend as a constant there, making large inversion queries unsolvable).
    constexpr double kAnchorEps = 1e-12;
    if (table.front().eps > kAnchorEps)
        table.insert(table.begin(),
                     {kAnchorEps, std::max(1.0 / kAnchorEps, table.front().value)});
    return RateFunction::tabulated(std::move(table));
}

double boundary_derivative_norm(const OperatorSpec& spec, int k, double theta) {
    if (k < 0 || k > 64) throw ParameterError("derivative order must lie in [0, 64]");
    if (!(std::fabs(theta) <= kPi) || !std::isfinite(theta))
        throw DomainError("evaluation angle must lie in [-pi, pi]");
    double kfact = 1.0;
    for (int i = 2; i <= k; ++i) kfact *= static_cast<double>(i);

    const Complex z = unit_circle(theta);
    if (const auto* eig = spec.diagonal_entries()) {
        double best = 0.0;
        for (const Complex& l : *eig) {
            Complex dz = z - l;
            if (std::abs(dz) < kSingularityGuard)
                throw SingularityError(
                    "evaluation point within 1e-14 of an eigenvalue at theta = " +
                        std::to_string(theta),
                    theta);
            Complex rr = 1.0 / dz;
            Complex val = (1.0 + (1.0 - z) * rr);
            for (int i = 0; i < k; ++i) val *= rr;
            best = std::max(best, std::abs(val));
        }
        return kfact * best;
    }
    ComplexMatrix t = spec.to_dense();
    ComplexMatrix zi = ComplexMatrix::identity(t.dim()).scaled(z) - t;
    bool singular = false;
    ComplexMatrix r = inverse(zi, singular);
    if (singular)
        throw SingularityError(
            "resolvent system is numerically singular at theta = " + std::to_string(theta),
            theta);
    ComplexMatrix acc = ComplexMatrix::identity(t.dim()) + r.scaled(1.0 - z);
    for (int i = 0; i < k; ++i) acc = r * acc;
    return kfact * operator_norm(acc);
}

} // namespace ktdecay
