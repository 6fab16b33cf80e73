// Tests for the operator module: spec validation, orbit decay series,
// resolvent sampling, envelope fitting, boundary derivatives and the
// supporting dense linear algebra.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "ktdecay/linalg.hpp"
#include "ktdecay/operators.hpp"

using namespace ktdecay;

namespace {
constexpr double kPi = 3.14159265358979323846;

ComplexMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
    ComplexMatrix m(2);
    m(0, 0) = a;
    m(0, 1) = b;
    m(1, 0) = c;
    m(1, 1) = d;
    return m;
}
}  // namespace

TEST_CASE("operator norm of small matrices matches closed forms") {
    CHECK(operator_norm(ComplexMatrix::identity(3)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(operator_norm(ComplexMatrix::diagonal({{0.3, 0.0}, {-0.9, 0.0}, {0.0, 0.5}})) ==
          doctest::Approx(0.9).epsilon(1e-10));
    // nilpotent single entry: largest singular value is the entry magnitude
    CHECK(operator_norm(mat2(0.0, 2.0, 0.0, 0.0)) == doctest::Approx(2.0).epsilon(1e-10));
    // non-normal 2x2: sigma_max^2 is the top eigenvalue of A^* A
    ComplexMatrix a = mat2(0.9, 0.5, 0.0, 0.9);
    double tr = 0.81 + 0.25 + 0.81, det = 0.81 * 0.81;
    double lam = (tr + std::sqrt(tr * tr - 4 * det)) / 2;
    CHECK(operator_norm(a) == doctest::Approx(std::sqrt(lam)).epsilon(1e-10));
}

TEST_CASE("matrix inverse flags singular input") {
    bool singular = false;
    ComplexMatrix inv = inverse(mat2(2.0, 0.0, 0.0, 4.0), singular);
    CHECK(!singular);
    CHECK(inv(0, 0).real() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(inv(1, 1).real() == doctest::Approx(0.25).epsilon(1e-14));
    inverse(mat2(1.0, 2.0, 2.0, 4.0), singular);
    CHECK(singular);
}

TEST_CASE("diagonal specs reject non-contractive eigenvalues") {
    CHECK_THROWS_AS(OperatorSpec::diagonal({{1.2, 0.0}}), DomainError);
    // unimodular away from 1 is never admissible
    CHECK_THROWS_AS(OperatorSpec::diagonal({{0.0, 1.0}}), DomainError);
    CHECK_THROWS_AS(OperatorSpec::diagonal({std::polar(1.0, 2.0)}), DomainError);
    // 1 itself needs the explicit opt-in
    CHECK_THROWS_AS(OperatorSpec::diagonal({{1.0, 0.0}}), DomainError);
    CHECK_NOTHROW(OperatorSpec::diagonal({{1.0, 0.0}}, true));
    CHECK_NOTHROW(OperatorSpec::diagonal({{0.5, 0.0}, {-0.25, 0.4}}));
}

TEST_CASE("spectral curve and shift specs validate their parameters") {
    OperatorSpec curve = OperatorSpec::spectral_curve(2.0, 100);
    CHECK(curve.dim() == 100);
    const auto* eig = curve.diagonal_entries();
    REQUIRE(eig != nullptr);
    CHECK(eig->size() == 100);
    for (const Complex& lam : *eig) CHECK(std::abs(lam) < 1.0);
    // the angular grid is log-spaced over [theta_min, theta_max]; note that
    // at theta = 1 with alpha = 2 the radius 1 - theta^alpha closes to 0
    CHECK(std::arg(eig->front()) == doctest::Approx(1e-4).epsilon(1e-9));
    CHECK(std::abs(eig->back()) == doctest::Approx(0.0).epsilon(1e-12));
    OperatorSpec inner = OperatorSpec::spectral_curve(2.0, 50, 1e-3, 0.5);
    const auto* eig2 = inner.diagonal_entries();
    REQUIRE(eig2 != nullptr);
    CHECK(std::arg(eig2->back()) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(std::abs(eig2->back()) == doctest::Approx(0.75).epsilon(1e-9));
    CHECK_THROWS_AS(OperatorSpec::spectral_curve(2.0, 0), InputError);
    CHECK_THROWS_AS(OperatorSpec::spectral_curve(2.0, 10, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(OperatorSpec::spectral_curve(2.0, 10, 0.5, 2.0), DomainError);

    OperatorSpec sh = OperatorSpec::shift({0.5, 0.25}, 3);
    CHECK(sh.dim() == 3);
    ComplexMatrix dense = sh.to_dense();
    CHECK(dense(1, 0).real() == doctest::Approx(0.5));
    CHECK(dense(2, 1).real() == doctest::Approx(0.25));
    CHECK(dense(0, 0) == Complex(0.0, 0.0));
    CHECK_THROWS_AS(OperatorSpec::shift({1.5}, 2), DomainError);
    CHECK_THROWS_AS(OperatorSpec::shift({0.5}, 3), InputError);
}

TEST_CASE("orbit decay of a diagonal spec follows the eigenvalue closed form") {
    OperatorSpec spec = OperatorSpec::diagonal({{0.5, 0.0}});
    OrbitSeries orb = orbit_decay(spec, 20);
    REQUIRE(orb.values.size() == 21);
    for (long n = 0; n <= 20; ++n)
        CHECK(orb.values[static_cast<std::size_t>(n)] ==
              doctest::Approx(std::pow(0.5, n) * 0.5).epsilon(1e-13));
    CHECK(orb.power_bound == doctest::Approx(1.0));
    CHECK(!orb.divergent_at.has_value());
}

TEST_CASE("dense and diagonal forms of the same operator agree on the orbit") {
    std::vector<Complex> eig = {{0.9, 0.0}, {0.5, 0.0}};
    OrbitSeries diag = orbit_decay(OperatorSpec::diagonal(eig), 60);
    OrbitSeries dense = orbit_decay(OperatorSpec::dense(ComplexMatrix::diagonal(eig)), 60);
    for (std::size_t n = 0; n < diag.values.size(); ++n) {
        double expected = std::max(std::pow(0.9, double(n)) * 0.1, std::pow(0.5, double(n)) * 0.5);
        CHECK(diag.values[n] == doctest::Approx(expected).epsilon(1e-12));
        CHECK(dense.values[n] == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("a dense expansion is reported divergent, not rejected") {
    ComplexMatrix m(1);
    m(0, 0) = 2.0;
    OperatorSpec spec = OperatorSpec::dense(m);
    OrbitSeries orb = orbit_decay(spec, 1200);
    REQUIRE(orb.divergent_at.has_value());
    CHECK(*orb.divergent_at > 0);
    // before the overflow point the series is the exact 2^n
    CHECK(orb.values[10] == doctest::Approx(1024.0).epsilon(1e-12));
    CHECK(orb.power_bound > 1.0);
}

TEST_CASE("truncated shift is nilpotent: orbit dies after dim steps") {
    OperatorSpec spec = OperatorSpec::shift({1.0, 1.0, 1.0}, 4);
    OrbitSeries orb = orbit_decay(spec, 8);
    CHECK(orb.power_bound == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t n = 4; n < orb.values.size(); ++n) CHECK(orb.values[n] == doctest::Approx(0.0));
    CHECK(orb.values[0] > 0.0);
}

TEST_CASE("resolvent norm of a diagonal operator is the reciprocal gap") {
    OperatorSpec spec = OperatorSpec::diagonal({{0.5, 0.0}});
    CHECK(resolvent_norm(spec, kPi) == doctest::Approx(1.0 / 1.5).epsilon(1e-12));
    CHECK(resolvent_norm(spec, 0.0) == doctest::Approx(2.0).epsilon(1e-12));
    // dense path goes through actual inversion and must agree
    OperatorSpec dense = OperatorSpec::dense(ComplexMatrix::diagonal({{0.5, 0.0}}));
    CHECK(resolvent_norm(dense, kPi) == doctest::Approx(1.0 / 1.5).epsilon(1e-9));
    CHECK_THROWS_AS(resolvent_norm(spec, 4.0), DomainError);
}

TEST_CASE("resolvent evaluation at the spectrum is a SingularityError") {
    OperatorSpec unit = OperatorSpec::diagonal({{1.0, 0.0}}, true);
    CHECK_THROWS_AS(resolvent_norm(unit, 0.0), SingularityError);
    try {
        resolvent_norm(unit, 0.0);
    } catch (const SingularityError& e) {
        CHECK(e.theta == doctest::Approx(0.0));
    }
    // slightly off the singular angle the norm is ~1/theta and finite
    CHECK(resolvent_norm(unit, 1e-3) == doctest::Approx(1.0 / std::abs(std::polar(1.0, 1e-3) - 1.0))
                                            .epsilon(1e-10));
}

TEST_CASE("singularity scan flags unimodular-adjacent spectrum only") {
    std::vector<double> grid;
    for (int i = 0; i <= 40; ++i) grid.push_back(0.5 + (kPi - 0.5) * i / 40.0);
    for (int i = 0; i <= 40; ++i) grid.push_back(-(0.5 + (kPi - 0.5) * i / 40.0));

    OperatorSpec tame = OperatorSpec::diagonal({{0.5, 0.0}});
    CHECK(singularity_scan(tame, grid, 10.0).empty());

    OperatorSpec hot = OperatorSpec::diagonal({{-0.999999, 0.0}});
    std::vector<double> hits = singularity_scan(hot, grid, 10.0);
    REQUIRE(!hits.empty());
    for (double th : hits) CHECK(std::abs(std::abs(th) - kPi) < 0.5);
}

TEST_CASE("resolvent profile merges both angle signs and stays ascending") {
    // eigenvalue just inside the circle at angle +0.7: the +|theta| side
    // dominates and the merge must keep the larger norm
    OperatorSpec spec = OperatorSpec::diagonal({0.98 * std::polar(1.0, 0.7)});
    ResolventProfile prof = resolvent_profile(spec, 40, 1e-3, kPi);
    REQUIRE(prof.samples.size() >= 40u);
    double best = 0.0;
    for (std::size_t i = 0; i < prof.samples.size(); ++i) {
        if (i > 0) CHECK(prof.samples[i].theta > prof.samples[i - 1].theta);
        CHECK(prof.samples[i].theta >= 1e-3 * (1 - 1e-12));
        CHECK(prof.samples[i].theta <= kPi * (1 + 1e-12));
        double plus = resolvent_norm(spec, prof.samples[i].theta);
        double minus = resolvent_norm(spec, -prof.samples[i].theta);
        CHECK(prof.samples[i].norm == doctest::Approx(std::max(plus, minus)).epsilon(1e-10));
        best = std::max(best, prof.samples[i].norm);
    }
    CHECK(best > 20.0);  // the sample nearest 0.7 sees the 0.02 gap
}

TEST_CASE("fitted envelope dominates its samples and carries the 1/eps floor") {
    OperatorSpec spec = OperatorSpec::diagonal({{1.0, 0.0}}, true);
    ResolventProfile prof = resolvent_profile(spec, 50);
    RateFunction env = fit_envelope(prof.samples);
    for (const auto& s : prof.samples) {
        CHECK(env(s.theta) >= s.norm * (1 - 1e-12));
        CHECK(env(s.theta) >= 1.0 / s.theta * (1 - 1e-12));
    }
    // pointwise floor holds between and below the sampled angles too
    for (double eps : {1e-12, 1e-9, 1e-6, 1e-4, 0.01, 0.2, 1.0, 3.0}) {
        CHECK(env(eps) >= 1.0 / eps * (1 - 1e-12));
        CHECK(env(eps) >= 1.0);
    }
    // non-increasing
    double prev = env(1e-12);
    for (double eps : {1e-8, 1e-4, 0.1, 1.0, kPi}) {
        double v = env(eps);
        CHECK(v <= prev * (1 + 1e-12));
        prev = v;
    }
    CHECK_THROWS_AS(fit_envelope({}), InputError);
}

TEST_CASE("boundary derivative norms match the scalar closed form") {
    // scalar T = 0.5: F(z) = (1-T)/(z-T), F'(z) = -(1-T)/(z-T)^2
    OperatorSpec spec = OperatorSpec::diagonal({{0.5, 0.0}});
    CHECK(boundary_derivative_norm(spec, 0, kPi) == doctest::Approx(0.5 / 1.5).epsilon(1e-10));
    CHECK(boundary_derivative_norm(spec, 1, kPi) ==
          doctest::Approx(0.5 / (1.5 * 1.5)).epsilon(1e-10));
    // k-th derivative magnitude k! (1-T)/|z-T|^{k+1} at z = -1
    for (int k = 2; k <= 4; ++k) {
        double fact = 1.0;
        for (int j = 2; j <= k; ++j) fact *= j;
        CHECK(boundary_derivative_norm(spec, k, kPi) ==
              doctest::Approx(fact * 0.5 / std::pow(1.5, k + 1)).epsilon(1e-9));
    }
}

TEST_CASE("power bound is exact for diagonal contractions") {
    CHECK(power_bound(OperatorSpec::diagonal({{0.5, 0.0}}), 100) == doctest::Approx(1.0));
    CHECK(power_bound(OperatorSpec::diagonal({{1.0, 0.0}}, true), 100) == doctest::Approx(1.0));
    // dense non-contraction grows
    ComplexMatrix m(1);
    m(0, 0) = 1.5;
    CHECK(power_bound(OperatorSpec::dense(m), 10) == doctest::Approx(std::pow(1.5, 10)).epsilon(1e-9));
}
