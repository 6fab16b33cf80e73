// Tests for the certification pipeline: hypothesis checks on sequences and
// operators, the cutoff schedule, empirical slope estimation, the
// calibrate-then-validate series check, the end-to-end operator run, and
// the JSON/CSV serialization round-trips.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "ktdecay/analysis.hpp"
#include "ktdecay/serialize.hpp"

using namespace ktdecay;

namespace {
constexpr double kPi = 3.14159265358979323846;

std::vector<Complex> ladder_eigenvalues(long count) {
    std::vector<Complex> eig;
    eig.reserve(static_cast<std::size_t>(count));
    for (long j = 1; j <= count; ++j) eig.emplace_back(1.0 - double(j) / double(count), 0.0);
    return eig;
}
}  // namespace

TEST_CASE("verdicts render to their wire strings") {
    CHECK(to_string(Verdict3::HoldsOnWindow) == "holds_on_window");
    CHECK(to_string(Verdict3::Fails) == "fails");
    CHECK(to_string(Verdict3::Inconclusive) == "inconclusive");
    CHECK(to_string(CertifyVerdict::Certified) == "certified");
    CHECK(to_string(CertifyVerdict::Violated) == "violated");
    CHECK(to_string(CertifyVerdict::PreAsymptotic) == "pre_asymptotic");
}

TEST_CASE("unbounded partial sums fail the sequence hypothesis check") {
    Sequence ones = Sequence::ones();
    HypothesisReport rep = check_hypotheses(ones, 1000);
    CHECK(rep.partial_sums_bounded == Verdict3::Fails);
    CHECK(rep.any_failure());
    CHECK(rep.first_failure() == "partial sums unbounded");
    CHECK(rep.partial_sum_trend > 0.5);  // linear growth has log-log slope ~1
    CHECK(rep.window == 1000);
    // power-boundedness does not apply to raw sequences
    CHECK(rep.power_bounded == Verdict3::Inconclusive);
}

TEST_CASE("the alternating sequence is bounded but carries a boundary singularity") {
    Sequence alt = Sequence::alternating();
    HypothesisReport rep = check_hypotheses(alt, 1000);
    CHECK(rep.partial_sums_bounded == Verdict3::HoldsOnWindow);
    CHECK(rep.sup_partial_sums == doctest::Approx(1.0));
    REQUIRE(!rep.singularity_locations.empty());
    for (double th : rep.singularity_locations) {
        CHECK(std::abs(th) > 2.7);  // all flags cluster at the alternation frequency
        CHECK(std::abs(th) <= kPi * (1 + 1e-12));
    }
    CHECK(rep.any_failure());
    CHECK(rep.first_failure().find("singularity") != std::string::npos);
}

TEST_CASE("a tame geometric sequence clears every hypothesis") {
    Sequence geo = Sequence::geometric(Complex(0.5, 0.0));
    HypothesisReport rep = check_hypotheses(geo, 500);
    CHECK(rep.partial_sums_bounded == Verdict3::HoldsOnWindow);
    CHECK(rep.singularity_locations.empty());
    CHECK(!rep.any_failure());
    CHECK(rep.first_failure().empty());
    CHECK_THROWS_AS(check_hypotheses(geo, 50), ParameterError);
}

TEST_CASE("operator hypothesis check measures powers and telescoped sums") {
    OperatorSpec spec = OperatorSpec::diagonal({{0.5, 0.0}});
    HypothesisReport rep = check_hypotheses(spec, 500);
    CHECK(rep.partial_sums_bounded == Verdict3::HoldsOnWindow);
    // partial sums of T^n (I-T) telescope to I - T^{n+1}, norm < 1 + |T|
    CHECK(rep.sup_partial_sums <= 2.0);
    CHECK(rep.power_bounded == Verdict3::HoldsOnWindow);
    CHECK(rep.power_bound == doctest::Approx(1.0));
    CHECK(rep.singularity_locations.empty());
    REQUIRE(rep.dom_fun_constant.has_value());
    CHECK(*rep.dom_fun_constant > 0.0);
    CHECK(!rep.any_failure());
}

TEST_CASE("operator and dense forms agree on hypothesis verdicts") {
    std::vector<Complex> eig = {{0.5, 0.0}, {-0.25, 0.0}};
    HypothesisReport d = check_hypotheses(OperatorSpec::diagonal(eig), 300);
    HypothesisReport m =
        check_hypotheses(OperatorSpec::dense(ComplexMatrix::diagonal(eig)), 300);
    CHECK(d.partial_sums_bounded == m.partial_sums_bounded);
    CHECK(d.power_bounded == m.power_bounded);
    CHECK(d.singularity_locations.empty());
    CHECK(m.singularity_locations.empty());
    CHECK(d.power_bound == doctest::Approx(m.power_bound).epsilon(1e-6));
}

TEST_CASE("an eigenvalue hugging the circle away from 1 is flagged") {
    OperatorSpec hot = OperatorSpec::diagonal({{-0.999999, 0.0}});
    HypothesisReport rep = check_hypotheses(hot, 500);
    REQUIRE(!rep.singularity_locations.empty());
    for (double th : rep.singularity_locations) CHECK(std::abs(std::abs(th) - kPi) < 0.5);
    CHECK(rep.any_failure());
    CHECK_THROWS_AS(certify_decay(hot), HypothesisError);
    try {
        certify_decay(hot);
    } catch (const HypothesisError& e) {
        CHECK(e.hypothesis.find("singularity") != std::string::npos);
    }
}

TEST_CASE("a divergent dense expansion fails power-boundedness") {
    ComplexMatrix m(1);
    m(0, 0) = 1.05;
    HypothesisReport rep = check_hypotheses(OperatorSpec::dense(m), 500);
    CHECK(rep.power_bounded == Verdict3::Fails);
    // the telescoped partial sums diverge too, and they lead the failure order
    CHECK(rep.partial_sums_bounded == Verdict3::Fails);
    CHECK(rep.any_failure());
    CHECK(rep.first_failure() == "partial sums unbounded");
}

TEST_CASE("cutoff schedule solves the derived rate at each index") {
    RateFunction m = RateFunction::constant(1.0);
    auto sch = epsilon_schedule(m, DerivedRate::Kind::mlog, 0, 0.5, {1, 2, 10});
    REQUIRE(sch.size() == 3);
    CHECK(!sch[0].pre_asymptotic);
    // log(1 + 1/eps) = 0.5  =>  eps = 1/(e^0.5 - 1)
    CHECK(*sch[0].eps == doctest::Approx(1.0 / std::expm1(0.5)).epsilon(1e-10));
    CHECK(*sch[1].eps == doctest::Approx(1.0 / std::expm1(1.0)).epsilon(1e-10));
    // consistency: the derived rate evaluated at eps_n returns c*n
    DerivedRate d = DerivedRate::mlog(m);
    for (const auto& e : sch) {
        REQUIRE(e.eps.has_value());
        CHECK(derived_eval(d, *e.eps) == doctest::Approx(0.5 * double(e.n)).epsilon(1e-9));
    }
}

TEST_CASE("schedule marks indices the rate cannot yet resolve") {
    RateFunction m = RateFunction::constant(1.0);
    // mlog value at pi is log(1 + 1/pi) = 0.2776: c*n = 0.2 falls below it
    auto sch = epsilon_schedule(m, DerivedRate::Kind::mlog, 0, 0.2, {1, 2, 100});
    CHECK(sch[0].pre_asymptotic);
    CHECK(!sch[0].eps.has_value());
    CHECK(!sch[1].pre_asymptotic);
    CHECK(!sch[2].pre_asymptotic);
    // finite-order schedules admit c > 1
    auto mk = epsilon_schedule(RateFunction::poly(1.0, 1.0), DerivedRate::Kind::mk, 1, 2.0, {5});
    CHECK(!mk[0].pre_asymptotic);
    CHECK_THROWS_AS(epsilon_schedule(m, DerivedRate::Kind::mlog, 0, 1.5, {5}), ParameterError);
    CHECK_THROWS_AS(epsilon_schedule(m, DerivedRate::Kind::mk, 0, 0.5, {5}), ParameterError);
    CHECK_THROWS_AS(epsilon_schedule(m, DerivedRate::Kind::mlog, 0, 0.5, {0}), ParameterError);
}

TEST_CASE("slope estimation recovers exact power laws") {
    std::vector<double> sq(2001), lin(2001);
    for (std::size_t n = 0; n < sq.size(); ++n) {
        sq[n] = n == 0 ? 1.0 : 1.0 / (double(n) * double(n));
        lin[n] = n == 0 ? 5.0 : 5.0 / double(n);
    }
    SlopeEstimate s2 = slope_estimate(sq, 10, 2000);
    CHECK(s2.exponent == doctest::Approx(-2.0).epsilon(1e-10));
    CHECK(s2.residual <= 1e-10);
    SlopeEstimate s1 = slope_estimate(lin, 10, 2000);
    CHECK(s1.exponent == doctest::Approx(-1.0).epsilon(1e-10));

    CHECK_THROWS_AS(slope_estimate(sq, 0, 100), ParameterError);
    CHECK_THROWS_AS(slope_estimate(sq, 100, 150), ParameterError);
    CHECK_THROWS_AS(slope_estimate(sq, 100, 5000), ParameterError);
    std::vector<double> nonpos(100, 0.0);
    CHECK_THROWS_AS(slope_estimate(nonpos, 10, 50), InputError);
}

TEST_CASE("eigenvalue-ladder orbit decays with exponent -1") {
    OperatorSpec spec = OperatorSpec::diagonal(ladder_eigenvalues(2000));
    OrbitSeries orb = orbit_decay(spec, 1000);
    SlopeEstimate sl = slope_estimate(orb.values, 100, 1000);
    CHECK(sl.exponent == doctest::Approx(-1.0).epsilon(0.05));
}

TEST_CASE("series certification fits on the calibration window only") {
    // an unbounded base rate so the inversion can resolve c*n over the whole window
    RateFunction m = RateFunction::poly(1.0, 1.0);
    DerivedRate d = DerivedRate::mlog(m);
    std::vector<double> series(501);
    for (long n = 0; n <= 500; ++n) {
        double pred = n == 0 ? 1.0 : invert_rate(d, 0.5 * double(n)) + 1.0 / double(n);
        series[static_cast<std::size_t>(n)] = 0.3 * pred;
    }
    CertifySeriesResult res = certify_series(series, m, 0.5, 20, 60, 61, 500);
    CHECK(res.verdict == CertifyVerdict::Certified);
    CHECK(res.fitted_c == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(res.worst_valid_ratio == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(res.first_violation == -1);
    REQUIRE(res.predicted.size() == 481u);  // n in [20, 500]
    CHECK(res.predicted[0] == doctest::Approx(series[20] / 0.3).epsilon(1e-9));

    // a single bump inside the validation window flips the verdict
    std::vector<double> bumped = series;
    bumped[200] *= 2.0;
    CertifySeriesResult bad = certify_series(bumped, m, 0.5, 20, 60, 61, 500);
    CHECK(bad.verdict == CertifyVerdict::Violated);
    CHECK(bad.first_violation == 200);
    CHECK(bad.worst_valid_ratio == doctest::Approx(0.6).epsilon(1e-9));
}

TEST_CASE("series certification is scale-equivariant") {
    RateFunction m = RateFunction::poly(1.0, 1.0);
    std::vector<double> series(301);
    for (long n = 0; n <= 300; ++n)
        series[static_cast<std::size_t>(n)] = 1.0 / (1.0 + double(n) * double(n));
    CertifySeriesResult base = certify_series(series, m, 0.5, 10, 50, 51, 300);
    std::vector<double> scaled = series;
    for (double& v : scaled) v *= 7.0;
    CertifySeriesResult big = certify_series(scaled, m, 0.5, 10, 50, 51, 300);
    CHECK(big.verdict == base.verdict);
    CHECK(big.fitted_c == doctest::Approx(7.0 * base.fitted_c).epsilon(1e-12));
    CHECK(big.worst_valid_ratio == doctest::Approx(7.0 * base.worst_valid_ratio).epsilon(1e-12));
}

TEST_CASE("series certification reports unresolved indices as pre-asymptotic") {
    RateFunction m = RateFunction::constant(1.0);
    std::vector<double> series(300, 0.01);
    // c*n at the calibration start falls below mlog(pi): no prediction there
    CertifySeriesResult res = certify_series(series, m, 0.001, 10, 50, 51, 299);
    CHECK(res.verdict == CertifyVerdict::PreAsymptotic);

    CHECK_THROWS_AS(certify_series(series, m, 0.5, 0, 50, 51, 200), ParameterError);
    CHECK_THROWS_AS(certify_series(series, m, 0.5, 10, 60, 55, 200), ParameterError);
    CHECK_THROWS_AS(certify_series(series, m, 0.5, 10, 50, 51, 500), ParameterError);
    CHECK_THROWS_AS(certify_series(series, m, 1.2, 10, 50, 51, 200), ParameterError);
}

TEST_CASE("end-to-end certification of the zero operator is trivially certified") {
    OperatorSpec spec = OperatorSpec::diagonal({{0.0, 0.0}});
    CertifyOptions opt;
    opt.valid_hi = 300;
    DecayReport rep = certify_decay(spec, opt);
    CHECK(rep.verdict == CertifyVerdict::Certified);
    CHECK(rep.fitted_c == doctest::Approx(0.0));
    CHECK(rep.first_violation == -1);
    REQUIRE(rep.envelope.has_value());
    CHECK(rep.orbit.values[0] == doctest::Approx(1.0));
    CHECK(rep.orbit.values[5] == doctest::Approx(0.0));
    CHECK(rep.schedule.size() == rep.predicted.size());
}

TEST_CASE("end-to-end certification of the eigenvalue ladder") {
    OperatorSpec spec = OperatorSpec::diagonal(ladder_eigenvalues(1000));
    DecayReport rep = certify_decay(spec);
    CHECK(rep.verdict == CertifyVerdict::Certified);
    CHECK(rep.fitted_c > 0.0);
    CHECK(rep.worst_valid_ratio <= rep.fitted_c * (1 + 1e-9));
    REQUIRE(rep.empirical.has_value());
    CHECK(rep.empirical->exponent == doctest::Approx(-1.0).epsilon(0.1));
    // validation reaches past dim/10, which must be called out
    bool warned = false;
    for (const auto& w : rep.warnings)
        if (w.find("dim") != std::string::npos) warned = true;
    CHECK(warned);
    // schedule rows cover [calib_lo, valid_hi] in order
    REQUIRE(!rep.schedule.empty());
    CHECK(rep.schedule.front().n == rep.options.calib_lo);
    CHECK(rep.schedule.back().n == rep.options.valid_hi);

    // the fitted constant is stable under halving the calibration window
    CertifyOptions opt;
    opt.calib_lo = 25;
    opt.calib_hi = 50;
    opt.valid_lo = 51;
    DecayReport rep2 = certify_decay(spec, opt);
    CHECK(rep2.verdict == CertifyVerdict::Certified);
    CHECK(std::abs(rep2.fitted_c - rep.fitted_c) / rep.fitted_c < 0.25);
}

TEST_CASE("end-to-end certification of a spectral curve decays like n^-1/2") {
    OperatorSpec spec = OperatorSpec::spectral_curve(2.0, 800);
    DecayReport rep = certify_decay(spec);
    CHECK(rep.verdict == CertifyVerdict::Certified);
    REQUIRE(rep.empirical.has_value());
    CHECK(rep.empirical->exponent == doctest::Approx(-0.5).epsilon(0.12));
    CHECK_THROWS_AS(certify_decay(spec, [] {
                        CertifyOptions o;
                        o.grid_size = 1;
                        return o;
                    }()),
                    ParameterError);
}

TEST_CASE("rate JSON round-trips all three shapes") {
    std::vector<RateFunction> rates;
    rates.push_back(RateFunction::poly(2.5, 1.5));
    rates.push_back(RateFunction::exponential(0.75));
    rates.push_back(RateFunction::tabulated({{0.01, 500.0}, {0.5, 20.0}, {3.0, 1.0}}));
    for (const auto& m : rates) {
        RateFunction back = rate_from_json(rate_to_json(m));
        for (double eps : {0.01, 0.1, 1.0, 3.0})
            CHECK(back.log_value(eps) == doctest::Approx(m.log_value(eps)).epsilon(1e-14));
    }
    CHECK(rate_to_json(rates[0])["variant"] == "poly");
    CHECK(rate_to_json(rates[1])["variant"] == "exp");
    CHECK(rate_to_json(rates[2])["variant"] == "tabulated");
    CHECK_THROWS_AS(rate_from_json(nlohmann::json{{"variant", "cubic"}}), InputError);
    CHECK_THROWS_AS(rate_from_json(nlohmann::json{{"variant", "poly"}}), InputError);
}

TEST_CASE("operator JSON round-trips all four shapes") {
    ComplexMatrix m(2);
    m(0, 0) = Complex(0.5, 0.1);
    m(0, 1) = Complex(0.0, -0.2);
    m(1, 0) = Complex(0.0, 0.0);
    m(1, 1) = Complex(-0.3, 0.0);
    std::vector<OperatorSpec> specs;
    specs.push_back(OperatorSpec::dense(m));
    specs.push_back(OperatorSpec::diagonal({{0.5, 0.0}, {0.0, 0.25}}));
    specs.push_back(OperatorSpec::diagonal({{1.0, 0.0}}, true));
    specs.push_back(OperatorSpec::spectral_curve(2.0, 64, 1e-3, 0.5));
    specs.push_back(OperatorSpec::shift({0.5, 0.75}, 3));
    for (const auto& spec : specs) {
        OperatorSpec back = operator_from_json(operator_to_json(spec));
        CHECK(back.dim() == spec.dim());
        ComplexMatrix a = spec.to_dense();
        ComplexMatrix b = back.to_dense();
        for (std::size_t i = 0; i < a.dim(); ++i)
            for (std::size_t j = 0; j < a.dim(); ++j)
                CHECK(std::abs(a(i, j) - b(i, j)) <= 1e-15);
    }
    // the unit-eigenvalue opt-in survives the round trip
    nlohmann::json ju = operator_to_json(specs[2]);
    CHECK(ju["allow_unit"] == true);
    CHECK_NOTHROW(operator_from_json(ju));
    // non-square dense entries are rejected
    nlohmann::json bad = {{"variant", "dense"},
                          {"entries", nlohmann::json::array({nlohmann::json::array(
                                          {nlohmann::json::array({1.0, 0.0}),
                                           nlohmann::json::array({2.0, 0.0})})})}};
    CHECK_THROWS_AS(operator_from_json(bad), InputError);
}

TEST_CASE("fixed-format serialization is deterministic and round-trip exact") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(1.0) == "1");
    // format_double is raw %.17g; the null substitution happens in dump_fixed
    CHECK(format_double(std::nan("")) == "nan");
    nlohmann::json j;
    j["b"] = 0.1;
    j["a"] = nlohmann::json::array({1.5, 2.0});
    j["inf"] = std::numeric_limits<double>::infinity();
    std::string once = dump_fixed(j, 2);
    std::string twice = dump_fixed(j, 2);
    CHECK(once == twice);
    CHECK(once.find("0.10000000000000001") != std::string::npos);
    CHECK(once.find("null") != std::string::npos);
    // keys are emitted in sorted order
    CHECK(once.find("\"a\"") < once.find("\"b\""));
    // compact mode carries no newlines
    CHECK(dump_fixed(j, -1).find('\n') == std::string::npos);
    // parsing the emitted text recovers the exact double
    nlohmann::json back = nlohmann::json::parse(once);
    CHECK(back["b"].get<double>() == 0.1);
}

TEST_CASE("decay reports serialize with verdicts, windows and warnings") {
    OperatorSpec spec = OperatorSpec::diagonal(ladder_eigenvalues(500));
    CertifyOptions opt;
    opt.valid_hi = 400;
    DecayReport rep = certify_decay(spec, opt);
    nlohmann::json j = report_to_json(rep);
    CHECK(j["verdict"] == "certified");
    CHECK(j["fitted_c"].get<double>() == doctest::Approx(rep.fitted_c));
    CHECK(j["options"]["c"].get<double>() == doctest::Approx(0.5));
    CHECK(j["options"]["calib"][0] == 50);
    CHECK(j["options"]["valid"][1] == 400);
    CHECK(j["hypotheses"]["partial_sums_bounded"] == "holds_on_window");
    CHECK(j["predicted"].size() == rep.predicted.size());
    CHECK(j["orbit"].size() == rep.orbit.values.size());

    std::string csv = report_to_csv(rep);
    CHECK(csv.rfind("n,d_n,predicted,ratio", 0) == 0);
    long rows = static_cast<long>(std::count(csv.begin(), csv.end(), '\n'));
    CHECK(rows == 400 - 50 + 2);  // header + one row per scheduled index
}
