// Command-line front end: rate algebra, operator resolvent/orbit profiles,
// decay certification, and kernel identity self-tests.
//
// Exit codes:
//   0  success / certified / all identities pass
//   2  domain, parameter, input, or parse errors
//   3  evaluation hit a spectral singularity
//   4  certification violated / identity failures
//   5  pre-asymptotic or inconclusive outcome
//   6  certification hypothesis failed

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ktdecay/analysis.hpp"
#include "ktdecay/errors.hpp"
#include "ktdecay/kernels.hpp"
#include "ktdecay/operators.hpp"
#include "ktdecay/quadrature.hpp"
#include "ktdecay/rates.hpp"
#include "ktdecay/serialize.hpp"

namespace {

using ktdecay::Complex;
using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

std::vector<double> split_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw ktdecay::InputError("cannot parse number '" + item + "'");
        }
        if (used != item.size())
            throw ktdecay::InputError("cannot parse number '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ktdecay::InputError("empty number list");
    return out;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ktdecay::InputError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ktdecay::InputError("cannot parse '" + path + "': " + e.what());
    }
}

/// Rate shorthand: poly:C,alpha | exp:alpha | const:v | @file.json
ktdecay::RateFunction parse_rate(const std::string& s) {
    if (s.empty()) throw ktdecay::InputError("empty rate specification");
    if (s[0] == '@') return ktdecay::rate_from_json(read_json_file(s.substr(1)));
    const auto colon = s.find(':');
    if (colon == std::string::npos)
        throw ktdecay::InputError("rate shorthand must look like poly:C,alpha | exp:alpha | "
                                  "const:v | @file.json");
    const std::string head = s.substr(0, colon);
    const std::vector<double> args = split_doubles(s.substr(colon + 1));
    if (head == "poly" && args.size() == 2)
        return ktdecay::RateFunction::poly(args[0], args[1]);
    if (head == "exp" && args.size() == 1)
        return ktdecay::RateFunction::exponential(args[0]);
    if (head == "const" && args.size() == 1) return ktdecay::RateFunction::constant(args[0]);
    throw ktdecay::InputError("unknown rate shorthand '" + s + "'");
}

/// Sequence shorthand: ones | alternating | impulse | geometric:re[,im]
ktdecay::Sequence parse_sequence(const std::string& s) {
    if (s == "ones") return ktdecay::Sequence::ones();
    if (s == "alternating") return ktdecay::Sequence::alternating();
    if (s == "impulse") return ktdecay::Sequence::impulse();
    const auto colon = s.find(':');
    if (colon != std::string::npos && s.substr(0, colon) == "geometric") {
        const std::vector<double> args = split_doubles(s.substr(colon + 1));
        if (args.size() == 1) return ktdecay::Sequence::geometric(Complex(args[0], 0.0));
        if (args.size() == 2)
            return ktdecay::Sequence::geometric(Complex(args[0], args[1]));
    }
    throw ktdecay::InputError(
        "sequence must be one of: ones | alternating | impulse | geometric:re[,im]");
}

std::pair<long, long> parse_window(const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos)
        throw ktdecay::InputError("window must look like lo:hi, got '" + s + "'");
    try {
        return {std::stol(s.substr(0, colon)), std::stol(s.substr(colon + 1))};
    } catch (const std::exception&) {
        throw ktdecay::InputError("window must look like lo:hi, got '" + s + "'");
    }
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw ktdecay::InputError("cannot write '" + path + "'");
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
}

// ---------------------------------------------------------------------------
// rates
// ---------------------------------------------------------------------------

struct RatesArgs {
    std::string rate;
    std::string kind = "mlog";
    int order = 1;
    std::vector<double> eps;
    double y = 0.0;
    double c = 0.5;
    std::vector<long> n_list;
};

ktdecay::DerivedRate make_derived(const ktdecay::RateFunction& m, const std::string& kind,
                                  int order) {
    if (kind == "mlog") return ktdecay::DerivedRate::mlog(m);
    if (kind == "mk") return ktdecay::DerivedRate::mk(m, order);
    throw ktdecay::InputError("kind must be mlog or mk");
}

int cmd_rates_eval(const RatesArgs& a) {
    const ktdecay::RateFunction m = parse_rate(a.rate);
    std::cout << "eps,value\n";
    for (const double e : a.eps)
        std::cout << ktdecay::format_double(e) << "," << ktdecay::format_double(m(e)) << "\n";
    return 0;
}

int cmd_rates_invert(const RatesArgs& a) {
    const ktdecay::RateFunction m = parse_rate(a.rate);
    const ktdecay::DerivedRate d = make_derived(m, a.kind, a.order);
    const double eps = ktdecay::invert_rate(d, a.y);
    std::cout << "y,eps\n"
              << ktdecay::format_double(a.y) << "," << ktdecay::format_double(eps) << "\n";
    return 0;
}

int cmd_rates_schedule(const RatesArgs& a) {
    const ktdecay::RateFunction m = parse_rate(a.rate);
    const ktdecay::DerivedRate::Kind kind = a.kind == "mlog" ? ktdecay::DerivedRate::Kind::mlog
                                            : a.kind == "mk" ? ktdecay::DerivedRate::Kind::mk
                                                             : throw ktdecay::InputError(
                                                                   "kind must be mlog or mk");
    const auto entries = ktdecay::epsilon_schedule(m, kind, a.order, a.c, a.n_list);
    bool any_pre = false;
    std::cout << "n,eps\n";
    for (const auto& e : entries) {
        if (e.pre_asymptotic) {
            any_pre = true;
            std::cout << e.n << ",pre_asymptotic\n";
        } else {
            std::cout << e.n << "," << ktdecay::format_double(*e.eps) << "\n";
        }
    }
    return any_pre ? 5 : 0;
}

// ---------------------------------------------------------------------------
// operator
// ---------------------------------------------------------------------------

struct OperatorArgs {
    std::string op_file;
    int grid = 60;
    double theta_min = 1e-4;
    double theta_max = 0.0;
    long n_max = 1000;
    double threshold = 10.0;
    double scan_lo = 0.5;
    std::string out;
};

int cmd_operator_profile(const OperatorArgs& a) {
    const ktdecay::OperatorSpec spec = ktdecay::operator_from_json(read_json_file(a.op_file));
    const ktdecay::ResolventProfile prof =
        ktdecay::resolvent_profile(spec, a.grid, a.theta_min, a.theta_max);
    std::ostringstream csv;
    csv << "# grid=" << a.grid << " theta_min=" << ktdecay::format_double(a.theta_min)
        << " theta_max=" << ktdecay::format_double(a.theta_max == 0.0 ? kPi : a.theta_max)
        << "\n";
    csv << "theta,resolvent_norm\n";
    for (const auto& s : prof.samples)
        csv << ktdecay::format_double(s.theta) << "," << ktdecay::format_double(s.norm)
            << "\n";
    write_text(a.out, csv.str());
    return 0;
}

int cmd_operator_decay(const OperatorArgs& a) {
    const ktdecay::OperatorSpec spec = ktdecay::operator_from_json(read_json_file(a.op_file));
    const ktdecay::OrbitSeries orbit = ktdecay::orbit_decay(spec, a.n_max);
    std::ostringstream csv;
    csv << "# n_max=" << a.n_max << " power_bound="
        << ktdecay::format_double(orbit.power_bound) << "\n";
    csv << "n,d_n\n";
    for (std::size_t n = 0; n < orbit.values.size(); ++n)
        csv << n << "," << ktdecay::format_double(orbit.values[n]) << "\n";
    write_text(a.out, csv.str());
    if (orbit.divergent_at)
        std::cerr << "note: orbit iteration overflowed at n = " << *orbit.divergent_at << "\n";
    return 0;
}

int cmd_operator_scan(const OperatorArgs& a) {
    const ktdecay::OperatorSpec spec = ktdecay::operator_from_json(read_json_file(a.op_file));
    if (!(a.scan_lo > 0.0) || !(a.scan_lo < kPi))
        throw ktdecay::ParameterError("scan window must start inside (0, pi)");
    std::vector<double> grid;
    for (int i = 0; i < a.grid; ++i) {
        const double t =
            a.scan_lo + (kPi - a.scan_lo) * static_cast<double>(i) /
                            static_cast<double>(std::max(1, a.grid - 1));
        grid.push_back(t);
        grid.push_back(-t);
    }
    std::vector<double> hits = ktdecay::singularity_scan(spec, grid, a.threshold);
    std::sort(hits.begin(), hits.end());
    std::cout << "# threshold=" << ktdecay::format_double(a.threshold) << " window=["
              << ktdecay::format_double(a.scan_lo) << ",pi]\n";
    if (hits.empty()) {
        std::cout << "no candidate singularities\n";
    } else {
        std::cout << "theta\n";
        for (const double t : hits) std::cout << ktdecay::format_double(t) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// certify
// ---------------------------------------------------------------------------

struct CertifyArgs {
    std::string op_file;
    std::string seq;
    double c = 0.5;
    std::string calib = "50:100";
    std::string valid = "101:1000";
    int grid = 60;
    double theta_min = 1e-4;
    double theta_max = 0.0;
    std::string out;
    std::string format = "json";
};

int cmd_certify(const CertifyArgs& a) {
    if (a.op_file.empty() == a.seq.empty())
        throw ktdecay::InputError("exactly one of --op or --seq is required");
    const auto [calib_lo, calib_hi] = parse_window(a.calib);
    const auto [valid_lo, valid_hi] = parse_window(a.valid);

    if (!a.seq.empty()) {
        // A bare sequence carries no resolvent structure to fit a rate
        // against; we check the hypotheses and stop.
        ktdecay::Sequence x = parse_sequence(a.seq);
        const ktdecay::HypothesisReport rep =
            ktdecay::check_hypotheses(x, std::max<long>(100, valid_hi));
        write_text(a.out, ktdecay::dump_fixed(ktdecay::hypotheses_to_json(rep)));
        if (rep.any_failure()) {
            std::cerr << "hypothesis failed: " << rep.first_failure() << "\n";
            return 6;
        }
        std::cerr << "verdict: inconclusive (hypotheses hold on the window; rate "
                     "certification needs an operator)\n";
        return 5;
    }

    const ktdecay::OperatorSpec spec = ktdecay::operator_from_json(read_json_file(a.op_file));
    ktdecay::CertifyOptions opt;
    opt.c = a.c;
    opt.calib_lo = calib_lo;
    opt.calib_hi = calib_hi;
    opt.valid_lo = valid_lo;
    opt.valid_hi = valid_hi;
    opt.grid_size = a.grid;
    opt.theta_min = a.theta_min;
    opt.theta_max = a.theta_max;
    const ktdecay::DecayReport rep = ktdecay::certify_decay(spec, opt);

    if (a.format == "csv") {
        write_text(a.out, ktdecay::report_to_csv(rep));
    } else if (a.format == "json") {
        write_text(a.out, ktdecay::dump_fixed(ktdecay::report_to_json(rep)));
        if (!a.out.empty()) write_text(a.out + ".csv", ktdecay::report_to_csv(rep));
    } else {
        throw ktdecay::InputError("format must be json or csv");
    }
    std::cerr << "verdict: " << ktdecay::to_string(rep.verdict) << "\n";
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
    switch (rep.verdict) {
        case ktdecay::CertifyVerdict::Certified: return 0;
        case ktdecay::CertifyVerdict::Violated: return 4;
        default: return 5;
    }
}

// ---------------------------------------------------------------------------
// kernel-selftest
// ---------------------------------------------------------------------------

struct SelftestArgs {
    std::vector<double> eps;
    std::string identity;  // empty = all
    long n = 10;
    long k = 5;
    std::string out;
};

struct IdentityResult {
    double max_error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

IdentityResult identity_closed_form(double eps) {
    const ktdecay::KernelFamily fam = ktdecay::KernelFamily::piecewise_linear(eps, 64);
    IdentityResult r;
    r.tolerance = 1e-8;
    for (long n = 0; n <= 64; ++n) {
        const double nd = static_cast<double>(n);
        auto f = [&](double th) { return std::cos(nd * th) * fam.psi(th); };
        // integrate piecewise (the ramp has kinks at eps and 2*eps, where an
        // adaptive rule's error estimate is unreliable)
        const double panel = std::min(kPi / (4.0 * std::max(1.0, nd)), eps / 2.0);
        const double q =
            (ktdecay::quad::adaptive_simpson(f, eps, 2.0 * eps, 5e-11, panel) +
             ktdecay::quad::adaptive_simpson(f, 2.0 * eps, kPi, 5e-11, panel)) /
            kPi;
        r.max_error = std::max(r.max_error, std::fabs(q - fam.coeff(n)));
    }
    r.pass = r.max_error <= r.tolerance;
    return r;
}

IdentityResult identity_increment(double eps) {
    const ktdecay::KernelFamily fam = ktdecay::KernelFamily::piecewise_linear(eps);
    IdentityResult r;
    r.tolerance = 1e-8;
    for (long n = -32; n <= 64; ++n) {
        const ktdecay::ZDiffIdentity z = ktdecay::z_diff_identity(fam, n);
        r.max_error = std::max(r.max_error, std::fabs(z.lhs - z.rhs));
    }
    r.pass = r.max_error <= r.tolerance;
    return r;
}

IdentityResult identity_reconstruction(double eps) {
    const ktdecay::KernelFamily fam = ktdecay::KernelFamily::piecewise_linear(eps);
    const long big_n = fam.coeff_count();
    IdentityResult r;
    r.tolerance = 5.0 / (eps * static_cast<double>(big_n));
    for (int g = 0; g <= 1000; ++g) {
        const double theta = -kPi + 2.0 * kPi * static_cast<double>(g) / 1000.0;
        double sum = fam.coeff(0);
        for (long n = 1; n <= big_n; ++n)
            sum += 2.0 * fam.coeff(n) * std::cos(static_cast<double>(n) * theta);
        r.max_error = std::max(r.max_error, std::fabs(sum - fam.psi(theta)));
    }
    r.pass = r.max_error <= r.tolerance;
    return r;
}

IdentityResult identity_coeff_bounds(long n, long k) {
    IdentityResult r;
    r.tolerance = 0.5;
    const ktdecay::CoefficientBounds b = ktdecay::coefficient_bounds_check(n, k);
    r.max_error = b.bounds_ok ? 0.0 : 1.0;
    r.pass = b.bounds_ok;
    return r;
}

IdentityResult identity_duality(double eps) {
    const ktdecay::KernelFamily fam = ktdecay::KernelFamily::piecewise_linear(eps);
    ktdecay::Sequence x = ktdecay::Sequence::geometric(Complex(0.5, 0.0));
    const auto conv = ktdecay::convolve(x, fam, 0, 30, 0.01);
    const ktdecay::BoundarySampler f{
        [](double theta) {
            const Complex z = std::polar(1.0, theta);
            return std::vector<Complex>{Complex(0.5) / (z - Complex(0.5))};
        },
        1};
    IdentityResult r;
    r.tolerance = 1e-6;
    for (long n = 0; n <= 30; ++n) {
        const std::vector<Complex> s = ktdecay::spectral_form(f, fam, n);
        r.max_error = std::max(r.max_error, std::abs(s[0] - conv[n][0]));
    }
    r.pass = r.max_error <= r.tolerance;
    return r;
}

int cmd_kernel_selftest(const SelftestArgs& a) {
    std::vector<double> ladder = a.eps;
    if (ladder.empty()) ladder = {kPi / 4.0, kPi / 8.0, kPi / 16.0};

    json report;
    report["eps"] = ladder;
    report["n"] = a.n;
    report["k"] = a.k;
    json identities = json::object();
    std::vector<std::string> failed;

    auto want = [&](const std::string& name) {
        return a.identity.empty() || a.identity == name;
    };
    auto record = [&](const std::string& name, const IdentityResult& r) {
        identities[name] = json{{"max_error", r.max_error},
                                {"tolerance", r.tolerance},
                                {"pass", r.pass}};
        if (!r.pass) failed.push_back(name);
    };
    auto over_ladder = [&](IdentityResult (*f)(double)) {
        IdentityResult acc;
        acc.pass = true;
        for (const double e : ladder) {
            const IdentityResult r = f(e);
            acc.max_error = std::max(acc.max_error, r.max_error);
            acc.tolerance = std::max(acc.tolerance, r.tolerance);
            acc.pass = acc.pass && r.pass;
        }
        return acc;
    };

    if (want("closed-form")) record("closed-form", over_ladder(&identity_closed_form));
    if (want("increment")) record("increment", over_ladder(&identity_increment));
    if (want("reconstruction"))
        record("reconstruction", over_ladder(&identity_reconstruction));
    if (want("coeff-bounds")) record("coeff-bounds", identity_coeff_bounds(a.n, a.k));
    if (want("duality")) record("duality", over_ladder(&identity_duality));
    if (identities.empty())
        throw ktdecay::InputError(
            "unknown identity '" + a.identity +
            "' (known: closed-form, increment, reconstruction, coeff-bounds, duality)");

    report["identities"] = std::move(identities);
    report["pass"] = failed.empty();
    write_text(a.out, ktdecay::dump_fixed(report));
    if (!failed.empty()) {
        std::cerr << "failed identities:";
        for (const auto& f : failed) std::cerr << " " << f;
        std::cerr << "\n";
        return 4;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decay-rate toolkit: rate algebra, operator profiles, certification"};
    app.require_subcommand(1);

    RatesArgs ra;
    OperatorArgs oa;
    CertifyArgs ca;
    SelftestArgs sa;

    CLI::App* rates = app.add_subcommand("rates", "evaluate, invert and schedule rates");
    rates->require_subcommand(1);
    CLI::App* r_eval = rates->add_subcommand("eval", "evaluate a rate at given eps");
    CLI::App* r_inv = rates->add_subcommand("invert", "invert a derived rate at a value");
    CLI::App* r_sched = rates->add_subcommand("schedule", "cutoff schedule eps_n for c*n");
    for (CLI::App* sub : {r_eval, r_inv, r_sched})
        sub->add_option("--rate", ra.rate, "poly:C,alpha | exp:alpha | const:v | @file.json")
            ->required();
    r_eval->add_option("--eps", ra.eps, "evaluation points")->required()->delimiter(',');
    for (CLI::App* sub : {r_inv, r_sched}) {
        sub->add_option("--kind", ra.kind, "derived rate kind: mlog | mk (default mlog)");
        sub->add_option("--order", ra.order, "order k for kind mk (default 1)");
    }
    r_inv->add_option("--y", ra.y, "value to invert")->required();
    r_sched->add_option("--c", ra.c, "schedule constant (default 0.5)");
    r_sched->add_option("--n", ra.n_list, "indices n")->required()->delimiter(',');

    CLI::App* op = app.add_subcommand("operator", "resolvent profile, orbit decay, scan");
    op->require_subcommand(1);
    CLI::App* o_prof = op->add_subcommand("profile", "resolvent norms on a log theta grid");
    CLI::App* o_decay = op->add_subcommand("decay", "orbit decay series d_n");
    CLI::App* o_scan = op->add_subcommand("scan", "flag resolvent blow-up away from angle 0");
    for (CLI::App* sub : {o_prof, o_decay, o_scan}) {
        sub->add_option("--op", oa.op_file, "operator JSON file")->required();
        sub->add_option("--out", oa.out, "output path (default stdout)");
    }
    o_prof->add_option("--grid", oa.grid, "number of grid points (default 60)");
    o_prof->add_option("--theta-min", oa.theta_min, "smallest |theta| (default 1e-4)");
    o_prof->add_option("--theta-max", oa.theta_max, "largest |theta| (default pi)");
    o_decay->add_option("--n-max", oa.n_max, "largest power (default 1000)");
    o_scan->add_option("--grid", oa.grid, "points per sign (default 60)");
    o_scan->add_option("--threshold", oa.threshold, "flag norms above threshold/|theta|");
    o_scan->add_option("--theta-lo", oa.scan_lo, "scan window start (default 0.5)");

    CLI::App* cert = app.add_subcommand("certify", "calibrate-then-validate decay bound");
    cert->add_option("--op", ca.op_file, "operator JSON file");
    cert->add_option("--seq", ca.seq,
                     "sequence: ones | alternating | impulse | geometric:re[,im]");
    cert->add_option("--c", ca.c, "constant in (0,1) (default 0.5)");
    cert->add_option("--calib", ca.calib, "calibration window lo:hi (default 50:100)");
    cert->add_option("--valid", ca.valid, "validation window lo:hi (default 101:1000)");
    cert->add_option("--grid", ca.grid, "resolvent grid size (default 60)");
    cert->add_option("--theta-min", ca.theta_min, "profile lower angle (default 1e-4)");
    cert->add_option("--theta-max", ca.theta_max, "profile upper angle (default pi)");
    cert->add_option("--out", ca.out, "report path (default stdout); CSV written alongside");
    cert->add_option("--format", ca.format, "json | csv (default json)");

    CLI::App* self = app.add_subcommand("kernel-selftest", "verify kernel identities");
    self->add_option("--eps", sa.eps, "cutoff ladder (default pi/4,pi/8,pi/16)")
        ->delimiter(',');
    self->add_option("--identity", sa.identity,
                     "run one identity: closed-form | increment | reconstruction | "
                     "coeff-bounds | duality");
    self->add_option("--n", sa.n, "coeff-bounds n (default 10)");
    self->add_option("--k", sa.k, "coeff-bounds k (default 5)");
    self->add_option("--out", sa.out, "report path (default stdout)");

    try {
        app.parse(argc, argv);
        if (r_eval->parsed()) return cmd_rates_eval(ra);
        if (r_inv->parsed()) return cmd_rates_invert(ra);
        if (r_sched->parsed()) return cmd_rates_schedule(ra);
        if (o_prof->parsed()) return cmd_operator_profile(oa);
        if (o_decay->parsed()) return cmd_operator_decay(oa);
        if (o_scan->parsed()) return cmd_operator_scan(oa);
        if (cert->parsed()) return cmd_certify(ca);
        if (self->parsed()) return cmd_kernel_selftest(sa);
        std::cerr << app.help();
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ktdecay::HypothesisError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 6;
    } catch (const ktdecay::SingularityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ktdecay::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
