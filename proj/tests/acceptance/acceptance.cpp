// Acceptance criteria 1-12: one PASS/FAIL line each, nonzero exit on any FAIL.

#include <fragrd/expcli.hpp>
#include <fragrd/geom/indices.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

using namespace fragrd;
using geom::SetExpr;
using rd::Verdict;
using nlohmann::json;

namespace {

struct Result {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const BistableReaction& cubic04()
{
    static const BistableReaction f = BistableReaction::cubic(0.4);
    return f;
}

rd::SolverConfig solver(double h, double T = 200.0)
{
    rd::SolverConfig c;
    c.h = h;
    c.T_max = T;
    return c;
}

// Shared between criteria: threshold brackets on the default lattices.
struct Shared {
    thresholds::ThresholdBracket R1_1d;      // h = 0.025
    thresholds::ThresholdBracket a_star_2d;  // h = 0.2
    bool have_a_star = false;
} shared;

std::vector<std::pair<double, double>> random_intervals(std::mt19937_64& rng, int count)
{
    std::uniform_real_distribution<double> len(0.1, 2.0), gap(0.05, 3.0);
    std::vector<std::pair<double, double>> out;
    double x = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
    for (int i = 0; i < count; ++i) {
        const double l = len(rng);
        out.emplace_back(x, x + l);
        x += l + gap(rng);
    }
    return out;
}

SetExpr from_intervals(const std::vector<std::pair<double, double>>& ivs)
{
    std::vector<SetExpr> parts;
    for (const auto& p : ivs)
        parts.push_back(SetExpr::interval(p.first, p.second));
    return SetExpr::unite(parts);
}

SetExpr random_set_2d(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> pos(-2.5, 2.5), rad(0.2, 1.2), side(0.3, 2.0);
    const int count = 1 + static_cast<int>(rng() % 4);
    std::vector<SetExpr> parts;
    for (int i = 0; i < count; ++i) {
        const Point c{pos(rng), pos(rng), 0.0};
        if (rng() % 2) {
            parts.push_back(SetExpr::ball(2, c, rad(rng)));
        } else {
            const double w = side(rng), h = side(rng);
            parts.push_back(SetExpr::box(2, {c[0] - w / 2, c[1] - h / 2, 0}, {c[0] + w / 2, c[1] + h / 2, 0}));
        }
    }
    return SetExpr::unite(parts);
}

Result c1_index_exactness()
{
    double worst = 0.0;
    for (int dim : {1, 2})
        for (double r : {0.3, 1.0, 4.0}) {
            const auto rep = geom::index_report(SetExpr::ball(dim, {0.1, -0.2, 0}, r));
            worst = std::max({worst, rep.delta1, rep.delta_h});
        }
    return {worst <= 0.02, fmt("max(delta1, deltaH) over 6 balls = %.4g (bound 0.02)", worst)};
}

Result c2_closed_form_1d()
{
    std::mt19937_64 rng(2);
    double worst_h = 0.0, worst_ratio = 0.0;
    for (int t = 0; t < 100; ++t) {
        const auto ivs = random_intervals(rng, 1 + static_cast<int>(rng() % 6));
        const auto e = from_intervals(ivs);
        const auto r = geom::index_raster(e);
        const auto rep = geom::index_report(r);
        double lambda = 0.0;
        for (const auto& p : ivs)
            lambda += p.second - p.first;
        const double rho = 0.5 * (ivs.back().second - ivs.front().first);
        const double re = 0.5 * lambda;
        worst_h = std::max(worst_h, std::abs(rep.delta_h - (rho - re) / (rho + re)));
        const double oracle = geom::delta1_oracle_1d(ivs);
        worst_ratio = std::max(worst_ratio, std::abs(rep.delta1 - oracle) / (3 * r.grid.h / lambda));
    }
    return {worst_h <= 1e-3 && worst_ratio <= 1.0,
            fmt("max |deltaH - closed form| = %.3g (bound 1e-3); max |delta1 - oracle| / (3h/lambda) = %.3g (bound 1)",
                worst_h, worst_ratio)};
}

Result c3_index_inequalities()
{
    std::mt19937_64 rng(3);
    int violations = 0;
    double worst_a = -1, worst_b = -1;
    for (int dim : {1, 2})
        for (int t = 0; t < 200; ++t) {
            const SetExpr e = dim == 1 ? from_intervals(random_intervals(rng, 1 + static_cast<int>(rng() % 6)))
                                       : random_set_2d(rng);
            const auto rep = geom::index_report(e);
            const double gamma = 4.0 * dim * std::pow(3.0, dim - 1);
            const double eta = 8.0 * std::sqrt(static_cast<double>(dim));
            const double a = rep.delta1 - (gamma * rep.delta_h + 0.02);
            const double b = (1 - rep.delta_h) - (eta * std::pow(1 - rep.delta1, 1.0 / dim) + 0.02);
            worst_a = std::max(worst_a, a);
            worst_b = std::max(worst_b, b);
            if (a > 0 || b > 0)
                ++violations;
        }
    return {violations == 0, fmt("400 sets, %d violations; max slack use: %.3g (delta1 side), %.3g (deltaH side)",
                                 violations, worst_a, worst_b)};
}

Result c4_family_limits()
{
    families::FamilySpec f;
    f.tag = families::FamilyTag::Fn;
    f.dim = 2;
    f.n = 32;
    f.nu = 0.5;
    const auto rf = geom::index_report(families::build(f));
    families::FamilySpec g;
    g.tag = families::FamilyTag::Gn;
    g.dim = 2;
    g.n = 64;
    g.x = {0, 0, 0};
    g.y = {2, 0, 0};
    const auto rg = geom::index_report(families::build(g));
    families::FamilySpec e;
    e.tag = families::FamilyTag::En;
    e.dim = 1;
    e.n = 16;
    const double d1e = geom::delta1_oracle_1d(geom::intervals_1d(families::build(e)));
    const double nu = 0.5;
    const double df1 = std::abs(rf.delta1 - (1 - nu * nu));
    const double dfh = std::abs(rf.delta_h - (1 - nu) / (1 + nu));
    const double dg = std::abs(rg.delta1 - 0.5);
    const bool ok = df1 <= 0.05 && dfh <= 0.05 && dg <= 0.05 && d1e >= 0.9;
    return {ok, fmt("|delta1(F32) - 3/4| = %.4f, |deltaH(F32) - 1/3| = %.4f, |delta1(G64) - 1/2| = %.4f (bounds 0.05); "
                    "delta1(E16) = %.4f (needs >= 0.9)",
                    df1, dfh, dg, d1e)};
}

Result c5_interval_pair()
{
    const auto cfg = expcli::load_config({{"experiment", {{"recipe", "fig1"}}}, {"out", "acceptance-out/fig1"}});
    expcli::Manifest m("reproduce fig1", cfg);
    const auto t0 = std::chrono::steady_clock::now();
    json doc;
    try {
        doc = expcli::reproduce_fig1(cfg, m);
    } catch (const AssertionFailure& e) {
        m.finish();
        return {false, e.what()};
    }
    m.finish();
    const double secs = seconds_since(t0);
    const double oracle = doc["E2"]["delta1_oracle"].get<double>();
    const double raster = doc["E2"]["delta1_raster"].get<double>();
    const bool ok = doc["verdicts"] == json({"Extinction", "Invasion"}) && std::abs(raster - oracle) <= 0.03 && secs < 180;
    return {ok, fmt("verdicts (%s, %s) at t = %.0f, %.0f; delta1(E2) = %.4f vs oracle %.4f; "
                    "hull mean at t = 0.05: %.3f; %.0f s",
                    doc["verdicts"][0].get<std::string>().c_str(), doc["verdicts"][1].get<std::string>().c_str(),
                    doc["E1"]["run"]["certificate_time"].get<double>(), doc["E2"]["run"]["certificate_time"].get<double>(),
                    raster, oracle, doc["E2"]["early_mean_on_hull"].get<double>(), secs)};
}

Result c6_front_speed()
{
    std::string detail;
    bool ok = true;
    for (auto [theta, target] : {std::pair{0.4, 0.141421}, std::pair{0.25, 0.353553}}) {
        const auto f = BistableReaction::cubic(theta);
        rd::SolverConfig cfg = solver(0.05, 150);
        cfg.stop_at_certificate = false;
        const auto o = rd::classify(SetExpr::interval(-5, 5), 1.0, f, cfg);
        const double c = rd::front_speed(o);
        const double shoot = shooting_front_speed(f);
        const bool pass = o.verdict == Verdict::Invasion && std::abs(c - target) <= 0.05 * target &&
                          std::abs(shoot - target) <= 1e-4;
        ok = ok && pass;
        detail += fmt("theta %.2f: fitted %.5f, shooting %.6f, target %.6f; ", theta, c, shoot, target);
    }
    return {ok, detail};
}

Result c7_thresholds()
{
    const auto& f = cubic04();
    thresholds::BisectOptions opt;
    opt.tol = 1e-2;
    const auto r_h = thresholds::bisect(thresholds::ball_family(1, 1.0, 1.5, 3.5),
                                        thresholds::make_classifier(f, solver(0.05)), opt);
    const auto r_h2 = thresholds::bisect(thresholds::ball_family(1, 1.0, 1.5, 3.5),
                                         thresholds::make_classifier(f, solver(0.025)), opt);
    shared.R1_1d = r_h2;
    const double refine = std::abs(r_h.mid() - r_h2.mid()) / r_h2.mid();
    const auto r09 = thresholds::bisect(thresholds::ball_family(1, 0.9, 1.5, 3.5),
                                        thresholds::make_classifier(f, solver(0.05)), opt);
    const auto r08 = thresholds::bisect(thresholds::ball_family(1, 0.8, 1.5, 3.5),
                                        thresholds::make_classifier(f, solver(0.05)), opt);
    const bool alpha_ok = r08.lo >= r09.lo - opt.tol && r09.lo >= r_h.lo - opt.tol;

    // N = 2 on the coarse lattice
    const auto sc = solver(0.2);
    const auto cls2 = thresholds::make_classifier(f, sc);
    thresholds::BisectOptions opt2;
    opt2.tol = 0.05;
    const auto R1 = thresholds::bisect(thresholds::ball_family(2, 1.0, 5.0, 10.0), cls2, opt2);
    const auto a = thresholds::bisect(thresholds::cube_family(2, 11.0, 15.0), cls2, opt2);
    shared.a_star_2d = a;
    shared.have_a_star = true;
    const double lower = 2 * R1.lo / std::sqrt(2.0), upper = 2 * R1.hi;
    const auto below = rd::classify(families::build([&] {
                                        families::FamilySpec s;
                                        s.tag = families::FamilyTag::Cube;
                                        s.dim = 2;
                                        s.a = lower - 0.05;
                                        return s;
                                    }()),
                                    1.0, f, sc);
    const auto above = rd::classify(families::build([&] {
                                        families::FamilySpec s;
                                        s.tag = families::FamilyTag::Cube;
                                        s.dim = 2;
                                        s.a = upper + 0.05;
                                        return s;
                                    }()),
                                    1.0, f, sc);
    const bool sandwich = a.hi >= lower && a.lo <= upper && below.verdict == Verdict::Extinction &&
                          above.verdict == Verdict::Invasion;

    // r*(eps) on a sampled grid
    std::vector<double> eps{0.05, 0.1, 0.2, 0.4, 1.0, 3.0};
    std::vector<thresholds::ThresholdBracket> rs;
    for (double e : eps)
        rs.push_back(thresholds::r_star(2, e, a.hi, cls2, opt2));
    bool mono = true;
    for (std::size_t i = 1; i < rs.size(); ++i)
        mono = mono && rs[i].lo <= rs[i - 1].hi + opt2.tol;
    const bool contains = rs.back().lo <= R1.hi + opt2.tol && rs.back().hi >= R1.lo - opt2.tol;
    const double limit = a.hi * std::sqrt(2.0) / 2;
    std::string rdesc;
    for (std::size_t i = 0; i < eps.size(); ++i)
        rdesc += fmt(" %.2f:[%.3f,%.3f]", eps[i], rs[i].lo, rs[i].hi);
    const bool near_limit = std::abs(rs.front().hi - limit) <= 0.1 * limit;

    const bool ok = refine <= 0.02 && alpha_ok && sandwich && mono && contains && near_limit;
    return {ok, fmt("R1 (N=1) [%.4f,%.4f] at h=0.05, [%.4f,%.4f] at h=0.025 (rel diff %.4f); R_0.9 [%.3f,%.3f], "
                    "R_0.8 [%.3f,%.3f]; N=2: R1 [%.3f,%.3f], a* [%.3f,%.3f] in [%.3f, %.3f], Q below %s, Q above %s; "
                    "r*(eps)%s; a* sqrt2/2 = %.3f",
                    r_h.lo, r_h.hi, r_h2.lo, r_h2.hi, refine, r09.lo, r09.hi, r08.lo, r08.hi, R1.lo, R1.hi, a.lo,
                    a.hi, lower, upper, rd::verdict_name(below.verdict).c_str(),
                    rd::verdict_name(above.verdict).c_str(), rdesc.c_str(), limit)};
}

Result c8_da()
{
    const double R1 = shared.R1_1d.hi > 0 ? shared.R1_1d.mid() : 2.2832;
    auto da = [&](double a) {
        families::FamilySpec s;
        s.tag = families::FamilyTag::Dn_a;
        s.a = a;
        s.r = 1.1 * R1;
        return families::build(s);
    };
    const auto cfg = solver(0.05);
    const auto near = rd::classify(da(0.01), 1.0, cubic04(), cfg);
    const auto far = rd::classify(da(10.0), 1.0, cubic04(), cfg);
    const double lam = geom::measure(da(10.0)).value;
    const bool ok = near.verdict == Verdict::Invasion && far.verdict == Verdict::Extinction && lam > 2 * R1;
    return {ok, fmt("r = 1.1 R1 = %.4f: a = 0.01 %s, a = 10 %s; lambda(D_10) = %.4f > 2 R1 = %.4f", 1.1 * R1,
                    rd::verdict_name(near.verdict).c_str(), rd::verdict_name(far.verdict).c_str(), lam, 2 * R1)};
}

Result c9_equimeasurable_pairs()
{
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    for (const std::string recipe : {"thm1-homog", "thm1-cubeball"}) {
        json x{{"recipe", recipe}};
        if (recipe == "thm1-cubeball" && shared.have_a_star)
            x["a_star"] = {{"lo", shared.a_star_2d.lo}, {"hi", shared.a_star_2d.hi}};
        const auto cfg = expcli::load_config({{"experiment", x}, {"out", "acceptance-out/" + recipe}});
        expcli::Manifest m("reproduce " + recipe, cfg);
        json doc;
        try {
            doc = expcli::reproduce(recipe, cfg, m);
        } catch (const Error& e) {
            m.finish();
            ok = false;
            detail += recipe + ": " + e.what() + "; ";
            continue;
        }
        m.finish();
        const double rel = doc["measure_rel_diff"].get<double>();
        const double d1 = doc["E1"]["delta1"].get<double>(), d2 = doc["E2"]["delta1"].get<double>();
        const double df = doc["extended"]["delta1_F"].get<double>();
        const bool pass = rel <= 1e-3 && 0 < d2 && d2 < d1 && d1 < df &&
                          doc["verdicts"] == json({"Invasion", "Extinction"}) &&
                          doc["extended"]["verdict_F"] == "Extinction";
        ok = ok && pass;
        detail += fmt("%s: rel measure gap %.2g, delta1 E2 %.4f < E1 %.4f < F %.4f (n0 = %d), verdicts (E2, E1, F) = "
                      "(%s, %s, %s); ",
                      recipe.c_str(), rel, d2, d1, df, doc["extended"]["n0"].get<int>(),
                      doc["verdicts"][1].get<std::string>().c_str(), doc["verdicts"][0].get<std::string>().c_str(),
                      doc["extended"]["verdict_F"].get<std::string>().c_str());
    }
    const double secs = seconds_since(t0);
    return {ok && secs < 900, detail + fmt("%.0f s", secs)};
}

Result c10_nonmono()
{
    const auto cfg = expcli::load_config({{"experiment", {{"recipe", "nonmono-dh"}}}, {"out", "acceptance-out/nonmono-dh"}});
    expcli::Manifest m("reproduce nonmono-dh", cfg);
    json doc;
    try {
        doc = expcli::reproduce_nonmono_dh(cfg, m);
    } catch (const Error& e) {
        m.finish();
        return {false, e.what()};
    }
    m.finish();
    const auto& dh = doc["delta_h"];
    const bool ok = doc["verdicts"] == json({"Invasion", "Extinction", "Invasion"}) &&
                    dh[0].get<double>() < dh[1].get<double>() && dh[1].get<double>() < dh[2].get<double>();
    return {ok, fmt("verdicts (%s, %s, %s) with n0 = %d, p0 = %d; deltaH %.3g < %.4f < %.4f",
                    doc["verdicts"][0].get<std::string>().c_str(), doc["verdicts"][1].get<std::string>().c_str(),
                    doc["verdicts"][2].get<std::string>().c_str(), doc["O_n0"]["n0"].get<int>(),
                    doc["Q_p0"]["p0"].get<int>(), dh[0].get<double>(), dh[1].get<double>(), dh[2].get<double>())};
}

geom::Grid box_grid(int dim, double h, std::int64_t first, std::int64_t n)
{
    geom::Grid g;
    g.dim = dim;
    g.h = h;
    for (int k = 0; k < dim; ++k) {
        g.first[k] = first;
        g.extents[k] = n;
    }
    return g;
}

rd::Field constant_field(const geom::Grid& g, double v)
{
    rd::Field f;
    f.grid = g;
    f.u.assign(g.size(), v);
    return f;
}

double mms_error(int dim, int n, double T)
{
    const double l = 2.0;
    const double k = std::numbers::pi / l;
    const double h = l / n;
    auto exact = [&](const Point& p, double t) {
        double c = 1.0;
        for (int a = 0; a < dim; ++a)
            c *= std::cos(k * p[a]);
        return 0.5 + 0.3 * std::exp(-t) * c;
    };
    rd::Forcing g = [&](const Point& p, double t) {
        const double w = exact(p, t) - 0.5;
        const double u = 0.5 + w;
        return -w + dim * k * k * w - u * (1 - u) * (u - 0.4);
    };
    rd::SolverConfig cfg;
    cfg.scheme = rd::Scheme::Explicit;
    cfg.h = h;
    cfg.dt = 0.1 * h * h;
    const auto grid = box_grid(dim, h, 0, n);
    auto u = constant_field(grid, 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i)
        u.u[i] = exact(grid.center(i), 0.0);
    rd::Stepper s(grid, cubic04(), cfg);
    while (u.t < T - 1e-12)
        s.step(u, std::min(s.dt(), T - u.t), &g);
    double err = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        err = std::max(err, std::abs(u.u[i] - exact(grid.center(i), u.t)));
    return err;
}

Result c11_solver_invariants()
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const auto& f = cubic04();
    std::string detail;

    // range preservation on random data, both schemes
    double excess = 0.0;
    for (int dim : {1, 2})
        for (auto scheme : {rd::Scheme::Explicit, rd::Scheme::SemiImplicit}) {
            rd::SolverConfig cfg;
            cfg.scheme = scheme;
            cfg.h = 0.1;
            const auto g = box_grid(dim, 0.1, -15, 30);
            auto u = constant_field(g, 0.0);
            for (double& v : u.u)
                v = uni(rng) < 0.5 ? 0.0 : (uni(rng) < 0.5 ? 1.0 : uni(rng));
            rd::Stepper s(g, f, cfg);
            for (int i = 0; i < 300; ++i) {
                s.step(u);
                excess = std::max({excess, -u.inf(), u.sup() - 1.0});
            }
        }
    const bool range_ok = excess <= rd::kRangeSlack;
    detail += fmt("range excess %.3g; ", std::max(excess, 0.0));

    // heat-mode mass drift per 1000 implicit steps
    double drift = 0.0;
    for (int dim : {1, 2}) {
        rd::SolverConfig cfg;
        cfg.reaction = false;
        cfg.h = 0.1;
        const auto g = box_grid(dim, 0.1, -15, 30);
        auto u = constant_field(g, 0.0);
        for (double& v : u.u)
            v = uni(rng);
        const double m0 = u.mass();
        rd::Stepper s(g, f, cfg);
        for (int i = 0; i < 1000; ++i)
            s.step(u);
        drift = std::max(drift, std::abs(u.mass() - m0) / m0);
    }
    detail += fmt("mass drift %.3g; ", drift);

    // reflection symmetry
    double asym = 0.0;
    for (auto scheme : {rd::Scheme::Explicit, rd::Scheme::SemiImplicit}) {
        rd::SolverConfig cfg;
        cfg.scheme = scheme;
        cfg.h = 0.1;
        const auto g = box_grid(2, 0.1, -30, 60);
        auto u = constant_field(g, 0.0);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const Point p = g.center(i);
            u.u[i] = 0.9 * std::exp(-(p[0] * p[0] + p[1] * p[1]) / 4);
        }
        rd::Stepper s(g, f, cfg);
        for (int it = 0; it < 300; ++it)
            s.step(u);
        for (std::int64_t i = 0; i < 60; ++i)
            for (std::int64_t j = 0; j < 60; ++j) {
                const double v = u.u[g.flatten({i, j, 0})];
                asym = std::max(asym, std::abs(v - u.u[g.flatten({59 - i, j, 0})]));
                asym = std::max(asym, std::abs(v - u.u[g.flatten({i, 59 - j, 0})]));
                asym = std::max(asym, std::abs(v - u.u[g.flatten({j, i, 0})]));
            }
    }
    detail += fmt("asymmetry %.3g; ", asym);

    // discrete comparison on 20 ordered pairs per dimension
    int unordered = 0;
    double violation = 0.0;
    for (int dim : {1, 2}) {
        const auto g = dim == 1 ? box_grid(1, 0.05, -100, 200) : box_grid(2, 0.1, -20, 40);
        for (int pair = 0; pair < 20; ++pair) {
            rd::SolverConfig cfg;
            cfg.scheme = pair % 2 ? rd::Scheme::Explicit : rd::Scheme::SemiImplicit;
            cfg.h = g.h;
            auto a = constant_field(g, 0.0), b = constant_field(g, 0.0);
            for (std::size_t i = 0; i < g.size(); ++i) {
                a.u[i] = uni(rng) < 0.5 ? uni(rng) : 0.0;
                b.u[i] = std::min(1.0, a.u[i] + (uni(rng) < 0.3 ? uni(rng) : 0.0));
            }
            const auto c = rd::compare_runs(a, b, f, cfg, 2.0);
            if (!c.ordered)
                ++unordered;
            violation = std::max(violation, c.max_violation);
        }
    }
    detail += fmt("comparison: %d of 40 pairs unordered, max violation %.3g; ", unordered, violation);

    // manufactured solution
    double rmin = 1e9, rmax = 0.0;
    for (int dim : {1, 2}) {
        const double ratio = mms_error(dim, 20, 0.2) / mms_error(dim, 40, 0.2);
        rmin = std::min(rmin, ratio);
        rmax = std::max(rmax, ratio);
    }
    detail += fmt("MMS ratios in [%.3f, %.3f]", rmin, rmax);

    const bool ok = range_ok && drift <= 1e-10 && asym <= 1e-12 && unordered == 0 && rmin >= 3.3 && rmax <= 4.7;
    return {ok, detail};
}

Result c12_robustness()
{
    const double R1 = shared.R1_1d.hi > 0 ? shared.R1_1d.mid() : 2.2832;
    const auto cfg = solver(0.05);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    int kept = 0, total = 0;
    double worst_d1 = 0.0;
    std::string detail;
    for (auto [factor, expected] : {std::pair{1.3, Verdict::Invasion}, std::pair{0.7, Verdict::Extinction}}) {
        const double R = factor * R1;
        const auto E = SetExpr::interval(-R, R);
        const double lambda = 2 * R;
        const auto base = rd::classify(E, 1.0, cubic04(), cfg);
        for (int t = 0; t < 10; ++t) {
            // budget split between a hole and an added piece
            const double budget = 0.01 * lambda * (0.3 + 0.7 * uni(rng));
            const double hole = budget * uni(rng), add = budget - hole;
            const double hc = (uni(rng) * 2 - 1) * (R - hole);
            const double ac = (uni(rng) < 0.5 ? -1 : 1) * (R + 0.2 + 2.0 * uni(rng));
            SetExpr P = SetExpr::unite({E, SetExpr::interval(ac - add / 2, ac + add / 2)});
            if (hole > 0)
                P = SetExpr::diff(P, SetExpr::interval(hc - hole / 2, hc + hole / 2));
            const double d = geom::d1(E, P);
            worst_d1 = std::max(worst_d1, d / lambda);
            const auto o = rd::classify(P, 1.0, cubic04(), cfg);
            ++total;
            if (o.verdict == expected && d <= 0.01 * lambda + 1e-12)
                ++kept;
        }
        detail += fmt("%.1f R1 (%s): base %s; ", factor, rd::verdict_name(expected).c_str(),
                      rd::verdict_name(base.verdict).c_str());
        if (base.verdict != expected)
            return {false, detail};
    }
    return {kept == total, detail + fmt("%d of %d perturbations kept the verdict; max d1 / lambda = %.4f", kept, total,
                                        worst_d1)};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Result()>>> criteria{
        {"index exactness", c1_index_exactness},
        {"1-D closed form", c2_closed_form_1d},
        {"index inequalities corpus", c3_index_inequalities},
        {"family limits", c4_family_limits},
        {"interval vs two pieces", c5_interval_pair},
        {"front speed", c6_front_speed},
        {"thresholds", c7_thresholds},
        {"D_a phenomenon", c8_da},
        {"equimeasurable pairs, both variants", c9_equimeasurable_pairs},
        {"deltaH non-monotonicity", c10_nonmono},
        {"solver invariants", c11_solver_invariants},
        {"L1 robustness", c12_robustness},
    };
    const std::vector<double> limits{10, 0, 300, 0, 180, 0, 0, 0, 900, 0, 0, 0};
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Result r;
        try {
            r = criteria[i].second();
        } catch (const std::exception& e) {
            r = {false, std::string("threw: ") + e.what()};
        }
        const double secs = seconds_since(t0);
        if (limits[i] > 0 && secs >= limits[i]) {
            r.pass = false;
            r.detail += fmt(" [runtime %.0f s over the %.0f s limit]", secs, limits[i]);
        }
        if (!r.pass)
            ++failed;
        std::printf("criterion %2zu %s  %s: %s (%.1f s)\n", i + 1, r.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    r.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("acceptance: %zu of %zu criteria pass\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
