#include <fragrd/expcli.hpp>
#include <fragrd/geom/indices.hpp>

#include <cmath>
#include <sstream>

namespace fragrd::expcli {

namespace {

using nlohmann::json;
using rd::Verdict;

json fig1_snapshot_times()
{
    json t = json::array({0.0, 0.05});
    for (int k = 4; k <= 80; k += 4)
        t.push_back(static_cast<double>(k));
    return t;
}

json params_for(const std::string& recipe, const RunConfig& cfg)
{
    if (cfg.doc.contains("experiment") && cfg.doc["experiment"]["recipe"] == recipe)
        return cfg.doc["experiment"];
    return recipe_defaults(recipe);
}

rd::SolverConfig recipe_solver(const json& p)
{
    return rd::SolverConfig::from_json(p.at("solver"));
}

void expect(bool ok, const std::string& what)
{
    if (!ok)
        throw AssertionFailure(what);
}

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

double delta1_of(const geom::SetExpr& e)
{
    if (e.dim() == 1)
        return geom::delta1_oracle_1d(geom::intervals_1d(e));
    return geom::index_report(e).delta1;
}

struct Run {
    rd::Outcome outcome;
    std::string error;
};

// Classifies several sets concurrently; errors are kept per set.
std::vector<Run> classify_all(const std::vector<geom::SetExpr>& sets, const BistableReaction& f,
                              const rd::SolverConfig& sc, int workers)
{
    std::vector<Run> runs(sets.size());
    thresholds::parallel_for(static_cast<int>(sets.size()), workers, [&](int i) {
        try {
            runs[i].outcome = rd::classify(sets[i], 1.0, f, sc);
        } catch (const Error& e) {
            runs[i].outcome.verdict = Verdict::Undecided;
            runs[i].error = e.what();
        }
    });
    return runs;
}

json run_json(const Run& r)
{
    json j = r.outcome.to_json(false);
    if (!r.error.empty())
        j["error"] = r.error;
    return j;
}

std::string vname(const Run& r)
{
    return rd::verdict_name(r.outcome.verdict);
}

thresholds::ThresholdBracket bracket_from(const json& p, const std::string& key, const thresholds::MonotoneFamily& fam,
                                          const thresholds::Classifier& cls, const RunConfig& cfg, json& log)
{
    thresholds::ThresholdBracket b;
    if (p.at(key).is_object()) {
        b.lo = p[key].at("lo").get<double>();
        b.hi = p[key].at("hi").get<double>();
        b.tolerance = b.hi - b.lo;
        log[key] = {{"lo", b.lo}, {"hi", b.hi}, {"source", "supplied"}};
        return b;
    }
    thresholds::BisectOptions opt;
    opt.tol = p.at("tol").get<double>();
    opt.workers = cfg.workers;
    b = thresholds::bisect(fam, cls, opt);
    log[key] = b.to_json();
    log[key].erase("speculative");
    return b;
}

// Extended triple: first n whose rescaled E_n beats delta1(E1) and dies.
json extended_triple(const json& p, int dim, double measure, double d1_e1, const BistableReaction& f,
                     const rd::SolverConfig& sc, int& n0, geom::SetExpr& F, Run& run_F)
{
    json rows = json::array();
    n0 = 0;
    for (int n = p["extended"]["n_min"].get<int>(); n <= p["extended"]["n_max"].get<int>(); ++n) {
        const auto Fn = rescaled_En(dim, n, measure);
        const double d = delta1_of(Fn);
        json row{{"n", n}, {"delta1", d}};
        if (d > d1_e1) {
            const auto r = classify_all({Fn}, f, sc, 1).front();
            row["verdict"] = vname(r);
            row["certificate_time"] = r.outcome.certificate_time;
            if (!r.error.empty())
                row["error"] = r.error;
            if (r.outcome.verdict == Verdict::Extinction) {
                rows.push_back(row);
                n0 = n;
                F = Fn;
                run_F = r;
                break;
            }
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace

geom::SetExpr rescaled_En(int dim, int n, double measure)
{
    families::FamilySpec s;
    s.tag = families::FamilyTag::En;
    s.dim = dim;
    s.n = n;
    const double mu = std::pow(measure / *families::closed_form_measure(s), 1.0 / dim);
    return families::build(s).scaled(mu);
}

json recipe_defaults(const std::string& recipe)
{
    if (recipe == "fig1")
        return {{"recipe", "fig1"},
                {"E1_length", 4.55},
                {"alpha", 0.75},
                {"z", 2.16},
                {"k", 6},
                {"snapshot_times", fig1_snapshot_times()},
                {"early_time", 0.05},
                {"early_tolerance", 0.1},
                {"delta1_reported", 0.23},
                {"delta1_tolerance", 0.03},
                {"solver", {{"scheme", "explicit"}, {"h", 0.02}, {"T_max", 120.0}, {"stop_at_certificate", false}}}};
    if (recipe == "thm1-homog")
        return {{"recipe", "thm1-homog"},
                {"dim", 1},
                {"alpha", 0.8},
                {"beta", 0.9},
                {"R", 2.92},
                {"Rprime", 2.35},
                {"n", 8},
                {"anchor", nullptr},
                {"tol", 1e-3},
                {"extended", {{"n_min", 3}, {"n_max", 16}}},
                {"solver", {{"h", 0.01}, {"T_max", 300.0}}},
                {"discovery",
                 "theta = 0.4 cubic. R_0.8 ~ 2.81 and R_0.9 ~ 2.50 (1-D bisections, h = 0.05). Chose R' = 2.35 < R_0.9 "
                 "and R = 2.92 > R_0.8 with 0.8 R < R'. Scan n in {4, 8, 16}, h in {0.01, 0.005}: F Invasion "
                 "(t = 36..41), H Extinction (t = 16..19) in all six runs; delta1(F) ~ 0.197, delta1(H) ~ 0.10..0.11."}};
    if (recipe == "thm1-cubeball")
        return {{"recipe", "thm1-cubeball"},
                {"dim", 2},
                {"sigma", 0.58},
                {"beta", 0.5},
                {"eta", 0.05},
                {"a_star", nullptr},
                {"a_range", {11.0, 15.0}},
                {"mu_range_factor", 1.3},
                {"tol", 0.05},
                {"anchor_gap", 12.0},
                {"measure_h", 0.02},
                {"extended", {{"n_min", 3}, {"n_max", 8}}},
                {"solver", {{"h", 0.2}, {"T_max", 200.0}}},
                {"discovery",
                 "theta = 0.4 cubic, h = 0.2. a* in [12.969, 13.0]. Dilation threshold of Q_1 cap B_sigma: "
                 "[13.457, 13.488] at sigma = 0.58, [13.305, 13.335] at sigma = 0.6. eta close to beta gives "
                 "delta1(E2) = delta1(E1) up to raster error (the best ball lies inside B_r for both sets), so eta is "
                 "taken near the low end: eta = 0.05, beta = 0.5. sigma = 0.58: E1 Invasion (t = 20), E2 Extinction "
                 "(t = 129), delta1 0.0906 vs 0.0746."}};
    if (recipe == "nonmono-dh")
        return {{"recipe", "nonmono-dh"},
                {"dim", 1},
                {"R1", nullptr},
                {"R1_range", {1.5, 3.5}},
                {"tol", 1e-2},
                {"R_factor", 1.1},
                {"Rprime_fraction", 0.5},
                {"e", 4.0},
                {"n_range", {2, 16}},
                {"x_step", 1.0},
                {"p_max", 200},
                {"dh_margin", 1e-3},
                {"solver", {{"h", 0.05}, {"T_max", 200.0}}}};
    throw ConfigError("unknown recipe '" + recipe + "'");
}

json reproduce_fig1(const RunConfig& cfg, Manifest& m)
{
    const json p = params_for("fig1", cfg);
    const auto& f = cfg.reaction;
    rd::SolverConfig sc = recipe_solver(p);
    sc.snapshot_times = p.at("snapshot_times").get<std::vector<double>>();
    const double L = p.at("E1_length").get<double>();
    const double alpha = p.at("alpha").get<double>();
    const auto E1 = geom::SetExpr::interval(-0.5 * L, 0.5 * L);
    const auto E2 = families::fig1_E2(alpha, p.at("z").get<double>(), p.at("k").get<int>());

    const auto runs = classify_all({E1, E2}, f, sc, cfg.workers);
    for (int i = 0; i < 2; ++i)
        if (!runs[i].error.empty())
            throw SolverAbort("fig1: E" + std::to_string(i + 1) + ": " + runs[i].error);
    json files = json::array();
    for (int i = 0; i < 2; ++i)
        for (const auto& path :
             rd::write_snapshots(m.out(), "fig1_E" + std::to_string(i + 1), runs[i].outcome.trajectory)) {
            m.add_file(path);
            files.push_back(std::filesystem::relative(path, m.out()).generic_string());
        }

    const auto iv = geom::intervals_1d(E2);
    const double hull_lo = iv.front().first, hull_hi = iv.back().second;
    const double t_early = p.at("early_time").get<double>();
    double early_mean = std::nan("");
    for (const auto& s : runs[1].outcome.trajectory.snapshots)
        if (std::abs(s.t - t_early) <= 1e-9) {
            double sum = 0;
            int cnt = 0;
            for (std::size_t c = 0; c < s.field.u.size(); ++c) {
                const double x = s.field.grid.center(c)[0];
                if (x > hull_lo && x < hull_hi) {
                    sum += s.field.u[c];
                    ++cnt;
                }
            }
            early_mean = cnt ? sum / cnt : std::nan("");
        }

    const double oracle = geom::delta1_oracle_1d(iv);
    const auto rep = geom::index_report(E2);
    const json doc{
        {"E1", {{"length", L}, {"measure", L}, {"delta1", delta1_of(E1)}, {"run", run_json(runs[0])}}},
        {"E2",
         {{"measure", geom::measure(E2).value},
          {"hull", {hull_lo, hull_hi}},
          {"delta1_oracle", oracle},
          {"delta1_raster", rep.delta1},
          {"delta1_reported", p.at("delta1_reported")},
          {"delta_h", rep.delta_h},
          {"early_mean_on_hull", early_mean},
          {"run", run_json(runs[1])}}},
        {"verdicts", {vname(runs[0]), vname(runs[1])}},
        {"snapshot_files", files}};
    m.write_json("fig1.json", doc);
    m.set("verdicts", doc["verdicts"]);
    m.set("delta1_E2", {{"oracle", oracle}, {"raster", rep.delta1}});

    expect(std::abs(rep.delta1 - oracle) <= p.at("delta1_tolerance").get<double>(),
           "fig1: raster delta1(E2) = " + fmt(rep.delta1) + " differs from the oracle " + fmt(oracle));
    expect(std::abs(early_mean - alpha) <= p.at("early_tolerance").get<double>(),
           "fig1: mean u on the hull at t = " + fmt(t_early) + " is " + fmt(early_mean) + ", not near " + fmt(alpha));
    expect(runs[0].outcome.verdict == Verdict::Extinction && runs[1].outcome.verdict == Verdict::Invasion,
           "fig1: inferred verdicts (Extinction, Invasion) disagree with the simulation: (" + vname(runs[0]) + ", " +
               vname(runs[1]) + ")");
    return doc;
}

json reproduce_thm1_homog(const RunConfig& cfg, Manifest& m)
{
    const json p = params_for("thm1-homog", cfg);
    const auto& f = cfg.reaction;
    const rd::SolverConfig sc = recipe_solver(p);
    const int dim = p.at("dim").get<int>();
    std::optional<Point> anchor;
    if (!p.at("anchor").is_null()) {
        Point a{};
        const auto v = p["anchor"].get<std::vector<double>>();
        for (std::size_t k = 0; k < v.size() && k < a.size(); ++k)
            a[k] = v[k];
        anchor = a;
    }
    const auto pair = families::thm1_homogenization(dim, p.at("alpha").get<double>(), p.at("beta").get<double>(),
                                                    p.at("R").get<double>(), p.at("Rprime").get<double>(),
                                                    p.at("n").get<int>(), anchor, f.theta());
    const auto& E1 = pair.F;
    const auto& E2 = pair.H;
    const double lam1 = geom::measure(E1).value, lam2 = geom::measure(E2).value;
    const double d1_e1 = delta1_of(E1), d1_e2 = delta1_of(E2);
    const auto runs = classify_all({E1, E2}, f, sc, cfg.workers);

    int n0 = 0;
    geom::SetExpr F;
    Run run_F;
    const json ext = extended_triple(p, dim, lam1, d1_e1, f, sc, n0, F, run_F);
    const double d1_f = n0 ? delta1_of(F) : std::nan("");

    const double rel = std::abs(lam1 - lam2) / lam1;
    const json doc{{"parameters", p},
                   {"gap_report", pair.gap_report},
                   {"E1", {{"measure", lam1}, {"delta1", d1_e1}, {"run", run_json(runs[0])}}},
                   {"E2", {{"measure", lam2}, {"delta1", d1_e2}, {"run", run_json(runs[1])}}},
                   {"measure_rel_diff", rel},
                   {"verdicts", {vname(runs[0]), vname(runs[1])}},
                   {"extended", {{"sweep", ext}, {"n0", n0}, {"delta1_F", d1_f},
                                 {"verdict_F", n0 ? json(vname(run_F)) : json()}}}};
    m.write_json("thm1_homog.json", doc);
    m.set("verdicts", doc["verdicts"]);
    m.set("delta1", {d1_e1, d1_e2});

    expect(rel <= p.at("tol").get<double>(), "thm1-homog: relative measure gap " + fmt(rel));
    expect(0.0 < d1_e2 && d1_e2 < d1_e1,
           "thm1-homog: delta1 ordering fails: delta1(E2) = " + fmt(d1_e2) + ", delta1(E1) = " + fmt(d1_e1));
    expect(runs[0].outcome.verdict == Verdict::Invasion && runs[1].outcome.verdict == Verdict::Extinction,
           "thm1-homog: verdicts (" + vname(runs[0]) + ", " + vname(runs[1]) + "), expected (Invasion, Extinction)");
    expect(n0 > 0, "thm1-homog: no rescaled E_n in the sweep dies with delta1 above delta1(E1)");
    return doc;
}

json reproduce_thm1_cubeball(const RunConfig& cfg, Manifest& m)
{
    const json p = params_for("thm1-cubeball", cfg);
    const auto& f = cfg.reaction;
    const rd::SolverConfig sc = recipe_solver(p);
    const int dim = p.at("dim").get<int>();
    if (dim < 2)
        throw ConfigError("thm1-cubeball needs dim >= 2");
    const auto cls = thresholds::make_classifier(f, sc);
    json brackets = json::object();

    const auto ar = p.at("a_range").get<std::vector<double>>();
    const auto a_br = bracket_from(p, "a_star", thresholds::cube_family(dim, ar.at(0), ar.at(1)), cls, cfg, brackets);
    const double a_star = a_br.hi; // Invasion-certified edge

    const double sigma = p.at("sigma").get<double>();
    families::FamilySpec s_sigma;
    s_sigma.tag = families::FamilyTag::CubeBall;
    s_sigma.dim = dim;
    s_sigma.a = 1.0;
    s_sigma.r = sigma;
    json mu_params = p;
    mu_params["mu_star"] = nullptr;
    const auto mu_br = bracket_from(
        mu_params, "mu_star",
        thresholds::dilation_family(families::build(s_sigma), Point{}, a_star, p.at("mu_range_factor").get<double>() * a_star),
        cls, cfg, brackets);
    const double eps_star = mu_br.lo - a_star; // C_{a*+eps, sigma(a*+eps)} dies below mu_br.lo
    m.set("brackets", brackets);
    expect(eps_star > 0.0, "thm1-cubeball: no eps* > 0 (dilation threshold " + fmt(mu_br.lo) + " <= a* " + fmt(a_star) + ")");

    const double beta = p.at("beta").get<double>(), eta = p.at("eta").get<double>();
    const auto probe = families::thm1_cubeball(dim, a_star, eps_star, sigma, beta, eta);
    Point anchor{};
    anchor[0] = probe.r + probe.side_Qx * std::sqrt(static_cast<double>(dim)) / 2 + p.at("anchor_gap").get<double>();
    const auto pair = families::thm1_cubeball(dim, a_star, eps_star, sigma, beta, eta, anchor);

    const double lam1 = std::pow(pair.side_E1, dim);
    const double lam2 = families::cube_ball_measure(dim, pair.side_C, pair.r) + std::pow(pair.side_Qx, dim);
    const double mh = p.at("measure_h").get<double>();
    const auto r1 = geom::measure(pair.E1, mh), r2 = geom::measure(pair.E2, mh);
    const double d1_e1 = delta1_of(pair.E1), d1_e2 = delta1_of(pair.E2);
    const auto runs = classify_all({pair.E1, pair.E2}, f, sc, cfg.workers);

    int n0 = 0;
    geom::SetExpr F;
    Run run_F;
    const json ext = extended_triple(p, dim, lam1, d1_e1, f, sc, n0, F, run_F);
    const double d1_f = n0 ? delta1_of(F) : std::nan("");

    const double rel = std::abs(lam1 - lam2) / lam1;
    const json doc{{"parameters", p},
                   {"a_star", {{"lo", a_br.lo}, {"hi", a_br.hi}}},
                   {"mu_star", {{"lo", mu_br.lo}, {"hi", mu_br.hi}}},
                   {"eps_star", eps_star},
                   {"construction", pair.report},
                   {"E1", {{"measure", lam1}, {"measure_raster", r1.value}, {"delta1", d1_e1}, {"run", run_json(runs[0])}}},
                   {"E2", {{"measure", lam2}, {"measure_raster", r2.value}, {"delta1", d1_e2}, {"run", run_json(runs[1])}}},
                   {"measure_rel_diff", rel},
                   {"measure_rel_diff_raster", std::abs(r1.value - r2.value) / r1.value},
                   {"verdicts", {vname(runs[0]), vname(runs[1])}},
                   {"extended", {{"sweep", ext}, {"n0", n0}, {"delta1_F", d1_f},
                                 {"verdict_F", n0 ? json(vname(run_F)) : json()}}}};
    m.write_json("thm1_cubeball.json", doc);
    m.set("verdicts", doc["verdicts"]);
    m.set("delta1", {d1_e1, d1_e2});

    expect(rel <= 1e-3, "thm1-cubeball: relative measure gap " + fmt(rel));
    expect(0.0 < d1_e2 && d1_e2 < d1_e1,
           "thm1-cubeball: delta1 ordering fails: delta1(E2) = " + fmt(d1_e2) + ", delta1(E1) = " + fmt(d1_e1));
    expect(runs[0].outcome.verdict == Verdict::Invasion && runs[1].outcome.verdict == Verdict::Extinction,
           "thm1-cubeball: verdicts (" + vname(runs[0]) + ", " + vname(runs[1]) + "), expected (Invasion, Extinction)");
    expect(n0 > 0, "thm1-cubeball: no rescaled E_n in the sweep dies with delta1 above delta1(E1)");
    return doc;
}

json reproduce_nonmono_dh(const RunConfig& cfg, Manifest& m)
{
    const json p = params_for("nonmono-dh", cfg);
    const auto& f = cfg.reaction;
    const rd::SolverConfig sc = recipe_solver(p);
    const int dim = p.at("dim").get<int>();
    const auto cls = thresholds::make_classifier(f, sc);
    json brackets = json::object();
    const auto rr = p.at("R1_range").get<std::vector<double>>();
    const auto r1 = bracket_from(p, "R1", thresholds::ball_family(dim, 1.0, rr.at(0), rr.at(1)), cls, cfg, brackets);
    m.set("brackets", brackets);

    const double w = unit_ball_volume(dim);
    const double R = p.at("R_factor").get<double>() * r1.hi;
    const double measure = w * std::pow(R, dim);
    const auto BR = geom::SetExpr::ball(dim, Point{}, R);
    const double dh_ball = geom::index_report(BR).delta_h;
    const auto run_B = classify_all({BR}, f, sc, 1).front();

    // chain of n balls of radius R / n^{1/N} at k e
    const auto nr = p.at("n_range").get<std::vector<int>>();
    const double e = p.at("e").get<double>();
    json chain = json::array();
    int n0 = 0;
    geom::SetExpr On;
    double dh_on = 0.0;
    Run run_On;
    for (int n = nr.at(0); n <= nr.at(1); ++n) {
        families::FamilySpec s;
        s.tag = families::FamilyTag::On;
        s.dim = dim;
        s.n = n;
        s.R = R;
        s.e = Point{e, 0.0, 0.0};
        const auto set = families::build(s);
        const double lam = geom::measure(set).value;
        json row{{"n", n}, {"measure", lam}};
        if (std::abs(lam - measure) > 1e-6 * measure) {
            row["skipped"] = "pieces overlap";
            chain.push_back(row);
            continue;
        }
        const auto r = classify_all({set}, f, sc, 1).front();
        row["verdict"] = vname(r);
        row["certificate_time"] = r.outcome.certificate_time;
        chain.push_back(row);
        if (r.outcome.verdict == Verdict::Extinction) {
            n0 = n;
            On = set;
            run_On = r;
            dh_on = geom::index_report(set).delta_h;
            break;
        }
    }
    expect(n0 > 0, "nonmono-dh: no extinct chain O_n for n in the sweep range");

    // ball B_{R'} plus a far satellite of the complementary measure
    const double Rp = r1.hi + p.at("Rprime_fraction").get<double>() * (R - r1.hi);
    const double rs = std::pow((measure - w * std::pow(Rp, dim)) / w, 1.0 / dim);
    const double margin = p.at("dh_margin").get<double>();
    json satellites = json::array();
    int p0 = 0;
    geom::SetExpr Qp;
    double dh_qp = 0.0;
    for (int k = 1; k <= p.at("p_max").get<int>(); ++k) {
        families::FamilySpec s;
        s.tag = families::FamilyTag::Qp;
        s.dim = dim;
        s.Rprime = Rp;
        s.r = rs;
        s.x = Point{Rp + rs + k * p.at("x_step").get<double>(), 0.0, 0.0};
        const auto set = families::build(s);
        const double dh = geom::index_report(set).delta_h;
        satellites.push_back({{"p", k}, {"x", s.x[0]}, {"delta_h", dh}});
        if (dh > dh_on + margin) {
            p0 = k;
            Qp = set;
            dh_qp = dh;
            break;
        }
    }
    expect(p0 > 0, "nonmono-dh: no satellite distance in the sweep beats delta_H(O_n0)");
    const auto run_Q = classify_all({Qp}, f, sc, 1).front();

    const json doc{{"parameters", p},
                   {"R1", {{"lo", r1.lo}, {"hi", r1.hi}}},
                   {"R", R},
                   {"measure", measure},
                   {"B_R", {{"delta_h", dh_ball}, {"run", run_json(run_B)}}},
                   {"O_n0", {{"n0", n0}, {"delta_h", dh_on}, {"measure", geom::measure(On).value}, {"run", run_json(run_On)},
                             {"sweep", chain}}},
                   {"Q_p0", {{"p0", p0}, {"Rprime", Rp}, {"r", rs}, {"delta_h", dh_qp}, {"measure", geom::measure(Qp).value},
                             {"run", run_json(run_Q)}, {"sweep", satellites}}},
                   {"verdicts", {vname(run_B), vname(run_On), vname(run_Q)}},
                   {"delta_h", {dh_ball, dh_on, dh_qp}}};
    m.write_json("nonmono_dh.json", doc);
    m.set("verdicts", doc["verdicts"]);
    m.set("delta_h", doc["delta_h"]);

    expect(dh_ball < dh_on && dh_on < dh_qp,
           "nonmono-dh: delta_H ordering fails: " + fmt(dh_ball) + ", " + fmt(dh_on) + ", " + fmt(dh_qp));
    expect(run_B.outcome.verdict == Verdict::Invasion && run_Q.outcome.verdict == Verdict::Invasion,
           "nonmono-dh: verdicts (" + vname(run_B) + ", " + vname(run_On) + ", " + vname(run_Q) +
               "), expected (Invasion, Extinction, Invasion)");
    return doc;
}

json reproduce(const std::string& recipe, const RunConfig& cfg, Manifest& m)
{
    if (recipe == "fig1") return reproduce_fig1(cfg, m);
    if (recipe == "thm1-homog") return reproduce_thm1_homog(cfg, m);
    if (recipe == "thm1-cubeball") return reproduce_thm1_cubeball(cfg, m);
    if (recipe == "nonmono-dh") return reproduce_nonmono_dh(cfg, m);
    throw ConfigError("unknown recipe '" + recipe + "'");
}

} // namespace fragrd::expcli
