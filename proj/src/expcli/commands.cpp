#include <fragrd/expcli.hpp>
#include <fragrd/geom/indices.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace fragrd::expcli {

namespace {

using nlohmann::json;

geom::IndexOptions index_options(const RunConfig& cfg)
{
    geom::IndexOptions opt;
    if (cfg.doc.contains("index")) {
        opt.h = cfg.doc["index"]["h"].get<double>();
        opt.supersampling = cfg.doc["index"]["supersampling"].get<int>();
    }
    return opt;
}

thresholds::MonotoneFamily threshold_family(const json& t)
{
    using namespace thresholds;
    const std::string name = t.value("family", std::string("ball"));
    const int dim = t.value("dim", 1);
    if (!t.contains("lo") || !t.contains("hi"))
        throw ConfigError("threshold: lo and hi are required");
    const double lo = t.at("lo").get<double>(), hi = t.at("hi").get<double>();
    if (name == "ball")
        return ball_family(dim, t.value("amplitude", 1.0), lo, hi);
    if (name == "cube")
        return cube_family(dim, lo, hi);
    if (name == "cube-ball") {
        if (!t.contains("a"))
            throw ConfigError("threshold: cube-ball family needs a");
        return cube_ball_family(dim, t.at("a").get<double>(), lo, hi);
    }
    if (name == "dilation" || name == "amplitude") {
        if (!t.contains("set"))
            throw ConfigError("threshold: " + name + " family needs a set expression");
        const auto set = geom::SetExpr::from_json(t.at("set"));
        if (name == "amplitude")
            return amplitude_family(set, lo, hi);
        Point c{};
        if (t.contains("center")) {
            const auto v = t.at("center").get<std::vector<double>>();
            for (std::size_t k = 0; k < v.size() && k < c.size(); ++k)
                c[k] = v[k];
        }
        return dilation_family(set, c, lo, hi);
    }
    throw ConfigError("threshold: unknown family '" + name + "'");
}

} // namespace

nlohmann::json cmd_indices(const RunConfig& cfg, Manifest& m)
{
    const auto set = cfg.set();
    const auto rep = geom::index_report(set, index_options(cfg));
    json doc = rep.to_json();
    if (set.dim() == 1) {
        const auto iv = geom::intervals_1d(set);
        doc["delta1_oracle"] = geom::delta1_oracle_1d(iv);
    }
    m.write_json("indices.json", doc);
    m.set("indices", doc);
    return doc;
}

nlohmann::json cmd_family(const RunConfig& cfg, Manifest& m)
{
    if (!cfg.has_set() || !cfg.doc["set"].contains("spec"))
        throw ConfigError("family: the set block needs a family spec");
    const auto spec = families::FamilySpec::from_json(cfg.doc["set"]["spec"]);
    const auto set = families::build(spec);
    const auto meas = geom::measure(set);
    json doc{{"spec", spec.to_json()}, {"expr", set.to_json()}, {"measure", meas.value},
             {"measure_error", meas.error}, {"measure_exact", meas.exact}};
    if (const auto cf = families::closed_form_measure(spec))
        doc["closed_form_measure"] = *cf;
    m.write_json("family.json", doc);
    m.set("family", {{"measure", meas.value}, {"closed_form_measure", doc.value("closed_form_measure", json())}});
    return doc;
}

nlohmann::json cmd_simulate(const RunConfig& cfg, Manifest& m)
{
    const auto set = cfg.set();
    rd::SolverConfig sc = cfg.solver;
    sc.stop_at_certificate = false;
    if (sc.snapshot_times.empty())
        sc.snapshot_times = {0.0, sc.T_max};
    const auto o = rd::classify(set, cfg.amplitude(), cfg.reaction, sc);
    for (const auto& p : rd::write_snapshots(m.out(), "snapshot", o.trajectory))
        m.add_file(p);
    const json doc = o.to_json(true);
    m.write_json("simulation.json", doc);
    m.set("verdict", doc["verdict"]);
    return doc;
}

nlohmann::json cmd_classify(const RunConfig& cfg, Manifest& m)
{
    const auto o = rd::classify(cfg.set(), cfg.amplitude(), cfg.reaction, cfg.solver);
    const json doc = o.to_json(false);
    m.write_json("verdict.json", doc);
    m.set("verdict", doc["verdict"]);
    return doc;
}

nlohmann::json cmd_threshold(const RunConfig& cfg, Manifest& m)
{
    if (!cfg.doc.contains("threshold"))
        throw ConfigError("threshold: config needs a threshold block");
    const json& t = cfg.doc["threshold"];
    const auto family = threshold_family(t);
    thresholds::BisectOptions opt;
    opt.tol = t.value("tol", opt.tol);
    opt.max_widen = t.value("max_widen", opt.max_widen);
    opt.max_probes = t.value("max_probes", opt.max_probes);
    opt.workers = cfg.workers;
    const auto b = thresholds::bisect(family, thresholds::make_classifier(cfg.reaction, cfg.solver), opt);
    json doc = b.to_json();
    doc["family"] = family.name;
    doc["params"] = family.params;
    // the speculative count depends on the worker count
    doc.erase("speculative");
    m.write_json("bracket.json", doc);
    m.set("bracket", {{"lo", b.lo}, {"hi", b.hi}, {"speculative", b.speculative}});
    return doc;
}

int exit_code(const std::exception& e)
{
    if (dynamic_cast<const AssertionFailure*>(&e))
        return 4;
    if (dynamic_cast<const SolverAbort*>(&e))
        return 3;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const GeometryError*>(&e))
        return 2;
    return 1;
}

int run(int argc, const char* const* argv)
{
    CLI::App app{"fragmented initial data in bistable reaction-diffusion"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, out;
    std::vector<std::string> overrides;
    int workers = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--out", out, "output directory");
    app.add_option("--override", overrides, "dotted key=value, repeatable")->take_all();
    app.add_option("--workers", workers, "threads for sweeps and bisections")->check(CLI::PositiveNumber);
    app.add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& s) { seed = s, seed_given = true; }, "random seed");

    auto* indices = app.add_subcommand("indices", "fragmentation indices of the configured set");
    auto* family = app.add_subcommand("family", "build a named family and report its measure");
    auto* simulate = app.add_subcommand("simulate", "integrate to T_max and write snapshots");
    auto* classify = app.add_subcommand("classify", "extinction / invasion verdict");
    auto* threshold = app.add_subcommand("threshold", "bisect a monotone family");
    auto* repro = app.add_subcommand("reproduce", "run a reproduction recipe");
    std::string recipe;
    repro->add_option("recipe", recipe, "fig1 | thm1-homog | thm1-cubeball | nonmono-dh")
        ->required()
        ->check(CLI::IsMember({"fig1", "thm1-homog", "thm1-cubeball", "nonmono-dh"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    std::optional<Manifest> m;
    try {
        if (!out.empty())
            overrides.push_back("out=\"" + out + "\"");
        if (workers > 0)
            overrides.push_back("workers=" + std::to_string(workers));
        if (seed_given)
            overrides.push_back("seed=" + std::to_string(seed));
        if (*repro)
            overrides.insert(overrides.begin(), "experiment.recipe=\"" + recipe + "\"");
        const RunConfig cfg = load_config_file(config_path, overrides);

        std::string name;
        for (auto* sub : app.get_subcommands())
            name = sub->get_name();
        if (*repro)
            name += " " + recipe;
        m.emplace(name, cfg);
        if (*indices) cmd_indices(cfg, *m);
        else if (*family) cmd_family(cfg, *m);
        else if (*simulate) cmd_simulate(cfg, *m);
        else if (*classify) cmd_classify(cfg, *m);
        else if (*threshold) cmd_threshold(cfg, *m);
        else reproduce(recipe, cfg, *m);
        const auto path = m->finish();
        std::cout << "wrote " << path.string() << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "fragrd: " << e.what() << '\n';
        const int code = exit_code(e);
        if (m) {
            try {
                m->set("error", {{"message", e.what()}, {"exit_code", code}});
                m->finish();
            } catch (const std::exception&) {
            }
        }
        return code;
    }
}

} // namespace fragrd::expcli
