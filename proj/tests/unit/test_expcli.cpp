#include <doctest.h>

#include <fragrd/expcli.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

using namespace fragrd;
using namespace fragrd::expcli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("fragrd_unit_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& p)
{
    return json::parse(slurp(p));
}

int run_args(std::vector<std::string> args)
{
    args.insert(args.begin(), "fragrd");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

json ball_set(int dim, double r)
{
    return {{"expr", geom::SetExpr::ball(dim, Point{}, r).to_json()}};
}

} // namespace

TEST_SUITE("expcli") {

TEST_CASE("dotted overrides")
{
    json doc = json::object();
    apply_override(doc, "solver.h=0.1");
    apply_override(doc, "solver.scheme=explicit");
    apply_override(doc, "experiment.extended.n_max=5");
    apply_override(doc, "set.expr={\"type\":\"ball\",\"center\":[0],\"radius\":2}");
    CHECK(doc["solver"]["h"].get<double>() == 0.1);
    CHECK(doc["solver"]["scheme"] == "explicit");
    CHECK(doc["experiment"]["extended"]["n_max"] == 5);
    CHECK(doc["set"]["expr"]["radius"] == 2);
    CHECK_THROWS_AS(apply_override(doc, "novalue"), ConfigError);
    CHECK_THROWS_AS(apply_override(doc, "a..b=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(doc, "solver.h.x=1"), ConfigError);
}

TEST_CASE("config schema and defaults")
{
    const auto c = load_config(json::object());
    CHECK(c.reaction.theta() == doctest::Approx(0.4));
    CHECK(c.doc["solver"]["h"].get<double>() == doctest::Approx(0.05));
    CHECK(c.workers == 1);
    CHECK_FALSE(c.has_set());

    CHECK_THROWS_AS(load_config({{"bogus", 1}}), ConfigError);
    CHECK_THROWS_AS(load_config({{"solver", {{"hh", 0.1}}}}), ConfigError);
    CHECK_THROWS_AS(load_config({{"set", {{"expr", ball_set(1, 1)["expr"]}, {"spec", {{"family", "En"}}}}}}), ConfigError);
    CHECK_THROWS_AS(load_config({{"set", {{"expr", ball_set(1, 1)["expr"]}, {"amplitude", 1.5}}}}), ConfigError);
    CHECK_THROWS_AS(load_config({{"experiment", {{"recipe", "nope"}}}}), ConfigError);
    CHECK_THROWS_AS(load_config({{"experiment", {{"recipe", "fig1"}, {"zz", 1}}}}), ConfigError);
    CHECK_THROWS_AS(load_config({{"experiment", {{"recipe", "fig1"}, {"solver", {{"hx", 1}}}}}}), ConfigError);
    CHECK_THROWS_AS(load_config({{"workers", 0}}), ConfigError);
    // cross-field: explicit dt above the stability bound
    CHECK_THROWS_AS(load_config({{"set", ball_set(1, 1)}, {"solver", {{"scheme", "explicit"}, {"h", 0.1}, {"dt", 1.0}}}}),
                    ConfigError);

    const auto x = load_config({{"experiment", {{"recipe", "fig1"}, {"solver", {{"h", 0.05}}}}}});
    CHECK(x.experiment()["solver"]["h"].get<double>() == 0.05);
    CHECK(x.experiment()["solver"]["scheme"] == "explicit");
    CHECK(x.experiment()["E1_length"].get<double>() == 4.55);
}

TEST_CASE("hash")
{
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a_hex("foobar") == "85944171f73967e8");

    const auto a = load_config({{"set", ball_set(1, 2)}, {"out", "x"}, {"workers", 3}});
    const auto b = load_config(json::parse(R"({"workers":1,"out":"y","set":{"expr":{"radius":2,"center":[0],"type":"ball"}}})"));
    CHECK(config_hash(a.doc) == config_hash(b.doc));
    const auto c = load_config({{"set", ball_set(1, 2.5)}});
    CHECK(config_hash(a.doc) != config_hash(c.doc));
    // the canonical document reloads to the same hash
    CHECK(config_hash(load_config(a.doc).doc) == config_hash(a.doc));
}

TEST_CASE("indices command")
{
    const auto out = scratch("indices");
    auto cfg = load_config({{"set", ball_set(2, 1.5)}, {"out", out.string()}});
    Manifest m("indices", cfg);
    const auto doc = cmd_indices(cfg, m);
    CHECK(doc["delta1"].get<double>() <= 0.02);
    CHECK(doc["deltaH"].get<double>() <= 0.02);
    m.finish();

    families::FamilySpec shell;
    shell.tag = families::FamilyTag::Shell;
    shell.dim = 2;
    shell.a = 1.0;
    cfg = load_config({{"set", {{"spec", shell.to_json()}}}, {"out", out.string()}});
    Manifest m2("indices", cfg);
    // shell of inner radius 1 and unit-ball measure: sqrt(2) - 1
    CHECK(cmd_indices(cfg, m2)["deltaH"].get<double>() == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(0.02));
}

TEST_CASE("family command")
{
    const auto out = scratch("family");
    families::FamilySpec s;
    s.tag = families::FamilyTag::Fn;
    s.dim = 2;
    s.n = 8;
    s.nu = 0.5;
    const auto cfg = load_config({{"set", {{"spec", s.to_json()}}}, {"out", out.string()}});
    Manifest m("family", cfg);
    const auto doc = cmd_family(cfg, m);
    CHECK(doc["measure"].get<double>() == doctest::Approx(doc["closed_form_measure"].get<double>()).epsilon(1e-6));
    m.finish();
    CHECK(fs::exists(out / "family.json"));
}

TEST_CASE("classify and simulate commands")
{
    const auto out = scratch("classify");
    auto cfg = load_config({{"set", {{"expr", geom::SetExpr::interval(0, 0.01).to_json()}}}, {"out", out.string()}});
    Manifest m("classify", cfg);
    const auto v = cmd_classify(cfg, m);
    CHECK(v["verdict"] == "Extinction");
    CHECK(v["shortcut"] == true);

    const auto sim_out = scratch("simulate");
    cfg = load_config({{"set", ball_set(1, 3.0)},
                       {"solver", {{"T_max", 10.0}, {"snapshot_times", {0.0, 5.0, 10.0}}}},
                       {"out", sim_out.string()}});
    Manifest ms("simulate", cfg);
    const auto s = cmd_simulate(cfg, ms);
    const auto man = read_json(ms.finish());
    CHECK(s["history"]["t"].back().get<double>() == doctest::Approx(10.0));
    bool csv = false;
    for (const auto& f : man["files"])
        csv = csv || f["path"] == "snapshot.csv";
    CHECK(csv);
    // 3 snapshots of the same lattice plus a header
    const std::string text = slurp(sim_out / "snapshot.csv");
    const auto lines = std::count(text.begin(), text.end(), '\n');
    CHECK((lines - 1) % 3 == 0);
}

TEST_CASE("threshold command is byte-deterministic")
{
    json base{{"threshold", {{"family", "ball"}, {"dim", 1}, {"lo", 1.5}, {"hi", 3.5}, {"tol", 0.02}}},
              {"solver", {{"h", 0.05}}}};
    std::string first;
    for (int workers : {1, 1, 3}) {
        const auto out = scratch("threshold" + std::to_string(workers));
        json doc = base;
        doc["out"] = out.string();
        doc["workers"] = workers;
        const auto cfg = load_config(doc);
        Manifest m("threshold", cfg);
        const auto b = cmd_threshold(cfg, m);
        CHECK(b["hi"].get<double>() - b["lo"].get<double>() <= 0.02);
        CHECK(b["lo"].get<double>() < 2.3);
        CHECK(b["hi"].get<double>() > 2.27);
        const auto man = read_json(m.finish());
        CHECK(man["config_hash"] == config_hash(load_config(man["config"]).doc));
        const std::string bytes = slurp(out / "bracket.json");
        if (first.empty())
            first = bytes;
        CHECK(bytes == first);
    }
}

TEST_CASE("command line exit codes and manifest inventory")
{
    const auto out = scratch("cli");
    CHECK(run_args({"bogus"}) == 2);
    CHECK(run_args({"classify", "--override", "solver=3", "--out", out.string()}) == 2);
    CHECK(run_args({"classify", "--out", out.string()}) == 2); // no set block

    const std::string ball = "set.expr=" + ball_set(1, 3.0)["expr"].dump();
    CHECK(run_args({"classify", "--override", ball, "--override", "solver.boundary_margin=38",
                   "--override", "solver.stop_at_certificate=false", "--out", out.string()}) == 3);
    CHECK(read_json(out / "manifest.json")["results"]["error"]["exit_code"] == 3);

    CHECK(run_args({"classify", "--override", ball, "--out", out.string()}) == 0);
    CHECK(read_json(out / "verdict.json")["verdict"] == "Invasion");

    const auto rec = scratch("cli_nonmono");
    CHECK(run_args({"reproduce", "nonmono-dh", "--out", rec.string(), "--workers", "2"}) == 0);
    const auto man = read_json(rec / "manifest.json");
    CHECK(man["command"] == "reproduce nonmono-dh");
    std::set<std::string> listed;
    for (const auto& f : man["files"]) {
        listed.insert(f["path"].get<std::string>());
        CHECK(f["fnv1a"] == fnv1a_hex(slurp(rec / f["path"].get<std::string>())));
    }
    for (const auto& entry : fs::directory_iterator(rec))
        if (entry.path().filename() != "manifest.json")
            CHECK(listed.count(entry.path().filename().string()) == 1);
    const auto res = read_json(rec / "nonmono_dh.json");
    CHECK(res["verdicts"] == json({"Invasion", "Extinction", "Invasion"}));
    CHECK(res["delta_h"][0].get<double>() < res["delta_h"][1].get<double>());
    CHECK(res["delta_h"][1].get<double>() < res["delta_h"][2].get<double>());

    // R below R_0.8: the fragmented set no longer invades
    const auto bad = scratch("cli_homog_bad");
    CHECK(run_args({"reproduce", "thm1-homog", "--override", "experiment.R=2.7", "--out", bad.string()}) == 4);
    CHECK(read_json(bad / "manifest.json")["results"]["error"]["exit_code"] == 4);
}

TEST_CASE("thm1 homogenization recipe")
{
    const auto out = scratch("homog");
    const auto cfg = load_config({{"experiment", {{"recipe", "thm1-homog"}}}, {"out", out.string()}, {"workers", 2}});
    Manifest m("reproduce thm1-homog", cfg);
    const auto doc = reproduce_thm1_homog(cfg, m);
    CHECK(doc["measure_rel_diff"].get<double>() <= 1e-3);
    CHECK(doc["E2"]["delta1"].get<double>() > 0.0);
    CHECK(doc["E2"]["delta1"].get<double>() < doc["E1"]["delta1"].get<double>());
    CHECK(doc["E1"]["delta1"].get<double>() < doc["extended"]["delta1_F"].get<double>());
    CHECK(doc["verdicts"] == json({"Invasion", "Extinction"}));
    CHECK(doc["extended"]["verdict_F"] == "Extinction");
}

TEST_CASE("fig1 snapshot schedule and early homogenization")
{
    const auto out = scratch("fig1");
    const auto cfg = load_config({{"experiment", {{"recipe", "fig1"}, {"solver", {{"h", 0.05}}}}},
                                  {"out", out.string()},
                                  {"workers", 2}});
    Manifest m("reproduce fig1", cfg);
    const auto doc = reproduce_fig1(cfg, m);
    const double alpha = 0.75;
    CHECK(std::abs(doc["E2"]["early_mean_on_hull"].get<double>() - alpha) <= 0.1);
    CHECK(doc["E2"]["delta1_oracle"].get<double>() == doctest::Approx(3.0 / 13.0).epsilon(1e-12));

    std::ifstream in(out / "fig1_E2.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,x,u");
    std::vector<double> times;
    while (std::getline(in, line)) {
        const double t = std::stod(line.substr(0, line.find(',')));
        if (times.empty() || times.back() != t)
            times.push_back(t);
    }
    std::vector<double> expected{0.0, 0.05};
    for (int k = 4; k <= 80; k += 4)
        expected.push_back(k);
    CHECK(times == expected);
}

}
