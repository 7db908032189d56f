#include <fragrd/expcli.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace fragrd::expcli {

namespace {

using nlohmann::json;

double wall_seconds()
{
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

void check_keys(const json& block, const std::string& where, const std::set<std::string>& allowed)
{
    if (!block.is_object())
        throw ConfigError(where + " must be an object");
    for (const auto& [key, v] : block.items())
        if (!allowed.count(key))
            throw ConfigError(where + ": unknown field '" + key + "'");
}

} // namespace

geom::SetExpr RunConfig::set() const
{
    if (!has_set())
        throw ConfigError("config: this command needs a set block");
    const json& s = doc.at("set");
    if (s.contains("expr"))
        return geom::SetExpr::from_json(s.at("expr"));
    return families::build(families::FamilySpec::from_json(s.at("spec")));
}

double RunConfig::amplitude() const
{
    return has_set() ? doc.at("set").value("amplitude", 1.0) : 1.0;
}

int RunConfig::dim() const
{
    return set().dim();
}

const json& RunConfig::experiment() const
{
    return doc.at("experiment");
}

void apply_override(json& doc, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override '" + assignment + "' is not key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded())
        value = text;

    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty())
            throw ConfigError("override '" + assignment + "' has an empty path component");
        if (node->is_null())
            *node = json::object();
        if (!node->is_object())
            throw ConfigError("override '" + assignment + "': '" + part + "' is below a non-object");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

RunConfig load_config(json doc)
{
    if (doc.is_null())
        doc = json::object();
    check_keys(doc, "config",
               {"reaction", "solver", "set", "index", "threshold", "experiment", "out", "seed", "workers"});
    RunConfig c;
    try {
        if (doc.contains("reaction"))
            c.reaction = BistableReaction::from_json(doc.at("reaction"));
        c.solver = rd::SolverConfig::from_json(doc.value("solver", json::object()));
        c.out = doc.value("out", std::string("fragrd-out"));
        c.seed = doc.value("seed", std::uint64_t{1});
        c.workers = doc.value("workers", 1);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (c.workers < 1)
        throw ConfigError("config: workers must be >= 1");

    json canon = json::object();
    canon["reaction"] = c.reaction.to_json();
    canon["solver"] = c.solver.to_json();
    canon["out"] = c.out.string();
    canon["seed"] = c.seed;
    canon["workers"] = c.workers;

    if (doc.contains("set")) {
        const json& s = doc.at("set");
        check_keys(s, "set", {"expr", "spec", "amplitude"});
        if (s.contains("expr") == s.contains("spec"))
            throw ConfigError("set: give exactly one of 'expr' and 'spec'");
        json cs = json::object();
        geom::SetExpr e;
        if (s.contains("expr")) {
            e = geom::SetExpr::from_json(s.at("expr"));
            cs["expr"] = e.to_json();
        } else {
            const auto spec = families::FamilySpec::from_json(s.at("spec"));
            e = families::build(spec);
            cs["spec"] = spec.to_json();
        }
        const double amp = s.value("amplitude", 1.0);
        if (!(amp > 0.0 && amp <= 1.0))
            throw ConfigError("set: amplitude must lie in (0,1]");
        cs["amplitude"] = amp;
        canon["set"] = cs;
        if (e.dim() <= 2)
            c.solver.validate(c.reaction, e.dim());
    }
    if (doc.contains("index")) {
        check_keys(doc.at("index"), "index", {"h", "supersampling"});
        json ci{{"h", doc.at("index").value("h", 0.0)}, {"supersampling", doc.at("index").value("supersampling", 8)}};
        if (ci["h"].get<double>() < 0 || ci["supersampling"].get<int>() < 1)
            throw ConfigError("index: h must be >= 0 and supersampling >= 1");
        canon["index"] = ci;
    }
    if (doc.contains("threshold")) {
        const json& t = doc.at("threshold");
        check_keys(t, "threshold",
                   {"family", "dim", "amplitude", "a", "set", "center", "lo", "hi", "tol", "max_widen", "max_probes"});
        canon["threshold"] = t;
    }
    if (doc.contains("experiment")) {
        const json& x = doc.at("experiment");
        if (!x.is_object() || !x.contains("recipe"))
            throw ConfigError("experiment block needs a recipe id");
        json merged = recipe_defaults(x.at("recipe").get<std::string>());
        for (const auto& [key, v] : x.items()) {
            if (!merged.contains(key))
                throw ConfigError("experiment: unknown field '" + key + "' for recipe " + merged["recipe"].get<std::string>());
            if (key == "solver") {
                check_keys(v, "experiment.solver", [&] {
                    std::set<std::string> k;
                    const json fields = rd::SolverConfig{}.to_json();
                    for (const auto& [name, unused] : fields.items())
                        k.insert(name);
                    return k;
                }());
                merged[key].update(v);
            } else {
                merged[key] = v;
            }
        }
        canon["experiment"] = merged;
    }
    c.doc = std::move(canon);
    return c;
}

RunConfig load_config_file(const std::filesystem::path& path, const std::vector<std::string>& overrides)
{
    json doc = json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot read config " + path.string());
        doc = json::parse(in, nullptr, false);
        if (doc.is_discarded())
            throw ConfigError("config " + path.string() + " is not valid JSON");
    }
    for (const auto& o : overrides)
        apply_override(doc, o);
    return load_config(std::move(doc));
}

std::string fnv1a_hex(const std::string& bytes)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string config_hash(const json& doc)
{
    // output location and thread count do not change any result
    json d = doc;
    d.erase("out");
    d.erase("workers");
    return fnv1a_hex(d.dump());
}

Manifest::Manifest(std::string command, const RunConfig& cfg) : out_(cfg.out), start_(wall_seconds())
{
    doc_ = {{"command", std::move(command)},
            {"tool_version", kToolVersion},
            {"config_hash", config_hash(cfg.doc)},
            {"config", cfg.doc},
            {"results", json::object()},
            {"files", json::array()}};
    std::filesystem::create_directories(out_);
}

std::filesystem::path Manifest::write_json(const std::string& name, const json& doc)
{
    const auto path = out_ / name;
    std::ofstream os(path);
    if (!os)
        throw Error("cannot write " + path.string());
    os << doc.dump(2) << '\n';
    os.close();
    add_file(path);
    return path;
}

void Manifest::add_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();
    const auto rel = std::filesystem::relative(path, out_).generic_string();
    for (auto& f : doc_["files"])
        if (f["path"] == rel) {
            f["bytes"] = bytes.size();
            f["fnv1a"] = fnv1a_hex(bytes);
            return;
        }
    doc_["files"].push_back({{"path", rel}, {"bytes", bytes.size()}, {"fnv1a", fnv1a_hex(bytes)}});
}

void Manifest::set(const std::string& key, json value)
{
    doc_["results"][key] = std::move(value);
}

std::filesystem::path Manifest::finish()
{
    doc_["wall_clock_s"] = wall_seconds() - start_;
    const auto path = out_ / "manifest.json";
    std::ofstream os(path);
    if (!os)
        throw Error("cannot write " + path.string());
    os << doc_.dump(2) << '\n';
    return path;
}

} // namespace fragrd::expcli
