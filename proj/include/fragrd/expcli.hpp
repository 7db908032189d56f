#pragma once

#include <fragrd/families.hpp>
#include <fragrd/thresholds.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fragrd::expcli {

inline constexpr const char* kToolVersion = "0.3.0";

/// Validated run configuration. Blocks that a command does not use may be
/// absent; the raw document is kept for hashing and the manifest.
struct RunConfig {
    nlohmann::json doc;  // canonical: every key explicit after load
    BistableReaction reaction = BistableReaction::cubic(0.4);
    rd::SolverConfig solver;
    std::filesystem::path out = "fragrd-out";
    std::uint64_t seed = 1;
    int workers = 1;

    bool has_set() const { return doc.contains("set"); }
    /// Inline SetExpr document or FamilySpec in the set block.
    geom::SetExpr set() const;
    double amplitude() const;
    int dim() const;
    const nlohmann::json& experiment() const;
};

/// Parses `key=value` with a dotted key. The value is read as JSON when it
/// parses, as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Fills defaults, checks the schema (unknown top-level keys and unknown
/// fields are errors) and the cross-field solver constraints.
RunConfig load_config(nlohmann::json doc);
RunConfig load_config_file(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// FNV-1a 64 of the compact dump of a document, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);
std::string config_hash(const nlohmann::json& doc);

/// Record of one invocation: every file written goes through it.
class Manifest {
public:
    Manifest(std::string command, const RunConfig& cfg);

    /// Writes `doc` (pretty, 17 significant digits preserved) to out/name.
    std::filesystem::path write_json(const std::string& name, const nlohmann::json& doc);
    void add_file(const std::filesystem::path& path);
    void set(const std::string& key, nlohmann::json value);
    /// Writes out/manifest.json with the inventory and wall-clock.
    std::filesystem::path finish();

    const std::filesystem::path& out() const { return out_; }
    const nlohmann::json& doc() const { return doc_; }

private:
    std::filesystem::path out_;
    nlohmann::json doc_;
    double start_;
};

/// Recipe defaults with their frozen parameters and discovery log.
nlohmann::json recipe_defaults(const std::string& recipe);

// Subcommands. Each returns the main result document and records its files
// in the manifest.
nlohmann::json cmd_indices(const RunConfig& cfg, Manifest& m);
nlohmann::json cmd_family(const RunConfig& cfg, Manifest& m);
nlohmann::json cmd_simulate(const RunConfig& cfg, Manifest& m);
nlohmann::json cmd_classify(const RunConfig& cfg, Manifest& m);
nlohmann::json cmd_threshold(const RunConfig& cfg, Manifest& m);

nlohmann::json reproduce_fig1(const RunConfig& cfg, Manifest& m);
nlohmann::json reproduce_thm1_homog(const RunConfig& cfg, Manifest& m);
nlohmann::json reproduce_thm1_cubeball(const RunConfig& cfg, Manifest& m);
nlohmann::json reproduce_nonmono_dh(const RunConfig& cfg, Manifest& m);
nlohmann::json reproduce(const std::string& recipe, const RunConfig& cfg, Manifest& m);

/// Fixed-measure rescaling mu E_n, mu = (m / lambda(E_n))^{1/N}.
geom::SetExpr rescaled_En(int dim, int n, double measure);

/// 0 ok, 2 config, 3 solver abort, 4 recipe assertion, 1 anything else.
int exit_code(const std::exception& e);

/// Full command line entry point; never throws.
int run(int argc, const char* const* argv);

} // namespace fragrd::expcli
