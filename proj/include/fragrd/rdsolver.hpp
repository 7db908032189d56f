#pragma once

#include <fragrd/geom/raster.hpp>
#include <fragrd/reaction.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fragrd::rd {

using geom::Grid;
using geom::SetExpr;

/// Density u on the solver lattice at time t (N = 1 or 2).
struct Field {
    Grid grid;
    std::vector<double> u;
    double t = 0.0;

    double sup() const;
    double inf() const;
    /// Sum of u h^N (compensated).
    double mass() const;
    Point center_of_mass() const;
};

enum class Scheme { Explicit, SemiImplicit };
enum class Verdict { Extinction, Invasion, Undecided };

std::string scheme_name(Scheme s);
std::string verdict_name(Verdict v);
Verdict parse_verdict(const std::string& name);

struct SolverConfig {
    Scheme scheme = Scheme::SemiImplicit;
    double h = 0.05;
    double dt = 0.0;       // 0 = default for the scheme
    double L_dom = 0.0;    // domain half-width around the set center; 0 = smallest admissible
    double T_max = 200.0;
    double check_interval = 1.0;     // spacing of certificate checks / history records
    std::vector<double> snapshot_times;
    double extinction_margin = 0.05;
    double invasion_radius = 1.0;    // r_w
    double invasion_level = 0.95;
    int window = 20;                 // W
    double front_level = 0.5;
    double boundary_margin = 0.0;    // 0 = 5 diffusion lengths
    bool small_mass_shortcut = true;
    bool reaction = true;            // false runs the heat equation (diagnostics)
    int supersampling = 8;
    bool stop_at_certificate = true; // false keeps integrating to T_max (front-speed runs)

    nlohmann::json to_json() const;
    static SolverConfig from_json(const nlohmann::json& doc);
    /// Range and scheme checks that do not depend on the initial set.
    void validate(const BistableReaction& f, int dim) const;
};

/// 1 / sqrt(M'), the length scale of the reaction-diffusion front.
double diffusion_length(const BistableReaction& f);
/// Smallest admissible half-width: set extent + c T_max + 10 diffusion lengths.
double required_half_width(double set_half_extent, const BistableReaction& f, const SolverConfig& cfg);
double resolved_dt(const BistableReaction& f, const SolverConfig& cfg, int dim);

/// Solver lattice around a set: per axis, the set's half-extent plus the
/// buffer (or L_dom when it is larger). Throws ConfigError when an explicit
/// L_dom is too small.
Grid solver_grid(const geom::Bounds& set_bounds, int dim, const BistableReaction& f, const SolverConfig& cfg);

/// u0 = amplitude x coverage of the set on `grid`.
Field init_field(const SetExpr& set, double amplitude, const Grid& grid, const SolverConfig& cfg);
Field init_field(const SetExpr& set, double amplitude, const BistableReaction& f, const SolverConfig& cfg);
Field init_field(const geom::RasterSet& set, double amplitude, const Grid& grid, const SolverConfig& cfg);

using Forcing = std::function<double(const Point&, double)>;

/// Time integrator bound to one grid. Explicit Euler or Lie splitting of
/// backward-Euler diffusion (one tridiagonal solve per axis) with an explicit
/// reaction step. Both are monotone for the default dt.
class Stepper {
public:
    Stepper(const Grid& grid, const BistableReaction& f, const SolverConfig& cfg);

    double dt() const { return dt_; }
    /// Advances by dt (or by `dt_override` when positive and smaller).
    /// Throws SolverAbort if any value leaves [-1e-12, 1 + 1e-12].
    void step(Field& field, double dt_override = 0.0, const Forcing* forcing = nullptr);

private:
    struct Tridiagonal {
        double r = -1.0;
        std::vector<double> cp;
        std::vector<double> inv;
    };
    const Tridiagonal& factors(int axis, double r);
    void explicit_step(Field& field, double dt, const Forcing* forcing);
    void implicit_diffusion(Field& field, double dt);
    void reaction_step(Field& field, double dt, const Forcing* forcing);

    Grid grid_;
    const BistableReaction* f_;
    SolverConfig cfg_;
    double dt_;
    std::array<Tridiagonal, 2> tri_;
    std::vector<double> scratch_;
};

inline constexpr double kRangeSlack = 1e-12;

void step(Field& field, const BistableReaction& f, const SolverConfig& cfg);

/// Outermost crossing of `level` along the grid axes through `center`,
/// linearly interpolated between cell centers; 0 if sup u < level.
double front_radius(const Field& field, double level, const Point& center);

struct Snapshot {
    double t = 0.0;
    Field field;
};

struct Trajectory {
    std::vector<Snapshot> snapshots;
    nlohmann::json manifest;
};

struct Outcome {
    Verdict verdict = Verdict::Undecided;
    double certificate_time = 0.0;
    bool shortcut = false;        // small-mass certificate, no simulation
    double initial_measure = 0.0;
    Point center{};
    long steps = 0;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<double> sup_history;
    std::vector<double> radius_history;
    std::vector<double> core_history;
    Trajectory trajectory;
    nlohmann::json diagnostics;   // closest-certificate quantities

    nlohmann::json to_json(bool with_history = true) const;
};

/// Runs until a certificate fires or T_max. Extinction: sup u <= theta (1 -
/// margin). Invasion: min u on B_{r_w}(center of mass of u0) >= level and the
/// front radius increased at each of the last W checks. Throws DomainTooSmall
/// when u >= front_level within the boundary margin.
Outcome classify(const SetExpr& set, double amplitude, const BistableReaction& f, const SolverConfig& cfg);
Outcome classify(Field u0, const BistableReaction& f, const SolverConfig& cfg, double initial_measure = -1.0);

/// Least-squares slope of the front radius over the history, after dropping
/// the first `discard` fraction of records.
double front_speed(const Outcome& run, double discard = 0.25);
double front_speed(const std::vector<double>& times, const std::vector<double>& radii, double discard = 0.25);

struct Comparison {
    bool ordered = true;
    double max_violation = 0.0;   // max of u_small - u_large over checks
    int checks = 0;
};

/// Integrates both fields in lockstep to T and checks u_small <= u_large +
/// 1e-10 at every check interval.
Comparison compare_runs(Field small, Field large, const BistableReaction& f, const SolverConfig& cfg, double T);

/// 1-D: CSV t,x,u with one block per snapshot. 2-D: binary grid dump per
/// snapshot plus index.csv (t,file). Returns the files written.
std::vector<std::filesystem::path> write_snapshots(const std::filesystem::path& dir, const std::string& stem,
                                                   const Trajectory& trajectory);

} // namespace fragrd::rd
