#pragma once

#include <fragrd/rdsolver.hpp>

#include <functional>
#include <string>
#include <vector>

namespace fragrd::thresholds {

using geom::SetExpr;
using rd::Verdict;

/// Initial indicator amplitude x 1_set.
struct InitialData {
    SetExpr set;
    double amplitude = 1.0;
};

/// sigma -> initial data, pointwise nondecreasing in sigma on [lo, hi].
/// `floor` bounds widening from below (the family is undefined at or below it).
struct MonotoneFamily {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    double floor = 0.0;
    std::function<InitialData(double)> generator;
    nlohmann::json params;
};

MonotoneFamily ball_family(int dim, double amplitude, double lo, double hi);
/// Side-length family of centered cubes Q_sigma.
MonotoneFamily cube_family(int dim, double lo, double hi);
/// r -> Q_a intersected with B_r; equals Q_a once r >= a sqrt(N)/2.
MonotoneFamily cube_ball_family(int dim, double a, double lo, double hi);
/// mu -> mu (E - center) + center for E star-shaped with respect to `center`.
MonotoneFamily dilation_family(const SetExpr& set, const Point& center, double lo, double hi);
/// alpha -> alpha 1_E.
MonotoneFamily amplitude_family(const SetExpr& set, double lo, double hi);

/// Checks generator(s_i) <= generator(s_{i+1}) on `pairs` consecutive sample
/// pairs by raster inclusion of the supersampled coverage.
bool spot_check_monotone(const MonotoneFamily& family, int pairs = 5, double h = 0.0);

struct Probe {
    double sigma = 0.0;
    Verdict verdict = Verdict::Undecided;
    double certificate_time = 0.0;
    std::string error;

    nlohmann::json to_json() const;
};

using Classifier = std::function<rd::Outcome(const InitialData&)>;
Classifier make_classifier(const BistableReaction& f, const rd::SolverConfig& cfg);

struct BisectOptions {
    double tol = 1e-2;
    int max_widen = 6;
    int max_probes = 200;
    int workers = 1;        // > 1 evaluates the quarter points speculatively
    bool check_monotone = true;
};

struct ThresholdBracket {
    double lo = 0.0;         // Extinction-certified
    double hi = 0.0;         // Invasion-certified
    std::vector<double> undecided;
    double tolerance = 0.0;  // achieved hi - lo
    bool stalled = false;
    std::vector<Probe> log;  // probes in decision order
    int speculative = 0;     // probes evaluated but never consulted

    double mid() const { return 0.5 * (lo + hi); }
    nlohmann::json to_json() const;
};

/// Deterministic memoized bisection. Endpoints are widened (up to
/// max_widen times) until lo is Extinction and hi is Invasion. Undecided
/// probes stay inside the bracket; bisection continues on the larger gap
/// beside them until both gaps are below tol/2 (a stall).
ThresholdBracket bisect(const MonotoneFamily& family, const Classifier& classify, const BisectOptions& opt);

/// Threshold r*(eps) of the family r -> C_{a*+eps, r}.
ThresholdBracket r_star(int dim, double epsilon, double a_star, const Classifier& classify, const BisectOptions& opt);

struct SweepRow {
    double sigma = 0.0;
    Verdict verdict = Verdict::Undecided;
    double certificate_time = 0.0;
    std::string error;
    nlohmann::json extra;

    nlohmann::json to_json() const;
};

/// Classifies generator(sigma) for every sigma; rows are ordered by sigma
/// whatever the completion order. Per-run errors are recorded, not thrown.
std::vector<SweepRow> sweep(std::vector<double> sigmas, const std::function<InitialData(double)>& generator,
                            const Classifier& classify, int workers = 1);

/// No Invasion below an Extinction along a sorted sweep.
bool verdicts_monotone(const std::vector<SweepRow>& rows);

/// Runs `n` jobs on up to `workers` threads (job index -> void).
void parallel_for(int n, int workers, const std::function<void(int)>& job);

} // namespace fragrd::thresholds
