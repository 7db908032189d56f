#pragma once

#include <fragrd/geom/set_expr.hpp>

#include <optional>
#include <string>
#include <vector>

namespace fragrd::families {

using geom::SetExpr;

enum class FamilyTag { En, Fn, Gn, Dn_a, On, Qp, Hn, Cube, CubeBall, Shell, Interval, BallSet };

std::string tag_name(FamilyTag tag);
FamilyTag parse_tag(const std::string& name);

/// Parameters of a named family. Each family reads only the fields it needs:
///   En: dim, n                       Fn: dim, n, nu
///   Gn: dim, n, x, y                 Dn_a: a, r (N = 1)
///   On: dim, n, R, e                 Qp: dim, Rprime, r, x (satellite center)
///   Hn: dim, n, alpha, beta, R, Rprime, anchor (optional)
///   Cube: dim, a, center             CubeBall: dim, a, r, center
///   Shell: dim, a                    Interval: lo, hi (N = 1)
///   BallSet: dim, centers, radii
struct FamilySpec {
    FamilyTag tag = FamilyTag::BallSet;
    int dim = 1;
    int n = 1;
    double nu = 0.5;
    double alpha = 0.75;
    double beta = 0.8;
    double R = 1.0;
    double Rprime = 0.5;
    double a = 1.0;
    double r = 1.0;
    double lo = 0.0;
    double hi = 1.0;
    Point x{};
    Point y{};
    Point e{1.0, 0.0, 0.0};
    Point center{};
    std::optional<Point> anchor;
    std::vector<Point> centers;
    std::vector<double> radii;

    nlohmann::json to_json() const;
    static FamilySpec from_json(const nlohmann::json& doc);
};

SetExpr build(const FamilySpec& spec);

/// Measure of the built set from its defining formula (lattice count times
/// piece measure, or primitive measure), when the pieces are disjoint.
std::optional<double> closed_form_measure(const FamilySpec& spec);

/// Integer points of Z^N strictly inside the ball of radius `radius` (scanned).
std::vector<std::array<long, 3>> lattice_points_in_ball(int dim, double radius);

/// 2k+1 intervals of length alpha/z centered at x/z, x = -k..k.
SetExpr fig1_E2(double alpha, double z, int k);

struct HomogenizationPair {
    SetExpr F;
    SetExpr G;
    SetExpr H;
    double rho_n = 0.0;
    Point anchor{};
    double measure_F = 0.0;
    double measure_G = 0.0;
    double measure_H = 0.0;
    nlohmann::json gap_report;
};

/// Fragmented pair of the homogenization construction: F (side alpha^{1/N}/n
/// cubes on the lattice Z^N/n inside B_R), G (side beta^{1/N}/n inside B_R'),
/// and H = G plus a far ball of radius rho_n restoring the measure of F.
HomogenizationPair thm1_homogenization(int dim, double alpha, double beta, double R, double Rprime, int n,
                                       std::optional<Point> far_anchor = std::nullopt, double theta = 0.0);

struct CubeBallPair {
    SetExpr E1;
    SetExpr E2;
    SetExpr C; // cube-ball part of E2
    double r = 0.0;
    double eta = 0.0;
    double side_E1 = 0.0;
    double side_C = 0.0;
    double side_Qx = 0.0;
    Point anchor{};
    nlohmann::json report;
};

/// Cube / cube-ball pair: E1 = Q_{a*+eta eps*}, E2 = C_{a*+beta eps*, r} plus a
/// far cube Q^x, r = sigma (a*+beta eps*). eta <= 0 selects the admissible
/// eta in (0, beta) closest to beta.
CubeBallPair thm1_cubeball(int dim, double a_star, double eps_star, double sigma, double beta, double eta = 0.0,
                           std::optional<Point> far_anchor = std::nullopt);

/// Lebesgue measure of Q_a intersected with the concentric ball B_r (N = 2 closed form).
double cube_ball_measure(int dim, double a, double r);

} // namespace fragrd::families
