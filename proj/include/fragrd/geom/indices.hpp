#pragma once

#include <fragrd/geom/raster.hpp>

#include <utility>
#include <vector>

namespace fragrd::geom {

struct EnclosingBall {
    Point center{};
    double radius = 0.0;
};

/// Location and value of an optimized index.
struct IndexValue {
    double value = 0.0;
    Point center{};
};

struct IndexOptions {
    double h = 0.0;          // cell size; <= 0 selects default_index_h
    int supersampling = 8;   // subsamples per cell edge when rasterizing
    int starts = 4;          // pattern-search starts taken from the coarse grid
    int kernel_subsamples = 8; // subsamples per edge for cell-in-ball fractions (N >= 2)
    int coarse_per_axis = 0; // deltaH coarse candidates per axis; 0 = by dimension
};

struct IndexReport {
    int dim = 1;
    double h = 0.0;
    double measure = 0.0;
    double r_e = 0.0;
    double rho_e = 0.0;
    Point x_e{};
    double diameter = 0.0;
    double delta1 = 0.0;
    Point delta1_center{};
    double delta_h = 0.0;
    Point delta_h_center{};

    nlohmann::json to_json() const;
};

/// Smallest ball containing a point cloud (move-to-front Welzl).
EnclosingBall min_enclosing_ball(std::vector<Point> points, int dim);

/// Occupied cell centers that can realize a maximal distance: line extremes,
/// reduced to convex-hull vertices in N = 2 (per plane in N = 3).
std::vector<Point> extreme_centers(const RasterSet& r);

EnclosingBall enclosing_ball(const RasterSet& r);
double essential_diameter(const RasterSet& r);

/// delta_1 = 1 - max_x overlap(E, B_{R_E}(x)) / lambda(E); center is the maximizer.
IndexValue delta1(const RasterSet& r, const IndexOptions& opt = {});
/// delta_H = min_x d_H(E, B_{R_E}(x)) / (rho_E + R_E); center is the minimizer.
IndexValue deltaH(const RasterSet& r, const IndexOptions& opt = {});

/// Exact delta_1 of a finite union of sorted disjoint open intervals.
double delta1_oracle_1d(const std::vector<std::pair<double, double>>& intervals);
/// Window center realizing the oracle maximum (smallest one on ties).
double delta1_oracle_1d_center(const std::vector<std::pair<double, double>>& intervals);

/// Resolution used when none is given: a fixed fraction of R_E per dimension.
double default_index_h(const SetExpr& expr);
double default_index_h(double r_e, int dim);

RasterSet index_raster(const SetExpr& expr, const IndexOptions& opt = {});

IndexReport index_report(const RasterSet& r, const IndexOptions& opt = {});
IndexReport index_report(const SetExpr& expr, const IndexOptions& opt = {});

/// Raster tolerance 3h / min(R_E, 1) used by the property checks.
double raster_tolerance(double h, double r_e);

} // namespace fragrd::geom
