#pragma once

#include <fragrd/geom/set_expr.hpp>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace fragrd::geom {

/// Uniform cell lattice. Cell k along an axis spans [k h, (k+1) h), so two
/// grids with the same h always share cell boundaries. Storage is row-major
/// with axis 0 slowest; unused axes have extent 1.
struct Grid {
    int dim = 1;
    double h = 0.0;
    std::array<std::int64_t, kMaxDim> first{0, 0, 0};
    std::array<std::int64_t, kMaxDim> extents{1, 1, 1};

    std::size_t size() const;
    std::array<std::size_t, kMaxDim> strides() const;

    double cell_lo(int axis, std::int64_t local) const { return (first[axis] + local) * h; }
    double cell_center(int axis, std::int64_t local) const { return (first[axis] + local + 0.5) * h; }

    std::array<std::int64_t, kMaxDim> unflatten(std::size_t flat) const;
    std::size_t flatten(const std::array<std::int64_t, kMaxDim>& local) const;
    Point center(std::size_t flat) const;
    Bounds bounds() const;

    /// Same dimension and cell size, so the lattices coincide.
    bool compatible(const Grid& other) const;
    /// `other` is compatible and lies entirely inside this grid.
    bool contains(const Grid& other) const;
    Grid padded(std::int64_t cells) const;
    /// Pads each axis independently.
    Grid padded(const std::array<std::int64_t, kMaxDim>& cells) const;

    /// Cells covering `b` plus one padding ring.
    static Grid covering(const Bounds& b, double h, int dim);
    /// Smallest grid containing two compatible grids.
    static Grid merged(const Grid& a, const Grid& b);
};

/// Indicator of a set sampled on a grid. Coverage is the fraction of each
/// cell inside the set; occupancy (coverage >= 1/2) is used for distances.
struct RasterSet {
    Grid grid;
    int supersampling = 1;
    std::vector<double> coverage;
    std::size_t mixed_cells = 0;

    bool occupied(std::size_t i) const { return coverage[i] >= 0.5; }
    std::size_t occupied_count() const;
    double measure() const;
    /// Bound on the measure error from cells cut by the boundary.
    double measure_error() const;
    std::vector<std::uint8_t> occupancy() const;
};

struct MeasureResult {
    double value = 0.0;
    double error = 0.0;
    bool exact = false;
};

RasterSet rasterize(const SetExpr& expr, double h, int supersampling = 8);
RasterSet rasterize_on(const SetExpr& expr, const Grid& grid, int supersampling = 8);

/// Copies the raster into a larger compatible grid (zero coverage elsewhere).
RasterSet resample(const RasterSet& r, const Grid& target);

/// Exact for N = 1 and for disjoint unions of balls, boxes and (N = 2)
/// ball-box intersections; otherwise a supersampled raster at cell size h
/// (h <= 0 picks 1/400 of the smallest bounding-box side).
MeasureResult measure(const SetExpr& expr, double h = 0.0);
double measure(const RasterSet& r);

/// Sorted disjoint open intervals of a 1-D set (touching intervals merged).
std::vector<std::pair<double, double>> intervals_1d(const SetExpr& expr);

/// Measure of the symmetric difference.
double d1(const RasterSet& a, const RasterSet& b);
double d1(const SetExpr& a, const SetExpr& b, double h = 0.0);

/// Essential Hausdorff distance between occupancies; +inf when exactly one
/// side is negligible, 0 when both are.
double essential_hausdorff(const RasterSet& a, const RasterSet& b);
double essential_hausdorff(const SetExpr& a, const SetExpr& b, double h);

/// Binary dump: text header line then row-major little-endian doubles.
void write_raster(const std::filesystem::path& path, const RasterSet& r);
RasterSet read_raster(const std::filesystem::path& path);
/// CSV with columns x[,y[,z]],coverage for cells with nonzero coverage.
void write_raster_csv(const std::filesystem::path& path, const RasterSet& r);

} // namespace fragrd::geom
