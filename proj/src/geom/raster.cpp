#include <fragrd/geom/raster.hpp>
#include <fragrd/geom/edt.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace fragrd::geom {

std::size_t Grid::size() const
{
    std::size_t n = 1;
    for (int k = 0; k < kMaxDim; ++k) n *= static_cast<std::size_t>(extents[k]);
    return n;
}

std::array<std::size_t, kMaxDim> Grid::strides() const
{
    return {static_cast<std::size_t>(extents[1] * extents[2]), static_cast<std::size_t>(extents[2]), 1};
}

std::array<std::int64_t, kMaxDim> Grid::unflatten(std::size_t flat) const
{
    const auto st = strides();
    std::array<std::int64_t, kMaxDim> out{0, 0, 0};
    for (int k = 0; k < kMaxDim; ++k) {
        out[k] = static_cast<std::int64_t>(flat / st[k]);
        flat %= st[k];
    }
    return out;
}

std::size_t Grid::flatten(const std::array<std::int64_t, kMaxDim>& local) const
{
    const auto st = strides();
    std::size_t flat = 0;
    for (int k = 0; k < kMaxDim; ++k) flat += static_cast<std::size_t>(local[k]) * st[k];
    return flat;
}

Point Grid::center(std::size_t flat) const
{
    const auto idx = unflatten(flat);
    Point p{};
    for (int k = 0; k < dim; ++k) p[k] = cell_center(k, idx[k]);
    return p;
}

Bounds Grid::bounds() const
{
    Bounds b;
    for (int k = 0; k < dim; ++k) {
        b.lo[k] = first[k] * h;
        b.hi[k] = (first[k] + extents[k]) * h;
    }
    return b;
}

bool Grid::compatible(const Grid& other) const
{
    return dim == other.dim && std::abs(h - other.h) <= 1e-12 * h;
}

bool Grid::contains(const Grid& other) const
{
    if (!compatible(other)) return false;
    for (int k = 0; k < dim; ++k) {
        if (other.first[k] < first[k]) return false;
        if (other.first[k] + other.extents[k] > first[k] + extents[k]) return false;
    }
    return true;
}

Grid Grid::padded(std::int64_t cells) const
{
    return padded(std::array<std::int64_t, kMaxDim>{cells, cells, cells});
}

Grid Grid::padded(const std::array<std::int64_t, kMaxDim>& cells) const
{
    Grid g = *this;
    for (int k = 0; k < dim; ++k) {
        g.first[k] -= cells[k];
        g.extents[k] += 2 * cells[k];
    }
    return g;
}

Grid Grid::covering(const Bounds& b, double h, int dim)
{
    check_dim(dim);
    if (!(h > 0.0) || !std::isfinite(h)) throw GeometryError("grid cell size must be positive and finite");
    Grid g;
    g.dim = dim;
    g.h = h;
    for (int k = 0; k < dim; ++k) {
        if (!std::isfinite(b.lo[k]) || !std::isfinite(b.hi[k]))
            throw GeometryError("grid bounds must be finite");
        const auto lo = static_cast<std::int64_t>(std::floor(b.lo[k] / h)) - 1;
        const auto hi = static_cast<std::int64_t>(std::ceil(b.hi[k] / h));
        g.first[k] = lo;
        g.extents[k] = hi - lo + 1;
    }
    return g;
}

Grid Grid::merged(const Grid& a, const Grid& b)
{
    if (!a.compatible(b)) throw GeometryError("rasters live on incompatible grids; re-rasterize with a common h");
    Grid g = a;
    for (int k = 0; k < a.dim; ++k) {
        const auto lo = std::min(a.first[k], b.first[k]);
        const auto hi = std::max(a.first[k] + a.extents[k], b.first[k] + b.extents[k]);
        g.first[k] = lo;
        g.extents[k] = hi - lo;
    }
    return g;
}

std::size_t RasterSet::occupied_count() const
{
    return static_cast<std::size_t>(
        std::count_if(coverage.begin(), coverage.end(), [](double c) { return c >= 0.5; }));
}

double RasterSet::measure() const
{
    // Compensated sum keeps large rasters reproducible to the last bits.
    double sum = 0.0, comp = 0.0;
    for (double c : coverage) {
        const double y = c - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum * std::pow(grid.h, grid.dim);
}

double RasterSet::measure_error() const { return static_cast<double>(mixed_cells) * std::pow(grid.h, grid.dim); }

std::vector<std::uint8_t> RasterSet::occupancy() const
{
    std::vector<std::uint8_t> occ(coverage.size());
    for (std::size_t i = 0; i < coverage.size(); ++i) occ[i] = coverage[i] >= 0.5 ? 1 : 0;
    return occ;
}

double measure(const RasterSet& r) { return r.measure(); }

namespace {

struct Rasterizer {
    const SetExpr& expr;
    const Grid& grid;
    int s;
    RasterSet& out;
    std::array<std::size_t, kMaxDim> st;

    Bounds block_bounds(const std::array<std::int64_t, kMaxDim>& lo, const std::array<std::int64_t, kMaxDim>& hi) const
    {
        Bounds b;
        for (int k = 0; k < grid.dim; ++k) {
            b.lo[k] = grid.cell_lo(k, lo[k]);
            b.hi[k] = grid.cell_lo(k, hi[k]);
        }
        return b;
    }

    void fill(const std::array<std::int64_t, kMaxDim>& lo, const std::array<std::int64_t, kMaxDim>& hi, double v)
    {
        for (auto i = lo[0]; i < hi[0]; ++i)
            for (auto j = lo[1]; j < hi[1]; ++j)
                for (auto l = lo[2]; l < hi[2]; ++l)
                    out.coverage[static_cast<std::size_t>(i) * st[0] + static_cast<std::size_t>(j) * st[1] +
                                 static_cast<std::size_t>(l)] = v;
    }

    double subsample(const std::array<std::int64_t, kMaxDim>& cell) const
    {
        const int n1 = s, n2 = grid.dim >= 2 ? s : 1, n3 = grid.dim >= 3 ? s : 1;
        std::size_t inside = 0;
        Point p{};
        for (int a = 0; a < n1; ++a) {
            p[0] = (grid.first[0] + cell[0] + (a + 0.5) / s) * grid.h;
            for (int b = 0; b < n2; ++b) {
                if (grid.dim >= 2) p[1] = (grid.first[1] + cell[1] + (b + 0.5) / s) * grid.h;
                for (int c = 0; c < n3; ++c) {
                    if (grid.dim >= 3) p[2] = (grid.first[2] + cell[2] + (c + 0.5) / s) * grid.h;
                    if (expr.contains(p)) ++inside;
                }
            }
        }
        return static_cast<double>(inside) / (static_cast<double>(n1) * n2 * n3);
    }

    void run(const std::array<std::int64_t, kMaxDim>& lo, const std::array<std::int64_t, kMaxDim>& hi)
    {
        const auto cls = expr.classify(block_bounds(lo, hi));
        if (cls == CellClass::Outside) return; // coverage starts at zero
        if (cls == CellClass::Inside) {
            fill(lo, hi, 1.0);
            return;
        }
        int axis = 0;
        std::int64_t widest = 0;
        for (int k = 0; k < grid.dim; ++k) {
            if (hi[k] - lo[k] > widest) {
                widest = hi[k] - lo[k];
                axis = k;
            }
        }
        if (widest == 1) {
            ++out.mixed_cells;
            out.coverage[grid.flatten(lo)] = subsample(lo);
            return;
        }
        const auto mid = lo[axis] + widest / 2;
        auto hi1 = hi;
        hi1[axis] = mid;
        auto lo2 = lo;
        lo2[axis] = mid;
        run(lo, hi1);
        run(lo2, hi);
    }
};

} // namespace

RasterSet rasterize_on(const SetExpr& expr, const Grid& grid, int supersampling)
{
    if (expr.dim() != grid.dim) throw GeometryError("rasterize: set and grid dimensions differ");
    if (supersampling < 1) throw ConfigError("rasterize: supersampling must be >= 1");
    RasterSet out;
    out.grid = grid;
    out.supersampling = supersampling;
    out.coverage.assign(grid.size(), 0.0);
    Rasterizer r{expr, grid, supersampling, out, grid.strides()};
    std::array<std::int64_t, kMaxDim> lo{0, 0, 0};
    r.run(lo, grid.extents);
    return out;
}

RasterSet rasterize(const SetExpr& expr, double h, int supersampling)
{
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("rasterize: h must be positive");
    const Bounds b = expr.bounding_box();
    for (int k = 0; k < expr.dim(); ++k)
        if (!std::isfinite(b.lo[k]) || !std::isfinite(b.hi[k]))
            throw GeometryError("rasterize: bounding box is not finite");
    if (b.empty(expr.dim())) throw GeometryError("rasterize: set is empty");
    double smallest = std::numeric_limits<double>::infinity();
    for (int k = 0; k < expr.dim(); ++k) smallest = std::min(smallest, b.extent(k));
    if (h > smallest)
        throw GeometryError("rasterize: cell size exceeds the bounding-box extent (degenerate raster)");
    return rasterize_on(expr, Grid::covering(b, h, expr.dim()), supersampling);
}

RasterSet resample(const RasterSet& r, const Grid& target)
{
    if (!target.contains(r.grid)) throw GeometryError("resample: target grid does not contain the raster");
    RasterSet out;
    out.grid = target;
    out.supersampling = r.supersampling;
    out.mixed_cells = r.mixed_cells;
    out.coverage.assign(target.size(), 0.0);
    const auto& g = r.grid;
    std::array<std::int64_t, kMaxDim> off{0, 0, 0};
    for (int k = 0; k < g.dim; ++k) off[k] = g.first[k] - target.first[k];
    for (std::int64_t i = 0; i < g.extents[0]; ++i)
        for (std::int64_t j = 0; j < g.extents[1]; ++j) {
            const std::size_t src = g.flatten({i, j, 0});
            const std::size_t dst = target.flatten({i + off[0], j + off[1], off[2]});
            std::copy_n(r.coverage.begin() + static_cast<std::ptrdiff_t>(src), g.extents[2],
                        out.coverage.begin() + static_cast<std::ptrdiff_t>(dst));
        }
    return out;
}

// ---------------------------------------------------------------------------
// Exact measures

namespace {

using Intervals = std::vector<std::pair<double, double>>;

Intervals normalize(Intervals v)
{
    std::sort(v.begin(), v.end());
    Intervals out;
    for (const auto& iv : v) {
        if (!(iv.second > iv.first)) continue;
        if (!out.empty() && iv.first <= out.back().second)
            out.back().second = std::max(out.back().second, iv.second);
        else
            out.push_back(iv);
    }
    return out;
}

Intervals intersect_iv(const Intervals& a, const Intervals& b)
{
    Intervals out;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double lo = std::max(a[i].first, b[j].first);
        const double hi = std::min(a[i].second, b[j].second);
        if (hi > lo) out.emplace_back(lo, hi);
        if (a[i].second < b[j].second) ++i;
        else ++j;
    }
    return out;
}

Intervals subtract_iv(const Intervals& a, const Intervals& b)
{
    Intervals out;
    std::size_t j = 0;
    for (auto iv : a) {
        double lo = iv.first;
        const double hi = iv.second;
        while (j < b.size() && b[j].second <= lo) ++j;
        std::size_t k = j;
        while (k < b.size() && b[k].first < hi) {
            if (b[k].first > lo) out.emplace_back(lo, b[k].first);
            lo = std::max(lo, b[k].second);
            ++k;
        }
        if (hi > lo) out.emplace_back(lo, hi);
    }
    return out;
}

Intervals to_intervals(const SetExpr& e)
{
    switch (e.kind()) {
    case SetExpr::Kind::Ball:
        return {{e.center()[0] - e.radius(), e.center()[0] + e.radius()}};
    case SetExpr::Kind::Box:
        return {{e.lo()[0], e.hi()[0]}};
    case SetExpr::Kind::Union: {
        Intervals all;
        for (const auto& c : e.children()) {
            auto part = to_intervals(c);
            all.insert(all.end(), part.begin(), part.end());
        }
        return normalize(std::move(all));
    }
    case SetExpr::Kind::Intersect: {
        Intervals acc = to_intervals(e.children().front());
        for (std::size_t i = 1; i < e.children().size(); ++i) acc = intersect_iv(acc, to_intervals(e.children()[i]));
        return acc;
    }
    case SetExpr::Kind::Diff:
        return subtract_iv(to_intervals(e.children()[0]), to_intervals(e.children()[1]));
    }
    return {};
}

// Area of the disk of radius r centered at the origin intersected with
// [x0,x1] x [y0,y1].
double disk_rect_area(double r, double x0, double x1, double y0, double y1)
{
    x0 = std::max(x0, -r);
    x1 = std::min(x1, r);
    if (!(x1 > x0) || !(y1 > y0)) return 0.0;
    auto prim = [r](double x) {
        const double s = std::sqrt(std::max(0.0, r * r - x * x));
        return 0.5 * (x * s + r * r * std::asin(std::clamp(x / r, -1.0, 1.0)));
    };
    std::vector<double> br{x0, x1};
    for (double y : {y0, y1}) {
        if (std::abs(y) < r) {
            const double x = std::sqrt(r * r - y * y);
            for (double c : {-x, x})
                if (c > x0 && c < x1) br.push_back(c);
        }
    }
    std::sort(br.begin(), br.end());
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < br.size(); ++i) {
        const double a = br[i], b = br[i + 1];
        if (!(b > a)) continue;
        const double m = 0.5 * (a + b);
        const double sm = std::sqrt(std::max(0.0, r * r - m * m));
        const bool top_is_arc = sm < y1;
        const bool bottom_is_arc = -sm > y0;
        const double top = top_is_arc ? sm : y1;
        const double bottom = bottom_is_arc ? -sm : y0;
        if (top <= bottom) continue;
        const double arc = prim(b) - prim(a);
        const double upper = top_is_arc ? arc : y1 * (b - a);
        const double lower = bottom_is_arc ? -arc : y0 * (b - a);
        area += upper - lower;
    }
    return area;
}

// One term of a disjoint union: an intersection of primitives.
struct Piece {
    std::vector<SetExpr> parts;
    Bounds box;
};

bool primitives_separated(const SetExpr& a, const SetExpr& b, int dim)
{
    using K = SetExpr::Kind;
    if (a.kind() == K::Ball && b.kind() == K::Ball)
        return distance(a.center(), b.center(), dim) >= a.radius() + b.radius();
    if (a.kind() == K::Box && b.kind() == K::Box) {
        for (int k = 0; k < dim; ++k)
            if (a.hi()[k] <= b.lo()[k] || b.hi()[k] <= a.lo()[k]) return true;
        return false;
    }
    const SetExpr& ball = a.kind() == K::Ball ? a : b;
    const SetExpr& box = a.kind() == K::Ball ? b : a;
    double d2 = 0.0;
    for (int k = 0; k < dim; ++k) {
        const double c = ball.center()[k];
        const double d = std::max({box.lo()[k] - c, 0.0, c - box.hi()[k]});
        d2 += d * d;
    }
    return d2 >= ball.radius() * ball.radius();
}

bool pieces_separated(const Piece& p, const Piece& q, int dim)
{
    for (int k = 0; k < dim; ++k)
        if (p.box.hi[k] <= q.box.lo[k] || q.box.hi[k] <= p.box.lo[k]) return true;
    for (const auto& a : p.parts)
        for (const auto& b : q.parts)
            if (primitives_separated(a, b, dim)) return true;
    return false;
}

void collect_union(const SetExpr& e, std::vector<SetExpr>& out)
{
    if (e.kind() == SetExpr::Kind::Union)
        for (const auto& c : e.children()) collect_union(c, out);
    else
        out.push_back(e);
}

// Returns false when the closed form does not apply.
bool exact_piece_measure(const Piece& p, int dim, double& value)
{
    using K = SetExpr::Kind;
    if (p.parts.size() == 1) {
        const auto& e = p.parts.front();
        if (e.kind() == K::Ball) {
            value = unit_ball_volume(dim) * std::pow(e.radius(), dim);
        } else {
            value = 1.0;
            for (int k = 0; k < dim; ++k) value *= e.hi()[k] - e.lo()[k];
        }
        return true;
    }
    if (dim != 2 || p.parts.size() != 2) return false;
    const SetExpr* ball = nullptr;
    const SetExpr* box = nullptr;
    for (const auto& e : p.parts) {
        if (e.kind() == K::Ball) ball = &e;
        else box = &e;
    }
    if (!ball || !box) return false;
    const auto& c = ball->center();
    value = disk_rect_area(ball->radius(), box->lo()[0] - c[0], box->hi()[0] - c[0], box->lo()[1] - c[1],
                           box->hi()[1] - c[1]);
    return true;
}

bool try_exact_measure(const SetExpr& expr, double& value)
{
    const int dim = expr.dim();
    std::vector<SetExpr> terms;
    collect_union(expr, terms);
    std::vector<Piece> pieces;
    pieces.reserve(terms.size());
    for (const auto& t : terms) {
        Piece p;
        if (t.kind() == SetExpr::Kind::Ball || t.kind() == SetExpr::Kind::Box) {
            p.parts = {t};
        } else if (t.kind() == SetExpr::Kind::Intersect) {
            for (const auto& c : t.children()) {
                if (c.kind() != SetExpr::Kind::Ball && c.kind() != SetExpr::Kind::Box) return false;
                p.parts.push_back(c);
            }
        } else {
            return false;
        }
        p.box = t.bounding_box();
        if (p.box.empty(dim)) continue;
        pieces.push_back(std::move(p));
    }
    std::vector<std::size_t> order(pieces.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return pieces[a].box.lo[0] < pieces[b].box.lo[0]; });
    // Sweep along axis 0; only pieces whose extents overlap there are tested.
    for (std::size_t i = 0; i < order.size(); ++i) {
        const Piece& p = pieces[order[i]];
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            const Piece& q = pieces[order[j]];
            if (q.box.lo[0] >= p.box.hi[0]) break;
            if (!pieces_separated(p, q, dim)) return false;
        }
    }
    double sum = 0.0;
    for (const auto& p : pieces) {
        double v = 0.0;
        if (!exact_piece_measure(p, dim, v)) return false;
        sum += v;
    }
    value = sum;
    return true;
}

} // namespace

std::vector<std::pair<double, double>> intervals_1d(const SetExpr& expr)
{
    if (expr.dim() != 1) throw GeometryError("intervals_1d: set is not one-dimensional");
    return normalize(to_intervals(expr));
}

MeasureResult measure(const SetExpr& expr, double h)
{
    MeasureResult out;
    if (expr.dim() == 1) {
        for (const auto& iv : intervals_1d(expr)) out.value += iv.second - iv.first;
        out.exact = true;
        return out;
    }
    double v = 0.0;
    if (try_exact_measure(expr, v)) {
        out.value = v;
        out.exact = true;
        return out;
    }
    const Bounds b = expr.bounding_box();
    if (b.empty(expr.dim())) return out;
    if (h <= 0.0) {
        double smallest = std::numeric_limits<double>::infinity();
        for (int k = 0; k < expr.dim(); ++k) smallest = std::min(smallest, b.extent(k));
        h = smallest / 400.0;
    }
    const RasterSet r = rasterize(expr, h, 8);
    out.value = r.measure();
    out.error = r.measure_error();
    return out;
}

double d1(const RasterSet& a, const RasterSet& b)
{
    const Grid g = Grid::merged(a.grid, b.grid);
    const RasterSet ra = resample(a, g);
    const RasterSet rb = resample(b, g);
    double sum = 0.0;
    for (std::size_t i = 0; i < ra.coverage.size(); ++i) sum += std::abs(ra.coverage[i] - rb.coverage[i]);
    return sum * std::pow(g.h, g.dim);
}

double d1(const SetExpr& a, const SetExpr& b, double h)
{
    if (a.dim() != b.dim()) throw GeometryError("d1: dimensions differ");
    return measure(SetExpr::diff(a, b), h).value + measure(SetExpr::diff(b, a), h).value;
}

namespace {

double directed_sup(const RasterSet& from, const std::vector<double>& edt_to)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < from.coverage.size(); ++i)
        if (from.occupied(i)) worst = std::max(worst, edt_to[i]);
    return std::sqrt(worst) * from.grid.h;
}

} // namespace

double essential_hausdorff(const RasterSet& a, const RasterSet& b)
{
    const Grid g = Grid::merged(a.grid, b.grid);
    const RasterSet ra = resample(a, g);
    const RasterSet rb = resample(b, g);
    const bool ea = ra.occupied_count() == 0;
    const bool eb = rb.occupied_count() == 0;
    if (ea && eb) return 0.0;
    if (ea != eb) return std::numeric_limits<double>::infinity();
    const auto da = squared_edt(ra.occupancy(), g);
    const auto db = squared_edt(rb.occupancy(), g);
    return std::max(directed_sup(ra, db), directed_sup(rb, da));
}

double essential_hausdorff(const SetExpr& a, const SetExpr& b, double h)
{
    if (a.dim() != b.dim()) throw GeometryError("essential_hausdorff: dimensions differ");
    auto raster_or_empty = [h](const SetExpr& e) {
        const Bounds bb = e.bounding_box();
        if (bb.empty(e.dim())) {
            RasterSet r;
            r.grid.dim = e.dim();
            r.grid.h = h;
            r.coverage.assign(1, 0.0);
            return r;
        }
        return rasterize_on(e, Grid::covering(bb, h, e.dim()), 8);
    };
    return essential_hausdorff(raster_or_empty(a), raster_or_empty(b));
}

void write_raster(const std::filesystem::path& path, const RasterSet& r)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    std::ostringstream hdr;
    hdr << std::setprecision(17) << "fragrd-raster dim " << r.grid.dim << " h " << r.grid.h << " origin";
    for (int k = 0; k < r.grid.dim; ++k) hdr << ' ' << r.grid.cell_lo(k, 0);
    hdr << " first";
    for (int k = 0; k < r.grid.dim; ++k) hdr << ' ' << r.grid.first[k];
    hdr << " extents";
    for (int k = 0; k < r.grid.dim; ++k) hdr << ' ' << r.grid.extents[k];
    hdr << " supersampling " << r.supersampling << '\n';
    os << hdr.str();
    os.write(reinterpret_cast<const char*>(r.coverage.data()),
             static_cast<std::streamsize>(r.coverage.size() * sizeof(double)));
}

RasterSet read_raster(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    std::string line;
    std::getline(is, line);
    std::istringstream hdr(line);
    std::string tag, key;
    RasterSet r;
    hdr >> tag;
    if (tag != "fragrd-raster") throw ConfigError("not a raster dump: " + path.string());
    hdr >> key >> r.grid.dim >> key >> r.grid.h >> key;
    check_dim(r.grid.dim);
    double origin;
    for (int k = 0; k < r.grid.dim; ++k) hdr >> origin;
    hdr >> key;
    for (int k = 0; k < r.grid.dim; ++k) hdr >> r.grid.first[k];
    hdr >> key;
    for (int k = 0; k < r.grid.dim; ++k) hdr >> r.grid.extents[k];
    hdr >> key >> r.supersampling;
    if (!hdr) throw ConfigError("malformed raster header in " + path.string());
    r.coverage.resize(r.grid.size());
    is.read(reinterpret_cast<char*>(r.coverage.data()), static_cast<std::streamsize>(r.coverage.size() * sizeof(double)));
    if (!is) throw ConfigError("truncated raster dump " + path.string());
    return r;
}

void write_raster_csv(const std::filesystem::path& path, const RasterSet& r)
{
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    static const char* names[] = {"x", "y", "z"};
    for (int k = 0; k < r.grid.dim; ++k) os << names[k] << ',';
    os << "coverage\n" << std::setprecision(17);
    for (std::size_t i = 0; i < r.coverage.size(); ++i) {
        if (r.coverage[i] <= 0.0) continue;
        const Point c = r.grid.center(i);
        for (int k = 0; k < r.grid.dim; ++k) os << c[k] << ',';
        os << r.coverage[i] << '\n';
    }
}

} // namespace fragrd::geom
