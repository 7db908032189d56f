#include <fragrd/geom/indices.hpp>
#include <fragrd/geom/edt.hpp>

#include <fftw3.h>

#include <algorithm>
#include <limits>
#include <mutex>
#include <tuple>

namespace fragrd::geom {

namespace {

std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

// Fraction of the cell centered at offset d (from the ball center) that lies
// in the ball of radius R. Exact in 1-D, q-subsampled boundary cells otherwise.
struct CellFraction {
    int dim;
    double h;
    double R;
    int q;

    double operator()(const Point& d) const
    {
        const double half = 0.5 * h;
        if (dim == 1) {
            const double lo = std::max(d[0] - half, -R);
            const double hi = std::min(d[0] + half, R);
            return hi > lo ? (hi - lo) / h : 0.0;
        }
        double near = 0.0, far = 0.0;
        for (int k = 0; k < dim; ++k) {
            const double a = std::abs(d[k]);
            const double n = std::max(0.0, a - half);
            near += n * n;
            far += (a + half) * (a + half);
        }
        const double r2 = R * R;
        if (far <= r2) return 1.0;
        if (near >= r2) return 0.0;
        int inside = 0;
        const int n2 = dim >= 2 ? q : 1, n3 = dim >= 3 ? q : 1;
        for (int a = 0; a < q; ++a) {
            const double x = d[0] - half + (a + 0.5) * h / q;
            for (int b = 0; b < n2; ++b) {
                const double y = d[1] - half + (b + 0.5) * h / q;
                for (int c = 0; c < n3; ++c) {
                    const double z = dim >= 3 ? d[2] - half + (c + 0.5) * h / q : 0.0;
                    if (x * x + y * y + z * z < r2) ++inside;
                }
            }
        }
        return static_cast<double>(inside) / (static_cast<double>(q) * n2 * n3);
    }
};

std::int64_t good_fft_size(std::int64_t n)
{
    for (std::int64_t m = std::max<std::int64_t>(n, 1);; ++m) {
        std::int64_t r = m;
        for (std::int64_t p : {2, 3, 5, 7})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

// Ranking key: value quantized so that rounding noise cannot split ties,
// then the lexicographically smallest center.
struct Candidate {
    long long key;
    Point center;
    double value;
};

bool better_max(const Candidate& a, const Candidate& b)
{
    if (a.key != b.key) return a.key > b.key;
    return a.center < b.center;
}

bool better_min(const Candidate& a, const Candidate& b)
{
    if (a.key != b.key) return a.key < b.key;
    return a.center < b.center;
}

long long quantize(double v, double unit) { return std::llround(v / unit); }

// Keeps the first `k` candidates in ranked order that are at least `sep` apart.
std::vector<Candidate> spread_starts(std::vector<Candidate> c, int k, double sep, int dim, bool maximize)
{
    std::sort(c.begin(), c.end(), maximize ? better_max : better_min);
    std::vector<Candidate> out;
    for (const auto& cand : c) {
        bool far_enough = true;
        for (const auto& o : out)
            if (distance(o.center, cand.center, dim) < sep) {
                far_enough = false;
                break;
            }
        if (far_enough) out.push_back(cand);
        if (static_cast<int>(out.size()) >= k) break;
    }
    return out;
}

// Compass search with step halving; `eval` returns the quantized key and the value.
template <class Eval>
Candidate pattern_search(Candidate start, double h, int dim, bool maximize, const Eval& eval)
{
    Candidate cur = start;
    double step = h;
    const double stop = h / 16.0;
    for (int iter = 0; iter < 100000 && step >= stop; ++iter) {
        Candidate best = cur;
        for (int k = 0; k < dim; ++k) {
            for (double sgn : {-1.0, 1.0}) {
                Point p = cur.center;
                p[k] += sgn * step;
                const Candidate c = eval(p);
                if (maximize ? c.key > best.key : c.key < best.key) best = c;
            }
        }
        if ((maximize && best.key > cur.key) || (!maximize && best.key < cur.key))
            cur = best;
        else
            step *= 0.5;
    }
    return cur;
}

} // namespace

double raster_tolerance(double h, double r_e) { return 3.0 * h / std::min(r_e, 1.0); }

double default_index_h(double r_e, int dim)
{
    check_dim(dim);
    switch (dim) {
    case 1: return r_e / 2000.0;
    case 2: return r_e / 150.0;
    default: return r_e / 24.0;
    }
}

double default_index_h(const SetExpr& expr)
{
    const double m = measure(expr).value;
    if (!(m > 0.0)) throw GeometryError("index of a negligible set");
    return default_index_h(equivalent_radius(m, expr.dim()), expr.dim());
}

RasterSet index_raster(const SetExpr& expr, const IndexOptions& opt)
{
    const double h = opt.h > 0.0 ? opt.h : default_index_h(expr);
    const Bounds b = expr.bounding_box();
    if (b.empty(expr.dim())) throw GeometryError("index of a negligible set");
    return rasterize_on(expr, Grid::covering(b, h, expr.dim()), opt.supersampling);
}

// ---------------------------------------------------------------------------
// delta_1

IndexValue delta1(const RasterSet& r, const IndexOptions& opt)
{
    const Grid& g = r.grid;
    const int dim = g.dim;
    const double lambda = r.measure();
    if (!(lambda > 0.0)) throw GeometryError("delta1 of a negligible set");
    const double R = equivalent_radius(lambda, dim);
    const double h = g.h;
    const double cell = std::pow(h, dim);
    const CellFraction frac{dim, h, R, opt.kernel_subsamples};
    const auto m = static_cast<std::int64_t>(std::ceil(R / h)) + 1;

    // Candidate centers: cell centers of the raster padded by the kernel reach.
    const Grid cand = g.padded(m);
    std::array<std::int64_t, kMaxDim> L{1, 1, 1};
    for (int k = 0; k < dim; ++k) L[k] = good_fft_size(cand.extents[k] + 2 * m);
    const std::size_t total = static_cast<std::size_t>(L[0] * L[1] * L[2]);
    const std::size_t complex_last = static_cast<std::size_t>(L[dim - 1] / 2 + 1);
    const std::size_t ctotal = total / static_cast<std::size_t>(L[dim - 1]) * complex_last;

    double* in_a = fftw_alloc_real(total);
    double* in_k = fftw_alloc_real(total);
    fftw_complex* fa = fftw_alloc_complex(ctotal);
    fftw_complex* fk = fftw_alloc_complex(ctotal);
    std::fill(in_a, in_a + total, 0.0);
    std::fill(in_k, in_k + total, 0.0);
    auto lidx = [&](std::int64_t i, std::int64_t j, std::int64_t l) {
        return static_cast<std::size_t>((i * L[1] + j) * L[2] + l);
    };
    // Coverage placed at offset m inside the candidate frame (which itself is
    // offset m from the raster), i.e. at offset 2m.
    for (std::size_t f = 0; f < r.coverage.size(); ++f) {
        if (r.coverage[f] == 0.0) continue;
        auto idx = g.unflatten(f);
        for (int k = 0; k < dim; ++k) idx[k] += 2 * m;
        in_a[lidx(idx[0], idx[1], idx[2])] = r.coverage[f];
    }
    // Kernel stored with wrap-around so that the convolution is centered.
    const std::int64_t mx = m, my = dim >= 2 ? m : 0, mz = dim >= 3 ? m : 0;
    for (std::int64_t i = -mx; i <= mx; ++i)
        for (std::int64_t j = -my; j <= my; ++j)
            for (std::int64_t l = -mz; l <= mz; ++l) {
                const double w = frac({i * h, j * h, l * h});
                if (w == 0.0) continue;
                in_k[lidx((i + L[0]) % L[0], (j + L[1]) % L[1], (l + L[2]) % L[2])] = w;
            }
    int dims[3] = {static_cast<int>(L[0]), static_cast<int>(L[1]), static_cast<int>(L[2])};
    fftw_plan pa, pk, pb;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        pa = fftw_plan_dft_r2c(dim, dims, in_a, fa, FFTW_ESTIMATE);
        pk = fftw_plan_dft_r2c(dim, dims, in_k, fk, FFTW_ESTIMATE);
        pb = fftw_plan_dft_c2r(dim, dims, fa, in_a, FFTW_ESTIMATE);
    }
    fftw_execute(pa);
    fftw_execute(pk);
    for (std::size_t i = 0; i < ctotal; ++i) {
        const double re = fa[i][0] * fk[i][0] - fa[i][1] * fk[i][1];
        const double im = fa[i][0] * fk[i][1] + fa[i][1] * fk[i][0];
        fa[i][0] = re;
        fa[i][1] = im;
    }
    fftw_execute(pb);
    const double norm = 1.0 / static_cast<double>(total);

    const double unit = 1e-10 * lambda;
    std::vector<Candidate> grid_cands;
    std::vector<double> values(cand.size());
    for (std::size_t f = 0; f < cand.size(); ++f) {
        auto idx = cand.unflatten(f);
        for (int k = 0; k < dim; ++k) idx[k] += m;
        values[f] = in_a[lidx(idx[0], idx[1], idx[2])] * norm * cell;
    }
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(pa);
        fftw_destroy_plan(pk);
        fftw_destroy_plan(pb);
    }
    fftw_free(in_a);
    fftw_free(in_k);
    fftw_free(fa);
    fftw_free(fk);

    // Local maxima of the candidate grid seed the refinement.
    const auto cst = cand.strides();
    for (std::size_t f = 0; f < cand.size(); ++f) {
        const double v = values[f];
        if (v <= 0.0) continue;
        const auto idx = cand.unflatten(f);
        bool is_max = true;
        for (int k = 0; k < dim && is_max; ++k) {
            if (idx[k] > 0 && values[f - cst[k]] > v) is_max = false;
            if (idx[k] + 1 < cand.extents[k] && values[f + cst[k]] > v) is_max = false;
        }
        if (is_max) grid_cands.push_back({quantize(v, unit), cand.center(f), v});
    }

    auto overlap = [&](const Point& x) {
        std::array<std::int64_t, kMaxDim> lo{0, 0, 0}, hi{1, 1, 1};
        for (int k = 0; k < dim; ++k) {
            lo[k] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor((x[k] - R) / h)) - 1 - g.first[k]);
            hi[k] = std::min<std::int64_t>(g.extents[k], static_cast<std::int64_t>(std::ceil((x[k] + R) / h)) + 1 - g.first[k]);
        }
        double sum = 0.0;
        Point d{};
        for (auto i = lo[0]; i < hi[0]; ++i) {
            d[0] = g.cell_center(0, i) - x[0];
            for (auto j = lo[1]; j < hi[1]; ++j) {
                if (dim >= 2) d[1] = g.cell_center(1, j) - x[1];
                for (auto l = lo[2]; l < hi[2]; ++l) {
                    if (dim >= 3) d[2] = g.cell_center(2, l) - x[2];
                    const double c = r.coverage[g.flatten({i, j, l})];
                    if (c == 0.0) continue;
                    sum += c * frac(d);
                }
            }
        }
        return sum * cell;
    };
    auto eval = [&](const Point& x) {
        const double v = overlap(x);
        return Candidate{quantize(v, unit), x, v};
    };

    const auto starts = spread_starts(std::move(grid_cands), std::max(1, opt.starts), 2.0 * h, dim, true);
    if (starts.empty()) throw GeometryError("delta1: no overlap candidates");
    Candidate best{std::numeric_limits<long long>::min(), {}, 0.0};
    for (const auto& s : starts) {
        const Candidate c = pattern_search(eval(s.center), h, dim, true, eval);
        if (better_max(c, best)) best = c;
    }
    IndexValue out;
    out.value = std::clamp(1.0 - best.value / lambda, 0.0, 1.0);
    out.center = best.center;
    return out;
}

// ---------------------------------------------------------------------------
// delta_H

namespace {

// Max-pyramid over a scalar field on a grid for ball-maximum queries.
class MaxPyramid {
public:
    MaxPyramid(const Grid& g, std::vector<double> base) : g_(g)
    {
        levels_.push_back(std::move(base));
        ext_.push_back(g.extents);
        while (true) {
            const auto& e = ext_.back();
            bool single = true;
            for (int k = 0; k < g.dim; ++k)
                if (e[k] > 1) single = false;
            if (single) break;
            std::array<std::int64_t, kMaxDim> ne{1, 1, 1};
            for (int k = 0; k < g.dim; ++k) ne[k] = (e[k] + 1) / 2;
            std::vector<double> up(static_cast<std::size_t>(ne[0] * ne[1] * ne[2]), 0.0);
            const auto& low = levels_.back();
            for (std::int64_t i = 0; i < e[0]; ++i)
                for (std::int64_t j = 0; j < e[1]; ++j)
                    for (std::int64_t l = 0; l < e[2]; ++l) {
                        const double v = low[static_cast<std::size_t>((i * e[1] + j) * e[2] + l)];
                        double& dst = up[static_cast<std::size_t>(((i / 2) * ne[1] + j / 2) * ne[2] + l / 2)];
                        dst = std::max(dst, v);
                    }
            levels_.push_back(std::move(up));
            ext_.push_back(ne);
        }
    }

    /// Max of the field over cell centers within distance R of x.
    double ball_max(const Point& x, double R) const
    {
        double best = 0.0;
        const int top = static_cast<int>(levels_.size()) - 1;
        const auto& e = ext_[top];
        for (std::int64_t i = 0; i < e[0]; ++i)
            for (std::int64_t j = 0; j < e[1]; ++j)
                for (std::int64_t l = 0; l < e[2]; ++l) visit(top, {i, j, l}, x, R * R, best);
        return best;
    }

private:
    void visit(int level, const std::array<std::int64_t, kMaxDim>& node, const Point& x, double r2, double& best) const
    {
        const auto& e = ext_[level];
        const double v = levels_[level][static_cast<std::size_t>((node[0] * e[1] + node[1]) * e[2] + node[2])];
        if (v <= best) return;
        const std::int64_t span = std::int64_t{1} << level;
        double near = 0.0, far = 0.0;
        for (int k = 0; k < g_.dim; ++k) {
            const std::int64_t a = node[k] * span;
            const std::int64_t b = std::min(a + span, g_.extents[k]) - 1;
            const double lo = g_.cell_center(k, a), hi = g_.cell_center(k, b);
            const double dn = std::max({lo - x[k], 0.0, x[k] - hi});
            const double df = std::max(std::abs(x[k] - lo), std::abs(x[k] - hi));
            near += dn * dn;
            far += df * df;
        }
        if (near > r2) return;
        if (far <= r2 || level == 0) {
            best = v;
            return;
        }
        const auto& child = ext_[level - 1];
        const int nx = 2, ny = g_.dim >= 2 ? 2 : 1, nz = g_.dim >= 3 ? 2 : 1;
        for (int a = 0; a < nx; ++a)
            for (int b = 0; b < ny; ++b)
                for (int c = 0; c < nz; ++c) {
                    const std::array<std::int64_t, kMaxDim> ch{node[0] * 2 + a, g_.dim >= 2 ? node[1] * 2 + b : 0,
                                                               g_.dim >= 3 ? node[2] * 2 + c : 0};
                    if (ch[0] >= child[0] || ch[1] >= child[1] || ch[2] >= child[2]) continue;
                    visit(level - 1, ch, x, r2, best);
                }
    }

    Grid g_;
    std::vector<std::vector<double>> levels_;
    std::vector<std::array<std::int64_t, kMaxDim>> ext_;
};

} // namespace

IndexValue deltaH(const RasterSet& r, const IndexOptions& opt)
{
    const Grid& g = r.grid;
    const int dim = g.dim;
    const double lambda = r.measure();
    if (!(lambda > 0.0) || r.occupied_count() == 0) throw GeometryError("deltaH of a negligible set");
    const double R = equivalent_radius(lambda, dim);
    const double h = g.h;
    const auto ext = extreme_centers(r);
    const EnclosingBall eb = enclosing_ball(r);
    const double rho = eb.radius;
    const double corner = h * std::sqrt(static_cast<double>(dim)) / 2.0;

    const auto reach = static_cast<std::int64_t>(std::ceil(R / h)) + 1;
    const Grid cand = g.padded(reach);
    const Grid big = g.padded(2 * reach + 1);
    const RasterSet rb = resample(r, big);
    const auto sq = squared_edt(rb.occupancy(), big);
    std::vector<double> D(sq.size());
    for (std::size_t i = 0; i < sq.size(); ++i) D[i] = std::max(0.0, std::sqrt(sq[i]) * h - 0.5 * h);
    const MaxPyramid pyramid(big, std::move(D));

    const double scale = rho + R;
    const double unit = 1e-12 * scale;
    auto objective = [&](const Point& x0) {
        Point x = x0;
        const Bounds cb = cand.bounds();
        for (int k = 0; k < dim; ++k) x[k] = std::clamp(x[k], cb.lo[k] + 0.5 * h, cb.hi[k] - 0.5 * h);
        double far2 = 0.0;
        for (const auto& p : ext) far2 = std::max(far2, squared_distance(p, x, dim));
        const double term1 = std::max(0.0, std::sqrt(far2) + corner - R);
        const double term2 = pyramid.ball_max(x, R);
        const double v = std::max(term1, term2);
        return Candidate{quantize(v, unit), x, v};
    };

    int per_axis = opt.coarse_per_axis;
    if (per_axis <= 0) per_axis = dim == 1 ? 256 : (dim == 2 ? 64 : 24);
    std::array<std::int64_t, kMaxDim> stride{1, 1, 1};
    for (int k = 0; k < dim; ++k) stride[k] = std::max<std::int64_t>(1, cand.extents[k] / per_axis);
    std::vector<Candidate> coarse;
    for (std::int64_t i = 0; i < cand.extents[0]; i += stride[0])
        for (std::int64_t j = 0; j < cand.extents[1]; j += stride[1])
            for (std::int64_t l = 0; l < cand.extents[2]; l += stride[2])
                coarse.push_back(objective(cand.center(cand.flatten({i, j, l}))));
    // The enclosing-ball center is always a sensible start.
    coarse.push_back(objective(eb.center));

    double coarse_step = 0.0;
    for (int k = 0; k < dim; ++k) coarse_step = std::max(coarse_step, stride[k] * h);
    const auto starts = spread_starts(std::move(coarse), std::max(1, opt.starts), 2.0 * coarse_step, dim, false);
    Candidate best{std::numeric_limits<long long>::max(), {}, 0.0};
    for (const auto& s : starts) {
        const Candidate c = pattern_search(s, coarse_step, dim, false, objective);
        const Candidate fine = pattern_search(c, h, dim, false, objective);
        if (better_min(fine, best)) best = fine;
    }
    IndexValue out;
    out.value = std::clamp(best.value / scale, 0.0, 1.0);
    out.center = best.center;
    return out;
}

// ---------------------------------------------------------------------------
// 1-D oracle

namespace {

void check_intervals(const std::vector<std::pair<double, double>>& iv)
{
    if (iv.empty()) throw GeometryError("delta1 oracle: empty interval list");
    for (std::size_t i = 0; i < iv.size(); ++i) {
        if (!(iv[i].second > iv[i].first)) throw GeometryError("delta1 oracle: interval with nonpositive length");
        if (i > 0 && iv[i].first < iv[i - 1].second)
            throw GeometryError("delta1 oracle: intervals overlap or are not sorted");
    }
}

std::pair<double, double> oracle_best(const std::vector<std::pair<double, double>>& iv)
{
    check_intervals(iv);
    double lambda = 0.0;
    for (const auto& p : iv) lambda += p.second - p.first;
    const double R = lambda / 2.0;
    auto overlap = [&](double c) {
        double s = 0.0;
        for (const auto& p : iv) s += std::max(0.0, std::min(p.second, c + R) - std::max(p.first, c - R));
        return s;
    };
    // The overlap is piecewise linear in c with kinks where a window edge meets an endpoint.
    std::vector<double> kinks;
    for (const auto& p : iv)
        for (double e : {p.first, p.second}) {
            kinks.push_back(e - R);
            kinks.push_back(e + R);
        }
    std::sort(kinks.begin(), kinks.end());
    double best = -1.0, at = 0.0;
    for (double c : kinks) {
        const double v = overlap(c);
        if (v > best * (1.0 + 1e-14) + 1e-300) {
            best = v;
            at = c;
        }
    }
    return {best / lambda, at};
}

} // namespace

double delta1_oracle_1d(const std::vector<std::pair<double, double>>& intervals)
{
    return std::clamp(1.0 - oracle_best(intervals).first, 0.0, 1.0);
}

double delta1_oracle_1d_center(const std::vector<std::pair<double, double>>& intervals)
{
    return oracle_best(intervals).second;
}

// ---------------------------------------------------------------------------
// Report

nlohmann::json IndexReport::to_json() const
{
    auto pt = [this](const Point& p) {
        auto a = nlohmann::json::array();
        for (int k = 0; k < dim; ++k) a.push_back(p[k]);
        return a;
    };
    return {{"dim", dim},
            {"h", h},
            {"measure", measure},
            {"R_E", r_e},
            {"rho_E", rho_e},
            {"x_E", pt(x_e)},
            {"diameter", diameter},
            {"delta1", delta1},
            {"delta1_center", pt(delta1_center)},
            {"deltaH", delta_h},
            {"deltaH_center", pt(delta_h_center)}};
}

IndexReport index_report(const RasterSet& r, const IndexOptions& opt)
{
    IndexReport rep;
    rep.dim = r.grid.dim;
    rep.h = r.grid.h;
    rep.measure = r.measure();
    if (!(rep.measure > 0.0)) throw GeometryError("index report of a negligible set");
    rep.r_e = equivalent_radius(rep.measure, rep.dim);
    const auto eb = enclosing_ball(r);
    rep.rho_e = eb.radius;
    rep.x_e = eb.center;
    rep.diameter = essential_diameter(r);
    const auto d1v = delta1(r, opt);
    rep.delta1 = d1v.value;
    rep.delta1_center = d1v.center;
    const auto dh = deltaH(r, opt);
    rep.delta_h = dh.value;
    rep.delta_h_center = dh.center;
    return rep;
}

IndexReport index_report(const SetExpr& expr, const IndexOptions& opt)
{
    return index_report(index_raster(expr, opt), opt);
}

} // namespace fragrd::geom
