#include <doctest.h>

#include <fragrd/geom/edt.hpp>
#include <fragrd/geom/indices.hpp>

#include <random>

using namespace fragrd;
using namespace fragrd::geom;

namespace {

SetExpr iv(double a, double b) { return SetExpr::interval(a, b); }

SetExpr ball2(double x, double y, double r) { return SetExpr::ball(2, {x, y, 0}, r); }

// Independent check of the window overlap: dense scan of the window center.
double brute_delta1_1d(const std::vector<std::pair<double, double>>& ivs, double step)
{
    double lambda = 0.0;
    for (const auto& p : ivs) lambda += p.second - p.first;
    const double R = lambda / 2.0;
    double best = 0.0;
    for (double c = ivs.front().first - R; c <= ivs.back().second + R; c += step) {
        double s = 0.0;
        for (const auto& p : ivs) s += std::max(0.0, std::min(p.second, c + R) - std::max(p.first, c - R));
        best = std::max(best, s);
    }
    return 1.0 - best / lambda;
}

std::vector<std::pair<double, double>> random_intervals(std::mt19937_64& rng, int count)
{
    std::uniform_real_distribution<double> len(0.1, 2.0), gap(0.05, 3.0);
    std::vector<std::pair<double, double>> out;
    double x = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
    for (int i = 0; i < count; ++i) {
        const double l = len(rng);
        out.emplace_back(x, x + l);
        x += l + gap(rng);
    }
    return out;
}

SetExpr from_intervals(const std::vector<std::pair<double, double>>& ivs)
{
    std::vector<SetExpr> parts;
    for (const auto& p : ivs) parts.push_back(iv(p.first, p.second));
    return SetExpr::unite(parts);
}

} // namespace

TEST_SUITE("geomset")
{
    TEST_CASE("set expressions validate their primitives")
    {
        CHECK_THROWS_AS(SetExpr::ball(2, {0, 0, 0}, 0.0), ConfigError);
        CHECK_THROWS_AS(SetExpr::box(2, {0, 0, 0}, {1, 0, 0}), ConfigError);
        CHECK_THROWS_AS(SetExpr::ball(4, {0, 0, 0}, 1.0), ConfigError);
        CHECK_THROWS_AS(SetExpr::unite({iv(0, 1), ball2(0, 0, 1)}), ConfigError);
    }

    TEST_CASE("membership and json round trip")
    {
        const auto e = SetExpr::diff(SetExpr::unite({ball2(0, 0, 1), SetExpr::box(2, {2, 0, 0}, {3, 1, 0})}),
                                     ball2(0, 0, 0.5));
        CHECK(e.contains({0.75, 0, 0}));
        CHECK_FALSE(e.contains({0.25, 0, 0}));
        CHECK(e.contains({2.5, 0.5, 0}));
        const auto back = SetExpr::from_json(e.to_json());
        CHECK(back.to_json() == e.to_json());
        CHECK_THROWS_AS(SetExpr::from_json(nlohmann::json{{"type", "torus"}}), ConfigError);
    }

    TEST_CASE("large unions use the bucket index consistently")
    {
        std::vector<SetExpr> parts;
        for (int i = 0; i < 40; ++i) parts.push_back(ball2(i * 0.5, (i % 3) * 0.4, 0.2));
        const auto u = SetExpr::unite(parts);
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> x(-1, 21), y(-1, 2);
        for (int t = 0; t < 2000; ++t) {
            const Point p{x(rng), y(rng), 0};
            bool expect = false;
            for (const auto& b : parts) expect = expect || b.contains(p);
            CHECK(u.contains(p) == expect);
        }
    }

    TEST_CASE("rasterize a 1-D ball")
    {
        const auto r = rasterize(SetExpr::ball(1, {0, 0, 0}, 1.0), 0.5, 64);
        const Bounds b = r.grid.bounds();
        CHECK(b.lo[0] <= -1.25);
        CHECK(b.hi[0] >= 1.25);
        CHECK(std::abs(r.measure() - 2.0) <= 2 * 0.5);
        CHECK(r.measure() == doctest::Approx(2.0).epsilon(1e-12));
    }

    TEST_CASE("aligned box has exact raster measure")
    {
        const auto r = rasterize(SetExpr::box(2, {0, 0, 0}, {1, 1, 0}), 0.25, 1);
        CHECK(r.measure() == 1.0);
        CHECK(r.mixed_cells == 0);
    }

    TEST_CASE("cube inside its circumscribed ball")
    {
        const double a = 1.0;
        const auto c = SetExpr::intersect(
            {SetExpr::box(2, {-a / 2, -a / 2, 0}, {a / 2, a / 2, 0}), ball2(0, 0, a * std::sqrt(2.0) / 2)});
        double prev_err = 1.0;
        for (double h : {0.05, 0.0125}) {
            const double err = std::abs(rasterize(c, h, 8).measure() - 1.0);
            CHECK(err <= prev_err);
            prev_err = err;
        }
        CHECK(prev_err < 1e-3);
        CHECK(measure(c).exact);
        CHECK(measure(c).value == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("rasterize refuses degenerate cell sizes")
    {
        CHECK_THROWS_AS(rasterize(iv(0, 0.1), 0.5), GeometryError);
        CHECK_THROWS_AS(rasterize(iv(0, 1), -1.0), ConfigError);
    }

    TEST_CASE("exact measures")
    {
        CHECK(measure(ball2(0, 0, 1)).value == doctest::Approx(M_PI).epsilon(1e-14));
        CHECK(measure(SetExpr::ball(1, {0.5, 0, 0}, 0.25)).value == doctest::Approx(0.5));
        CHECK(measure(SetExpr::ball(3, {0, 0, 0}, 2.0)).value == doctest::Approx(32.0 * M_PI / 3.0));
        // Overlapping 1-D pieces are merged exactly.
        CHECK(measure(SetExpr::unite({iv(0, 2), iv(1, 3)})).value == doctest::Approx(3.0));
        CHECK(measure(SetExpr::diff(iv(0, 4), iv(1, 2))).value == doctest::Approx(3.0));
        // Off-center disk-rectangle intersection against a fine raster.
        const auto cap = SetExpr::intersect({ball2(0.3, -0.2, 1.0), SetExpr::box(2, {0, 0, 0}, {2, 0.5, 0})});
        const auto m = measure(cap);
        CHECK(m.exact);
        CHECK(m.value == doctest::Approx(rasterize(cap, 0.002, 8).measure()).epsilon(1e-4));
        // Overlapping 2-D balls fall back to the raster with a reported error.
        const auto lens = SetExpr::unite({ball2(0, 0, 1), ball2(1, 0, 1)});
        const auto ml = measure(lens, 0.005);
        CHECK_FALSE(ml.exact);
        const double exact = 2 * M_PI - (2 * std::acos(0.5) - 0.5 * std::sqrt(3.0));
        CHECK(std::abs(ml.value - exact) <= ml.error);
    }

    TEST_CASE("d1 examples")
    {
        const auto e = iv(0, 2);
        CHECK(d1(e, e) == 0.0);
        CHECK(d1(iv(0, 2), iv(1, 3)) == doctest::Approx(2.0));
        CHECK(d1(iv(-1, 1), iv(2, 4)) == doctest::Approx(4.0));
        const auto ra = rasterize(iv(0, 2), 0.01);
        const auto rb = rasterize(iv(1, 3), 0.01);
        CHECK(d1(ra, rb) == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(d1(ra, rb) == d1(rb, ra));
        CHECK_THROWS_AS(d1(ra, rasterize(iv(1, 3), 0.02)), GeometryError);
    }

    TEST_CASE("d1 triangle inequality on rasters")
    {
        std::mt19937_64 rng(11);
        const double h = 0.02;
        for (int t = 0; t < 20; ++t) {
            RasterSet r[3];
            for (auto& x : r) x = rasterize(from_intervals(random_intervals(rng, 3)), h);
            CHECK(d1(r[0], r[2]) <= d1(r[0], r[1]) + d1(r[1], r[2]) + 2 * h);
        }
    }

    TEST_CASE("essential Hausdorff examples")
    {
        const double h = 0.01;
        CHECK(essential_hausdorff(iv(0, 1), iv(0, 1), h) == 0.0);
        CHECK(essential_hausdorff(iv(0, 1), iv(0, 2), h) == doctest::Approx(1.0).epsilon(h));
        CHECK(std::isinf(essential_hausdorff(iv(0, 1), SetExpr::intersect({iv(0, 1), iv(2, 3)}), h)));
        const auto a = rasterize(ball2(0, 0, 1), 0.02);
        const auto b = rasterize(ball2(0.5, 0, 1), 0.02);
        CHECK(essential_hausdorff(a, b) == doctest::Approx(0.5).epsilon(0.05));
    }

    TEST_CASE("exact distance transform matches brute force")
    {
        Grid g;
        g.dim = 2;
        g.h = 1.0;
        g.extents = {23, 17, 1};
        std::vector<std::uint8_t> seeds(g.size(), 0);
        std::mt19937_64 rng(5);
        for (int i = 0; i < 9; ++i) seeds[rng() % seeds.size()] = 1;
        const auto d = squared_edt(seeds, g);
        for (std::size_t i = 0; i < g.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < g.size(); ++j)
                if (seeds[j]) best = std::min(best, squared_distance(g.center(i), g.center(j), 2));
            CHECK(d[i] == best);
        }
    }

    TEST_CASE("minimal enclosing ball against brute force")
    {
        std::mt19937_64 rng(8);
        std::normal_distribution<double> n(0, 1);
        for (int dim = 2; dim <= 3; ++dim) {
            std::vector<Point> pts(60);
            for (auto& p : pts)
                for (int k = 0; k < dim; ++k) p[k] = n(rng);
            const auto b = min_enclosing_ball(pts, dim);
            double worst = 0.0;
            for (const auto& p : pts) worst = std::max(worst, distance(p, b.center, dim));
            CHECK(worst <= b.radius * (1 + 1e-9));
            // No perturbed center does better.
            for (int t = 0; t < 200; ++t) {
                Point c = b.center;
                for (int k = 0; k < dim; ++k) c[k] += 0.01 * n(rng);
                double w = 0.0;
                for (const auto& p : pts) w = std::max(w, distance(p, c, dim));
                CHECK(w >= b.radius * (1 - 1e-9));
            }
        }
    }

    TEST_CASE("enclosing ball examples")
    {
        const double h = 0.01;
        const auto eb = enclosing_ball(rasterize(ball2(0.3, -0.1, 1.0), h));
        CHECK(eb.radius == doctest::Approx(1.0).epsilon(h));
        CHECK(std::abs(eb.center[0] - 0.3) <= h);
        CHECK(std::abs(eb.center[1] + 0.1) <= h);

        const auto e1 = enclosing_ball(rasterize(SetExpr::unite({iv(0, 1), iv(3, 4)}), 0.001));
        CHECK(e1.center[0] == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(e1.radius == doctest::Approx(2.0).epsilon(1e-3));

        // Brute-force minimax over a fine center grid for two unit disks.
        double best = 1e9;
        Point arg{};
        for (double x = 1.5; x <= 2.5; x += 0.01)
            for (double y = -0.5; y <= 0.5; y += 0.01) {
                const double w = std::max(std::hypot(x, y), std::hypot(x - 4, y)) + 1.0;
                if (w < best) {
                    best = w;
                    arg = {x, y, 0};
                }
            }
        const auto e2 = enclosing_ball(rasterize(SetExpr::unite({ball2(0, 0, 1), ball2(4, 0, 1)}), 0.02));
        CHECK(e2.radius == doctest::Approx(best).epsilon(0.02));
        CHECK(std::abs(e2.center[0] - arg[0]) <= 0.02);
        CHECK(std::abs(e2.center[1] - arg[1]) <= 0.02);
        CHECK_THROWS_AS(enclosing_ball(rasterize_on(iv(0, 1), Grid::covering({{5, 0, 0}, {6, 0, 0}}, 0.1, 1))),
                        GeometryError);
    }

    TEST_CASE("essential diameter")
    {
        CHECK(essential_diameter(rasterize(ball2(0, 0, 0.7), 0.01)) == doctest::Approx(1.4).epsilon(0.02 / 1.4));
        CHECK(essential_diameter(rasterize(SetExpr::unite({iv(0, 1), iv(3, 4)}), 0.001)) ==
              doctest::Approx(4.0).epsilon(1e-3));
        // Balls of radius 1/9 at 1/3 and 2/3: outer edges at 2/9 and 7/9.
        const auto e3 = SetExpr::unite({SetExpr::ball(1, {1.0 / 3, 0, 0}, 1.0 / 9), SetExpr::ball(1, {2.0 / 3, 0, 0}, 1.0 / 9)});
        CHECK(essential_diameter(rasterize(e3, 1e-4)) == doctest::Approx(5.0 / 9.0).epsilon(1e-3));
    }

    TEST_CASE("delta1 oracle")
    {
        CHECK(delta1_oracle_1d({{0, 3}}) == 0.0);
        CHECK(delta1_oracle_1d({{0, 2}, {10, 12}}) == 0.5);
        CHECK_THROWS_AS(delta1_oracle_1d({{0, 2}, {1, 3}}), GeometryError);
        CHECK_THROWS_AS(delta1_oracle_1d({{3, 4}, {0, 1}}), GeometryError);
        std::mt19937_64 rng(21);
        for (int t = 0; t < 30; ++t) {
            const auto ivs = random_intervals(rng, 1 + static_cast<int>(rng() % 6));
            CHECK(delta1_oracle_1d(ivs) == doctest::Approx(brute_delta1_1d(ivs, 1e-4)).epsilon(1e-3));
        }
    }

    TEST_CASE("delta1 oracle on the fragmented interval family")
    {
        // 13 intervals of length 3/4/2.16 with spacing 1/2.16; the window of
        // length 13*0.75/2.16 holds exactly 10 of them.
        std::vector<std::pair<double, double>> ivs;
        for (int x = -6; x <= 6; ++x) ivs.emplace_back(x / 2.16 - 0.375 / 2.16, x / 2.16 + 0.375 / 2.16);
        const double v = delta1_oracle_1d(ivs);
        CHECK(v == doctest::Approx(3.0 / 13.0).epsilon(1e-12));
        CHECK(v == doctest::Approx(brute_delta1_1d(ivs, 1e-5)).epsilon(1e-3));
    }

    TEST_CASE("delta1 and deltaH vanish on balls")
    {
        for (int dim = 1; dim <= 2; ++dim)
            for (double r : {0.3, 1.0, 4.0}) {
                const auto rep = index_report(SetExpr::ball(dim, {0.1, -0.2, 0}, r));
                const double tol = raster_tolerance(rep.h, rep.r_e);
                CHECK(rep.delta1 <= tol);
                CHECK(rep.delta_h <= tol);
                CHECK(rep.delta1 >= 0.0);
            }
    }

    TEST_CASE("delta1 on two separated intervals")
    {
        const auto rep = index_report(SetExpr::unite({iv(0, 2), iv(10, 12)}));
        CHECK(rep.delta1 == doctest::Approx(0.5).epsilon(3 * rep.h / rep.measure));
    }

    TEST_CASE("raster delta1 agrees with the oracle")
    {
        std::mt19937_64 rng(31);
        for (int t = 0; t < 15; ++t) {
            const auto ivs = random_intervals(rng, 2 + static_cast<int>(rng() % 4));
            const auto r = index_raster(from_intervals(ivs));
            const auto v = delta1(r);
            CHECK(std::abs(v.value - delta1_oracle_1d(ivs)) <= 3 * r.grid.h / r.measure());
        }
    }

    TEST_CASE("deltaH closed forms")
    {
        const auto rep = index_report(SetExpr::unite({iv(0, 1), iv(3, 4)}));
        CHECK(rep.rho_e == doctest::Approx(2.0).epsilon(1e-3));
        CHECK(rep.delta_h == doctest::Approx(1.0 / 3.0).epsilon(1e-3));

        const auto shell = SetExpr::diff(ball2(0, 0, std::sqrt(2.0)), ball2(0, 0, 1.0));
        const auto rs = index_report(shell);
        CHECK(std::abs(rs.delta_h - 1.0 / (std::sqrt(2.0) + 1.0)) <= raster_tolerance(rs.h, rs.r_e));
        CHECK(rs.delta_h >= (rs.rho_e - rs.r_e) / (rs.rho_e + rs.r_e) - 1e-12);
    }

    TEST_CASE("report invariants")
    {
        const auto e = SetExpr::unite({ball2(0, 0, 1), SetExpr::box(2, {2, -0.5, 0}, {3, 0.5, 0})});
        const auto rep = index_report(e);
        CHECK(rep.delta1 >= 0.0);
        CHECK(rep.delta1 < 1.0);
        CHECK(rep.delta_h >= 0.0);
        CHECK(rep.delta_h < 1.0);
        CHECK(rep.r_e <= rep.rho_e);
        CHECK(rep.rho_e >= rep.diameter / 2 - 1e-12);
        const auto j = rep.to_json();
        CHECK(j.contains("delta1"));
        CHECK(j.contains("deltaH"));
    }

    TEST_CASE("scale and translation invariance")
    {
        const auto e = SetExpr::unite({ball2(0, 0, 1), ball2(2.5, 0.5, 0.6)});
        const auto base = index_report(e);
        const double tol = raster_tolerance(base.h, base.r_e);
        for (double mu : {0.5, 2.0, 7.0}) {
            const auto rep = index_report(e.scaled(mu));
            CHECK(std::abs(rep.delta1 - base.delta1) <= tol);
            CHECK(std::abs(rep.delta_h - base.delta_h) <= tol);
        }
        const auto moved = index_report(e.translated({3.3, -1.7, 0}));
        CHECK(std::abs(moved.delta1 - base.delta1) <= tol);
        CHECK(std::abs(moved.delta_h - base.delta_h) <= tol);
    }

    TEST_CASE("raster dumps round trip")
    {
        const auto r = rasterize(ball2(0, 0, 1), 0.1);
        const auto path = std::filesystem::temp_directory_path() / "fragrd_raster_test.bin";
        write_raster(path, r);
        const auto back = read_raster(path);
        CHECK(back.grid.first == r.grid.first);
        CHECK(back.grid.extents == r.grid.extents);
        CHECK(back.coverage == r.coverage);
        std::filesystem::remove(path);
    }
}
