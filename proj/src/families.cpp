#include <fragrd/families.hpp>
#include <fragrd/geom/raster.hpp>

#include <algorithm>
#include <map>

namespace fragrd::families {

namespace {

void require(bool ok, const std::string& what)
{
    if (!ok) throw ConfigError("family: " + what);
}

const std::map<FamilyTag, std::string>& tag_names()
{
    static const std::map<FamilyTag, std::string> names{
        {FamilyTag::En, "En"},         {FamilyTag::Fn, "Fn"},       {FamilyTag::Gn, "Gn"},
        {FamilyTag::Dn_a, "Dn_a"},     {FamilyTag::On, "On"},       {FamilyTag::Qp, "Qp"},
        {FamilyTag::Hn, "Hn"},         {FamilyTag::Cube, "Cube"},   {FamilyTag::CubeBall, "CubeBall"},
        {FamilyTag::Shell, "Shell"},   {FamilyTag::Interval, "Interval"}, {FamilyTag::BallSet, "BallSet"}};
    return names;
}

nlohmann::json point_json(const Point& p, int dim)
{
    auto a = nlohmann::json::array();
    for (int k = 0; k < dim; ++k) a.push_back(p[k]);
    return a;
}

Point point_from(const nlohmann::json& j, int dim)
{
    Point p{};
    if (j.is_number()) {
        p[0] = j.get<double>();
        return p;
    }
    require(j.is_array() && static_cast<int>(j.size()) == dim, "point must have " + std::to_string(dim) + " coordinates");
    for (int k = 0; k < dim; ++k) p[k] = j[k].get<double>();
    return p;
}

SetExpr cube(int dim, const Point& c, double side)
{
    Point lo{}, hi{};
    for (int k = 0; k < dim; ++k) {
        lo[k] = c[k] - side / 2;
        hi[k] = c[k] + side / 2;
    }
    return SetExpr::box(dim, lo, hi);
}

// Cubes of side `side` centered on the lattice points (Z^N / n) inside B_radius.
std::vector<SetExpr> lattice_cubes(int dim, int n, double radius, double side)
{
    std::vector<SetExpr> parts;
    for (const auto& z : lattice_points_in_ball(dim, n * radius)) {
        Point c{};
        for (int k = 0; k < dim; ++k) c[k] = static_cast<double>(z[k]) / n;
        parts.push_back(cube(dim, c, side));
    }
    return parts;
}

} // namespace

std::string tag_name(FamilyTag tag) { return tag_names().at(tag); }

FamilyTag parse_tag(const std::string& name)
{
    for (const auto& [t, s] : tag_names())
        if (s == name) return t;
    throw ConfigError("unknown family '" + name + "'");
}

std::vector<std::array<long, 3>> lattice_points_in_ball(int dim, double radius)
{
    check_dim(dim);
    std::vector<std::array<long, 3>> out;
    const long m = static_cast<long>(std::ceil(radius));
    const double r2 = radius * radius;
    const long my = dim >= 2 ? m : 0, mz = dim >= 3 ? m : 0;
    for (long i = -m; i <= m; ++i)
        for (long j = -my; j <= my; ++j)
            for (long l = -mz; l <= mz; ++l) {
                const double d2 = static_cast<double>(i * i + j * j + l * l);
                if (d2 < r2) out.push_back({i, j, l});
            }
    return out;
}

SetExpr fig1_E2(double alpha, double z, int k)
{
    require(alpha > 0.0 && alpha < 1.0, "fig1 E2 needs alpha in (0,1) so the intervals stay disjoint");
    require(z > 0.0, "fig1 E2 needs z > 0");
    require(k >= 0, "fig1 E2 needs k >= 0");
    std::vector<SetExpr> parts;
    for (int x = -k; x <= k; ++x) parts.push_back(SetExpr::interval((x - alpha / 2) / z, (x + alpha / 2) / z));
    return SetExpr::unite(parts);
}

nlohmann::json FamilySpec::to_json() const
{
    nlohmann::json j{{"family", tag_name(tag)}, {"dim", dim}};
    switch (tag) {
    case FamilyTag::En: j["n"] = n; break;
    case FamilyTag::Fn: j["n"] = n; j["nu"] = nu; break;
    case FamilyTag::Gn: j["n"] = n; j["x"] = point_json(x, dim); j["y"] = point_json(y, dim); break;
    case FamilyTag::Dn_a: j["a"] = a; j["r"] = r; break;
    case FamilyTag::On: j["n"] = n; j["R"] = R; j["e"] = point_json(e, dim); break;
    case FamilyTag::Qp: j["Rprime"] = Rprime; j["r"] = r; j["x"] = point_json(x, dim); break;
    case FamilyTag::Hn:
        j["n"] = n;
        j["alpha"] = alpha;
        j["beta"] = beta;
        j["R"] = R;
        j["Rprime"] = Rprime;
        if (anchor) j["anchor"] = point_json(*anchor, dim);
        break;
    case FamilyTag::Cube: j["a"] = a; j["center"] = point_json(center, dim); break;
    case FamilyTag::CubeBall: j["a"] = a; j["r"] = r; j["center"] = point_json(center, dim); break;
    case FamilyTag::Shell: j["a"] = a; break;
    case FamilyTag::Interval: j["lo"] = lo; j["hi"] = hi; break;
    case FamilyTag::BallSet: {
        auto c = nlohmann::json::array();
        for (const auto& p : centers) c.push_back(point_json(p, dim));
        j["centers"] = c;
        j["radii"] = radii;
        break;
    }
    }
    return j;
}

FamilySpec FamilySpec::from_json(const nlohmann::json& doc)
{
    try {
        require(doc.is_object(), "family spec must be an object");
        FamilySpec s;
        s.tag = parse_tag(doc.at("family").get<std::string>());
        s.dim = doc.value("dim", 1);
        check_dim(s.dim);
        s.n = doc.value("n", s.n);
        s.nu = doc.value("nu", s.nu);
        s.alpha = doc.value("alpha", s.alpha);
        s.beta = doc.value("beta", s.beta);
        s.R = doc.value("R", s.R);
        s.Rprime = doc.value("Rprime", s.Rprime);
        s.a = doc.value("a", s.a);
        s.r = doc.value("r", s.r);
        s.lo = doc.value("lo", s.lo);
        s.hi = doc.value("hi", s.hi);
        if (doc.contains("x")) s.x = point_from(doc["x"], s.dim);
        if (doc.contains("y")) s.y = point_from(doc["y"], s.dim);
        if (doc.contains("e")) s.e = point_from(doc["e"], s.dim);
        if (doc.contains("center")) s.center = point_from(doc["center"], s.dim);
        if (doc.contains("anchor")) s.anchor = point_from(doc["anchor"], s.dim);
        if (doc.contains("centers"))
            for (const auto& c : doc["centers"]) s.centers.push_back(point_from(c, s.dim));
        if (doc.contains("radii")) s.radii = doc["radii"].get<std::vector<double>>();
        return s;
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("family spec: ") + ex.what());
    }
}

SetExpr build(const FamilySpec& s)
{
    check_dim(s.dim);
    const int N = s.dim;
    switch (s.tag) {
    case FamilyTag::En: {
        require(s.n >= 2, "En needs n >= 2 (no lattice point in (0,1)^N otherwise)");
        std::vector<SetExpr> parts;
        const double rad = 1.0 / (static_cast<double>(s.n) * s.n);
        const int ny = N >= 2 ? s.n - 1 : 1, nz = N >= 3 ? s.n - 1 : 1;
        for (int i = 1; i < s.n; ++i)
            for (int j = 1; j <= ny; ++j)
                for (int l = 1; l <= nz; ++l) {
                    const Point c{static_cast<double>(i) / s.n, N >= 2 ? static_cast<double>(j) / s.n : 0.0,
                                  N >= 3 ? static_cast<double>(l) / s.n : 0.0};
                    parts.push_back(SetExpr::ball(N, c, rad));
                }
        return SetExpr::unite(parts);
    }
    case FamilyTag::Fn:
        require(s.n >= 1, "Fn needs n >= 1");
        require(s.nu > 0.0 && s.nu < 1.0, "Fn needs nu in (0,1)");
        return SetExpr::unite(lattice_cubes(N, s.n, 1.0, s.nu / s.n));
    case FamilyTag::Gn: {
        require(s.n >= 1, "Gn needs n >= 1");
        const double rad = 1.0 / s.n;
        require(distance(s.x, s.y, N) >= 2 * rad, "Gn balls must be disjoint (|x-y| >= 2/n)");
        return SetExpr::unite({SetExpr::ball(N, s.x, rad), SetExpr::ball(N, s.y, rad)});
    }
    case FamilyTag::Dn_a:
        require(N == 1, "Dn_a is one-dimensional");
        require(s.a > 0.0 && s.r > 0.0, "Dn_a needs a > 0 and r > 0");
        return SetExpr::unite({SetExpr::interval(-s.a - s.r, -s.a), SetExpr::interval(s.a, s.a + s.r)});
    case FamilyTag::On: {
        require(s.n >= 1 && s.R > 0.0, "On needs n >= 1 and R > 0");
        const double rad = s.R / std::pow(static_cast<double>(s.n), 1.0 / N);
        double elen = 0.0;
        for (int k = 0; k < N; ++k) elen += s.e[k] * s.e[k];
        require(elen > 0.0, "On needs a nonzero direction e");
        require(std::sqrt(elen) >= 2 * rad || s.n == 1, "On balls must be disjoint (|e| >= 2R/n^{1/N})");
        std::vector<SetExpr> parts;
        for (int k = 1; k <= s.n; ++k) {
            Point c{};
            for (int d = 0; d < N; ++d) c[d] = k * s.e[d];
            parts.push_back(SetExpr::ball(N, c, rad));
        }
        return SetExpr::unite(parts);
    }
    case FamilyTag::Qp: {
        require(s.Rprime > 0.0 && s.r > 0.0, "Qp needs R' > 0 and r' > 0");
        Point origin{};
        require(distance(s.x, origin, N) >= s.Rprime + s.r, "Qp satellite must not overlap B_R'");
        return SetExpr::unite({SetExpr::ball(N, origin, s.Rprime), SetExpr::ball(N, s.x, s.r)});
    }
    case FamilyTag::Hn:
        return thm1_homogenization(N, s.alpha, s.beta, s.R, s.Rprime, s.n, s.anchor).H;
    case FamilyTag::Cube:
        require(s.a > 0.0, "Cube needs a > 0");
        return cube(N, s.center, s.a);
    case FamilyTag::CubeBall: {
        require(s.a > 0.0 && s.r > 0.0, "CubeBall needs a > 0 and r > 0");
        const auto ball = SetExpr::ball(N, s.center, s.r);
        if (s.r >= s.a * std::sqrt(static_cast<double>(N)) / 2) return cube(N, s.center, s.a);
        if (s.r <= s.a / 2) return ball;
        return SetExpr::intersect({cube(N, s.center, s.a), ball});
    }
    case FamilyTag::Shell: {
        require(s.a > 0.0, "Shell needs a > 0");
        const Point origin{};
        const double outer = std::pow(std::pow(s.a, N) + 1.0, 1.0 / N);
        return SetExpr::diff(SetExpr::ball(N, origin, outer), SetExpr::ball(N, origin, s.a));
    }
    case FamilyTag::Interval:
        require(N == 1, "Interval is one-dimensional");
        require(s.hi > s.lo, "Interval needs hi > lo");
        return SetExpr::interval(s.lo, s.hi);
    case FamilyTag::BallSet: {
        require(!s.centers.empty() && s.centers.size() == s.radii.size(), "BallSet needs matching centers and radii");
        std::vector<SetExpr> parts;
        for (std::size_t i = 0; i < s.centers.size(); ++i) parts.push_back(SetExpr::ball(N, s.centers[i], s.radii[i]));
        return SetExpr::unite(parts);
    }
    }
    throw ConfigError("family: unhandled tag");
}

std::optional<double> closed_form_measure(const FamilySpec& s)
{
    const int N = s.dim;
    const double w = unit_ball_volume(N);
    switch (s.tag) {
    case FamilyTag::En:
        return std::pow(s.n - 1.0, N) * w * std::pow(1.0 / (static_cast<double>(s.n) * s.n), N);
    case FamilyTag::Fn:
        return static_cast<double>(lattice_points_in_ball(N, s.n).size()) * std::pow(s.nu / s.n, N);
    case FamilyTag::Gn: return 2.0 * w * std::pow(1.0 / s.n, N);
    case FamilyTag::Dn_a: return 2.0 * s.r;
    case FamilyTag::On: return w * std::pow(s.R, N);
    case FamilyTag::Qp: return w * (std::pow(s.Rprime, N) + std::pow(s.r, N));
    case FamilyTag::Cube: return std::pow(s.a, N);
    case FamilyTag::Shell: return w;
    case FamilyTag::Interval: return s.hi - s.lo;
    default: return std::nullopt;
    }
}

HomogenizationPair thm1_homogenization(int dim, double alpha, double beta, double R, double Rprime, int n,
                                       std::optional<Point> far_anchor, double theta)
{
    check_dim(dim);
    require(theta < alpha && alpha < beta && beta < 1.0, "homogenization needs theta < alpha < beta < 1");
    require(Rprime > 0.0 && Rprime < R, "homogenization needs 0 < R' < R");
    require(std::pow(alpha, 1.0 / dim) * R < Rprime, "homogenization needs alpha^{1/N} R < R'");
    require(n >= 1, "homogenization needs n >= 1");
    const double side_f = std::pow(alpha, 1.0 / dim) / n;
    const double side_g = std::pow(beta, 1.0 / dim) / n;
    const auto fparts = lattice_cubes(dim, n, R, side_f);
    const auto gparts = lattice_cubes(dim, n, Rprime, side_g);
    require(!fparts.empty() && !gparts.empty(), "homogenization lattices are empty at this n");

    HomogenizationPair out;
    out.F = SetExpr::unite(fparts);
    out.G = SetExpr::unite(gparts);
    out.measure_F = static_cast<double>(fparts.size()) * std::pow(side_f, dim);
    out.measure_G = static_cast<double>(gparts.size()) * std::pow(side_g, dim);
    const double w = unit_ball_volume(dim);
    if (!(out.measure_F > out.measure_G))
        throw GeometryError("homogenization: lambda(F_n) <= lambda(G_n) at n = " + std::to_string(n));
    out.rho_n = std::pow((out.measure_F - out.measure_G) / w, 1.0 / dim);
    const double reach_g = Rprime + side_g * std::sqrt(static_cast<double>(dim)) / 2;
    if (far_anchor) {
        out.anchor = *far_anchor;
    } else {
        out.anchor = Point{};
        out.anchor[0] = 10.0 * (Rprime + out.rho_n + 1.0);
    }
    Point origin{};
    if (distance(out.anchor, origin, dim) <= reach_g + out.rho_n)
        throw GeometryError("homogenization: the far ball overlaps G_n");
    const auto far_ball = SetExpr::ball(dim, out.anchor, out.rho_n);
    out.H = SetExpr::unite({out.G, far_ball});
    out.measure_H = out.measure_G + w * std::pow(out.rho_n, dim);

    const double lim_f = alpha * w * std::pow(R, dim);
    const double lim_g = beta * w * std::pow(Rprime, dim);
    out.gap_report = {{"n", n},
                      {"lambda_F", out.measure_F},
                      {"lambda_G", out.measure_G},
                      {"lambda_H", out.measure_H},
                      {"lambda_F_limit", lim_f},
                      {"lambda_G_limit", lim_g},
                      {"lambda_F_gap", out.measure_F - lim_f},
                      {"lambda_G_gap", out.measure_G - lim_g},
                      {"delta1_F_limit", 1.0 - alpha},
                      {"delta1_H_limit", 1.0 - beta},
                      {"rho_n", out.rho_n},
                      {"anchor", point_json(out.anchor, dim)}};
    return out;
}

double cube_ball_measure(int dim, double a, double r)
{
    FamilySpec s;
    s.tag = FamilyTag::CubeBall;
    s.dim = dim;
    s.a = a;
    s.r = r;
    return geom::measure(build(s), a / 2000.0).value;
}

CubeBallPair thm1_cubeball(int dim, double a_star, double eps_star, double sigma, double beta, double eta,
                           std::optional<Point> far_anchor)
{
    require(dim >= 2, "cube-ball construction needs N >= 2");
    require(a_star > 0.0 && eps_star > 0.0, "cube-ball construction needs a* > 0 and eps* > 0");
    const double w = unit_ball_volume(dim);
    const double sqrtN = std::sqrt(static_cast<double>(dim));
    require(sigma > 1.0 / std::pow(w, 1.0 / dim) && sigma < sqrtN / 2, "sigma must lie in (omega_N^{-1/N}, sqrt(N)/2)");
    require(beta > 0.0 && beta < 1.0, "beta must lie in (0,1)");

    const double side_c = a_star + beta * eps_star;
    const double r = sigma * side_c;
    const double lam_c = cube_ball_measure(dim, side_c, r);
    const double cap = w * std::pow(a_star, dim) / std::pow(2.0, dim);
    auto admissible = [&](double et) {
        const double side1 = a_star + et * eps_star;
        const double gap = std::pow(side1, dim) - lam_c;
        return gap > 0.0 && gap < cap && side_c / 2 < side1 / std::pow(w, 1.0 / dim);
    };
    if (eta <= 0.0) {
        for (int k = 1; k < 10000; ++k) {
            const double et = beta * (1.0 - k / 10000.0);
            if (admissible(et)) {
                eta = et;
                break;
            }
        }
        if (eta <= 0.0) throw GeometryError("cube-ball construction: no admissible eta in (0, beta)");
    } else {
        require(eta < beta, "eta must lie in (0, beta)");
        if (!admissible(eta)) throw GeometryError("cube-ball construction: eta violates the measure constraints");
    }
    CubeBallPair out;
    out.eta = eta;
    out.r = r;
    out.side_E1 = a_star + eta * eps_star;
    out.side_C = side_c;
    const double lam_e1 = std::pow(out.side_E1, dim);
    out.side_Qx = std::pow(lam_e1 - lam_c, 1.0 / dim);
    const double reach_c = std::min(r, side_c * sqrtN / 2);
    if (far_anchor) {
        out.anchor = *far_anchor;
    } else {
        out.anchor = Point{};
        out.anchor[0] = 10.0 * (out.side_E1 + 1.0);
    }
    Point origin{};
    if (distance(out.anchor, origin, dim) <= reach_c + out.side_Qx * sqrtN / 2)
        throw GeometryError("cube-ball construction: the far cube overlaps the cube-ball part");
    FamilySpec e1;
    e1.tag = FamilyTag::Cube;
    e1.dim = dim;
    e1.a = out.side_E1;
    out.E1 = build(e1);
    FamilySpec c;
    c.tag = FamilyTag::CubeBall;
    c.dim = dim;
    c.a = side_c;
    c.r = r;
    out.C = build(c);
    FamilySpec qx;
    qx.tag = FamilyTag::Cube;
    qx.dim = dim;
    qx.a = out.side_Qx;
    qx.center = out.anchor;
    out.E2 = SetExpr::unite({out.C, build(qx)});
    out.report = {{"a_star", a_star},
                  {"eps_star", eps_star},
                  {"sigma", sigma},
                  {"beta", beta},
                  {"eta", eta},
                  {"r", r},
                  {"side_E1", out.side_E1},
                  {"side_C", side_c},
                  {"side_Qx", out.side_Qx},
                  {"lambda_E1", lam_e1},
                  {"lambda_C", lam_c},
                  {"lambda_Qx", lam_e1 - lam_c},
                  {"lambda_Qx_cap", cap},
                  {"anchor", point_json(out.anchor, dim)}};
    return out;
}

} // namespace fragrd::families
