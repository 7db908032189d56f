#include <fragrd/reaction.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fragrd {

namespace {

constexpr int kSamples = 20000;

// Real roots of a + b t + c t^2 in [lo, hi].
void quadratic_roots(double a, double b, double c, double lo, double hi, std::vector<double>& out)
{
    auto keep = [&](double t) {
        if (t >= lo && t <= hi)
            out.push_back(t);
    };
    if (std::abs(c) < 1e-300) {
        if (std::abs(b) > 1e-300)
            keep(-a / b);
        return;
    }
    const double disc = b * b - 4 * a * c;
    if (disc < 0)
        return;
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    if (q != 0.0) {
        keep(q / c);
        keep(a / q);
    } else {
        keep(0.0);
    }
}

} // namespace

BistableReaction BistableReaction::cubic(double theta)
{
    if (!(theta > 0.0 && theta < 1.0))
        throw ConfigError("reaction: theta must lie in (0,1)");
    BistableReaction f;
    f.kind_ = Kind::Cubic;
    f.theta_ = theta;
    // s(1-s)(s-theta) = -theta s + (1+theta) s^2 - s^3
    f.pieces_.push_back({0.0, 1.0, {0.0, -theta, 1.0 + theta, -1.0}});
    f.finalize();
    return f;
}

BistableReaction BistableReaction::table(std::vector<std::pair<double, double>> points)
{
    const std::size_t n = points.size();
    if (n < 4)
        throw ConfigError("reaction table: need at least 4 points");
    if (points.front().first != 0.0 || points.back().first != 1.0)
        throw ConfigError("reaction table: abscissae must start at 0 and end at 1");
    for (std::size_t i = 1; i < n; ++i)
        if (!(points[i].first > points[i - 1].first))
            throw ConfigError("reaction table: abscissae must be strictly increasing");
    if (std::abs(points.front().second) > 1e-12 || std::abs(points.back().second) > 1e-12)
        throw ConfigError("reaction table: f(0) and f(1) must vanish");
    points.front().second = 0.0;
    points.back().second = 0.0;

    // Natural spline: solve for second derivatives with the Thomas algorithm.
    std::vector<double> hseg(n - 1), m2(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i)
        hseg[i] = points[i + 1].first - points[i].first;
    if (n > 2) {
        const std::size_t k = n - 2;
        std::vector<double> diag(k), upper(k), rhs(k);
        for (std::size_t j = 0; j < k; ++j) {
            const std::size_t i = j + 1;
            diag[j] = 2 * (hseg[i - 1] + hseg[i]);
            upper[j] = hseg[i];
            rhs[j] = 6 * ((points[i + 1].second - points[i].second) / hseg[i] -
                          (points[i].second - points[i - 1].second) / hseg[i - 1]);
        }
        for (std::size_t j = 1; j < k; ++j) {
            const double w = hseg[j] / diag[j - 1];
            diag[j] -= w * upper[j - 1];
            rhs[j] -= w * rhs[j - 1];
        }
        std::vector<double> sol(k);
        sol[k - 1] = rhs[k - 1] / diag[k - 1];
        for (std::size_t j = k - 1; j-- > 0;)
            sol[j] = (rhs[j] - upper[j] * sol[j + 1]) / diag[j];
        for (std::size_t j = 0; j < k; ++j)
            m2[j + 1] = sol[j];
    }

    BistableReaction f;
    f.kind_ = Kind::Table;
    f.points_ = points;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double hi = hseg[i];
        const double y0 = points[i].second, y1 = points[i + 1].second;
        Piece p;
        p.x0 = points[i].first;
        p.x1 = points[i + 1].first;
        p.c[0] = y0;
        p.c[1] = (y1 - y0) / hi - hi * (2 * m2[i] + m2[i + 1]) / 6;
        p.c[2] = m2[i] / 2;
        p.c[3] = (m2[i + 1] - m2[i]) / (6 * hi);
        f.pieces_.push_back(p);
    }

    // Locate the single sign change and validate the bistable pattern.
    int changes = 0;
    double prev_s = 0.0, prev_v = 0.0;
    double crossing_lo = 0.0, crossing_hi = 1.0;
    for (int i = 1; i < kSamples; ++i) {
        const double s = static_cast<double>(i) / kSamples;
        const double v = f.value_extended(s);
        if (v == 0.0)
            continue;
        if (prev_v != 0.0 && (v > 0) != (prev_v > 0)) {
            ++changes;
            crossing_lo = prev_s;
            crossing_hi = s;
        }
        if (prev_v == 0.0 && v > 0)
            throw ConfigError("reaction table: f must be negative near 0");
        prev_s = s;
        prev_v = v;
    }
    if (prev_v < 0)
        throw ConfigError("reaction table: f must be positive near 1");
    if (changes != 1)
        throw ConfigError("reaction table: f must change sign exactly once in (0,1)");
    double a = crossing_lo, b = crossing_hi;
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        const double mid = 0.5 * (a + b);
        (f.value_extended(mid) < 0 ? a : b) = mid;
    }
    f.theta_ = 0.5 * (a + b);
    f.finalize();
    return f;
}

BistableReaction BistableReaction::from_json(const nlohmann::json& doc)
{
    const std::string kind = doc.value("kind", std::string("cubic"));
    if (kind == "cubic") {
        if (!doc.contains("theta") || !doc["theta"].is_number())
            throw ConfigError("reaction: cubic kind needs a numeric theta");
        return cubic(doc["theta"].get<double>());
    }
    if (kind == "table") {
        if (!doc.contains("points") || !doc["points"].is_array())
            throw ConfigError("reaction: table kind needs a points array");
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : doc["points"]) {
            if (!p.is_array() || p.size() != 2)
                throw ConfigError("reaction: each table point is [s, f]");
            pts.emplace_back(p[0].get<double>(), p[1].get<double>());
        }
        return table(std::move(pts));
    }
    throw ConfigError("reaction: unknown kind '" + kind + "'");
}

nlohmann::json BistableReaction::to_json() const
{
    if (kind_ == Kind::Cubic)
        return {{"kind", "cubic"}, {"theta", theta_}};
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& [s, v] : points_)
        pts.push_back({s, v});
    return {{"kind", "table"}, {"points", pts}};
}

const BistableReaction::Piece& BistableReaction::piece_for(double u) const
{
    if (pieces_.size() == 1 || u <= pieces_.front().x1)
        return pieces_.front();
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), u,
                               [](double v, const Piece& p) { return v < p.x0; });
    return *(it - 1);
}

double BistableReaction::value_extended(double u) const
{
    if (kind_ == Kind::Cubic)
        return u * (1 - u) * (u - theta_);
    const Piece& p = piece_for(u);
    const double t = u - p.x0;
    return p.c[0] + t * (p.c[1] + t * (p.c[2] + t * p.c[3]));
}

double BistableReaction::operator()(double u) const
{
    if (!(u >= 0.0 && u <= 1.0))
        throw SolverAbort("reaction: density " + std::to_string(u) + " outside [0,1]");
    return value_extended(u);
}

double BistableReaction::primitive(double u) const
{
    double acc = 0.0;
    for (const auto& p : pieces_) {
        const bool last = &p == &pieces_.back();
        const double l = (u >= p.x1 && !last) ? p.x1 - p.x0 : u - p.x0;
        if (l <= 0 && &p != &pieces_.front())
            break;
        acc += l * (p.c[0] + l * (p.c[1] / 2 + l * (p.c[2] / 3 + l * p.c[3] / 4)));
        if (u < p.x1)
            break;
    }
    return acc;
}

double BistableReaction::derivative(double u) const
{
    const Piece& p = piece_for(u);
    const double t = u - p.x0;
    return p.c[1] + t * (2 * p.c[2] + t * 3 * p.c[3]);
}

void BistableReaction::finalize()
{
    // Extrema by dense sampling plus the critical points of each piece.
    double mp = 0.0, mv = 0.0;
    auto visit = [&](double s) {
        mp = std::max(mp, std::abs(derivative(s)));
        mv = std::max(mv, std::abs(value_extended(s)));
    };
    for (int i = 0; i <= kSamples; ++i)
        visit(static_cast<double>(i) / kSamples);
    std::vector<double> crit;
    for (const auto& p : pieces_) {
        const double len = p.x1 - p.x0;
        crit.clear();
        quadratic_roots(p.c[1], 2 * p.c[2], 3 * p.c[3], 0.0, len, crit); // f' = 0
        if (std::abs(p.c[3]) > 1e-300) {
            const double t = -p.c[2] / (3 * p.c[3]); // f'' = 0
            if (t >= 0 && t <= len)
                crit.push_back(t);
        }
        crit.push_back(0.0);
        crit.push_back(len);
        for (double t : crit)
            visit(p.x0 + t);
    }
    m_prime_ = mp;
    m_ = mv;
    mass_ = primitive(1.0);
}

double small_mass_epsilon(const BistableReaction& f, int dim)
{
    check_dim(dim);
    return std::exp(-f.m_prime()) * std::pow(4 * std::numbers::pi, dim / 2.0) * f.theta() / 2;
}

double exact_front_speed(const BistableReaction& f)
{
    if (f.kind() == BistableReaction::Kind::Cubic)
        return (1 - 2 * f.theta()) / std::sqrt(2.0);
    return shooting_front_speed(f);
}

namespace {

// +1 when the orbit leaving (1,0) along the unstable manifold overshoots
// phi = 0 (c too small), -1 when its energy p^2/2 + G(phi) drops below the
// value 0 at the target (c too large).
template <class F, class P>
int shoot(const F& g, const P& G, double gp1, double c)
{
    const double lambda = 0.5 * (-c + std::sqrt(c * c - 4 * gp1));
    const double delta = 1e-8;
    double phi = 1.0 - delta, p = -delta * lambda;
    const double dt = 2e-3;
    auto rhs = [&](double ph, double pp) { return std::pair{pp, -c * pp - g(ph)}; };
    for (long step = 0; step < 20000000; ++step) {
        const auto [k1a, k1b] = rhs(phi, p);
        const auto [k2a, k2b] = rhs(phi + 0.5 * dt * k1a, p + 0.5 * dt * k1b);
        const auto [k3a, k3b] = rhs(phi + 0.5 * dt * k2a, p + 0.5 * dt * k2b);
        const auto [k4a, k4b] = rhs(phi + dt * k3a, p + dt * k3b);
        phi += dt / 6 * (k1a + 2 * k2a + 2 * k3a + k4a);
        p += dt / 6 * (k1b + 2 * k2b + 2 * k3b + k4b);
        if (phi < 0.0)
            return +1;
        if (p > 0.0 || 0.5 * p * p + G(phi) < 0.0)
            return -1;
    }
    throw SolverAbort("shooting: orbit neither crossed nor turned back");
}

} // namespace

double shooting_front_speed(const BistableReaction& f, double tol)
{
    // Fronts with negative mass travel the other way; reflect s -> 1 - s.
    const bool reflect = f.mass() < 0;
    auto g = [&](double s) { return reflect ? -f.value_extended(1 - s) : f.value_extended(s); };
    auto G = [&](double s) { return reflect ? f.primitive(1 - s) - f.mass() : f.primitive(s); };
    const double gp1 = reflect ? f.derivative(0.0) : f.derivative(1.0);
    if (!(gp1 < 0))
        throw SolverAbort("shooting: 1 is not a stable state (f'(1) >= 0)");
    double lo = 0.0, hi = 2 * std::sqrt(f.m_prime()) + 1.0;
    if (shoot(g, G, gp1, hi) > 0)
        throw SolverAbort("shooting: no bracketing speed found");
    if (std::abs(f.mass()) < 1e-14)
        return 0.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (shoot(g, G, gp1, mid) > 0 ? lo : hi) = mid;
    }
    const double c = 0.5 * (lo + hi);
    return reflect ? -c : c;
}

} // namespace fragrd
