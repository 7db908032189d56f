#include <fragrd/geom/set_expr.hpp>

#include <algorithm>
#include <cstdint>
#include <limits>

namespace fragrd::geom {

namespace {

// Uniform bucket grid over the children of a large union.
struct Buckets {
    Point lo{};
    Point inv{};
    std::array<int, kMaxDim> n{1, 1, 1};
    std::vector<std::vector<std::uint32_t>> cells;

    int clamp_index(int axis, double x) const
    {
        const double t = std::floor((x - lo[axis]) * inv[axis]);
        if (t < 0) return 0;
        if (t >= n[axis]) return n[axis] - 1;
        return static_cast<int>(t);
    }
};

constexpr std::size_t kBucketThreshold = 16;

} // namespace

struct SetExpr::Node {
    Kind kind;
    int dim;
    Point a{}; // ball center or box lo
    Point b{}; // box hi
    double radius = 0.0;
    std::vector<SetExpr> children;
    Bounds box{}; // bounding box, cached for unions
    std::shared_ptr<const Buckets> buckets;
};

namespace {

void require(bool ok, const std::string& what)
{
    if (!ok) throw ConfigError("SetExpr: " + what);
}

bool finite_point(const Point& p, int dim)
{
    for (int k = 0; k < dim; ++k)
        if (!std::isfinite(p[k])) return false;
    return true;
}

int common_dim(const std::vector<SetExpr>& parts)
{
    require(!parts.empty(), "composite node needs at least one child");
    const int dim = parts.front().dim();
    for (const auto& p : parts)
        require(p.dim() == dim, "children of a composite node must share the dimension");
    return dim;
}

} // namespace

SetExpr::SetExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

SetExpr SetExpr::ball(int dim, const Point& center, double radius)
{
    check_dim(dim);
    require(finite_point(center, dim), "ball center must be finite");
    require(std::isfinite(radius) && radius > 0.0, "ball radius must be positive");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Ball;
    n->dim = dim;
    n->a = center;
    n->radius = radius;
    for (int k = dim; k < kMaxDim; ++k) n->a[k] = 0.0;
    return SetExpr(std::move(n));
}

SetExpr SetExpr::box(int dim, const Point& lo, const Point& hi)
{
    check_dim(dim);
    require(finite_point(lo, dim) && finite_point(hi, dim), "box corners must be finite");
    for (int k = 0; k < dim; ++k)
        require(hi[k] > lo[k], "box side lengths must be positive");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Box;
    n->dim = dim;
    n->a = lo;
    n->b = hi;
    for (int k = dim; k < kMaxDim; ++k) n->a[k] = n->b[k] = 0.0;
    return SetExpr(std::move(n));
}

SetExpr SetExpr::interval(double lo, double hi) { return box(1, {lo, 0, 0}, {hi, 0, 0}); }

SetExpr SetExpr::unite(std::vector<SetExpr> parts)
{
    const int dim = common_dim(parts);
    if (parts.size() == 1) return parts.front();
    auto n = std::make_shared<Node>();
    n->kind = Kind::Union;
    n->dim = dim;
    n->children = std::move(parts);
    SetExpr out(n);
    n->box = out.bounding_box();
    if (n->children.size() > kBucketThreshold && !n->box.empty(dim)) {
        auto bk = std::make_shared<Buckets>();
        const double per_axis = std::pow(static_cast<double>(n->children.size()), 1.0 / dim);
        const int count = std::clamp(static_cast<int>(std::ceil(per_axis)), 1, 256);
        for (int k = 0; k < dim; ++k) {
            bk->lo[k] = n->box.lo[k];
            bk->n[k] = count;
            bk->inv[k] = count / n->box.extent(k);
        }
        std::size_t total = 1;
        for (int k = 0; k < dim; ++k) total *= static_cast<std::size_t>(bk->n[k]);
        bk->cells.resize(total);
        for (std::uint32_t c = 0; c < n->children.size(); ++c) {
            const Bounds cb = n->children[c].bounding_box();
            if (cb.empty(dim)) continue;
            std::array<int, kMaxDim> i0{0, 0, 0}, i1{0, 0, 0};
            for (int k = 0; k < dim; ++k) {
                i0[k] = bk->clamp_index(k, cb.lo[k]);
                i1[k] = bk->clamp_index(k, cb.hi[k]);
            }
            for (int x = i0[0]; x <= i1[0]; ++x)
                for (int y = i0[1]; y <= i1[1]; ++y)
                    for (int z = i0[2]; z <= i1[2]; ++z)
                        bk->cells[(static_cast<std::size_t>(x) * bk->n[1] + y) * bk->n[2] + z].push_back(c);
        }
        n->buckets = std::move(bk);
    }
    return out;
}

SetExpr SetExpr::intersect(std::vector<SetExpr> parts)
{
    const int dim = common_dim(parts);
    if (parts.size() == 1) return parts.front();
    auto n = std::make_shared<Node>();
    n->kind = Kind::Intersect;
    n->dim = dim;
    n->children = std::move(parts);
    return SetExpr(std::move(n));
}

SetExpr SetExpr::diff(const SetExpr& a, const SetExpr& b)
{
    require(a.dim() == b.dim(), "difference operands must share the dimension");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Diff;
    n->dim = a.dim();
    n->children = {a, b};
    return SetExpr(std::move(n));
}

int SetExpr::dim() const { return node_->dim; }
SetExpr::Kind SetExpr::kind() const { return node_->kind; }

const Point& SetExpr::center() const
{
    require(node_->kind == Kind::Ball, "center() on a non-ball node");
    return node_->a;
}

double SetExpr::radius() const
{
    require(node_->kind == Kind::Ball, "radius() on a non-ball node");
    return node_->radius;
}

const Point& SetExpr::lo() const
{
    require(node_->kind == Kind::Box, "lo() on a non-box node");
    return node_->a;
}

const Point& SetExpr::hi() const
{
    require(node_->kind == Kind::Box, "hi() on a non-box node");
    return node_->b;
}

const std::vector<SetExpr>& SetExpr::children() const { return node_->children; }

bool SetExpr::contains(const Point& p) const
{
    const Node& n = *node_;
    switch (n.kind) {
    case Kind::Ball:
        return squared_distance(p, n.a, n.dim) < n.radius * n.radius;
    case Kind::Box:
        for (int k = 0; k < n.dim; ++k)
            if (!(p[k] > n.a[k] && p[k] < n.b[k])) return false;
        return true;
    case Kind::Union:
        if (n.buckets) {
            for (int k = 0; k < n.dim; ++k)
                if (!(p[k] > n.box.lo[k] && p[k] < n.box.hi[k])) return false;
            const Buckets& bk = *n.buckets;
            std::array<int, kMaxDim> i{0, 0, 0};
            for (int k = 0; k < n.dim; ++k) i[k] = bk.clamp_index(k, p[k]);
            for (auto c : bk.cells[(static_cast<std::size_t>(i[0]) * bk.n[1] + i[1]) * bk.n[2] + i[2]])
                if (n.children[c].contains(p)) return true;
            return false;
        }
        return std::any_of(n.children.begin(), n.children.end(),
                           [&](const SetExpr& c) { return c.contains(p); });
    case Kind::Intersect:
        return std::all_of(n.children.begin(), n.children.end(),
                           [&](const SetExpr& c) { return c.contains(p); });
    case Kind::Diff:
        return n.children[0].contains(p) && !n.children[1].contains(p);
    }
    return false;
}

CellClass SetExpr::classify(const Bounds& cell) const
{
    const Node& n = *node_;
    switch (n.kind) {
    case Kind::Ball: {
        double near = 0.0, far = 0.0;
        for (int k = 0; k < n.dim; ++k) {
            const double c = n.a[k];
            const double dn = std::max({cell.lo[k] - c, 0.0, c - cell.hi[k]});
            const double df = std::max(std::abs(cell.lo[k] - c), std::abs(cell.hi[k] - c));
            near += dn * dn;
            far += df * df;
        }
        const double r2 = n.radius * n.radius;
        if (far <= r2) return CellClass::Inside;
        if (near >= r2) return CellClass::Outside;
        return CellClass::Mixed;
    }
    case Kind::Box: {
        bool inside = true;
        for (int k = 0; k < n.dim; ++k) {
            if (cell.hi[k] <= n.a[k] || cell.lo[k] >= n.b[k]) return CellClass::Outside;
            if (!(cell.lo[k] >= n.a[k] && cell.hi[k] <= n.b[k])) inside = false;
        }
        return inside ? CellClass::Inside : CellClass::Mixed;
    }
    case Kind::Union: {
        bool all_out = true;
        if (n.buckets) {
            for (int k = 0; k < n.dim; ++k)
                if (cell.hi[k] <= n.box.lo[k] || cell.lo[k] >= n.box.hi[k]) return CellClass::Outside;
            const Buckets& bk = *n.buckets;
            std::array<int, kMaxDim> i0{0, 0, 0}, i1{0, 0, 0};
            for (int k = 0; k < n.dim; ++k) {
                i0[k] = bk.clamp_index(k, cell.lo[k]);
                i1[k] = bk.clamp_index(k, cell.hi[k]);
            }
            for (int x = i0[0]; x <= i1[0]; ++x)
                for (int y = i0[1]; y <= i1[1]; ++y)
                    for (int z = i0[2]; z <= i1[2]; ++z)
                        for (auto c : bk.cells[(static_cast<std::size_t>(x) * bk.n[1] + y) * bk.n[2] + z]) {
                            const auto cc = n.children[c].classify(cell);
                            if (cc == CellClass::Inside) return CellClass::Inside;
                            if (cc == CellClass::Mixed) all_out = false;
                        }
            return all_out ? CellClass::Outside : CellClass::Mixed;
        }
        for (const auto& c : n.children) {
            const auto cc = c.classify(cell);
            if (cc == CellClass::Inside) return CellClass::Inside;
            if (cc == CellClass::Mixed) all_out = false;
        }
        return all_out ? CellClass::Outside : CellClass::Mixed;
    }
    case Kind::Intersect: {
        bool all_in = true;
        for (const auto& c : n.children) {
            const auto cc = c.classify(cell);
            if (cc == CellClass::Outside) return CellClass::Outside;
            if (cc == CellClass::Mixed) all_in = false;
        }
        return all_in ? CellClass::Inside : CellClass::Mixed;
    }
    case Kind::Diff: {
        const auto ca = n.children[0].classify(cell);
        if (ca == CellClass::Outside) return CellClass::Outside;
        const auto cb = n.children[1].classify(cell);
        if (cb == CellClass::Inside) return CellClass::Outside;
        if (ca == CellClass::Inside && cb == CellClass::Outside) return CellClass::Inside;
        return CellClass::Mixed;
    }
    }
    return CellClass::Mixed;
}

Bounds SetExpr::bounding_box() const
{
    const Node& n = *node_;
    Bounds out;
    switch (n.kind) {
    case Kind::Ball:
        for (int k = 0; k < n.dim; ++k) {
            out.lo[k] = n.a[k] - n.radius;
            out.hi[k] = n.a[k] + n.radius;
        }
        return out;
    case Kind::Box:
        out.lo = n.a;
        out.hi = n.b;
        return out;
    case Kind::Union:
        if (n.buckets) return n.box;
        for (int k = 0; k < n.dim; ++k) {
            out.lo[k] = std::numeric_limits<double>::infinity();
            out.hi[k] = -std::numeric_limits<double>::infinity();
        }
        for (const auto& c : n.children) {
            const Bounds b = c.bounding_box();
            if (b.empty(n.dim)) continue;
            for (int k = 0; k < n.dim; ++k) {
                out.lo[k] = std::min(out.lo[k], b.lo[k]);
                out.hi[k] = std::max(out.hi[k], b.hi[k]);
            }
        }
        return out;
    case Kind::Intersect:
        out = n.children.front().bounding_box();
        for (const auto& c : n.children) {
            const Bounds b = c.bounding_box();
            for (int k = 0; k < n.dim; ++k) {
                out.lo[k] = std::max(out.lo[k], b.lo[k]);
                out.hi[k] = std::min(out.hi[k], b.hi[k]);
            }
        }
        return out;
    case Kind::Diff:
        return n.children[0].bounding_box();
    }
    return out;
}

SetExpr SetExpr::translated(const Point& shift) const
{
    const Node& n = *node_;
    auto add = [&](Point p) {
        for (int k = 0; k < n.dim; ++k) p[k] += shift[k];
        return p;
    };
    switch (n.kind) {
    case Kind::Ball: return ball(n.dim, add(n.a), n.radius);
    case Kind::Box: return box(n.dim, add(n.a), add(n.b));
    default: {
        std::vector<SetExpr> kids;
        kids.reserve(n.children.size());
        for (const auto& c : n.children) kids.push_back(c.translated(shift));
        if (n.kind == Kind::Union) return unite(std::move(kids));
        if (n.kind == Kind::Intersect) return intersect(std::move(kids));
        return diff(kids[0], kids[1]);
    }
    }
}

SetExpr SetExpr::scaled(double mu) const
{
    require(std::isfinite(mu) && mu > 0.0, "dilation factor must be positive");
    const Node& n = *node_;
    auto mul = [&](Point p) {
        for (int k = 0; k < n.dim; ++k) p[k] *= mu;
        return p;
    };
    switch (n.kind) {
    case Kind::Ball: return ball(n.dim, mul(n.a), n.radius * mu);
    case Kind::Box: return box(n.dim, mul(n.a), mul(n.b));
    default: {
        std::vector<SetExpr> kids;
        kids.reserve(n.children.size());
        for (const auto& c : n.children) kids.push_back(c.scaled(mu));
        if (n.kind == Kind::Union) return unite(std::move(kids));
        if (n.kind == Kind::Intersect) return intersect(std::move(kids));
        return diff(kids[0], kids[1]);
    }
    }
}

std::vector<SetExpr> SetExpr::primitives() const
{
    std::vector<SetExpr> out;
    std::vector<SetExpr> stack{*this};
    while (!stack.empty()) {
        SetExpr e = stack.back();
        stack.pop_back();
        if (e.kind() == Kind::Ball || e.kind() == Kind::Box) {
            out.push_back(e);
        } else {
            const auto& kids = e.children();
            for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
        }
    }
    return out;
}

namespace {

nlohmann::json point_json(const Point& p, int dim)
{
    auto arr = nlohmann::json::array();
    for (int k = 0; k < dim; ++k) arr.push_back(p[k]);
    return arr;
}

Point point_from_json(const nlohmann::json& j, int dim, const char* what)
{
    if (j.is_number() && dim == 1) return {j.get<double>(), 0.0, 0.0};
    require(j.is_array() && static_cast<int>(j.size()) == dim,
            std::string(what) + " must be an array of length " + std::to_string(dim));
    Point p{};
    for (int k = 0; k < dim; ++k) p[k] = j[k].get<double>();
    return p;
}

int infer_dim(const nlohmann::json& doc)
{
    if (doc.contains("dim")) return doc.at("dim").get<int>();
    const std::string type = doc.at("type").get<std::string>();
    auto arr_len = [](const nlohmann::json& j) { return j.is_array() ? static_cast<int>(j.size()) : 1; };
    if (type == "ball") return arr_len(doc.at("center"));
    if (type == "box") return arr_len(doc.at("min"));
    if (doc.contains("children") && !doc.at("children").empty())
        return infer_dim(doc.at("children").front());
    if (type == "diff") return infer_dim(doc.at("a"));
    throw ConfigError("SetExpr: cannot infer dimension of node of type '" + type + "'");
}

} // namespace

nlohmann::json SetExpr::to_json() const
{
    const Node& n = *node_;
    nlohmann::json j;
    j["dim"] = n.dim;
    switch (n.kind) {
    case Kind::Ball:
        j["type"] = "ball";
        j["center"] = point_json(n.a, n.dim);
        j["radius"] = n.radius;
        break;
    case Kind::Box:
        j["type"] = "box";
        j["min"] = point_json(n.a, n.dim);
        j["max"] = point_json(n.b, n.dim);
        break;
    case Kind::Union:
    case Kind::Intersect: {
        j["type"] = n.kind == Kind::Union ? "union" : "intersect";
        auto kids = nlohmann::json::array();
        for (const auto& c : n.children) kids.push_back(c.to_json());
        j["children"] = std::move(kids);
        break;
    }
    case Kind::Diff:
        j["type"] = "diff";
        j["a"] = n.children[0].to_json();
        j["b"] = n.children[1].to_json();
        break;
    }
    return j;
}

SetExpr SetExpr::from_json(const nlohmann::json& doc)
{
    try {
        require(doc.is_object(), "node must be an object");
        const std::string type = doc.at("type").get<std::string>();
        const int dim = infer_dim(doc);
        check_dim(dim);
        if (type == "ball")
            return ball(dim, point_from_json(doc.at("center"), dim, "center"), doc.at("radius").get<double>());
        if (type == "box")
            return box(dim, point_from_json(doc.at("min"), dim, "min"), point_from_json(doc.at("max"), dim, "max"));
        if (type == "union" || type == "intersect") {
            std::vector<SetExpr> kids;
            for (const auto& c : doc.at("children")) kids.push_back(from_json(c));
            return type == "union" ? unite(std::move(kids)) : intersect(std::move(kids));
        }
        if (type == "diff") return diff(from_json(doc.at("a")), from_json(doc.at("b")));
        throw ConfigError("SetExpr: unknown node type '" + type + "'");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("SetExpr document: ") + e.what());
    }
}

} // namespace fragrd::geom
