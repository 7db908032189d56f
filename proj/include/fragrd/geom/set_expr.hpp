#pragma once

#include <fragrd/core.hpp>

#include <json.hpp>

#include <memory>
#include <vector>

namespace fragrd::geom {

/// Axis-aligned bounds. Empty when any lo >= hi.
struct Bounds {
    Point lo{};
    Point hi{};

    bool empty(int dim) const
    {
        for (int k = 0; k < dim; ++k)
            if (!(lo[k] < hi[k])) return true;
        return false;
    }
    double extent(int axis) const { return hi[axis] - lo[axis]; }
};

/// Result of classifying an axis-aligned cell against a set.
enum class CellClass { Inside, Outside, Mixed };

/// Immutable constructive description of a bounded open set: balls and boxes
/// combined by union, intersection and difference. Copies share the tree.
class SetExpr {
public:
    enum class Kind { Ball, Box, Union, Intersect, Diff };

    /// Placeholder with no tree; must be assigned before use.
    SetExpr() = default;
    bool valid() const { return node_ != nullptr; }

    static SetExpr ball(int dim, const Point& center, double radius);
    static SetExpr box(int dim, const Point& lo, const Point& hi);
    static SetExpr unite(std::vector<SetExpr> parts);
    static SetExpr intersect(std::vector<SetExpr> parts);
    static SetExpr diff(const SetExpr& a, const SetExpr& b);

    /// Convenience for N = 1.
    static SetExpr interval(double lo, double hi);

    int dim() const;
    Kind kind() const;

    // Primitive accessors; throw if the node is not of the matching kind.
    const Point& center() const;
    double radius() const;
    const Point& lo() const;
    const Point& hi() const;
    const std::vector<SetExpr>& children() const;

    /// Membership in the open set.
    bool contains(const Point& p) const;

    /// Conservative classification of the closed cell [lo, hi].
    CellClass classify(const Bounds& cell) const;

    /// Finite bounding box (may be empty for an empty intersection).
    Bounds bounding_box() const;

    SetExpr translated(const Point& shift) const;
    /// Dilation x -> mu x about the origin.
    SetExpr scaled(double mu) const;

    nlohmann::json to_json() const;
    static SetExpr from_json(const nlohmann::json& doc);

    /// Flattened list of primitives (leaves) in tree order.
    std::vector<SetExpr> primitives() const;

private:
    struct Node;
    explicit SetExpr(std::shared_ptr<const Node> node);
    std::shared_ptr<const Node> node_;
};

} // namespace fragrd::geom
