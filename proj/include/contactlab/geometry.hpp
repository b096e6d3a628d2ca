#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace contactlab::geometry {

/// Default contact distance threshold in metres.
inline constexpr double kDefaultTolerance = 1e-6;

/// Two edges count as antiparallel when their directions differ from exact
/// opposition by at most this angle (radians).
inline constexpr double kEdgeAngleTolerance = 1e-6;

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
    friend bool operator==(Point a, Point b) = default;
};

double dot(Point a, Point b);
double cross(Point a, Point b);
double norm(Point a);

/// Distance from p to the closed segment [a, b]. `t` receives the parameter of
/// the closest point along the segment, clamped to [0, 1].
double point_segment_distance(Point p, Point a, Point b, double* t = nullptr);

/// Contact state between two blocks. Codes are fixed: no contact 0,
/// vertex-vertex 1, vertex-edge 2, edge-edge 3.
enum class ContactState : std::uint8_t {
    None = 0,
    VertexVertex = 1,
    VertexEdge = 2,
    EdgeEdge = 3,
};

inline constexpr int kNumContactStates = 4;

constexpr int code(ContactState s) { return static_cast<int>(s); }

/// Throws InvalidArgument for anything outside {0, 1, 2, 3}.
ContactState contact_state_from_code(int code);

std::string_view to_string(ContactState s);

/// Closed convex polygon. Vertices are stored counter-clockwise; construction
/// rejects fewer than three vertices, repeated consecutive vertices, and
/// non-convex or degenerate outlines.
class Block {
public:
    Block(int id, std::vector<Point> vertices);

    int id() const noexcept { return id_; }
    std::span<const Point> vertices() const noexcept { return vertices_; }
    std::size_t size() const noexcept { return vertices_.size(); }
    const Point& vertex(std::size_t i) const { return vertices_[i % vertices_.size()]; }

    Block translated(Point offset) const;
    /// Rotation by `radians` about `pivot`.
    Block rotated(double radians, Point pivot = {}) const;

    /// Same vertices, cyclically shifted so the lexicographically smallest
    /// (x, then y) comes first.
    std::vector<Point> canonical_vertices() const;

private:
    int id_;
    std::vector<Point> vertices_;
};

/// Unsigned shoelace area.
double polygon_area(const Block& block);

/// Area-weighted centroid ("gravity center").
Point centroid(const Block& block);

/// Euclidean distance between the two closed point sets; 0 when they touch
/// or overlap.
double min_separation(const Block& a, const Block& b);

/// Separating-axis penetration depth: the smallest projected overlap over all
/// edge normals of both blocks. Non-positive when the blocks are separated
/// (its magnitude is then a lower bound on the gap), zero when they touch.
double penetration_depth(const Block& a, const Block& b);

/// Classifies the contact between two blocks.
///
/// Every feature pair whose distance is within `tol` is a contact candidate:
///   - vertex to vertex, or a vertex landing within `tol` of an edge
///     endpoint, gives VertexVertex;
///   - a vertex against the interior of an edge (either block) gives
///     VertexEdge;
///   - two antiparallel edges (within kEdgeAngleTolerance) within `tol` of
///     each other and sharing more than `tol` of length give EdgeEdge.
/// The highest code among candidates wins. Returns None when the blocks are
/// more than `tol` apart. The result is symmetric in (a, b).
///
/// Throws OverlapError when the interiors interpenetrate by more than `tol`.
ContactState classify_contact(const Block& a, const Block& b,
                              double tol = kDefaultTolerance);

}  // namespace contactlab::geometry
