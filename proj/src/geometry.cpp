#include "contactlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "contactlab/errors.hpp"

namespace contactlab::geometry {

double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double norm(Point a) { return std::hypot(a.x, a.y); }

double point_segment_distance(Point p, Point a, Point b, double* t) {
    const Point ab = b - a;
    const double len2 = dot(ab, ab);
    double s = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    if (t) *t = s;
    return norm(p - (a + s * ab));
}

ContactState contact_state_from_code(int code) {
    if (code < 0 || code >= kNumContactStates)
        throw InvalidArgument("contact state code out of range: " + std::to_string(code));
    return static_cast<ContactState>(code);
}

std::string_view to_string(ContactState s) {
    switch (s) {
        case ContactState::None: return "none";
        case ContactState::VertexVertex: return "V-V";
        case ContactState::VertexEdge: return "V-E";
        case ContactState::EdgeEdge: return "E-E";
    }
    return "?";
}

namespace {

double signed_area(std::span<const Point> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point& p = v[i];
        const Point& q = v[(i + 1) % v.size()];
        s += p.x * q.y - q.x * p.y;
    }
    return 0.5 * s;
}

void validate(std::span<const Point> v) {
    if (v.size() < 3) throw InvalidBlock("block needs at least 3 vertices");
    for (const Point& p : v)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw InvalidBlock("block vertex is not finite");
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i)
        if (norm(v[(i + 1) % n] - v[i]) <= 1e-12)
            throw InvalidBlock("block has coincident consecutive vertices");

    // Counter-clockwise by now: every turn must be strictly left and the
    // turning angles must add up to one full revolution.
    double turning = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point e0 = v[(i + 1) % n] - v[i];
        const Point e1 = v[(i + 2) % n] - v[(i + 1) % n];
        const double c = cross(e0, e1);
        if (c <= 1e-12 * norm(e0) * norm(e1))
            throw InvalidBlock("block is not strictly convex");
        turning += std::atan2(c, dot(e0, e1));
    }
    if (std::abs(turning - 2.0 * std::numbers::pi) > 1e-6)
        throw InvalidBlock("block outline is self-intersecting");
}

struct Interval {
    double lo;
    double hi;
};

Interval project(const Block& b, Point axis) {
    Interval r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const Point& p : b.vertices()) {
        const double s = dot(p, axis);
        r.lo = std::min(r.lo, s);
        r.hi = std::max(r.hi, s);
    }
    return r;
}

// Smallest projected overlap over the edge normals of `ref`.
double min_overlap_on_normals(const Block& ref, const Block& other) {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = ref.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point e = ref.vertex(i + 1) - ref.vertex(i);
        const double len = norm(e);
        const Point axis{e.y / len, -e.x / len};
        const Interval ia = project(ref, axis);
        const Interval ib = project(other, axis);
        best = std::min(best, std::min(ia.hi, ib.hi) - std::max(ia.lo, ib.lo));
    }
    return best;
}

// Feature scan from the vertices of `from` against the edges of `to`.
int vertex_features(const Block& from, const Block& to, double tol) {
    int best = 0;
    const std::size_t n = to.size();
    for (const Point& p : from.vertices()) {
        for (std::size_t i = 0; i < n; ++i) {
            const Point a = to.vertex(i);
            const Point b = to.vertex(i + 1);
            double t = 0.0;
            if (point_segment_distance(p, a, b, &t) > tol) continue;
            const Point q = a + t * (b - a);
            const bool at_endpoint = norm(q - a) <= tol || norm(q - b) <= tol;
            best = std::max(best, at_endpoint ? 1 : 2);
        }
    }
    return best;
}

// Length shared by segment [a0, a1] and the projection of [b0, b1] onto it.
double shared_length(Point a0, Point a1, Point b0, Point b1) {
    const Point d = a1 - a0;
    const double len = norm(d);
    const Point u{d.x / len, d.y / len};
    const double s0 = dot(b0 - a0, u);
    const double s1 = dot(b1 - a0, u);
    return std::min(len, std::max(s0, s1)) - std::max(0.0, std::min(s0, s1));
}

bool edge_contact(const Block& a, const Block& b, double tol) {
    const double sin_tol = std::sin(kEdgeAngleTolerance);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Point a0 = a.vertex(i);
        const Point a1 = a.vertex(i + 1);
        const Point da = a1 - a0;
        for (std::size_t j = 0; j < b.size(); ++j) {
            const Point b0 = b.vertex(j);
            const Point b1 = b.vertex(j + 1);
            const Point db = b1 - b0;
            const double la = norm(da);
            const double lb = norm(db);
            if (dot(da, db) >= 0.0) continue;
            if (std::abs(cross(da, db)) > sin_tol * la * lb) continue;
            const double gap = std::min({point_segment_distance(a0, b0, b1),
                                         point_segment_distance(a1, b0, b1),
                                         point_segment_distance(b0, a0, a1),
                                         point_segment_distance(b1, a0, a1)});
            if (gap > tol) continue;
            const double shared = std::min(shared_length(a0, a1, b0, b1),
                                           shared_length(b0, b1, a0, a1));
            if (shared > tol) return true;
        }
    }
    return false;
}

}  // namespace

Block::Block(int id, std::vector<Point> vertices) : id_(id), vertices_(std::move(vertices)) {
    if (vertices_.size() < 3) throw InvalidBlock("block needs at least 3 vertices");
    if (signed_area(vertices_) < 0.0) std::reverse(vertices_.begin(), vertices_.end());
    validate(vertices_);
}

Block Block::translated(Point offset) const {
    std::vector<Point> v(vertices_);
    for (Point& p : v) p = p + offset;
    return Block(id_, std::move(v));
}

Block Block::rotated(double radians, Point pivot) const {
    const double c = std::cos(radians);
    const double s = std::sin(radians);
    std::vector<Point> v(vertices_);
    for (Point& p : v) {
        const Point r = p - pivot;
        p = pivot + Point{c * r.x - s * r.y, s * r.x + c * r.y};
    }
    return Block(id_, std::move(v));
}

std::vector<Point> Block::canonical_vertices() const {
    const auto first = std::min_element(vertices_.begin(), vertices_.end(), [](Point a, Point b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    std::vector<Point> out(vertices_);
    std::rotate(out.begin(), out.begin() + (first - vertices_.begin()), out.end());
    return out;
}

double polygon_area(const Block& block) { return std::abs(signed_area(block.vertices())); }

Point centroid(const Block& block) {
    const auto v = block.vertices();
    // Shift to the first vertex for conditioning.
    const Point o = v[0];
    double a2 = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point p = v[i] - o;
        const Point q = v[(i + 1) % v.size()] - o;
        const double w = cross(p, q);
        a2 += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    return {o.x + cx / (3.0 * a2), o.y + cy / (3.0 * a2)};
}

double penetration_depth(const Block& a, const Block& b) {
    return std::min(min_overlap_on_normals(a, b), min_overlap_on_normals(b, a));
}

double min_separation(const Block& a, const Block& b) {
    if (penetration_depth(a, b) >= 0.0) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (int pass = 0; pass < 2; ++pass) {
        const Block& from = pass == 0 ? a : b;
        const Block& to = pass == 0 ? b : a;
        for (const Point& p : from.vertices())
            for (std::size_t i = 0; i < to.size(); ++i)
                best = std::min(best, point_segment_distance(p, to.vertex(i), to.vertex(i + 1)));
    }
    return best;
}

ContactState classify_contact(const Block& a, const Block& b, double tol) {
    if (!(tol > 0.0)) throw InvalidArgument("contact tolerance must be positive");
    const double depth = penetration_depth(a, b);
    if (depth > tol)
        throw OverlapError("blocks " + std::to_string(a.id()) + " and " + std::to_string(b.id()) +
                               " interpenetrate by " + std::to_string(depth) + " m",
                           depth);
    if (min_separation(a, b) > tol) return ContactState::None;

    if (edge_contact(a, b, tol)) return ContactState::EdgeEdge;
    const int v = std::max(vertex_features(a, b, tol), vertex_features(b, a, tol));
    // Within tolerance, so at least one vertex/edge pair must have registered.
    return v == 0 ? ContactState::VertexVertex : static_cast<ContactState>(v);
}

}  // namespace contactlab::geometry
