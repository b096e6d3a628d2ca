#include <cmath>
#include <numbers>

#include "contactlab/errors.hpp"
#include "contactlab/geometry.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace contactlab;
using namespace contactlab::geometry;

namespace {

Block square(int id, double x0, double y0, double side = 1.0) {
    return Block(id, {{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}});
}

}  // namespace

TEST_CASE("block construction normalizes and validates") {
    SUBCASE("clockwise input is stored counter-clockwise") {
        Block b(7, {{0, 0}, {0, 1}, {1, 1}, {1, 0}});
        CHECK(b.id() == 7);
        double signed_area = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i)
            signed_area += cross(b.vertex(i), b.vertex(i + 1));
        CHECK(signed_area > 0.0);
    }
    SUBCASE("rejections") {
        CHECK_THROWS_AS(Block(0, {{0, 0}, {1, 0}}), InvalidBlock);
        CHECK_THROWS_AS(Block(0, {{0, 0}, {1, 0}, {1, 0}, {0, 1}}), InvalidBlock);
        CHECK_THROWS_AS(Block(0, {{0, 0}, {2, 0}, {1, 0.2}, {2, 2}, {0, 2}}), InvalidBlock);
        CHECK_THROWS_AS(Block(0, {{0, 0}, {1, 0}, {2, 0}}), InvalidBlock);
        CHECK_THROWS_AS(Block(0, {{0, 0}, {1, 0}, {NAN, 1}}), InvalidBlock);
        // A self-intersecting bow tie turns through 0, not 2 pi.
        CHECK_THROWS_AS(Block(0, {{0, 0}, {1, 1}, {1, 0}, {0, 1}}), InvalidBlock);
    }
    SUBCASE("canonical vertices start at the lexicographic minimum") {
        Block b(0, {{1, 1}, {0, 1}, {0, 0}, {1, 0}});
        const auto c = b.canonical_vertices();
        CHECK(c.front() == Point{0, 0});
        CHECK(c[1] == Point{1, 0});
    }
}

TEST_CASE("polygon_area") {
    CHECK(polygon_area(square(0, 0, 0)) == doctest::Approx(1.0));
    CHECK(polygon_area(Block(0, {{0, 1}, {1, 1}, {1, 0}, {0, 0}})) == doctest::Approx(1.0));
    CHECK(polygon_area(Block(0, {{0, 0}, {4, 0}, {4, 3}, {0, 3}})) == doctest::Approx(12.0));
    const Point c = centroid(Block(0, {{0, 0}, {4, 0}, {4, 2}, {0, 2}}));
    CHECK(c.x == doctest::Approx(2.0));
    CHECK(c.y == doctest::Approx(1.0));
}

TEST_CASE("classify_contact examples") {
    CHECK(classify_contact(square(0, 0, 0), square(1, 10, 0)) == ContactState::None);
    CHECK(classify_contact(square(0, 0, 0), square(1, 1, 0)) == ContactState::EdgeEdge);
    CHECK(classify_contact(square(0, 0, 0), square(1, 1, 1)) == ContactState::VertexVertex);
    const Block tri(1, {{0.5, 1.0}, {1.0, 2.0}, {0.0, 2.0}});
    CHECK(classify_contact(square(0, 0, 0), tri) == ContactState::VertexEdge);
    // A vertex within tol of an edge endpoint counts as vertex-vertex.
    const Block tri2(1, {{1.0 + 4e-7, 1.0}, {1.5, 2.0}, {0.5, 2.0}});
    CHECK(classify_contact(square(0, 0, 0), tri2) == ContactState::VertexVertex);
    // Shared length must exceed tol for edge-edge.
    CHECK(classify_contact(square(0, 0, 0), square(1, 1, 1 - 5e-7)) == ContactState::VertexVertex);
    // Gap just inside and just outside the tolerance.
    CHECK(classify_contact(square(0, 0, 0), square(1, 1 + 0.5e-6, 0)) == ContactState::EdgeEdge);
    CHECK(classify_contact(square(0, 0, 0), square(1, 1 + 2e-6, 0)) == ContactState::None);
}

TEST_CASE("classify_contact errors") {
    try {
        (void)classify_contact(square(0, 0, 0), square(1, 0.5, 0));
        FAIL("expected OverlapError");
    } catch (const OverlapError& e) {
        CHECK(e.depth() == doctest::Approx(0.5));
    }
    CHECK_THROWS_AS(classify_contact(square(0, 0, 0), square(1, 1, 0), 0.0), InvalidArgument);
    CHECK_THROWS_AS(contact_state_from_code(4), InvalidArgument);
    CHECK(contact_state_from_code(2) == ContactState::VertexEdge);
}

TEST_CASE("min_separation and penetration_depth") {
    CHECK(min_separation(square(0, 0, 0), square(1, 1, 0)) == 0.0);
    CHECK(min_separation(square(0, 0, 0), square(1, 2, 0)) == doctest::Approx(1.0));
    CHECK(min_separation(square(0, 0, 0), square(1, 2, 2)) == doctest::Approx(std::sqrt(2.0)));
    CHECK(min_separation(square(0, 0, 0), square(1, 0.5, 0.5)) == 0.0);
    CHECK(penetration_depth(square(0, 0, 0), square(1, 0.75, 0)) == doctest::Approx(0.25));
    CHECK(penetration_depth(square(0, 0, 0), square(1, 1, 0)) == doctest::Approx(0.0));
    CHECK(penetration_depth(square(0, 0, 0), square(1, 3, 0)) < 0.0);
}

TEST_CASE("min_separation agrees with boundary enumeration") {
    oracle::Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const Block a = oracle::random_quad(rng, 0);
        const Block b = oracle::random_quad(rng, 1, {rng.uniform(4.5, 7.0), rng.uniform(-2.0, 2.0)});
        CHECK(min_separation(a, b) == doctest::Approx(oracle::brute_force_separation(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("brute-force oracle agreement, symmetry and rigid motion") {
    const auto cases = oracle::geometry_cases(2024, 600);
    int counts[4] = {0, 0, 0, 0};
    oracle::Rng rng(99);
    for (const auto& c : cases) {
        const int got = code(classify_contact(c.a, c.b));
        CHECK(got == c.expected);
        ++counts[c.expected];
        CHECK(classify_contact(c.b, c.a) == classify_contact(c.a, c.b));
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const Point pivot{rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const Point shift{rng.uniform(-10, 10), rng.uniform(-10, 10)};
        const Block a2 = oracle::rigid(c.a, angle, pivot, shift);
        const Block b2 = oracle::rigid(c.b, angle, pivot, shift);
        CHECK(code(classify_contact(a2, b2)) == got);
        // Consistency of the None code with the separation.
        CHECK((got == 0) == (min_separation(c.a, c.b) > kDefaultTolerance));
    }
    for (int k = 0; k < 4; ++k) CHECK(counts[k] > 50);
}

TEST_CASE("rotated and translated blocks") {
    const Block s = square(0, 0, 0);
    const Block r = s.rotated(std::numbers::pi / 2, {0, 0});
    CHECK(polygon_area(r) == doctest::Approx(1.0));
    const Point c = centroid(r);
    CHECK(c.x == doctest::Approx(-0.5));
    CHECK(c.y == doctest::Approx(0.5));
    const Block t = s.translated({2, 3});
    CHECK(t.canonical_vertices().front() == Point{2, 3});
}
