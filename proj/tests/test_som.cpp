#include <cmath>

#include "contactlab/errors.hpp"
#include "contactlab/som.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace contactlab;
using namespace contactlab::som;
using geometry::ContactState;

namespace {

SomGrid distinct_grid(std::size_t nx, std::size_t ny) {
    SomGrid g(nx, ny, 2);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto p = g.position(k);
        g.weights[k] = {static_cast<double>(p.i), static_cast<double>(p.j)};
    }
    return g;
}

// Independent transcription of the schedule: geometric from start toward
// max(end, 1e-3 start), landing exactly on `end` at the last epoch.
double schedule_value(double start, double end, int e, int epochs) {
    if (epochs <= 1 || start == end) return start;
    if (e == epochs - 1) return end;
    const double target = std::max(end, 1e-3 * start);
    return start * std::pow(target / start, double(e) / double(epochs - 1));
}

}  // namespace

TEST_CASE("find_winner") {
    SomGrid one(1, 1, 3);
    const std::vector<double> x{5.0, -1.0, 2.0};
    CHECK(find_winner(one, x) == GridPos{0, 0});

    const auto g = distinct_grid(3, 3);
    CHECK(find_winner(g, g.weights[g.index({2, 1})]) == GridPos{2, 1});

    // Equidistant from (0,0) and (0,1): the row-major earlier wins.
    const std::vector<double> mid{0.0, 0.5};
    CHECK(find_winner(g, mid) == GridPos{0, 0});

    const std::vector<double> bad{1.0};
    CHECK_THROWS_AS((void)find_winner(g, bad), DimensionMismatch);

    oracle::Rng rng(4);
    SomGrid r(4, 5, 3);
    for (auto& w : r.weights) w = oracle::random_vector(rng, 3, -1, 1);
    for (int t = 0; t < 200; ++t) {
        const auto q = oracle::random_vector(rng, 3, -1.5, 1.5);
        std::size_t best = 0;
        for (std::size_t k = 1; k < r.size(); ++k) {
            double dk = 0, db = 0;
            for (std::size_t j = 0; j < 3; ++j) {
                dk += (r.weights[k][j] - q[j]) * (r.weights[k][j] - q[j]);
                db += (r.weights[best][j] - q[j]) * (r.weights[best][j] - q[j]);
            }
            if (dk < db) best = k;
        }
        CHECK(r.index(find_winner(r, q)) == best);
    }
}

TEST_CASE("schedule") {
    const auto s = SomSchedule::for_grid(3, 3, 300);
    CHECK(s.radius0 == 1.5);
    CHECK(s.lr(0) == 0.5);
    CHECK(s.lr(299) == 0.01);
    CHECK(s.radius(299) == 0.5);
    for (int e = 1; e < 300; ++e) {
        CHECK(s.lr(e) < s.lr(e - 1));
        CHECK(s.lr(e) == doctest::Approx(schedule_value(0.5, 0.01, e, 300)).epsilon(1e-14));
    }
    SomSchedule z = s;
    z.radius_end = 0.0;
    CHECK(z.radius(299) == 0.0);
    CHECK(z.radius(298) > 0.0);
    CHECK(neighborhood(0.0, 0.0) == 1.0);
    CHECK(neighborhood(1.0, 0.0) == 0.0);
    CHECK(neighborhood(2.0, 1.0) == doctest::Approx(std::exp(-1.0)));
    SomSchedule bad;
    bad.lr_end = 0.9;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("repeated point is a fixed point of the update") {
    const std::vector<std::vector<double>> data(5, {0.3, -0.7});
    SomGrid g(1, 1, 2);
    g.weights[0] = {2.0, 1.0};
    SomSchedule s;
    s.radius_end = 0.0;
    const auto t = train_som(g, data, s, 1);
    // Independent recurrence: each presentation w += lr (x - w).
    std::vector<double> w{2.0, 1.0};
    for (int e = 0; e < s.epochs; ++e) {
        const double lr = schedule_value(s.lr0, s.lr_end, e, s.epochs);
        for (std::size_t i = 0; i < data.size(); ++i)
            for (std::size_t j = 0; j < 2; ++j) w[j] += lr * (data[0][j] - w[j]);
    }
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(std::abs(t.weights[0][j] - data[0][j]) < 1e-6);
        CHECK(t.weights[0][j] == doctest::Approx(w[j]).epsilon(1e-12));
    }

    // Larger grid: the winner converges onto the point.
    SomGrid big = init_grid(3, 3, std::vector<std::vector<double>>{{0, 0}, {1, 1}}, 3);
    const auto tb = train_som(big, data, s, 2);
    const auto& ww = tb.weights[tb.index(find_winner(tb, data[0]))];
    CHECK(std::hypot(ww[0] - 0.3, ww[1] + 0.7) < 1e-6);
}

TEST_CASE("training is deterministic, bounded, and a no-op at zero epochs") {
    oracle::Rng rng(6);
    std::vector<std::vector<double>> data;
    for (int i = 0; i < 50; ++i) data.push_back(oracle::random_vector(rng, 4, -2.0, 3.0));
    const auto init = init_grid(3, 3, data, 10);
    const auto s = SomSchedule::for_grid(3, 3, 60);
    const auto a = train_som(init, data, s, 77);
    const auto b = train_som(init, data, s, 77);
    CHECK(a.weights == b.weights);
    const auto c = train_som(init, data, s, 78);
    CHECK(a.weights != c.weights);

    for (const auto& w : init.weights)
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(w[j] >= -2.0);
            CHECK(w[j] <= 3.0);
        }
    for (std::size_t j = 0; j < 4; ++j) {
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& x : data) lo = std::min(lo, x[j]), hi = std::max(hi, x[j]);
        for (const auto& w : init.weights) lo = std::min(lo, w[j]), hi = std::max(hi, w[j]);
        for (const auto& w : a.weights) {
            CHECK(w[j] >= lo);
            CHECK(w[j] <= hi);
        }
    }

    SomSchedule none = s;
    none.epochs = 0;
    CHECK(train_som(init, data, none, 1).weights == init.weights);

    auto labeled = label_neurons(a, data, std::vector<ContactState>(50, ContactState::VertexEdge)).grid;
    CHECK(labeled.labeled());
    CHECK(train_som(labeled, data, none, 1).labels.empty());

    const std::vector<std::vector<double>> wrong{{1.0, 2.0}};
    CHECK_THROWS_AS(train_som(init, wrong, s, 1), DimensionMismatch);
}

TEST_CASE("labeling") {
    const auto g = distinct_grid(3, 3);
    SUBCASE("unanimous labels") {
        std::vector<std::vector<double>> data{{0, 0}, {1, 1}, {2, 2}};
        const auto r = label_neurons(g, data, std::vector<ContactState>(3, ContactState::VertexEdge));
        for (const auto& l : r.grid.labels) CHECK(*l == ContactState::VertexEdge);
    }
    SUBCASE("majority, ties to the lower code, and silent neighbors") {
        std::vector<std::vector<double>> data{{0, 0}, {0.1, 0}, {0, 0.1},     // neuron (0,0): 0,0,1
                                              {2, 2}, {2, 1.9},               // neuron (2,2): 3,2
                                              {2, 0}};                        // neuron (2,0): 3
        std::vector<ContactState> labels{ContactState::None, ContactState::None,
                                         ContactState::VertexVertex, ContactState::EdgeEdge,
                                         ContactState::VertexEdge, ContactState::EdgeEdge};
        const auto r = label_neurons(g, data, labels);
        CHECK(r.win_counts[g.index({0, 0})] == 3);
        CHECK(*r.grid.labels[g.index({0, 0})] == ContactState::None);
        CHECK(*r.grid.labels[g.index({2, 2})] == ContactState::VertexEdge);
        CHECK(*r.grid.labels[g.index({2, 0})] == ContactState::EdgeEdge);
        // (2,1) is silent; (2,0) and (2,2) are equally near, row-major first wins.
        CHECK(r.win_counts[g.index({2, 1})] == 0);
        CHECK(*r.grid.labels[g.index({2, 1})] == ContactState::EdgeEdge);
        // (1,0) is silent and adjacent to (0,0) and (2,0); (0,0) comes first.
        CHECK(*r.grid.labels[g.index({1, 0})] == ContactState::None);
        CHECK(r.grid.labeled());
    }
    SUBCASE("errors") {
        const std::vector<std::vector<double>> none;
        CHECK_THROWS_AS(label_neurons(g, none, std::vector<ContactState>{}), EmptyData);
    }
}

TEST_CASE("som_classify") {
    auto g = distinct_grid(3, 3);
    const std::vector<double> x{1.0, 2.0};
    CHECK_THROWS_AS((void)som_classify(g, x), UnlabeledGrid);
    g.labels.assign(9, ContactState::None);
    g.labels[g.index({1, 2})] = ContactState::VertexVertex;
    CHECK(som_classify(g, x) == ContactState::VertexVertex);

    SomGrid one(1, 1, 2);
    one.labels = {ContactState::EdgeEdge};
    CHECK(som_classify(one, x) == ContactState::EdgeEdge);
}
