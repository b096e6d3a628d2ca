#include "contactlab/som.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "contactlab/errors.hpp"
#include "contactlab/random.hpp"

namespace contactlab::som {

SomGrid::SomGrid(std::size_t nx_, std::size_t ny_, std::size_t d_)
    : nx(nx_), ny(ny_), d(d_), weights(nx_ * ny_, std::vector<double>(d_, 0.0)) {
    if (nx == 0 || ny == 0) throw InvalidArgument("SOM grid dimensions must be positive");
}

bool SomGrid::labeled() const {
    return labels.size() == size() &&
           std::all_of(labels.begin(), labels.end(), [](const auto& l) { return l.has_value(); });
}

void SomGrid::validate() const {
    if (nx == 0 || ny == 0) throw InvalidArgument("SOM grid dimensions must be positive");
    if (weights.size() != size()) throw InvalidArgument("SOM weight count must equal nx * ny");
    for (const auto& w : weights)
        if (w.size() != d) throw InvalidArgument("SOM weight vectors must all have dimension d");
    if (!labels.empty() && labels.size() != size())
        throw InvalidArgument("SOM label count must equal nx * ny");
}

SomGrid init_grid(std::size_t nx, std::size_t ny, std::span<const std::vector<double>> data,
                  std::uint64_t seed) {
    if (data.empty()) throw EmptyData("cannot initialize a SOM without data");
    const std::size_t d = data.front().size();
    std::vector<double> lo(d, std::numeric_limits<double>::infinity());
    std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
    for (const auto& x : data) {
        if (x.size() != d) throw DimensionMismatch(d, x.size());
        for (std::size_t j = 0; j < d; ++j) {
            lo[j] = std::min(lo[j], x[j]);
            hi[j] = std::max(hi[j], x[j]);
        }
    }
    SomGrid grid(nx, ny, d);
    Rng rng(seed);
    for (auto& w : grid.weights)
        for (std::size_t j = 0; j < d; ++j) w[j] = rng.uniform(lo[j], hi[j]);
    return grid;
}

void SomSchedule::validate() const {
    if (epochs < 0) throw InvalidArgument("SOM epochs must be non-negative");
    if (!(lr0 <= 1.0 && lr0 >= lr_end && lr_end > 0.0))
        throw InvalidArgument("SOM learning rates need 1 >= lr0 >= lr_end > 0");
    if (!(radius0 >= radius_end && radius_end >= 0.0))
        throw InvalidArgument("SOM radii need radius0 >= radius_end >= 0");
}

namespace {

// Geometric interpolation from `start` toward `end`; a zero end is approached
// through 1e-3 * start and reached exactly on the last epoch.
double decay(double start, double end, int epoch, int epochs) {
    if (epochs <= 1 || start == end) return start;
    if (epoch >= epochs - 1) return end;
    const double f = static_cast<double>(epoch) / static_cast<double>(epochs - 1);
    const double target = std::max(end, 1e-3 * start);
    return start * std::pow(target / start, f);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double t = a[j] - b[j];
        s += t * t;
    }
    return s;
}

double grid_distance2(GridPos a, GridPos b) {
    const double di = static_cast<double>(a.i) - static_cast<double>(b.i);
    const double dj = static_cast<double>(a.j) - static_cast<double>(b.j);
    return di * di + dj * dj;
}

void check_data(const SomGrid& grid, std::span<const std::vector<double>> data) {
    for (const auto& x : data)
        if (x.size() != grid.d) throw DimensionMismatch(grid.d, x.size());
}

}  // namespace

double SomSchedule::lr(int epoch) const { return decay(lr0, lr_end, epoch, epochs); }
double SomSchedule::radius(int epoch) const { return decay(radius0, radius_end, epoch, epochs); }

SomSchedule SomSchedule::for_grid(std::size_t nx, std::size_t ny, int epochs) {
    SomSchedule s;
    s.epochs = epochs;
    s.radius0 = static_cast<double>(std::max(nx, ny)) / 2.0;
    return s;
}

double neighborhood(double grid_dist2, double radius) {
    if (radius <= 0.0) return grid_dist2 == 0.0 ? 1.0 : 0.0;
    return std::exp(-grid_dist2 / (2.0 * radius * radius));
}

GridPos find_winner(const SomGrid& grid, std::span<const double> x) {
    if (x.size() != grid.d) throw DimensionMismatch(grid.d, x.size());
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < grid.weights.size(); ++k) {
        const double dist = squared_distance(grid.weights[k], x);
        if (dist < best_d) {
            best_d = dist;
            best = k;
        }
    }
    return grid.position(best);
}

SomGrid train_som(SomGrid grid, std::span<const std::vector<double>> data,
                  const SomSchedule& schedule, std::uint64_t seed) {
    grid.validate();
    schedule.validate();
    if (data.empty()) throw EmptyData("cannot train a SOM without data");
    check_data(grid, data);
    grid.labels.clear();

    Rng rng(seed);
    std::vector<std::size_t> order(data.size());
    for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(order);
        const double lr = schedule.lr(epoch);
        const double radius = schedule.radius(epoch);
        for (std::size_t idx : order) {
            const auto& x = data[idx];
            const GridPos win = find_winner(grid, x);
            for (std::size_t k = 0; k < grid.size(); ++k) {
                const double a = lr * neighborhood(grid_distance2(win, grid.position(k)), radius);
                if (a == 0.0) continue;
                auto& w = grid.weights[k];
                for (std::size_t j = 0; j < grid.d; ++j) w[j] += a * (x[j] - w[j]);
            }
        }
    }
    return grid;
}

LabelResult label_neurons(SomGrid grid, std::span<const std::vector<double>> data,
                          std::span<const geometry::ContactState> labels) {
    grid.validate();
    if (data.empty()) throw EmptyData("cannot label a SOM without samples");
    if (labels.size() != data.size()) throw DimensionMismatch(data.size(), labels.size());
    check_data(grid, data);

    const std::size_t m = grid.size();
    std::vector<std::array<std::size_t, geometry::kNumContactStates>> votes(m);
    for (auto& v : votes) v.fill(0);
    std::vector<std::size_t> wins(m, 0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::size_t k = grid.index(find_winner(grid, data[i]));
        ++votes[k][static_cast<std::size_t>(geometry::code(labels[i]))];
        ++wins[k];
    }

    grid.labels.assign(m, std::nullopt);
    for (std::size_t k = 0; k < m; ++k) {
        if (wins[k] == 0) continue;
        const auto top = std::max_element(votes[k].begin(), votes[k].end());
        grid.labels[k] = static_cast<geometry::ContactState>(top - votes[k].begin());
    }
    for (std::size_t k = 0; k < m; ++k) {
        if (wins[k] != 0) continue;
        double best = std::numeric_limits<double>::infinity();
        std::size_t source = k;
        for (std::size_t o = 0; o < m; ++o) {
            if (wins[o] == 0) continue;
            const double dist = grid_distance2(grid.position(k), grid.position(o));
            if (dist < best) {
                best = dist;
                source = o;
            }
        }
        grid.labels[k] = grid.labels[source];
    }
    return {std::move(grid), std::move(wins)};
}

geometry::ContactState som_classify(const SomGrid& grid, std::span<const double> x) {
    if (!grid.labeled()) throw UnlabeledGrid("SOM grid has not been labeled");
    return *grid.labels[grid.index(find_winner(grid, x))];
}

}  // namespace contactlab::som
