#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "contactlab/geometry.hpp"

namespace contactlab::som {

struct GridPos {
    std::size_t i = 0;
    std::size_t j = 0;

    friend bool operator==(GridPos, GridPos) = default;
};

/// nx-by-ny Kohonen map. Neuron (i, j) is stored at row-major index i*ny + j.
struct SomGrid {
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::size_t d = 0;
    std::vector<std::vector<double>> weights;
    std::vector<std::optional<geometry::ContactState>> labels;  // empty until labeled

    SomGrid() = default;
    SomGrid(std::size_t nx, std::size_t ny, std::size_t d);

    std::size_t size() const { return nx * ny; }
    std::size_t index(GridPos p) const { return p.i * ny + p.j; }
    GridPos position(std::size_t k) const { return {k / ny, k % ny}; }
    bool labeled() const;

    void validate() const;
};

/// Weights drawn uniformly within the per-dimension range of `data`.
SomGrid init_grid(std::size_t nx, std::size_t ny, std::span<const std::vector<double>> data,
                  std::uint64_t seed);

/// Learning rate and neighborhood radius each decay exponentially from their
/// initial to their final value over the epochs.
struct SomSchedule {
    int epochs = 300;
    double lr0 = 0.5;
    double lr_end = 0.01;
    double radius0 = 1.5;
    double radius_end = 0.5;

    void validate() const;
    double lr(int epoch) const;
    double radius(int epoch) const;

    /// Defaults with radius0 = max(nx, ny) / 2.
    static SomSchedule for_grid(std::size_t nx, std::size_t ny, int epochs = 300);
};

/// Gaussian neighborhood over grid distance; a zero radius leaves only the
/// winner itself.
double neighborhood(double grid_dist2, double radius);

/// Neuron nearest to x in Euclidean distance, row-major first on ties.
GridPos find_winner(const SomGrid& grid, std::span<const double> x);

/// Winner-take-all training with neighborhood updates. Samples are presented
/// in a fresh seeded shuffle each epoch. Deterministic in (grid, data,
/// schedule, seed). Any existing labels are cleared.
SomGrid train_som(SomGrid grid, std::span<const std::vector<double>> data,
                  const SomSchedule& schedule, std::uint64_t seed);

struct LabelResult {
    SomGrid grid;
    std::vector<std::size_t> win_counts;  // per neuron, row-major
};

/// Majority label among the samples each neuron wins (ties to the lower
/// code). Neurons that win nothing copy the label of the nearest neuron that
/// did, by grid distance, row-major first on ties.
LabelResult label_neurons(SomGrid grid, std::span<const std::vector<double>> data,
                          std::span<const geometry::ContactState> labels);

/// Label of the winning neuron. Throws UnlabeledGrid before labeling.
geometry::ContactState som_classify(const SomGrid& grid, std::span<const double> x);

}  // namespace contactlab::som
