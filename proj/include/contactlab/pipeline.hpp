#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "contactlab/anfis.hpp"
#include "contactlab/geometry.hpp"
#include "contactlab/som.hpp"

namespace contactlab::pipeline {

using geometry::Block;
using geometry::ContactState;
using geometry::Point;

/// From `start_step` on, block k moves by velocities[k] * dt per step.
struct VelocityPhase {
    int start_step = 0;
    std::vector<Point> velocities;
};

/// Kinematic block scene. `velocities` holds from step 0; optional later
/// phases switch every block to a new constant velocity.
struct Scene {
    std::vector<Block> blocks;
    std::vector<Point> velocities;
    std::vector<VelocityPhase> phases;
    int steps = 1;
    double dt = 1.0;

    /// Shape checks plus no interpenetration beyond `tol` at step 0.
    void validate(double tol = geometry::kDefaultTolerance) const;

    /// Block positions after `step` steps (displacements are summed per
    /// phase, not accumulated step by step).
    std::vector<Block> blocks_at(int step) const;

    /// Per-block velocity in force at `step`.
    const std::vector<Point>& velocities_at(int step) const;
};

/// Index pairs (i, j), i < j, in row-major order.
std::vector<std::pair<std::size_t, std::size_t>> block_pairs(std::size_t block_count);

struct Frame {
    int step = 0;
    double t = 0.0;
    std::vector<Block> blocks;
    std::vector<ContactState> states;  // one per block_pairs() entry

    /// State of the pair (0, 1).
    ContactState primary_state() const { return states.front(); }
};

/// Steps the scene and classifies every block pair at every step. Throws
/// OverlapError (carrying the step) when blocks are driven into each other.
std::vector<Frame> simulate(const Scene& scene, double tol = geometry::kDefaultTolerance);

/// The scene used by the default experiment: a unit square approaches a
/// fixed quadrilateral, lands on its top face, slides along it, rides its
/// corner and then slides down its slanted face, so the pair passes through
/// every contact state. Each state is held under slow drift and entered in a
/// single step. Two further touching blocks sit to the right.
Scene default_scene();

inline constexpr std::size_t kFeatureCount = 18;
inline constexpr std::size_t kGravityFeatureCount = 4;

/// [a.v1.x, a.v1.y, ..., a.v4.y, area(a), b.v1.x, ..., b.v4.y, area(b)] with
/// vertices in canonical order. Throws WrongVertexCount unless both blocks
/// are quadrilaterals.
std::vector<double> extract_features(const Block& a, const Block& b);

/// Centroids of both blocks: [a.x, a.y, b.x, b.y].
std::vector<double> gravity_features(const Block& a, const Block& b);

/// Rebuilds the two blocks described by an 18-value feature row.
std::pair<Block, Block> blocks_from_features(std::span<const double> features);

/// gravity_features of the blocks a feature row describes.
std::vector<double> gravity_features_from_row(std::span<const double> features);

struct Sample {
    std::vector<double> features;
    ContactState label = ContactState::None;
    int step = 0;
};

struct Dataset {
    std::vector<Sample> train;
    std::vector<Sample> check;
};

/// One sample per frame for the pair (a, b).
std::vector<Sample> series_from_frames(std::span<const Frame> frames, std::size_t a = 0,
                                       std::size_t b = 1);

/// Draws n_train + n_check distinct steps. Every label present in the series
/// gets at least one train sample; the rest is filled in seeded random order.
/// Both splits come back sorted by step. Throws InsufficientData.
Dataset build_dataset(std::span<const Sample> series, std::size_t n_train = 100,
                      std::size_t n_check = 50, std::uint64_t seed = 0);

anfis::TrainingSet to_training_set(std::span<const Sample> samples);
std::vector<std::vector<double>> gravity_rows(std::span<const Sample> samples);
std::vector<ContactState> labels_of(std::span<const Sample> samples);

using Confusion = std::array<std::array<std::size_t, geometry::kNumContactStates>,
                             geometry::kNumContactStates>;

struct Metrics {
    double accuracy = 0.0;
    Confusion confusion{};  // [true][predicted]
    std::size_t total = 0;
};

using Classifier = std::function<ContactState(const Sample&)>;

/// Throws EmptyData on an empty sample list.
Metrics evaluate(const Classifier& predict, std::span<const Sample> samples);

Classifier oracle_classifier(double tol = geometry::kDefaultTolerance);
Classifier nfis_classifier(const anfis::TskModel& model);
Classifier som_classifier(const som::SomGrid& grid);

struct Domain {
    Point min;
    Point max;

    double width() const { return max.x - min.x; }
    double height() const { return max.y - min.y; }
    bool contains(Point p) const;
};

/// Bounding box of `blocks`, grown by `margin` on every side.
Domain bounding_domain(std::span<const Block> blocks, double margin = 0.0);

struct Window {
    Point origin;  // lower-left corner
    double width = 0.0;
    double height = 0.0;

    Point center() const { return {origin.x + 0.5 * width, origin.y + 0.5 * height}; }
};

/// Seeded uniform placements fully inside `domain`. Throws SizeTooLarge when
/// the window does not fit.
std::vector<Window> random_windows(const Domain& domain, std::size_t count, double width,
                                   double height, std::uint64_t seed);

struct WindowReport {
    Window window;
    std::size_t blocks_inside = 0;
    std::optional<std::pair<std::size_t, std::size_t>> pair;  // scene indices
    ContactState som = ContactState::None;
    ContactState nfis = ContactState::None;
    ContactState fused = ContactState::None;
    bool disagree = false;
    ContactState oracle = ContactState::None;
};

/// Classifies the contact inside every window. The pair is the two blocks
/// (of those overlapping the window) nearest the window center. The fused
/// code is the NFIS prediction; `disagree` marks windows where the SOM label
/// differs. Windows holding fewer than two blocks report code 0.
/// Throws UnlabeledGrid, InvalidArgument for windows outside the domain.
std::vector<WindowReport> scan_windows(const Domain& domain, std::span<const Window> windows,
                                       const som::SomGrid& grid, const anfis::TskModel& nfis,
                                       std::span<const Block> blocks,
                                       double tol = geometry::kDefaultTolerance);

struct MapCell {
    double x = 0.0;
    double y = 0.0;
    ContactState code = ContactState::None;
};

/// Fused code on a resolution-by-resolution lattice of cell centers, each
/// evaluated through a window of the given size centered on it (clamped to
/// the domain). Row by row in y, x fastest.
std::vector<MapCell> contact_map(const Domain& domain, std::size_t resolution, double width,
                                 double height, const som::SomGrid& grid,
                                 const anfis::TskModel& nfis, std::span<const Block> blocks,
                                 double tol = geometry::kDefaultTolerance);

}  // namespace contactlab::pipeline
