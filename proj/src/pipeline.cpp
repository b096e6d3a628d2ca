#include "contactlab/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "contactlab/errors.hpp"
#include "contactlab/random.hpp"

namespace contactlab::pipeline {

void Scene::validate(double tol) const {
    if (blocks.size() < 2) throw InvalidArgument("scene needs at least two blocks");
    if (velocities.size() != blocks.size())
        throw InvalidArgument("scene needs one velocity per block");
    int previous = 0;
    for (const auto& ph : phases) {
        if (ph.velocities.size() != blocks.size())
            throw InvalidArgument("velocity phase needs one velocity per block");
        if (ph.start_step <= previous)
            throw InvalidArgument("velocity phases must start at increasing positive steps");
        previous = ph.start_step;
    }
    if (steps < 1) throw InvalidArgument("scene needs at least one step");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("scene dt must be positive");
    for (const auto& [i, j] : block_pairs(blocks.size())) {
        const double depth = geometry::penetration_depth(blocks[i], blocks[j]);
        if (depth > tol)
            throw OverlapError("blocks " + std::to_string(blocks[i].id()) + " and " +
                                   std::to_string(blocks[j].id()) + " overlap at step 0",
                               depth, 0);
    }
}

const std::vector<Point>& Scene::velocities_at(int step) const {
    const std::vector<Point>* v = &velocities;
    for (const auto& ph : phases)
        if (step >= ph.start_step) v = &ph.velocities;
    return *v;
}

std::vector<Block> Scene::blocks_at(int step) const {
    std::vector<Point> offset(blocks.size());
    int start = 0;
    const std::vector<Point>* v = &velocities;
    auto advance = [&](int end) {
        const int n = std::max(0, std::min(step, end) - start);
        for (std::size_t k = 0; k < blocks.size(); ++k)
            offset[k] = offset[k] + (static_cast<double>(n) * dt) * (*v)[k];
    };
    for (const auto& ph : phases) {
        advance(ph.start_step);
        start = ph.start_step;
        v = &ph.velocities;
    }
    advance(step);

    std::vector<Block> out;
    out.reserve(blocks.size());
    for (std::size_t k = 0; k < blocks.size(); ++k) out.push_back(blocks[k].translated(offset[k]));
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> block_pairs(std::size_t block_count) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < block_count; ++i)
        for (std::size_t j = i + 1; j < block_count; ++j) out.emplace_back(i, j);
    return out;
}

std::vector<Frame> simulate(const Scene& scene, double tol) {
    scene.validate(tol);
    const auto pairs = block_pairs(scene.blocks.size());
    std::vector<Frame> frames;
    frames.reserve(static_cast<std::size_t>(scene.steps));
    for (int s = 0; s < scene.steps; ++s) {
        Frame f;
        f.step = s;
        f.t = s * scene.dt;
        f.blocks = scene.blocks_at(s);
        f.states.reserve(pairs.size());
        for (const auto& [i, j] : pairs) {
            try {
                f.states.push_back(geometry::classify_contact(f.blocks[i], f.blocks[j], tol));
            } catch (const OverlapError& e) {
                throw OverlapError(std::string(e.what()) + " at step " + std::to_string(s),
                                   e.depth(), s);
            }
        }
        frames.push_back(std::move(f));
    }
    return frames;
}

Scene default_scene() {
    Scene s;
    s.blocks = {
        Block(0, {{0, 0}, {4, 0}, {4, 2}, {1, 2}}),
        Block(1, {{2.5, 3}, {3.5, 3}, {3.5, 4}, {2.5, 4}}),
        Block(2, {{6, 0}, {7, 0}, {7, 1}, {6, 1}}),
        Block(3, {{7, 0}, {8, 0}, {8, 1}, {7, 1}}),
    };
    const Point still{0, 0};
    // Each contact state is held while the blocks drift slowly, and every
    // transition happens in a single step.
    // Approach the top face diagonally; 0.3 m gap left after 35 steps.
    s.velocities = {still, {-0.01, -0.02}, still, still};
    s.phases = {
        // Close the gap: bottom face on top face.
        {35, {still, {0, -0.3}, still, still}},
        // Slide left along the top face (right edge ends at x = 1.68).
        {36, {still, {-0.03, 0}, still, still}},
        // Jump so the bottom-right corner sits on the corner (1, 2).
        {85, {still, {-0.68, 0}, still, still}},
        // Both blocks translate together, corner on corner.
        {86, {{0.015, 0.009}, {0.015, 0.009}, still, still}},
        // Drop onto the slanted face, direction (-1, -2), then slide down it.
        {115, {still, {-0.15, -0.3}, still, still}},
        {116, {still, {-0.01, -0.02}, still, still}},
    };
    s.steps = 170;
    s.dt = 1.0;
    return s;
}

std::vector<double> extract_features(const Block& a, const Block& b) {
    if (a.size() != 4 || b.size() != 4)
        throw WrongVertexCount("features need two quadrilateral blocks (got " +
                               std::to_string(a.size()) + " and " + std::to_string(b.size()) +
                               " vertices)");
    std::vector<double> f;
    f.reserve(kFeatureCount);
    for (const Block* blk : {&a, &b}) {
        for (const Point& p : blk->canonical_vertices()) {
            f.push_back(p.x);
            f.push_back(p.y);
        }
        f.push_back(geometry::polygon_area(*blk));
    }
    return f;
}

std::vector<double> gravity_features(const Block& a, const Block& b) {
    const Point ca = geometry::centroid(a);
    const Point cb = geometry::centroid(b);
    return {ca.x, ca.y, cb.x, cb.y};
}

std::pair<Block, Block> blocks_from_features(std::span<const double> features) {
    if (features.size() != kFeatureCount) throw DimensionMismatch(kFeatureCount, features.size());
    auto quad = [&](std::size_t base) {
        std::vector<Point> v;
        for (std::size_t k = 0; k < 4; ++k) v.push_back({features[base + 2 * k], features[base + 2 * k + 1]});
        return v;
    };
    return {Block(0, quad(0)), Block(1, quad(9))};
}

std::vector<double> gravity_features_from_row(std::span<const double> features) {
    const auto [a, b] = blocks_from_features(features);
    return gravity_features(a, b);
}

std::vector<Sample> series_from_frames(std::span<const Frame> frames, std::size_t a, std::size_t b) {
    if (a == b) throw InvalidArgument("series needs two distinct blocks");
    const std::size_t lo = std::min(a, b);
    const std::size_t hi = std::max(a, b);
    std::vector<Sample> out;
    out.reserve(frames.size());
    for (const auto& f : frames) {
        if (hi >= f.blocks.size()) throw InvalidArgument("series block index out of range");
        const auto pairs = block_pairs(f.blocks.size());
        const auto it = std::find(pairs.begin(), pairs.end(), std::pair{lo, hi});
        out.push_back({extract_features(f.blocks[a], f.blocks[b]),
                       f.states[static_cast<std::size_t>(it - pairs.begin())], f.step});
    }
    return out;
}

Dataset build_dataset(std::span<const Sample> series, std::size_t n_train, std::size_t n_check,
                      std::uint64_t seed) {
    const std::size_t need = n_train + n_check;
    if (series.size() < need)
        throw InsufficientData("series has " + std::to_string(series.size()) +
                               " steps, dataset needs " + std::to_string(need));
    std::vector<std::size_t> order(series.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<bool> used(series.size(), false);
    Dataset ds;
    for (int c = 0; c < geometry::kNumContactStates && ds.train.size() < n_train; ++c) {
        for (std::size_t idx : order) {
            if (geometry::code(series[idx].label) == c) {
                ds.train.push_back(series[idx]);
                used[idx] = true;
                break;
            }
        }
    }
    for (std::size_t idx : order) {
        if (used[idx]) continue;
        if (ds.train.size() < n_train)
            ds.train.push_back(series[idx]);
        else if (ds.check.size() < n_check)
            ds.check.push_back(series[idx]);
        else
            break;
    }
    auto by_step = [](const Sample& a, const Sample& b) { return a.step < b.step; };
    std::sort(ds.train.begin(), ds.train.end(), by_step);
    std::sort(ds.check.begin(), ds.check.end(), by_step);
    return ds;
}

anfis::TrainingSet to_training_set(std::span<const Sample> samples) {
    anfis::TrainingSet t;
    for (const auto& s : samples) {
        t.inputs.push_back(s.features);
        t.targets.push_back(static_cast<double>(geometry::code(s.label)));
    }
    return t;
}

std::vector<std::vector<double>> gravity_rows(std::span<const Sample> samples) {
    std::vector<std::vector<double>> rows;
    rows.reserve(samples.size());
    for (const auto& s : samples) rows.push_back(gravity_features_from_row(s.features));
    return rows;
}

std::vector<ContactState> labels_of(std::span<const Sample> samples) {
    std::vector<ContactState> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.label);
    return out;
}

Metrics evaluate(const Classifier& predict, std::span<const Sample> samples) {
    if (samples.empty()) throw EmptyData("cannot evaluate on an empty sample list");
    Metrics m;
    std::size_t correct = 0;
    for (const auto& s : samples) {
        const ContactState p = predict(s);
        ++m.confusion[static_cast<std::size_t>(geometry::code(s.label))]
                     [static_cast<std::size_t>(geometry::code(p))];
        if (p == s.label) ++correct;
    }
    m.total = samples.size();
    m.accuracy = static_cast<double>(correct) / static_cast<double>(m.total);
    return m;
}

Classifier oracle_classifier(double tol) {
    return [tol](const Sample& s) {
        const auto [a, b] = blocks_from_features(s.features);
        return geometry::classify_contact(a, b, tol);
    };
}

Classifier nfis_classifier(const anfis::TskModel& model) {
    return [&model](const Sample& s) { return anfis::predict_contact_state(model, s.features); };
}

Classifier som_classifier(const som::SomGrid& grid) {
    if (!grid.labeled()) throw UnlabeledGrid("SOM grid has not been labeled");
    return [&grid](const Sample& s) {
        return som::som_classify(grid, gravity_features_from_row(s.features));
    };
}

bool Domain::contains(Point p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
}

Domain bounding_domain(std::span<const Block> blocks, double margin) {
    if (blocks.empty()) throw EmptyData("no blocks to bound");
    constexpr double inf = std::numeric_limits<double>::infinity();
    Domain d{{inf, inf}, {-inf, -inf}};
    for (const auto& b : blocks)
        for (const Point& p : b.vertices()) {
            d.min.x = std::min(d.min.x, p.x);
            d.min.y = std::min(d.min.y, p.y);
            d.max.x = std::max(d.max.x, p.x);
            d.max.y = std::max(d.max.y, p.y);
        }
    d.min = d.min - Point{margin, margin};
    d.max = d.max + Point{margin, margin};
    return d;
}

std::vector<Window> random_windows(const Domain& domain, std::size_t count, double width,
                                   double height, std::uint64_t seed) {
    if (count == 0) throw InvalidArgument("window count must be at least 1");
    if (!(width > 0.0) || !(height > 0.0)) throw InvalidArgument("window size must be positive");
    if (width > domain.width() || height > domain.height())
        throw SizeTooLarge("window " + std::to_string(width) + " x " + std::to_string(height) +
                           " does not fit the domain");
    Rng rng(seed);
    std::vector<Window> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double x = domain.min.x + rng.uniform() * (domain.width() - width);
        const double y = domain.min.y + rng.uniform() * (domain.height() - height);
        out.push_back({{x, y}, width, height});
    }
    return out;
}

namespace {

Block window_block(const Window& w) {
    const Point o = w.origin;
    return Block(-1, {o, {o.x + w.width, o.y}, {o.x + w.width, o.y + w.height}, {o.x, o.y + w.height}});
}

double point_block_distance(Point p, const Block& b) {
    bool inside = true;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < b.size(); ++i) {
        const Point a0 = b.vertex(i);
        const Point a1 = b.vertex(i + 1);
        if (geometry::cross(a1 - a0, p - a0) < 0.0) inside = false;
        best = std::min(best, geometry::point_segment_distance(p, a0, a1));
    }
    return inside ? 0.0 : best;
}

constexpr double kDomainSlack = 1e-9;

void check_inside(const Domain& d, const Window& w) {
    if (w.origin.x < d.min.x - kDomainSlack || w.origin.y < d.min.y - kDomainSlack ||
        w.origin.x + w.width > d.max.x + kDomainSlack ||
        w.origin.y + w.height > d.max.y + kDomainSlack)
        throw InvalidArgument("window lies outside the domain");
}

WindowReport scan_one(const Window& w, const som::SomGrid& grid, const anfis::TskModel& nfis,
                      std::span<const Block> blocks, double tol) {
    WindowReport r;
    r.window = w;
    const Block frame = window_block(w);
    const Point c = w.center();

    struct Candidate {
        double dist;
        double centroid_dist;
        std::size_t index;
    };
    std::vector<Candidate> inside;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        if (geometry::penetration_depth(frame, blocks[k]) <= 0.0) continue;
        inside.push_back({point_block_distance(c, blocks[k]),
                          geometry::norm(geometry::centroid(blocks[k]) - c), k});
    }
    r.blocks_inside = inside.size();
    if (inside.size() < 2) return r;

    std::sort(inside.begin(), inside.end(), [](const Candidate& a, const Candidate& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.centroid_dist != b.centroid_dist) return a.centroid_dist < b.centroid_dist;
        return a.index < b.index;
    });
    const std::size_t i = std::min(inside[0].index, inside[1].index);
    const std::size_t j = std::max(inside[0].index, inside[1].index);
    r.pair = std::pair{i, j};

    r.som = som::som_classify(grid, gravity_features(blocks[i], blocks[j]));
    r.nfis = anfis::predict_contact_state(nfis, extract_features(blocks[i], blocks[j]));
    r.fused = r.nfis;
    r.disagree = r.som != r.nfis;
    r.oracle = geometry::classify_contact(blocks[i], blocks[j], tol);
    return r;
}

}  // namespace

std::vector<WindowReport> scan_windows(const Domain& domain, std::span<const Window> windows,
                                       const som::SomGrid& grid, const anfis::TskModel& nfis,
                                       std::span<const Block> blocks, double tol) {
    if (!grid.labeled()) throw UnlabeledGrid("SOM grid has not been labeled");
    std::vector<WindowReport> out;
    out.reserve(windows.size());
    for (const auto& w : windows) {
        check_inside(domain, w);
        out.push_back(scan_one(w, grid, nfis, blocks, tol));
    }
    return out;
}

std::vector<MapCell> contact_map(const Domain& domain, std::size_t resolution, double width,
                                 double height, const som::SomGrid& grid,
                                 const anfis::TskModel& nfis, std::span<const Block> blocks,
                                 double tol) {
    if (resolution == 0) throw InvalidArgument("map resolution must be positive");
    if (!(width > 0.0) || !(height > 0.0)) throw InvalidArgument("window size must be positive");
    if (width > domain.width() || height > domain.height())
        throw SizeTooLarge("map window does not fit the domain");
    if (!grid.labeled()) throw UnlabeledGrid("SOM grid has not been labeled");

    std::vector<MapCell> cells;
    cells.reserve(resolution * resolution);
    const double dx = domain.width() / static_cast<double>(resolution);
    const double dy = domain.height() / static_cast<double>(resolution);
    for (std::size_t iy = 0; iy < resolution; ++iy) {
        for (std::size_t ix = 0; ix < resolution; ++ix) {
            const double x = domain.min.x + (static_cast<double>(ix) + 0.5) * dx;
            const double y = domain.min.y + (static_cast<double>(iy) + 0.5) * dy;
            const Window w{{std::clamp(x - 0.5 * width, domain.min.x, domain.max.x - width),
                            std::clamp(y - 0.5 * height, domain.min.y, domain.max.y - height)},
                           width,
                           height};
            cells.push_back({x, y, scan_one(w, grid, nfis, blocks, tol).fused});
        }
    }
    return cells;
}

}  // namespace contactlab::pipeline
