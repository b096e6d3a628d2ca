#include "contactlab/subclust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "contactlab/errors.hpp"

namespace contactlab::subclust {

void SubclustParams::validate() const {
    if (!(radius > 0.0)) throw InvalidArgument("subclust radius must be positive");
    if (!(squash >= 1.0)) throw InvalidArgument("subclust squash factor must be >= 1");
    if (!(accept_ratio > 0.0 && accept_ratio <= 1.0))
        throw InvalidArgument("subclust accept ratio must lie in (0, 1]");
    if (!(reject_ratio > 0.0 && reject_ratio < accept_ratio))
        throw InvalidArgument("subclust reject ratio must lie in (0, accept ratio)");
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

void check_uniform(std::span<const std::vector<double>> data) {
    if (data.empty()) throw EmptyData("subtractive clustering needs at least one point");
    for (const auto& x : data)
        if (x.size() != data.front().size()) throw DimensionMismatch(data.front().size(), x.size());
}

// Index of the largest value; strict comparison keeps the lowest index on ties.
std::size_t argmax(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

}  // namespace

std::vector<double> potentials(std::span<const std::vector<double>> data, double radius) {
    check_uniform(data);
    const double alpha = 4.0 / (radius * radius);
    std::vector<double> p(data.size(), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i)
        for (std::size_t j = 0; j < data.size(); ++j)
            p[i] += std::exp(-alpha * squared_distance(data[i], data[j]));
    return p;
}

std::vector<ClusterCenter> subtractive_cluster(std::span<const std::vector<double>> data,
                                               const SubclustParams& params) {
    params.validate();
    auto p = potentials(data, params.radius);
    const double rb = params.squash * params.radius;
    const double beta = 4.0 / (rb * rb);

    std::vector<ClusterCenter> centers;
    std::size_t first = argmax(p);
    const double first_potential = p[first];
    std::size_t candidate = first;

    auto accept = [&](std::size_t idx) {
        const double pk = p[idx];
        centers.push_back({idx, data[idx], pk});
        for (std::size_t i = 0; i < p.size(); ++i)
            p[i] = std::max(0.0, p[i] - pk * std::exp(-beta * squared_distance(data[i], data[idx])));
        p[idx] = 0.0;
    };

    accept(candidate);
    while (true) {
        candidate = argmax(p);
        const double pk = p[candidate];
        if (pk <= 0.0) break;
        if (pk > params.accept_ratio * first_potential) {
            accept(candidate);
            continue;
        }
        if (pk < params.reject_ratio * first_potential) break;

        double dmin = std::numeric_limits<double>::infinity();
        for (const auto& c : centers)
            dmin = std::min(dmin, std::sqrt(squared_distance(data[candidate], c.point)));
        if (dmin / params.radius + pk / first_potential >= 1.0) {
            accept(candidate);
        } else {
            // Too close to an existing center for its potential; drop it and
            // look at the next best.
            p[candidate] = 0.0;
        }
    }
    return centers;
}

anfis::TskModel rules_from_clusters(std::span<const ClusterCenter> centers,
                                    const anfis::Standardizer& standardization,
                                    const anfis::TrainingSet& data, double radius,
                                    double ridge) {
    if (centers.empty()) throw EmptyData("no cluster centers to build rules from");
    if (!(radius > 0.0)) throw InvalidArgument("radius must be positive");
    const std::size_t n = centers.front().point.size();
    anfis::TskModel model;
    model.n = n;
    model.standardization = standardization;
    const double sigma = radius / std::sqrt(8.0);
    for (const auto& c : centers) {
        if (c.point.size() != n) throw DimensionMismatch(n, c.point.size());
        anfis::TskRule rule;
        for (double v : c.point) rule.antecedents.push_back({v, sigma});
        rule.consequent.assign(n + 1, 0.0);
        model.rules.push_back(std::move(rule));
    }
    anfis::fit_consequents(model, data, ridge);
    return model;
}

Calibration calibrate_radius(std::span<const std::vector<double>> data, std::size_t target_rules,
                             SubclustParams params, double lo, double hi) {
    if (target_rules == 0) throw InvalidArgument("target rule count must be positive");
    auto run = [&](double r) {
        params.radius = r;
        return subtractive_cluster(data, params);
    };

    auto low = run(lo);
    if (low.size() == target_rules) return {lo, std::move(low)};
    if (low.size() < target_rules)
        throw CalibrationError("even radius " + std::to_string(lo) + " yields only " +
                               std::to_string(low.size()) + " rules; cannot reach " +
                               std::to_string(target_rules));
    auto high = run(hi);
    if (high.size() == target_rules) return {hi, std::move(high)};
    if (high.size() > target_rules)
        throw CalibrationError("radius " + std::to_string(hi) + " still yields " +
                               std::to_string(high.size()) + " rules");

    // Invariant: count(lo) > target > count(hi).
    const double sweep_lo = lo;
    const double sweep_hi = hi;
    for (int iter = 0; iter < 80; ++iter) {
        const double mid = std::sqrt(lo * hi);
        auto centers = run(mid);
        if (centers.size() == target_rules) return {mid, std::move(centers)};
        if (centers.size() > target_rules)
            lo = mid;
        else
            hi = mid;
        if (hi / lo - 1.0 < 1e-12) break;
    }

    // The count is only roughly monotone in the radius: it can step over the
    // target at the bisection point yet hit it elsewhere. Sweep the full range.
    std::size_t closest_above = std::numeric_limits<std::size_t>::max();
    std::size_t closest_below = 0;
    constexpr int kSweep = 2000;
    const double ratio = std::log(sweep_hi / sweep_lo);
    for (int i = 0; i <= kSweep; ++i) {
        const double r = sweep_lo * std::exp(ratio * i / kSweep);
        auto centers = run(r);
        if (centers.size() == target_rules) return {r, std::move(centers)};
        if (centers.size() > target_rules)
            closest_above = std::min(closest_above, centers.size());
        else
            closest_below = std::max(closest_below, centers.size());
    }
    throw CalibrationError("no radius yields exactly " + std::to_string(target_rules) +
                           " rules (nearest counts " + std::to_string(closest_below) + " and " +
                           std::to_string(closest_above) + ")");
}

}  // namespace contactlab::subclust
