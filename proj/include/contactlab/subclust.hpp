#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "contactlab/anfis.hpp"

namespace contactlab::subclust {

struct SubclustParams {
    double radius = 0.5;  // neighborhood radius r_a
    double squash = 1.25;
    double accept_ratio = 0.5;
    double reject_ratio = 0.15;

    void validate() const;
};

struct ClusterCenter {
    std::size_t index = 0;  // position of the chosen point in the input
    std::vector<double> point;
    double potential = 0.0;  // revised potential when selected
};

/// Initial potentials P_i = sum_j exp(-4 |x_i - x_j|^2 / r_a^2).
std::vector<double> potentials(std::span<const std::vector<double>> data, double radius);

/// Subtractive (mountain-style) clustering. Each selected center is a data
/// point; selection order follows decreasing revised potential with ties
/// going to the lowest index. Throws EmptyData on an empty input.
std::vector<ClusterCenter> subtractive_cluster(std::span<const std::vector<double>> data,
                                               const SubclustParams& params);

/// One rule per center: every antecedent is a Gaussian at the center
/// coordinate with sigma = r_a / sqrt(8), consequents fitted by one
/// least-squares pass. `standardization` maps raw inputs into the space the
/// centers live in and is stored in the model.
anfis::TskModel rules_from_clusters(std::span<const ClusterCenter> centers,
                                    const anfis::Standardizer& standardization,
                                    const anfis::TrainingSet& data, double radius,
                                    double ridge = anfis::kDefaultRidge);

struct Calibration {
    double radius = 0.0;
    std::vector<ClusterCenter> centers;
};

/// Searches for a radius that yields exactly `target_rules` centers: bisection
/// on the (roughly non-increasing) count, then a log-spaced sweep of the whole
/// range if the count steps over the target. Throws CalibrationError when no radius in
/// [lo, hi] produces the count.
Calibration calibrate_radius(std::span<const std::vector<double>> data, std::size_t target_rules,
                             SubclustParams params, double lo = 1e-3, double hi = 100.0);

}  // namespace contactlab::subclust
