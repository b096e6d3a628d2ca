#pragma once

#include <span>
#include <vector>

#include "contactlab/geometry.hpp"

namespace contactlab::anfis {

/// Gaussian membership exp(-(x - c)^2 / (2 sigma^2)).
struct GaussianMf {
    double c = 0.0;
    double sigma = 1.0;

    double operator()(double x) const;
};

double mf_eval(const GaussianMf& mf, double x);

/// One Takagi-Sugeno rule: a Gaussian antecedent per input and a linear
/// consequent p0 + sum_j p_j x_j stored as [p0, p1, ..., pn].
struct TskRule {
    std::vector<GaussianMf> antecedents;
    std::vector<double> consequent;

    std::size_t dimension() const { return antecedents.size(); }
};

/// Product of the rule's memberships at x.
double firing_strength(const TskRule& rule, std::span<const double> x);

/// Natural log of the firing strength, finite even where the product underflows.
double log_firing_strength(const TskRule& rule, std::span<const double> x);

double consequent_eval(const TskRule& rule, std::span<const double> x);

/// Per-feature affine transform z = (x - mean) / std applied before rule
/// evaluation. An empty standardizer is the identity.
struct Standardizer {
    std::vector<double> means;
    std::vector<double> stds;

    bool empty() const { return means.empty(); }

    /// Population statistics over `rows`. Features with (near) zero spread
    /// get std 1 so they map to a constant.
    static Standardizer fit(std::span<const std::vector<double>> rows);
    static Standardizer identity(std::size_t n);

    std::vector<double> apply(std::span<const double> x) const;
    std::vector<std::vector<double>> apply_all(std::span<const std::vector<double>> rows) const;
};

/// Firing-strength sums below this are treated as total underflow; the
/// output then falls back to the consequent of the strongest rule.
inline constexpr double kFiringFloor = 1e-300;

struct TskModel {
    std::size_t n = 0;
    std::vector<TskRule> rules;
    Standardizer standardization;

    std::size_t rule_count() const { return rules.size(); }

    /// Throws InvalidArgument if the rule base is inconsistent.
    void validate() const;
};

/// Firing strengths normalized to sum 1 at the (already standardized) point z.
std::vector<double> normalized_weights(const TskModel& model, std::span<const double> z);

/// Model output for a raw input x. Standardizes x, then returns
/// sum_k w_k f_k(z) / sum_r w_r.
double infer(const TskModel& model, std::span<const double> x);

/// Same, for an input already in the model's standardized space.
double infer_standardized(const TskModel& model, std::span<const double> z);

/// Rounds the model output to the nearest code and clamps into [0, 3].
geometry::ContactState predict_contact_state(const TskModel& model, std::span<const double> x);
geometry::ContactState contact_state_from_output(double y);

/// Derivatives of the model output with respect to the premise parameters,
/// indexed [rule][input]. Taken at the standardized point z.
struct PremiseGradient {
    std::vector<std::vector<double>> d_center;
    std::vector<std::vector<double>> d_sigma;
};

PremiseGradient premise_gradient(const TskModel& model, std::span<const double> x);

/// Raw inputs with real-valued targets.
struct TrainingSet {
    std::vector<std::vector<double>> inputs;
    std::vector<double> targets;

    std::size_t size() const { return inputs.size(); }
};

/// Ridge weight on the consequent least-squares solve.
inline constexpr double kDefaultRidge = 1e-8;

/// Solves for every consequent weight at once with premises held fixed
/// (ridge-regularized linear least squares). Throws SingularSystem when the
/// regularized system cannot be factored.
void fit_consequents(TskModel& model, const TrainingSet& data, double ridge = kDefaultRidge);

double rmse(const TskModel& model, const TrainingSet& data);

struct HybridOptions {
    int epochs = 50;
    double lr = 0.01;
    double ridge = kDefaultRidge;
};

struct HybridResult {
    TskModel model;                     // lowest-RMSE model seen
    std::vector<double> lse_rmse;       // after each least-squares step
    std::vector<double> gradient_rmse;  // after each gradient step (post-revert)
    double best_rmse = 0.0;
    double final_lr = 0.0;
};

/// Hybrid learning. Every epoch refits the consequents by least squares and
/// then takes one batch gradient step on all centers and widths. A gradient
/// step that raises the error, or whose follow-up least-squares fit would,
/// is undone and the learning rate halved, so `lse_rmse` never increases.
///
/// Throws EmptyData, DimensionMismatch, SingularSystem, or NonFinite.
HybridResult train_hybrid(const TskModel& initial, const TrainingSet& data,
                          const HybridOptions& options = {});

}  // namespace contactlab::anfis
