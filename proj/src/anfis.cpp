#include "contactlab/anfis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "contactlab/errors.hpp"

namespace contactlab::anfis {

double GaussianMf::operator()(double x) const {
    const double d = x - c;
    return std::exp(-(d * d) / (2.0 * sigma * sigma));
}

double mf_eval(const GaussianMf& mf, double x) { return mf(x); }

double firing_strength(const TskRule& rule, std::span<const double> x) {
    if (x.size() != rule.dimension()) throw DimensionMismatch(rule.dimension(), x.size());
    double w = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j) w *= rule.antecedents[j](x[j]);
    return w;
}

double log_firing_strength(const TskRule& rule, std::span<const double> x) {
    if (x.size() != rule.dimension()) throw DimensionMismatch(rule.dimension(), x.size());
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const auto& mf = rule.antecedents[j];
        const double d = x[j] - mf.c;
        s -= (d * d) / (2.0 * mf.sigma * mf.sigma);
    }
    return s;
}

double consequent_eval(const TskRule& rule, std::span<const double> x) {
    if (x.size() != rule.dimension()) throw DimensionMismatch(rule.dimension(), x.size());
    if (rule.consequent.size() != x.size() + 1)
        throw DimensionMismatch(x.size() + 1, rule.consequent.size());
    double y = rule.consequent[0];
    for (std::size_t j = 0; j < x.size(); ++j) y += rule.consequent[j + 1] * x[j];
    return y;
}

Standardizer Standardizer::fit(std::span<const std::vector<double>> rows) {
    if (rows.empty()) throw EmptyData("cannot fit a standardizer on no rows");
    const std::size_t n = rows.front().size();
    Standardizer s;
    s.means.assign(n, 0.0);
    s.stds.assign(n, 0.0);
    for (const auto& r : rows) {
        if (r.size() != n) throw DimensionMismatch(n, r.size());
        for (std::size_t j = 0; j < n; ++j) s.means[j] += r[j];
    }
    const double count = static_cast<double>(rows.size());
    for (double& m : s.means) m /= count;
    for (const auto& r : rows)
        for (std::size_t j = 0; j < n; ++j) {
            const double d = r[j] - s.means[j];
            s.stds[j] += d * d;
        }
    for (std::size_t j = 0; j < n; ++j) {
        const double sd = std::sqrt(s.stds[j] / count);
        s.stds[j] = sd > 1e-12 * std::max(1.0, std::abs(s.means[j])) ? sd : 1.0;
    }
    return s;
}

Standardizer Standardizer::identity(std::size_t n) {
    return Standardizer{std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)};
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
    if (empty()) return {x.begin(), x.end()};
    if (x.size() != means.size()) throw DimensionMismatch(means.size(), x.size());
    std::vector<double> z(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - means[j]) / stds[j];
    return z;
}

std::vector<std::vector<double>> Standardizer::apply_all(
    std::span<const std::vector<double>> rows) const {
    std::vector<std::vector<double>> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(apply(r));
    return out;
}

void TskModel::validate() const {
    if (rules.empty()) throw InvalidArgument("model needs at least one rule");
    for (const auto& r : rules) {
        if (r.antecedents.size() != n)
            throw InvalidArgument("rule antecedent count differs from model dimension");
        if (r.consequent.size() != n + 1)
            throw InvalidArgument("rule consequent length must be n + 1");
        for (const auto& mf : r.antecedents)
            if (!(mf.sigma > 0.0) || !std::isfinite(mf.sigma) || !std::isfinite(mf.c))
                throw InvalidArgument("membership function needs finite c and sigma > 0");
    }
    if (!standardization.empty()) {
        if (standardization.means.size() != n || standardization.stds.size() != n)
            throw InvalidArgument("standardization size differs from model dimension");
        for (double s : standardization.stds)
            if (!(s > 0.0)) throw InvalidArgument("standardization std must be positive");
    }
}

std::vector<double> normalized_weights(const TskModel& model, std::span<const double> z) {
    if (z.size() != model.n) throw DimensionMismatch(model.n, z.size());
    std::vector<double> w(model.rules.size());
    double total = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        w[k] = firing_strength(model.rules[k], z);
        total += w[k];
    }
    if (total < kFiringFloor) {
        std::size_t strongest = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < w.size(); ++k) {
            const double l = log_firing_strength(model.rules[k], z);
            if (l > best) {
                best = l;
                strongest = k;
            }
        }
        std::fill(w.begin(), w.end(), 0.0);
        w[strongest] = 1.0;
        return w;
    }
    for (double& v : w) v /= total;
    return w;
}

double infer_standardized(const TskModel& model, std::span<const double> z) {
    const auto w = normalized_weights(model, z);
    double y = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k)
        if (w[k] != 0.0) y += w[k] * consequent_eval(model.rules[k], z);
    return y;
}

double infer(const TskModel& model, std::span<const double> x) {
    if (x.size() != model.n) throw DimensionMismatch(model.n, x.size());
    const auto z = model.standardization.apply(x);
    return infer_standardized(model, z);
}

geometry::ContactState contact_state_from_output(double y) {
    if (std::isnan(y)) throw NonFinite("model output is NaN");
    const double r = std::clamp(std::round(y), 0.0, 3.0);
    return static_cast<geometry::ContactState>(static_cast<int>(r));
}

geometry::ContactState predict_contact_state(const TskModel& model, std::span<const double> x) {
    return contact_state_from_output(infer(model, x));
}

namespace {

// dy/dc and dy/dsigma at a standardized point, accumulated with a weight.
void accumulate_gradient(const TskModel& model, std::span<const double> z, double scale,
                         PremiseGradient& g) {
    const std::size_t m = model.rules.size();
    std::vector<double> raw(m);
    double total = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        raw[k] = firing_strength(model.rules[k], z);
        total += raw[k];
    }
    // Under total underflow the output is piecewise constant in the premises.
    if (total < kFiringFloor) return;
    std::vector<double> f(m);
    double y = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        f[k] = consequent_eval(model.rules[k], z);
        y += raw[k] / total * f[k];
    }
    for (std::size_t k = 0; k < m; ++k) {
        const double common = scale * (raw[k] / total) * (f[k] - y);
        if (common == 0.0) continue;
        for (std::size_t j = 0; j < model.n; ++j) {
            const auto& mf = model.rules[k].antecedents[j];
            const double d = z[j] - mf.c;
            const double s2 = mf.sigma * mf.sigma;
            g.d_center[k][j] += common * d / s2;
            g.d_sigma[k][j] += common * d * d / (s2 * mf.sigma);
        }
    }
}

PremiseGradient zero_gradient(const TskModel& model) {
    PremiseGradient g;
    g.d_center.assign(model.rules.size(), std::vector<double>(model.n, 0.0));
    g.d_sigma.assign(model.rules.size(), std::vector<double>(model.n, 0.0));
    return g;
}

void check_data(const TskModel& model, const TrainingSet& data) {
    if (data.inputs.empty()) throw EmptyData("training set is empty");
    if (data.targets.size() != data.inputs.size())
        throw DimensionMismatch(data.inputs.size(), data.targets.size());
    for (const auto& x : data.inputs)
        if (x.size() != model.n) throw DimensionMismatch(model.n, x.size());
}

double rmse_standardized(const TskModel& model, const std::vector<std::vector<double>>& z,
                         const std::vector<double>& targets) {
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double e = infer_standardized(model, z[i]) - targets[i];
        s += e * e;
    }
    return std::sqrt(s / static_cast<double>(z.size()));
}

void solve_consequents(TskModel& model, const std::vector<std::vector<double>>& z,
                       const std::vector<double>& targets, double ridge) {
    const auto rows = static_cast<Eigen::Index>(z.size());
    const auto n = static_cast<Eigen::Index>(model.n);
    const auto m = static_cast<Eigen::Index>(model.rules.size());
    const Eigen::Index cols = m * (n + 1);

    Eigen::MatrixXd phi(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto w = normalized_weights(model, z[static_cast<std::size_t>(i)]);
        for (Eigen::Index k = 0; k < m; ++k) {
            const double wk = w[static_cast<std::size_t>(k)];
            phi(i, k * (n + 1)) = wk;
            for (Eigen::Index j = 0; j < n; ++j)
                phi(i, k * (n + 1) + 1 + j) = wk * z[static_cast<std::size_t>(i)][j];
        }
    }
    // The normalized weights sum to one, so a common offset added to every
    // intercept shifts the output by exactly that offset. Leaving the target
    // mean out of the penalty lets constant targets be fitted exactly.
    const double offset =
        std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(rows);
    const Eigen::VectorXd y =
        Eigen::Map<const Eigen::VectorXd>(targets.data(), rows).array() - offset;

    Eigen::VectorXd p;
    if (rows >= cols) {
        Eigen::MatrixXd normal = phi.transpose() * phi;
        normal.diagonal().array() += ridge;
        Eigen::LLT<Eigen::MatrixXd> llt(normal);
        if (llt.info() != Eigen::Success)
            throw SingularSystem("consequent least-squares system is not positive definite (" +
                                 std::to_string(m) + " rules, " + std::to_string(rows) +
                                 " samples)");
        p = llt.solve(phi.transpose() * y);
    } else {
        // Fewer samples than unknowns: solve the equivalent N x N dual system.
        Eigen::MatrixXd gram = phi * phi.transpose();
        gram.diagonal().array() += ridge;
        Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() != Eigen::Success)
            throw SingularSystem("consequent least-squares system is not positive definite (" +
                                 std::to_string(m) + " rules, " + std::to_string(rows) +
                                 " samples)");
        p = phi.transpose() * llt.solve(y);
    }
    if (!p.allFinite())
        throw SingularSystem("consequent least-squares solution is not finite (" +
                             std::to_string(m) + " rules, " + std::to_string(rows) + " samples)");

    for (Eigen::Index k = 0; k < m; ++k) {
        auto& c = model.rules[static_cast<std::size_t>(k)].consequent;
        for (Eigen::Index j = 0; j <= n; ++j) c[static_cast<std::size_t>(j)] = p(k * (n + 1) + j);
        c[0] += offset;
    }
}

constexpr double kSigmaFloor = 1e-6;

}  // namespace

PremiseGradient premise_gradient(const TskModel& model, std::span<const double> x) {
    if (x.size() != model.n) throw DimensionMismatch(model.n, x.size());
    auto g = zero_gradient(model);
    const auto z = model.standardization.apply(x);
    accumulate_gradient(model, z, 1.0, g);
    return g;
}

void fit_consequents(TskModel& model, const TrainingSet& data, double ridge) {
    model.validate();
    check_data(model, data);
    solve_consequents(model, model.standardization.apply_all(data.inputs), data.targets, ridge);
}

double rmse(const TskModel& model, const TrainingSet& data) {
    check_data(model, data);
    return rmse_standardized(model, model.standardization.apply_all(data.inputs), data.targets);
}

HybridResult train_hybrid(const TskModel& initial, const TrainingSet& data,
                          const HybridOptions& options) {
    initial.validate();
    if (options.epochs < 0) throw InvalidArgument("epochs must be non-negative");
    if (!(options.lr > 0.0)) throw InvalidArgument("learning rate must be positive");

    HybridResult result{initial, {}, {}, std::numeric_limits<double>::infinity(), options.lr};
    if (options.epochs == 0) return result;
    check_data(initial, data);

    const auto z = initial.standardization.apply_all(data.inputs);
    const auto& t = data.targets;
    const double inv_n = 1.0 / static_cast<double>(z.size());

    TskModel model = initial;
    TskModel last_fit = initial;  // post-LSE model of the previous epoch
    double lr = options.lr;
    double last_lse = std::numeric_limits<double>::infinity();

    auto record_best = [&](const TskModel& m, double r) {
        if (r < result.best_rmse) {
            result.best_rmse = r;
            result.model = m;
        }
    };

    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        TskModel fitted = model;
        solve_consequents(fitted, z, t, options.ridge);
        double r = rmse_standardized(fitted, z, t);
        if (!std::isfinite(r)) throw NonFinite("training RMSE is not finite after least squares");
        if (r > last_lse) {
            // The previous gradient step made the least-squares optimum worse.
            fitted = last_fit;
            r = last_lse;
            lr *= 0.5;
        }
        model = fitted;
        last_fit = fitted;
        last_lse = r;
        result.lse_rmse.push_back(r);
        record_best(model, r);

        auto g = zero_gradient(model);
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double e = infer_standardized(model, z[i]) - t[i];
            accumulate_gradient(model, z[i], e * inv_n, g);
        }
        TskModel stepped = model;
        for (std::size_t k = 0; k < stepped.rules.size(); ++k)
            for (std::size_t j = 0; j < stepped.n; ++j) {
                auto& mf = stepped.rules[k].antecedents[j];
                mf.c -= lr * g.d_center[k][j];
                mf.sigma = std::max(kSigmaFloor, mf.sigma - lr * g.d_sigma[k][j]);
                if (!std::isfinite(mf.c) || !std::isfinite(mf.sigma))
                    throw NonFinite("premise parameter became non-finite at epoch " +
                                    std::to_string(epoch) + "; lower the learning rate");
            }
        double rg = rmse_standardized(stepped, z, t);
        if (!std::isfinite(rg))
            throw NonFinite("training RMSE is not finite after gradient step at epoch " +
                            std::to_string(epoch) + "; lower the learning rate");
        if (rg > r) {
            lr *= 0.5;
            stepped = model;
            rg = r;
        }
        model = std::move(stepped);
        result.gradient_rmse.push_back(rg);
        record_best(model, rg);
    }
    result.final_lr = lr;
    return result;
}

}  // namespace contactlab::anfis
