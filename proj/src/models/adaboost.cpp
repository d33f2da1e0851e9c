#include "aqlock/models/adaboost.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "aqlock/error.hpp"

namespace aqlock::models {

using nlohmann::json;

double weighted_median(std::span<const double> values, std::span<const double> weights) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    double cumulative = 0.0;
    for (std::size_t i : order) {
        cumulative += weights[i];
        if (cumulative >= 0.5 * total) return values[i];
    }
    return values[order.back()];
}

AdaBoostModel AdaBoostModel::fit(const Matrix& x, const Matrix& y, const AdaBoostParams& params) {
    if (params.n_estimators < 1) throw Error(ErrorKind::Config, "madab needs at least one estimator");
    if (x.rows() != y.rows()) throw Error(ErrorKind::Shape, "inputs and targets differ in rows");
    if (x.rows() < 1) throw Error(ErrorKind::InsufficientData, "madab needs training rows");
    const auto n = static_cast<std::size_t>(x.rows());
    TreeParams base;
    base.max_depth = params.base_depth;

    AdaBoostModel model;
    for (Eigen::Index o = 0; o < y.cols(); ++o) {
        const Matrix target = y.col(o);
        Ensemble ens;
        std::vector<double> w(n, 1.0);
        for (int t = 0; t < params.n_estimators; ++t) {
            auto tree = RegressionTree::fit(x, target, w, base);
            const Matrix pred = tree.predict(x);
            std::vector<double> err(n);
            double err_max = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                err[i] = std::fabs(pred(static_cast<Eigen::Index>(i), 0) - target(static_cast<Eigen::Index>(i), 0));
                err_max = std::max(err_max, err[i]);
            }
            if (err_max == 0.0) {
                ens.trees.push_back(std::move(tree));
                ens.weights.push_back(1.0);
                ens.halted_early = t + 1 < params.n_estimators;
                break;
            }
            double w_sum = 0.0, loss = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                err[i] /= err_max;
                w_sum += w[i];
                loss += w[i] * err[i];
            }
            loss /= w_sum;
            if (loss >= 0.5) {
                // Boosting cannot improve on a learner this weak; a lone first
                // estimator is still kept so the model can predict.
                if (ens.trees.empty()) {
                    ens.trees.push_back(std::move(tree));
                    ens.weights.push_back(1.0);
                }
                ens.halted_early = true;
                break;
            }
            const double beta = loss / (1.0 - loss);
            ens.trees.push_back(std::move(tree));
            ens.weights.push_back(params.learning_rate * std::log(1.0 / beta));
            double new_sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                w[i] *= std::pow(beta, params.learning_rate * (1.0 - err[i]));
                new_sum += w[i];
            }
            for (auto& v : w) v *= static_cast<double>(n) / new_sum;
        }
        model.ensembles_.push_back(std::move(ens));
    }
    return model;
}

Matrix AdaBoostModel::predict(const Matrix& x) const {
    Matrix out(x.rows(), static_cast<Eigen::Index>(ensembles_.size()));
    for (std::size_t o = 0; o < ensembles_.size(); ++o) {
        const auto& ens = ensembles_[o];
        std::vector<Matrix> preds;
        preds.reserve(ens.trees.size());
        for (const auto& t : ens.trees) preds.push_back(t.predict(x));
        std::vector<double> values(ens.trees.size());
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            for (std::size_t t = 0; t < preds.size(); ++t) values[t] = preds[t](r, 0);
            out(r, static_cast<Eigen::Index>(o)) = weighted_median(values, ens.weights);
        }
    }
    return out;
}

json AdaBoostModel::to_json() const {
    json ensembles = json::array();
    for (const auto& e : ensembles_) {
        json trees = json::array();
        for (const auto& t : e.trees) trees.push_back(t.to_json());
        ensembles.push_back({{"trees", trees}, {"weights", e.weights}, {"halted_early", e.halted_early}});
    }
    return {{"ensembles", ensembles}};
}

AdaBoostModel AdaBoostModel::from_json(const json& j) {
    AdaBoostModel m;
    for (const auto& e : j.at("ensembles")) {
        Ensemble ens;
        for (const auto& t : e.at("trees")) ens.trees.push_back(RegressionTree::from_json(t));
        ens.weights = e.at("weights").get<std::vector<double>>();
        ens.halted_early = e.at("halted_early").get<bool>();
        if (ens.trees.empty() || ens.trees.size() != ens.weights.size()) {
            throw Error(ErrorKind::Parse, "madab ensemble is malformed");
        }
        m.ensembles_.push_back(std::move(ens));
    }
    return m;
}

}  // namespace aqlock::models
