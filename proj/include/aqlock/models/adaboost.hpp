#pragma once

#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "aqlock/models/tree.hpp"

namespace aqlock::models {

struct AdaBoostParams {
    int n_estimators = 5;
    int base_depth = 3;
    double learning_rate = 1.0;
    friend bool operator==(const AdaBoostParams&, const AdaBoostParams&) = default;
};

/// AdaBoost.R2 with linear loss, one independent ensemble per output.
/// Base trees are fitted with sample weights (no resampling); the weights
/// start at 1 and are renormalized to sum to N after each round.
class AdaBoostModel {
public:
    struct Ensemble {
        std::vector<RegressionTree> trees;
        std::vector<double> weights;
        /// True when boosting stopped before n_estimators (perfect fit, or
        /// weighted loss >= 0.5).
        bool halted_early = false;
    };

    static AdaBoostModel fit(const Matrix& x, const Matrix& y, const AdaBoostParams& params);

    Matrix predict(const Matrix& x) const;
    const std::vector<Ensemble>& ensembles() const { return ensembles_; }

    nlohmann::json to_json() const;
    static AdaBoostModel from_json(const nlohmann::json& j);

private:
    std::vector<Ensemble> ensembles_;
};

/// Lower weighted median: the first value (in sorted order) whose
/// cumulative weight reaches half the total.
double weighted_median(std::span<const double> values, std::span<const double> weights);

}  // namespace aqlock::models
