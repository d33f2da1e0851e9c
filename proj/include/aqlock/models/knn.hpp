#pragma once

#include <nlohmann/json_fwd.hpp>

#include "aqlock/dataset.hpp"

namespace aqlock::models {

struct KnnParams {
    int k = 5;
    friend bool operator==(const KnnParams&, const KnnParams&) = default;
};

/// Uniform-mean k-nearest-neighbour regression. Distances are Euclidean on
/// inputs min-max scaled with the training ranges; equal distances are
/// ordered by training row index.
class KnnModel {
public:
    static KnnModel fit(const Matrix& x, const Matrix& y, const KnnParams& params);

    Matrix predict(const Matrix& x, int jobs = 1) const;

    const AffineColumns& input_scaling() const { return scaling_; }

    nlohmann::json to_json() const;
    static KnnModel from_json(const nlohmann::json& j);

private:
    int k_ = 5;
    AffineColumns scaling_;
    Matrix train_x_;  // scaled
    Matrix train_y_;
};

}  // namespace aqlock::models
