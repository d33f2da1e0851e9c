#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "aqlock/dataset.hpp"
#include "aqlock/rng.hpp"

namespace aqlock::models {

struct TreeParams {
    int max_depth = 5;
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    /// Features examined per split; 0 means all of them.
    int max_features = 0;

    friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    /// Weighted child sum of squared errors, summed over outputs.
    double child_sse = 0.0;
};

/// Best variance-reducing binary split of the rows with positive weight.
/// Candidates are midpoints between consecutive distinct feature values;
/// rows with x <= threshold go left. Ties keep the lowest feature index and
/// then the lowest threshold. `features` restricts the search (empty = all).
std::optional<Split> find_best_split(const Matrix& x, const Matrix& y, std::span<const double> weights,
                                     std::span<const std::size_t> rows, int min_samples_leaf,
                                     std::span<const std::size_t> features = {});

/// CART regression tree over a multi-output target. Node SSE is summed over
/// outputs, so the outputs share one partition.
class RegressionTree {
public:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int depth = 0;
        double weight = 0.0;
        std::vector<double> value;

        bool is_leaf() const { return feature < 0; }
        friend bool operator==(const Node&, const Node&) = default;
    };

    RegressionTree() = default;

    /// `weights` empty means unit weights. A generator is only needed when
    /// params.max_features subsamples features.
    static RegressionTree fit(const Matrix& x, const Matrix& y, std::span<const double> weights,
                              const TreeParams& params, SplitMix64* rng = nullptr);

    std::vector<double> predict_row(std::span<const double> row) const;
    Matrix predict(const Matrix& x) const;
    /// Index of the leaf that `row` falls into.
    std::size_t leaf_of(std::span<const double> row) const;

    int depth() const;
    std::size_t output_dim() const { return output_dim_; }
    const std::vector<Node>& nodes() const { return nodes_; }

    nlohmann::json to_json() const;
    static RegressionTree from_json(const nlohmann::json& j);

    friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

private:
    std::vector<Node> nodes_;
    std::size_t output_dim_ = 0;
};

}  // namespace aqlock::models
