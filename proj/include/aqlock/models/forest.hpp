#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "aqlock/models/tree.hpp"

namespace aqlock::models {

struct ForestParams {
    int n_trees = 100;
    int max_depth = 5;
    int min_samples_leaf = 1;
    int max_features = 0;
    bool bootstrap = true;

    friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

/// Bootstrap-aggregated regression trees. Tree i draws its bootstrap sample
/// (and any feature subsampling) from SplitMix64(s_i), where s_0, s_1, ...
/// are consecutive outputs of SplitMix64(seed); the assignment does not
/// depend on how trees are scheduled across threads.
class Forest {
public:
    static Forest fit(const Matrix& x, const Matrix& y, const ForestParams& params, std::uint64_t seed,
                      int jobs = 1);

    Matrix predict(const Matrix& x) const;
    const std::vector<RegressionTree>& trees() const { return trees_; }

    nlohmann::json to_json() const;
    static Forest from_json(const nlohmann::json& j);

    friend bool operator==(const Forest&, const Forest&) = default;

private:
    std::vector<RegressionTree> trees_;
};

std::vector<std::uint64_t> tree_seeds(std::uint64_t seed, std::size_t n_trees);

}  // namespace aqlock::models
