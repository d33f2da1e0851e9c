#include "aqlock/models/forest.hpp"

#include <nlohmann/json.hpp>

#include "aqlock/error.hpp"
#include "aqlock/parallel.hpp"

namespace aqlock::models {

using nlohmann::json;

std::vector<std::uint64_t> tree_seeds(std::uint64_t seed, std::size_t n_trees) {
    SplitMix64 root(seed);
    std::vector<std::uint64_t> seeds(n_trees);
    for (auto& s : seeds) s = root.next();
    return seeds;
}

Forest Forest::fit(const Matrix& x, const Matrix& y, const ForestParams& params, std::uint64_t seed, int jobs) {
    if (params.n_trees < 1) throw Error(ErrorKind::Config, "forest needs at least one tree");
    const auto n = static_cast<std::size_t>(x.rows());
    if (n == 0) throw Error(ErrorKind::InsufficientData, "forest needs training rows");
    const auto seeds = tree_seeds(seed, static_cast<std::size_t>(params.n_trees));
    TreeParams tp;
    tp.max_depth = params.max_depth;
    tp.min_samples_leaf = params.min_samples_leaf;
    tp.max_features = params.max_features;

    Forest forest;
    forest.trees_.resize(seeds.size());
    parallel_for(seeds.size(), jobs, [&](std::size_t t) {
        SplitMix64 rng(seeds[t]);
        std::vector<double> counts(n, 1.0);
        if (params.bootstrap) {
            std::fill(counts.begin(), counts.end(), 0.0);
            for (std::size_t k = 0; k < n; ++k) counts[static_cast<std::size_t>(rng.below(n))] += 1.0;
        }
        forest.trees_[t] = RegressionTree::fit(x, y, counts, tp, &rng);
    });
    return forest;
}

Matrix Forest::predict(const Matrix& x) const {
    Matrix sum = trees_.front().predict(x);
    for (std::size_t t = 1; t < trees_.size(); ++t) sum += trees_[t].predict(x);
    return sum / static_cast<double>(trees_.size());
}

json Forest::to_json() const {
    json trees = json::array();
    for (const auto& t : trees_) trees.push_back(t.to_json());
    return {{"trees", trees}};
}

Forest Forest::from_json(const json& j) {
    Forest f;
    for (const auto& t : j.at("trees")) f.trees_.push_back(RegressionTree::from_json(t));
    if (f.trees_.empty()) throw Error(ErrorKind::Parse, "forest has no trees");
    return f;
}

}  // namespace aqlock::models
