#include "aqlock/models/tree.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "aqlock/error.hpp"

namespace aqlock::models {

using nlohmann::json;

namespace {

double weight_of(std::span<const double> weights, std::size_t row) { return weights.empty() ? 1.0 : weights[row]; }

std::vector<double> weighted_mean(const Matrix& y, std::span<const double> weights, std::span<const std::size_t> rows) {
    std::vector<double> sum(static_cast<std::size_t>(y.cols()), 0.0);
    double total = 0.0;
    for (std::size_t r : rows) {
        const double w = weight_of(weights, r);
        total += w;
        for (Eigen::Index o = 0; o < y.cols(); ++o) sum[static_cast<std::size_t>(o)] += w * y(static_cast<Eigen::Index>(r), o);
    }
    for (auto& s : sum) s /= total;
    return sum;
}

double node_sse(const Matrix& y, std::span<const double> weights, std::span<const std::size_t> rows,
                const std::vector<double>& mean) {
    double sse = 0.0;
    for (std::size_t r : rows) {
        const double w = weight_of(weights, r);
        for (Eigen::Index o = 0; o < y.cols(); ++o) {
            const double d = y(static_cast<Eigen::Index>(r), o) - mean[static_cast<std::size_t>(o)];
            sse += w * d * d;
        }
    }
    return sse;
}

bool targets_constant(const Matrix& y, std::span<const std::size_t> rows) {
    for (std::size_t k = 1; k < rows.size(); ++k) {
        if (y.row(static_cast<Eigen::Index>(rows[k])) != y.row(static_cast<Eigen::Index>(rows[0]))) return false;
    }
    return true;
}

}  // namespace

std::optional<Split> find_best_split(const Matrix& x, const Matrix& y, std::span<const double> weights,
                                     std::span<const std::size_t> rows, int min_samples_leaf,
                                     std::span<const std::size_t> features) {
    const std::size_t n = rows.size();
    if (n < 2) return std::nullopt;
    const auto n_out = static_cast<std::size_t>(y.cols());
    const auto mean = weighted_mean(y, weights, rows);

    // Sums over centered targets keep the one-pass SSE formula well conditioned.
    double w_total = 0.0;
    std::vector<double> wy_total(n_out, 0.0), wyy_total(n_out, 0.0);
    for (std::size_t r : rows) {
        const double w = weight_of(weights, r);
        w_total += w;
        for (std::size_t o = 0; o < n_out; ++o) {
            const double d = y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(o)) - mean[o];
            wy_total[o] += w * d;
            wyy_total[o] += w * d * d;
        }
    }

    std::vector<std::size_t> all_features;
    if (features.empty()) {
        all_features.resize(static_cast<std::size_t>(x.cols()));
        std::iota(all_features.begin(), all_features.end(), std::size_t{0});
        features = all_features;
    }

    // Candidates within rounding of the incumbent count as ties, so the earliest
    // feature and threshold win regardless of summation order.
    double tie_band = 0.0;
    for (double v : wyy_total) tie_band += v;
    tie_band *= 1e-12;

    std::optional<Split> best;
    std::vector<std::size_t> order(rows.begin(), rows.end());
    std::vector<double> wy(n_out), wyy(n_out);
    const auto leaf_min = static_cast<std::size_t>(std::max(1, min_samples_leaf));
    for (std::size_t f : features) {
        const auto fc = static_cast<Eigen::Index>(f);
        std::copy(rows.begin(), rows.end(), order.begin());
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return x(static_cast<Eigen::Index>(a), fc) < x(static_cast<Eigen::Index>(b), fc);
        });
        double w_left = 0.0;
        std::fill(wy.begin(), wy.end(), 0.0);
        std::fill(wyy.begin(), wyy.end(), 0.0);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            const auto r = static_cast<Eigen::Index>(order[k]);
            const double w = weight_of(weights, order[k]);
            w_left += w;
            for (std::size_t o = 0; o < n_out; ++o) {
                const double d = y(r, static_cast<Eigen::Index>(o)) - mean[o];
                wy[o] += w * d;
                wyy[o] += w * d * d;
            }
            const double lo = x(r, fc);
            const double hi = x(static_cast<Eigen::Index>(order[k + 1]), fc);
            if (!(lo < hi)) continue;
            if (k + 1 < leaf_min || n - k - 1 < leaf_min) continue;
            const double w_right = w_total - w_left;
            if (w_left <= 0.0 || w_right <= 0.0) continue;
            double sse = 0.0;
            for (std::size_t o = 0; o < n_out; ++o) {
                const double left = wyy[o] - wy[o] * wy[o] / w_left;
                const double rwy = wy_total[o] - wy[o];
                const double right = (wyy_total[o] - wyy[o]) - rwy * rwy / w_right;
                sse += std::max(left, 0.0) + std::max(right, 0.0);
            }
            if (!best || sse < best->child_sse - tie_band) {
                double threshold = lo + (hi - lo) / 2.0;
                if (!(threshold < hi)) threshold = lo;
                best = Split{f, threshold, sse};
            }
        }
    }
    return best;
}

RegressionTree RegressionTree::fit(const Matrix& x, const Matrix& y, std::span<const double> weights,
                                   const TreeParams& params, SplitMix64* rng) {
    if (x.rows() != y.rows()) throw Error(ErrorKind::Shape, "tree inputs and targets differ in rows");
    if (!weights.empty() && weights.size() != static_cast<std::size_t>(x.rows())) {
        throw Error(ErrorKind::Shape, "tree weight count mismatch");
    }
    std::vector<std::size_t> root_rows;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        if (weight_of(weights, static_cast<std::size_t>(r)) > 0.0) root_rows.push_back(static_cast<std::size_t>(r));
    }
    if (root_rows.empty()) throw Error(ErrorKind::InsufficientData, "tree needs at least one weighted row");

    const auto n_features = static_cast<std::size_t>(x.cols());
    const bool subsample = params.max_features > 0 && static_cast<std::size_t>(params.max_features) < n_features;
    if (subsample && rng == nullptr) throw Error(ErrorKind::Config, "feature subsampling needs a generator");

    RegressionTree tree;
    tree.output_dim_ = static_cast<std::size_t>(y.cols());

    struct Pending {
        int node;
        std::vector<std::size_t> rows;
    };
    std::vector<Pending> stack;
    tree.nodes_.push_back(Node{});
    tree.nodes_[0].depth = 0;
    stack.push_back({0, std::move(root_rows)});
    std::vector<std::size_t> feature_pool(n_features);
    while (!stack.empty()) {
        Pending job = std::move(stack.back());
        stack.pop_back();
        const int depth = tree.nodes_[static_cast<std::size_t>(job.node)].depth;
        auto mean = weighted_mean(y, weights, job.rows);
        double w = 0.0;
        for (std::size_t r : job.rows) w += weight_of(weights, r);
        {
            auto& node = tree.nodes_[static_cast<std::size_t>(job.node)];
            node.value = mean;
            node.weight = w;
        }
        if (depth >= params.max_depth || job.rows.size() < static_cast<std::size_t>(std::max(2, params.min_samples_split)) ||
            targets_constant(y, job.rows)) {
            continue;
        }
        std::vector<std::size_t> features;
        if (subsample) {
            std::iota(feature_pool.begin(), feature_pool.end(), std::size_t{0});
            for (std::size_t k = 0; k < static_cast<std::size_t>(params.max_features); ++k) {
                const auto j = k + static_cast<std::size_t>(rng->below(n_features - k));
                std::swap(feature_pool[k], feature_pool[j]);
            }
            features.assign(feature_pool.begin(), feature_pool.begin() + params.max_features);
            std::sort(features.begin(), features.end());
        }
        const auto split = find_best_split(x, y, weights, job.rows, params.min_samples_leaf, features);
        if (!split || !(split->child_sse < node_sse(y, weights, job.rows, mean))) continue;

        std::vector<std::size_t> left, right;
        for (std::size_t r : job.rows) {
            (x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(split->feature)) <= split->threshold ? left : right)
                .push_back(r);
        }
        const int left_id = static_cast<int>(tree.nodes_.size());
        tree.nodes_.push_back(Node{});
        tree.nodes_.back().depth = depth + 1;
        const int right_id = static_cast<int>(tree.nodes_.size());
        tree.nodes_.push_back(Node{});
        tree.nodes_.back().depth = depth + 1;
        auto& node = tree.nodes_[static_cast<std::size_t>(job.node)];
        node.feature = static_cast<int>(split->feature);
        node.threshold = split->threshold;
        node.left = left_id;
        node.right = right_id;
        stack.push_back({right_id, std::move(right)});
        stack.push_back({left_id, std::move(left)});
    }
    return tree;
}

std::size_t RegressionTree::leaf_of(std::span<const double> row) const {
    std::size_t k = 0;
    while (!nodes_[k].is_leaf()) {
        const auto& n = nodes_[k];
        k = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return k;
}

std::vector<double> RegressionTree::predict_row(std::span<const double> row) const { return nodes_[leaf_of(row)].value; }

Matrix RegressionTree::predict(const Matrix& x) const {
    Matrix out(x.rows(), static_cast<Eigen::Index>(output_dim_));
    std::vector<double> row(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) row[static_cast<std::size_t>(c)] = x(r, c);
        const auto& v = nodes_[leaf_of(row)].value;
        for (std::size_t o = 0; o < output_dim_; ++o) out(r, static_cast<Eigen::Index>(o)) = v[o];
    }
    return out;
}

int RegressionTree::depth() const {
    int d = 0;
    for (const auto& n : nodes_) d = std::max(d, n.depth);
    return d;
}

json RegressionTree::to_json() const {
    json nodes = json::array();
    for (const auto& n : nodes_) {
        nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right},
                         {"depth", n.depth}, {"weight", n.weight}, {"value", n.value}});
    }
    return {{"output_dim", output_dim_}, {"nodes", nodes}};
}

RegressionTree RegressionTree::from_json(const json& j) {
    RegressionTree t;
    t.output_dim_ = j.at("output_dim").get<std::size_t>();
    for (const auto& n : j.at("nodes")) {
        Node node;
        node.feature = n.at("feature").get<int>();
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<int>();
        node.right = n.at("right").get<int>();
        node.depth = n.at("depth").get<int>();
        node.weight = n.at("weight").get<double>();
        node.value = n.at("value").get<std::vector<double>>();
        t.nodes_.push_back(std::move(node));
    }
    if (t.nodes_.empty()) throw Error(ErrorKind::Parse, "tree has no nodes");
    return t;
}

}  // namespace aqlock::models
