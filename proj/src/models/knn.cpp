#include "aqlock/models/knn.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "aqlock/error.hpp"
#include "json_matrix.hpp"
#include "aqlock/parallel.hpp"

namespace aqlock::models {

using nlohmann::json;

KnnModel KnnModel::fit(const Matrix& x, const Matrix& y, const KnnParams& params) {
    if (x.rows() != y.rows()) throw Error(ErrorKind::Shape, "inputs and targets differ in rows");
    if (params.k < 1) throw Error(ErrorKind::Config, "k must be >= 1");
    if (x.rows() < params.k) {
        throw Error(ErrorKind::InsufficientData, "knn needs at least k = " + std::to_string(params.k) + " rows, got " +
                                                     std::to_string(x.rows()));
    }
    KnnModel m;
    m.k_ = params.k;
    m.scaling_ = fit_columns(x, ScalingMode::min_max, DegeneratePolicy::unit_scale);
    m.train_x_ = apply_columns(m.scaling_, x);
    m.train_y_ = y;
    return m;
}

Matrix KnnModel::predict(const Matrix& x, int jobs) const {
    const Matrix q = apply_columns(scaling_, x);
    const auto n_train = static_cast<std::size_t>(train_x_.rows());
    const auto k = static_cast<std::size_t>(k_);
    Matrix out(x.rows(), train_y_.cols());
    parallel_for(static_cast<std::size_t>(x.rows()), jobs, [&](std::size_t qi) {
        const auto row = q.row(static_cast<Eigen::Index>(qi));
        std::vector<std::pair<double, std::size_t>> dist(n_train);
        for (std::size_t i = 0; i < n_train; ++i) {
            dist[i] = {(train_x_.row(static_cast<Eigen::Index>(i)) - row).squaredNorm(), i};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        // Sum in training-row order so the result does not depend on the
        // partial_sort permutation among the selected neighbours.
        std::vector<std::size_t> chosen(k);
        for (std::size_t j = 0; j < k; ++j) chosen[j] = dist[j].second;
        std::sort(chosen.begin(), chosen.end());
        Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(train_y_.cols());
        for (std::size_t i : chosen) sum += train_y_.row(static_cast<Eigen::Index>(i));
        out.row(static_cast<Eigen::Index>(qi)) = sum / static_cast<double>(k);
    });
    return out;
}

json KnnModel::to_json() const {
    return {{"k", k_},
            {"scaling", detail::columns_to_json(scaling_)},
            {"train_x", detail::matrix_to_json(train_x_)},
            {"train_y", detail::matrix_to_json(train_y_)}};
}

KnnModel KnnModel::from_json(const json& j) {
    KnnModel m;
    m.k_ = j.at("k").get<int>();
    m.scaling_ = detail::columns_from_json(j.at("scaling"));
    m.train_x_ = detail::matrix_from_json(j.at("train_x"));
    m.train_y_ = detail::matrix_from_json(j.at("train_y"));
    return m;
}

}  // namespace aqlock::models
