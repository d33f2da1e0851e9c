#include "aqlock/models/linear.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "aqlock/error.hpp"
#include "json_matrix.hpp"
#include "aqlock/rng.hpp"

namespace aqlock::models {

using nlohmann::json;

namespace {

void require_rows(const Matrix& x, const Matrix& y, Eigen::Index min_rows) {
    if (x.rows() != y.rows()) throw Error(ErrorKind::Shape, "inputs and targets differ in rows");
    if (x.rows() < min_rows) {
        throw Error(ErrorKind::InsufficientData, "linear model needs at least " + std::to_string(min_rows) + " rows");
    }
}

/// Maps coefficients fitted on standardized (z, u) back to original units.
void unstandardize(LinearModel& m, const Matrix& b, const AffineColumns& xs, const AffineColumns& ys) {
    const auto p = b.rows(), k = b.cols();
    m.weights.resize(p, k);
    m.intercept.resize(k);
    for (Eigen::Index o = 0; o < k; ++o) {
        const double sy = ys.scale[static_cast<std::size_t>(o)];
        double shift = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            const double w = b(j, o) * sy / xs.scale[static_cast<std::size_t>(j)];
            m.weights(j, o) = w;
            shift += w * xs.offset[static_cast<std::size_t>(j)];
        }
        m.intercept(o) = ys.offset[static_cast<std::size_t>(o)] - shift;
    }
    m.standardized_weights = b;
}

/// Solves G b = rhs with column-pivoted QR; falls back to the minimum-norm
/// solution when G is rank deficient.
Matrix solve_symmetric(const Matrix& g, const Matrix& rhs, bool& rank_deficient) {
    Eigen::ColPivHouseholderQR<Matrix> qr(g);
    if (qr.rank() == g.cols()) return qr.solve(rhs);
    rank_deficient = true;
    return Eigen::CompleteOrthogonalDecomposition<Matrix>(g).solve(rhs);
}

}  // namespace

Standardized standardize(const Matrix& m) {
    Standardized s;
    s.columns = fit_columns(m, ScalingMode::z_score, DegeneratePolicy::unit_scale);
    s.z = apply_columns(s.columns, m);
    return s;
}

Matrix LinearModel::predict(const Matrix& x) const {
    Matrix out = x * weights;
    out.rowwise() += intercept.transpose();
    return out;
}

LinearModel fit_ols(const Matrix& x, const Matrix& y) {
    require_rows(x, y, 2);
    const Eigen::RowVectorXd xm = x.colwise().mean();
    const Eigen::RowVectorXd ym = y.colwise().mean();
    const Matrix xc = x.rowwise() - xm;
    const Matrix yc = y.rowwise() - ym;
    // Column equilibration: G = D^-1 Xc'Xc D^-1 with D = diag(||xc_j||).
    Vector d = xc.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < d.size(); ++j) {
        if (!(d(j) > 0.0)) d(j) = 1.0;
    }
    const Matrix xs = xc * d.cwiseInverse().asDiagonal();
    LinearModel m;
    const Matrix beta = solve_symmetric(xs.transpose() * xs, xs.transpose() * yc, m.rank_deficient);
    m.weights = d.cwiseInverse().asDiagonal() * beta;
    m.intercept = (ym - xm * m.weights).transpose();
    return m;
}

LinearModel fit_ridge(const Matrix& x, const Matrix& y, const RidgeParams& params) {
    require_rows(x, y, 2);
    if (!(params.lambda >= 0.0)) throw Error(ErrorKind::Config, "ridge lambda must be >= 0");
    const auto zx = standardize(x);
    const auto zy = standardize(y);
    Matrix g = zx.z.transpose() * zx.z;
    g.diagonal().array() += params.lambda;
    LinearModel m;
    const Matrix b = solve_symmetric(g, zx.z.transpose() * zy.z, m.rank_deficient);
    unstandardize(m, b, zx.columns, zy.columns);
    return m;
}

double lasso_lambda_max(const Matrix& z, const Vector& u) {
    // Same per-column dot product as the descent loop, so lambda_max zeroes every weight exactly.
    double best = 0.0;
    for (Eigen::Index j = 0; j < z.cols(); ++j) best = std::max(best, std::fabs(z.col(j).dot(u) / static_cast<double>(z.rows())));
    return best;
}

Vector lasso_coordinate_descent(const Matrix& z, const Vector& u, const LassoParams& params, int* sweeps,
                                std::vector<double>* objective_trace) {
    const auto n = static_cast<double>(z.rows());
    const auto p = z.cols();
    Vector b = Vector::Zero(p);
    Vector r = u;
    Vector col_sq(p);
    for (Eigen::Index j = 0; j < p; ++j) col_sq(j) = z.col(j).squaredNorm() / n;
    auto objective = [&] { return r.squaredNorm() / (2.0 * n) + params.lambda * b.lpNorm<1>(); };
    if (objective_trace) objective_trace->push_back(objective());
    int sweep = 0;
    while (sweep < params.max_sweeps) {
        ++sweep;
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (!(col_sq(j) > 0.0)) continue;
            const double rho = z.col(j).dot(r) / n + col_sq(j) * b(j);
            const double shrunk = std::copysign(std::max(std::fabs(rho) - params.lambda, 0.0), rho);
            const double updated = shrunk / col_sq(j);
            const double delta = updated - b(j);
            if (delta != 0.0) {
                r -= delta * z.col(j);
                b(j) = updated;
            }
            max_change = std::max(max_change, std::fabs(delta));
        }
        if (objective_trace) objective_trace->push_back(objective());
        if (max_change < params.tol) break;
    }
    if (sweeps) *sweeps = sweep;
    return b;
}

LinearModel fit_lasso(const Matrix& x, const Matrix& y, const LassoParams& params) {
    require_rows(x, y, 2);
    if (!(params.lambda >= 0.0)) throw Error(ErrorKind::Config, "lasso lambda must be >= 0");
    const auto zx = standardize(x);
    const auto zy = standardize(y);
    LinearModel m;
    Matrix b(x.cols(), y.cols());
    for (Eigen::Index o = 0; o < y.cols(); ++o) {
        int sweeps = 0;
        b.col(o) = lasso_coordinate_descent(zx.z, zy.z.col(o), params, &sweeps);
        m.iterations.push_back(sweeps);
    }
    unstandardize(m, b, zx.columns, zy.columns);
    return m;
}

LinearModel fit_sgd(const Matrix& x, const Matrix& y, const SgdParams& params, std::uint64_t seed) {
    require_rows(x, y, 2);
    if (params.epochs < 1) throw Error(ErrorKind::Config, "sgd needs at least one epoch");
    const auto zx = standardize(x);
    const auto zy = standardize(y);
    const auto n = static_cast<std::size_t>(x.rows());
    const auto p = x.cols();
    SplitMix64 root(seed);
    Matrix b(p + 1, y.cols());  // last row: intercept in standardized space
    LinearModel m;
    std::vector<std::size_t> order(n);
    for (Eigen::Index o = 0; o < y.cols(); ++o) {
        SplitMix64 rng = root.spawn();
        Vector w = Vector::Zero(p);
        double bias = 0.0;
        std::size_t t = 0;
        for (int epoch = 0; epoch < params.epochs; ++epoch) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            rng.shuffle(std::span<std::size_t>(order));
            for (std::size_t i : order) {
                ++t;
                const double eta = params.eta0 / std::pow(static_cast<double>(t), params.power_t);
                const auto row = zx.z.row(static_cast<Eigen::Index>(i));
                const double g = row.dot(w) + bias - zy.z(static_cast<Eigen::Index>(i), o);
                w = w * (1.0 - eta * params.alpha) - eta * g * row.transpose();
                bias -= eta * g;
            }
        }
        b.col(o).head(p) = w;
        b(p, o) = bias;
        m.iterations.push_back(params.epochs);
    }
    unstandardize(m, b.topRows(p), zx.columns, zy.columns);
    for (Eigen::Index o = 0; o < y.cols(); ++o) m.intercept(o) += b(p, o) * zy.columns.scale[static_cast<std::size_t>(o)];
    return m;
}

json LinearModel::to_json() const {
    return {{"weights", detail::matrix_to_json(weights)},
            {"intercept", detail::vector_to_json(intercept)},
            {"standardized_weights", detail::matrix_to_json(standardized_weights)},
            {"rank_deficient", rank_deficient},
            {"iterations", iterations}};
}

LinearModel LinearModel::from_json(const json& j) {
    LinearModel m;
    m.weights = detail::matrix_from_json(j.at("weights"));
    m.intercept = detail::vector_from_json(j.at("intercept"));
    m.standardized_weights = detail::matrix_from_json(j.at("standardized_weights"));
    m.rank_deficient = j.at("rank_deficient").get<bool>();
    m.iterations = j.at("iterations").get<std::vector<int>>();
    return m;
}

}  // namespace aqlock::models
