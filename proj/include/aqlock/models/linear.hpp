#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "aqlock/dataset.hpp"

namespace aqlock::models {

/// y_hat = x * weights + intercept, one column of `weights` per output.
struct LinearModel {
    Matrix weights;    // input_dim x output_dim, original units
    Vector intercept;  // output_dim
    /// Coefficients in the internally standardized space (ridge, lasso,
    /// mgbr); empty for plain least squares.
    Matrix standardized_weights;
    bool rank_deficient = false;
    std::vector<int> iterations;  // per output, iterative solvers only

    Matrix predict(const Matrix& x) const;

    nlohmann::json to_json() const;
    static LinearModel from_json(const nlohmann::json& j);
};

struct RidgeParams {
    double lambda = 1.0;
    friend bool operator==(const RidgeParams&, const RidgeParams&) = default;
};

struct LassoParams {
    double lambda = 0.001;
    double tol = 1e-6;
    int max_sweeps = 10000;
    friend bool operator==(const LassoParams&, const LassoParams&) = default;
};

struct SgdParams {
    /// Passes over the training set (configured as "estimators" in the
    /// original study's settings).
    int epochs = 5;
    double eta0 = 0.01;
    double power_t = 0.25;
    double alpha = 1e-4;
    friend bool operator==(const SgdParams&, const SgdParams&) = default;
};

/// Ordinary least squares with intercept via the centered normal
/// equations, column-equilibrated and solved by column-pivoted QR. A
/// rank-deficient system falls back to the minimum-norm solution and sets
/// rank_deficient.
LinearModel fit_ols(const Matrix& x, const Matrix& y);

/// Closed-form ridge on standardized inputs and targets:
/// minimizes ||u - Zb||^2 + lambda*||b||^2, i.e. (Z'Z + lambda*I) b = Z'u.
/// The intercept is not penalized.
LinearModel fit_ridge(const Matrix& x, const Matrix& y, const RidgeParams& params);

/// Cyclic coordinate descent on (1/2N)||u - Zb||^2 + lambda*||b||_1 with
/// Z, u standardized per column. Stops when the largest coefficient change
/// of a sweep drops below tol.
LinearModel fit_lasso(const Matrix& x, const Matrix& y, const LassoParams& params);

/// Single-output lasso on already standardized data. `objective_trace`, if
/// given, receives the objective before the first sweep and after each one.
Vector lasso_coordinate_descent(const Matrix& z, const Vector& u, const LassoParams& params,
                                int* sweeps = nullptr, std::vector<double>* objective_trace = nullptr);

/// Smallest lambda for which all coefficients vanish: max_j |z_j'u| / N.
double lasso_lambda_max(const Matrix& z, const Vector& u);

/// Per-sample SGD on L2-regularized squared loss with learning rate
/// eta0 / t^power_t, sample order reshuffled every epoch.
LinearModel fit_sgd(const Matrix& x, const Matrix& y, const SgdParams& params, std::uint64_t seed);

/// Population mean/std standardization used by the penalized solvers; a
/// constant column gets unit scale.
struct Standardized {
    Matrix z;
    AffineColumns columns;
};
Standardized standardize(const Matrix& m);

}  // namespace aqlock::models
