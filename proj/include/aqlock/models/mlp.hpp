#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "aqlock/dataset.hpp"

namespace aqlock::models {

inline constexpr double kSeluAlpha = 1.6732632423543772;
inline constexpr double kSeluScale = 1.0507009873554805;

double selu(double z);
double selu_derivative(double z);
double sigmoid(double z);

struct MlpParams {
    std::vector<int> hidden = {20, 10, 20};
    int epochs = 500;
    int batch_size = 16;
    double learning_rate = 0.01;
    friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

/// Fully connected network: SELU on hidden layers, sigmoid on the output.
/// Loss is the mean over samples and outputs of the squared error.
class Mlp {
public:
    struct Layer {
        Matrix weights;  // out x in
        Vector bias;
    };

    Mlp() = default;
    /// LeCun-normal weights N(0, 1/fan_in), zero biases.
    Mlp(std::size_t input_dim, std::span<const int> hidden, std::size_t output_dim, std::uint64_t seed);

    /// Rows are samples.
    Matrix forward(const Matrix& x) const;
    double loss(const Matrix& x, const Matrix& y, double loss_scale = 1.0) const;
    /// Gradient of loss_scale * loss w.r.t. the flattened parameters.
    Vector gradient(const Matrix& x, const Matrix& y, double loss_scale = 1.0) const;

    /// Layer by layer: weights (row-major) then bias.
    Vector parameters() const;
    void set_parameters(const Vector& flat);
    std::size_t parameter_count() const;

    const std::vector<Layer>& layers() const { return layers_; }

    nlohmann::json to_json() const;
    static Mlp from_json(const nlohmann::json& j);

private:
    friend class MlpModel;
    std::vector<Layer> layers_;
};

/// Network plus the min-max scalings that put inputs and targets in [0,1].
class MlpModel {
public:
    static MlpModel fit(const Matrix& x, const Matrix& y, const MlpParams& params, std::uint64_t seed);

    Matrix predict(const Matrix& x) const;
    /// Output before inverse target scaling; always in (0,1).
    Matrix predict_scaled(const Matrix& x) const;

    const Mlp& network() const { return net_; }

    nlohmann::json to_json() const;
    static MlpModel from_json(const nlohmann::json& j);

private:
    Mlp net_;
    AffineColumns input_scaling_;
    AffineColumns target_scaling_;
};

/// Max over parameters of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8),
/// numeric from central differences with step `step`.
double gradient_check(const Mlp& net, const Matrix& x, const Matrix& y, double step = 1e-5);

}  // namespace aqlock::models
