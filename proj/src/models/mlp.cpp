#include "aqlock/models/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "aqlock/error.hpp"
#include "aqlock/rng.hpp"
#include "json_matrix.hpp"

namespace aqlock::models {

using nlohmann::json;

double selu(double z) { return z > 0.0 ? kSeluScale * z : kSeluScale * kSeluAlpha * std::expm1(z); }

double selu_derivative(double z) { return z > 0.0 ? kSeluScale : kSeluScale * kSeluAlpha * std::exp(z); }

// Clamped so the result stays strictly inside (0, 1) in double precision.
double sigmoid(double z) {
    z = std::clamp(z, -36.0, 36.0);
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Mlp::Mlp(std::size_t input_dim, std::span<const int> hidden, std::size_t output_dim, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<std::size_t> sizes = {input_dim};
    for (int h : hidden) {
        if (h < 1) throw Error(ErrorKind::Config, "hidden layer sizes must be positive");
        sizes.push_back(static_cast<std::size_t>(h));
    }
    sizes.push_back(output_dim);
    for (std::size_t l = 1; l < sizes.size(); ++l) {
        Layer layer;
        const auto in = static_cast<Eigen::Index>(sizes[l - 1]), out = static_cast<Eigen::Index>(sizes[l]);
        layer.weights.resize(out, in);
        const double sd = 1.0 / std::sqrt(static_cast<double>(in));
        for (Eigen::Index r = 0; r < out; ++r) {
            for (Eigen::Index c = 0; c < in; ++c) layer.weights(r, c) = rng.normal(0.0, sd);
        }
        layer.bias = Vector::Zero(out);
        layers_.push_back(std::move(layer));
    }
}

namespace {

struct Trace {
    std::vector<Matrix> pre;   // Z_l, samples x units
    std::vector<Matrix> post;  // A_l, with post[0] the input
};

Trace run_forward(const std::vector<Mlp::Layer>& layers, const Matrix& x) {
    Trace t;
    t.post.push_back(x);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Matrix z = t.post.back() * layers[l].weights.transpose();
        z.rowwise() += layers[l].bias.transpose();
        const bool last = l + 1 == layers.size();
        Matrix a = z.unaryExpr([last](double v) { return last ? sigmoid(v) : selu(v); });
        t.pre.push_back(std::move(z));
        t.post.push_back(std::move(a));
    }
    return t;
}

/// Per-layer gradients of scale * mean squared error.
std::vector<Mlp::Layer> backward(const std::vector<Mlp::Layer>& layers, const Matrix& x, const Matrix& y, double scale) {
    const Trace t = run_forward(layers, x);
    const Matrix& out = t.post.back();
    const double denom = static_cast<double>(out.rows() * out.cols());
    Matrix delta = (2.0 * scale / denom) * (out - y);
    delta.array() *= out.array() * (1.0 - out.array());
    std::vector<Mlp::Layer> grads(layers.size());
    for (std::size_t l = layers.size(); l-- > 0;) {
        grads[l].weights = delta.transpose() * t.post[l];
        grads[l].bias = delta.colwise().sum().transpose();
        if (l == 0) break;
        Matrix back = delta * layers[l].weights;
        back.array() *= t.pre[l - 1].unaryExpr([](double v) { return selu_derivative(v); }).array();
        delta = std::move(back);
    }
    return grads;
}

}  // namespace

Matrix Mlp::forward(const Matrix& x) const { return run_forward(layers_, x).post.back(); }

double Mlp::loss(const Matrix& x, const Matrix& y, double loss_scale) const {
    const Matrix d = forward(x) - y;
    return loss_scale * d.squaredNorm() / static_cast<double>(d.rows() * d.cols());
}

Vector Mlp::gradient(const Matrix& x, const Matrix& y, double loss_scale) const {
    const auto grads = backward(layers_, x, y, loss_scale);
    Vector flat(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index k = 0;
    for (const auto& g : grads) {
        for (Eigen::Index r = 0; r < g.weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < g.weights.cols(); ++c) flat(k++) = g.weights(r, c);
        }
        for (Eigen::Index r = 0; r < g.bias.size(); ++r) flat(k++) = g.bias(r);
    }
    return flat;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n;
}

Vector Mlp::parameters() const {
    Vector flat(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index k = 0;
    for (const auto& l : layers_) {
        for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < l.weights.cols(); ++c) flat(k++) = l.weights(r, c);
        }
        for (Eigen::Index r = 0; r < l.bias.size(); ++r) flat(k++) = l.bias(r);
    }
    return flat;
}

void Mlp::set_parameters(const Vector& flat) {
    if (static_cast<std::size_t>(flat.size()) != parameter_count()) throw Error(ErrorKind::Shape, "parameter count mismatch");
    Eigen::Index k = 0;
    for (auto& l : layers_) {
        for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = flat(k++);
        }
        for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = flat(k++);
    }
}

json Mlp::to_json() const {
    json layers = json::array();
    for (const auto& l : layers_) {
        layers.push_back({{"weights", detail::matrix_to_json(l.weights)}, {"bias", detail::vector_to_json(l.bias)}});
    }
    return {{"layers", layers}};
}

Mlp Mlp::from_json(const json& j) {
    Mlp net;
    for (const auto& l : j.at("layers")) {
        Layer layer{detail::matrix_from_json(l.at("weights")), detail::vector_from_json(l.at("bias"))};
        if (layer.bias.size() != layer.weights.rows()) throw Error(ErrorKind::Parse, "layer bias size mismatch");
        if (!net.layers_.empty() && net.layers_.back().weights.rows() != layer.weights.cols()) {
            throw Error(ErrorKind::Parse, "layer sizes do not chain");
        }
        net.layers_.push_back(std::move(layer));
    }
    if (net.layers_.empty()) throw Error(ErrorKind::Parse, "network has no layers");
    return net;
}

MlpModel MlpModel::fit(const Matrix& x, const Matrix& y, const MlpParams& params, std::uint64_t seed) {
    if (x.rows() != y.rows()) throw Error(ErrorKind::Shape, "inputs and targets differ in rows");
    if (params.epochs < 1 || params.batch_size < 1 || !(params.learning_rate > 0.0)) {
        throw Error(ErrorKind::Config, "dnn epochs, batch_size and learning_rate must be positive");
    }
    MlpModel m;
    m.input_scaling_ = fit_columns(x, ScalingMode::min_max, DegeneratePolicy::unit_scale);
    m.target_scaling_ = fit_columns(y, ScalingMode::min_max, DegeneratePolicy::unit_scale);
    const Matrix xs = apply_columns(m.input_scaling_, x);
    const Matrix ys = apply_columns(m.target_scaling_, y);

    SplitMix64 root(seed);
    m.net_ = Mlp(static_cast<std::size_t>(x.cols()), params.hidden, static_cast<std::size_t>(y.cols()), root.next());
    SplitMix64 order_rng = root.spawn();

    const auto n = static_cast<std::size_t>(x.rows());
    const auto batch = static_cast<std::size_t>(params.batch_size);
    std::vector<std::size_t> order(n);
    Matrix bx, by;
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        order_rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t len = std::min(batch, n - start);
            bx.resize(static_cast<Eigen::Index>(len), xs.cols());
            by.resize(static_cast<Eigen::Index>(len), ys.cols());
            for (std::size_t k = 0; k < len; ++k) {
                bx.row(static_cast<Eigen::Index>(k)) = xs.row(static_cast<Eigen::Index>(order[start + k]));
                by.row(static_cast<Eigen::Index>(k)) = ys.row(static_cast<Eigen::Index>(order[start + k]));
            }
            const auto grads = backward(m.net_.layers_, bx, by, 1.0);
            for (std::size_t l = 0; l < grads.size(); ++l) {
                m.net_.layers_[l].weights -= params.learning_rate * grads[l].weights;
                m.net_.layers_[l].bias -= params.learning_rate * grads[l].bias;
            }
        }
    }
    return m;
}

Matrix MlpModel::predict_scaled(const Matrix& x) const { return net_.forward(apply_columns(input_scaling_, x)); }

Matrix MlpModel::predict(const Matrix& x) const { return invert_columns(target_scaling_, predict_scaled(x)); }

json MlpModel::to_json() const {
    return {{"network", net_.to_json()},
            {"input_scaling", detail::columns_to_json(input_scaling_)},
            {"target_scaling", detail::columns_to_json(target_scaling_)}};
}

MlpModel MlpModel::from_json(const json& j) {
    MlpModel m;
    m.net_ = Mlp::from_json(j.at("network"));
    m.input_scaling_ = detail::columns_from_json(j.at("input_scaling"));
    m.target_scaling_ = detail::columns_from_json(j.at("target_scaling"));
    return m;
}

double gradient_check(const Mlp& net, const Matrix& x, const Matrix& y, double step) {
    const Vector analytic = net.gradient(x, y);
    Vector params = net.parameters();
    Mlp probe = net;
    double worst = 0.0;
    for (Eigen::Index k = 0; k < params.size(); ++k) {
        const double saved = params(k);
        params(k) = saved + step;
        probe.set_parameters(params);
        const double up = probe.loss(x, y);
        params(k) = saved - step;
        probe.set_parameters(params);
        const double down = probe.loss(x, y);
        params(k) = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double denom = std::max({std::fabs(analytic(k)), std::fabs(numeric), 1e-8});
        worst = std::max(worst, std::fabs(analytic(k) - numeric) / denom);
    }
    return worst;
}

}  // namespace aqlock::models
