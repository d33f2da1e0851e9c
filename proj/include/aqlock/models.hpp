#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "aqlock/dataset.hpp"
#include "aqlock/models/adaboost.hpp"
#include "aqlock/models/forest.hpp"
#include "aqlock/models/knn.hpp"
#include "aqlock/models/linear.hpp"
#include "aqlock/models/mlp.hpp"
#include "aqlock/models/tree.hpp"

namespace aqlock {

enum class ModelKind { knn, dtr, rfr, linreg, ridge, lasso, mgbr, madab, dnn };

inline constexpr std::array<ModelKind, 9> kAllModelKinds = {
    ModelKind::knn,   ModelKind::dtr,  ModelKind::rfr,   ModelKind::linreg, ModelKind::ridge,
    ModelKind::lasso, ModelKind::mgbr, ModelKind::madab, ModelKind::dnn};

std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view name);

struct LinRegParams {
    friend bool operator==(const LinRegParams&, const LinRegParams&) = default;
};

/// One alternative per ModelKind, in the same order.
using Hyperparameters =
    std::variant<models::KnnParams, models::TreeParams, models::ForestParams, LinRegParams,
                 models::RidgeParams, models::LassoParams, models::SgdParams,
                 models::AdaBoostParams, models::MlpParams>;

/// Random forests default to seed 2; everything else to 0.
inline constexpr std::uint64_t kForestDefaultSeed = 2;

struct ModelSpec {
    ModelKind kind = ModelKind::linreg;
    Hyperparameters params = LinRegParams{};
    std::uint64_t seed = 0;

    static ModelSpec defaults(ModelKind kind);

    /// {"kind": ..., "params": {...}, "seed": ...}. Omitted params keep
    /// their defaults; unknown names throw Error{Config}.
    static ModelSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    template <class P>
    const P& get() const { return std::get<P>(params); }

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

using FittedModel = std::variant<models::KnnModel, models::RegressionTree, models::Forest,
                                 models::LinearModel, models::AdaBoostModel, models::MlpModel>;

struct FitOptions {
    int jobs = 1;
};

/// Immutable fitted learner: 10 inputs -> 2 outputs.
class TrainedModel {
public:
    TrainedModel(ModelSpec spec, FittedModel fitted, std::optional<PollutantKind> pollutant = {},
                 std::vector<std::string> warnings = {});

    const ModelSpec& spec() const { return spec_; }
    const FittedModel& fitted() const { return fitted_; }
    const std::optional<PollutantKind>& pollutant() const { return pollutant_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    template <class M>
    const M& as() const { return std::get<M>(fitted_); }

    /// M x 10 -> M x 2. Throws Error{Shape} on a wrong input width.
    Matrix predict(const Matrix& inputs) const;

    /// Versioned JSON; doubles are written in shortest round-trip form so a
    /// reloaded model predicts bit-identically.
    nlohmann::json to_json() const;
    static TrainedModel from_json(const nlohmann::json& j);

private:
    ModelSpec spec_;
    FittedModel fitted_;
    std::optional<PollutantKind> pollutant_;
    std::vector<std::string> warnings_;
};

TrainedModel fit(const ModelSpec& spec, const SupervisedSet& train, const FitOptions& options = {});

Matrix predict(const TrainedModel& model, const Matrix& inputs);

/// Builds a network for `spec` (must be dnn) with its seeded initialization
/// and checks backpropagation on one sample against central differences.
double gradient_check(const ModelSpec& spec, std::span<const double> input, std::span<const double> target);

inline constexpr int kModelFormatVersion = 1;

}  // namespace aqlock
