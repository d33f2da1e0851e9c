#include "aqlock/models.hpp"

#include <set>

#include "aqlock/error.hpp"

namespace aqlock {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 9> kKindNames = {"knn",   "dtr",  "rfr",   "linreg", "ridge",
                                                        "lasso", "mgbr", "madab", "dnn"};

/// Reads named values out of a params object and remembers which keys were
/// used, so leftovers can be reported as unknown.
class ParamReader {
public:
    ParamReader(const json& params, std::string_view kind) : params_(params), kind_(kind) {
        if (!params_.is_object()) throw Error(ErrorKind::Config, std::string(kind) + ": params must be an object");
    }

    template <class T>
    void read(std::initializer_list<std::string_view> names, T& out) {
        for (auto name : names) {
            const std::string key(name);
            if (!params_.contains(key)) continue;
            used_.insert(key);
            try {
                out = params_.at(key).get<T>();
            } catch (const json::exception&) {
                throw Error(ErrorKind::Config, std::string(kind_) + ": bad value for '" + key + "'");
            }
        }
    }

    void finish() const {
        for (const auto& [key, _] : params_.items()) {
            if (!used_.count(key)) {
                throw Error(ErrorKind::Config, std::string(kind_) + ": unknown hyperparameter '" + key + "'");
            }
        }
    }

private:
    const json& params_;
    std::string_view kind_;
    std::set<std::string> used_;
};

Hyperparameters default_params(ModelKind kind) {
    switch (kind) {
        case ModelKind::knn: return models::KnnParams{};
        case ModelKind::dtr: return models::TreeParams{};
        case ModelKind::rfr: return models::ForestParams{};
        case ModelKind::linreg: return LinRegParams{};
        case ModelKind::ridge: return models::RidgeParams{};
        case ModelKind::lasso: return models::LassoParams{};
        case ModelKind::mgbr: return models::SgdParams{};
        case ModelKind::madab: return models::AdaBoostParams{};
        case ModelKind::dnn: return models::MlpParams{};
    }
    return LinRegParams{};
}

struct ParamsIo {
    ParamReader* reader = nullptr;
    json* out = nullptr;

    template <class T>
    void field(std::initializer_list<std::string_view> names, T& value) {
        if (reader) reader->read(names, value);
        if (out) (*out)[std::string(*names.begin())] = value;
    }

    void operator()(models::KnnParams& p) { field({"k"}, p.k); }
    void operator()(models::TreeParams& p) {
        field({"max_depth"}, p.max_depth);
        field({"min_samples_split"}, p.min_samples_split);
        field({"min_samples_leaf"}, p.min_samples_leaf);
        field({"max_features"}, p.max_features);
    }
    void operator()(models::ForestParams& p) {
        field({"n_trees"}, p.n_trees);
        field({"max_depth"}, p.max_depth);
        field({"min_samples_leaf"}, p.min_samples_leaf);
        field({"max_features"}, p.max_features);
        field({"bootstrap"}, p.bootstrap);
    }
    void operator()(LinRegParams&) {}
    void operator()(models::RidgeParams& p) { field({"lambda"}, p.lambda); }
    void operator()(models::LassoParams& p) {
        field({"lambda"}, p.lambda);
        field({"tol"}, p.tol);
        field({"max_sweeps"}, p.max_sweeps);
    }
    void operator()(models::SgdParams& p) {
        field({"epochs", "estimators"}, p.epochs);
        field({"eta0"}, p.eta0);
        field({"power_t"}, p.power_t);
        field({"alpha"}, p.alpha);
    }
    void operator()(models::AdaBoostParams& p) {
        field({"n_estimators", "estimators"}, p.n_estimators);
        field({"base_depth"}, p.base_depth);
        field({"learning_rate"}, p.learning_rate);
    }
    void operator()(models::MlpParams& p) {
        field({"hidden"}, p.hidden);
        field({"epochs"}, p.epochs);
        field({"batch_size"}, p.batch_size);
        field({"learning_rate"}, p.learning_rate);
    }
};

void require_width(const Matrix& inputs) {
    if (inputs.cols() != static_cast<Eigen::Index>(kInputDim)) {
        throw Error(ErrorKind::Shape, "expected " + std::to_string(kInputDim) + " input columns, got " +
                                          std::to_string(inputs.cols()));
    }
}

}  // namespace

std::string_view to_string(ModelKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<ModelKind> parse_model_kind(std::string_view name) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (kKindNames[i] == name) return kAllModelKinds[i];
    }
    return std::nullopt;
}

ModelSpec ModelSpec::defaults(ModelKind kind) {
    return ModelSpec{kind, default_params(kind), kind == ModelKind::rfr ? kForestDefaultSeed : 0};
}

ModelSpec ModelSpec::from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorKind::Config, "model spec must be an object");
    for (const auto& [key, _] : j.items()) {
        if (key != "kind" && key != "params" && key != "seed") {
            throw Error(ErrorKind::Config, "model spec: unknown key '" + key + "'");
        }
    }
    if (!j.contains("kind") || !j.at("kind").is_string()) throw Error(ErrorKind::Config, "model spec needs a 'kind'");
    const auto name = j.at("kind").get<std::string>();
    const auto kind = parse_model_kind(name);
    if (!kind) throw Error(ErrorKind::Config, "unknown model kind '" + name + "'");
    ModelSpec spec = defaults(*kind);
    if (j.contains("params")) {
        ParamReader reader(j.at("params"), name);
        ParamsIo io{&reader, nullptr};
        std::visit(io, spec.params);
        reader.finish();
    }
    if (j.contains("seed")) {
        const auto& seed = j.at("seed");
        if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) {
            throw Error(ErrorKind::Config, name + ": seed must be a non-negative integer");
        }
        spec.seed = j.at("seed").get<std::uint64_t>();
    }
    return spec;
}

json ModelSpec::to_json() const {
    json params = json::object();
    ModelSpec copy = *this;
    ParamsIo io{nullptr, &params};
    std::visit(io, copy.params);
    return {{"kind", std::string(to_string(kind))}, {"params", params}, {"seed", seed}};
}

TrainedModel::TrainedModel(ModelSpec spec, FittedModel fitted, std::optional<PollutantKind> pollutant,
                           std::vector<std::string> warnings)
    : spec_(std::move(spec)), fitted_(std::move(fitted)), pollutant_(pollutant), warnings_(std::move(warnings)) {}

Matrix TrainedModel::predict(const Matrix& inputs) const {
    require_width(inputs);
    if (!inputs.allFinite()) throw Error(ErrorKind::Domain, "prediction inputs must be finite");
    return std::visit([&](const auto& m) -> Matrix { return m.predict(inputs); }, fitted_);
}

Matrix predict(const TrainedModel& model, const Matrix& inputs) { return model.predict(inputs); }

json TrainedModel::to_json() const {
    json j = {{"format", "aqlock-model"},
              {"version", kModelFormatVersion},
              {"spec", spec_.to_json()},
              {"input_dim", kInputDim},
              {"output_dim", kOutputDim},
              {"warnings", warnings_},
              {"model", std::visit([](const auto& m) { return m.to_json(); }, fitted_)}};
    j["pollutant"] = pollutant_ ? json(std::string(to_string(*pollutant_))) : json(nullptr);
    return j;
}

TrainedModel TrainedModel::from_json(const json& j) {
    try {
        if (j.at("format").get<std::string>() != "aqlock-model") throw Error(ErrorKind::Parse, "not a model file");
        const int version = j.at("version").get<int>();
        if (version != kModelFormatVersion) {
            throw Error(ErrorKind::Parse, "unsupported model format version " + std::to_string(version));
        }
        ModelSpec spec = ModelSpec::from_json(j.at("spec"));
        std::optional<PollutantKind> pollutant;
        if (!j.at("pollutant").is_null()) {
            pollutant = parse_pollutant(j.at("pollutant").get<std::string>());
            if (!pollutant) throw Error(ErrorKind::Parse, "unknown pollutant in model file");
        }
        const json& body = j.at("model");
        FittedModel fitted = [&]() -> FittedModel {
            switch (spec.kind) {
                case ModelKind::knn: return models::KnnModel::from_json(body);
                case ModelKind::dtr: return models::RegressionTree::from_json(body);
                case ModelKind::rfr: return models::Forest::from_json(body);
                case ModelKind::madab: return models::AdaBoostModel::from_json(body);
                case ModelKind::dnn: return models::MlpModel::from_json(body);
                default: return models::LinearModel::from_json(body);
            }
        }();
        return TrainedModel(std::move(spec), std::move(fitted), pollutant,
                            j.at("warnings").get<std::vector<std::string>>());
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("malformed model file: ") + e.what());
    }
}

TrainedModel fit(const ModelSpec& spec, const SupervisedSet& train, const FitOptions& options) {
    require_width(train.inputs);
    if (train.targets.cols() != static_cast<Eigen::Index>(kOutputDim) || train.targets.rows() != train.inputs.rows()) {
        throw Error(ErrorKind::Shape, "targets must be N x " + std::to_string(kOutputDim));
    }
    if (train.rows() < 2) throw Error(ErrorKind::InsufficientData, "training needs at least 2 rows");
    if (!train.inputs.allFinite() || !train.targets.allFinite()) {
        throw Error(ErrorKind::Domain, "training data must be finite");
    }
    const Matrix& x = train.inputs;
    const Matrix& y = train.targets;
    std::vector<std::string> warnings;
    auto linear_warnings = [&](const models::LinearModel& m) {
        if (m.rank_deficient) warnings.emplace_back("singular normal equations: minimum-norm pseudo-inverse solution used");
        return m;
    };
    FittedModel fitted = [&]() -> FittedModel {
        switch (spec.kind) {
            case ModelKind::knn: return models::KnnModel::fit(x, y, spec.get<models::KnnParams>());
            case ModelKind::dtr: return models::RegressionTree::fit(x, y, {}, spec.get<models::TreeParams>());
            case ModelKind::rfr: return models::Forest::fit(x, y, spec.get<models::ForestParams>(), spec.seed, options.jobs);
            case ModelKind::linreg: return linear_warnings(models::fit_ols(x, y));
            case ModelKind::ridge: return linear_warnings(models::fit_ridge(x, y, spec.get<models::RidgeParams>()));
            case ModelKind::lasso: {
                const auto& p = spec.get<models::LassoParams>();
                auto m = models::fit_lasso(x, y, p);
                for (int sweeps : m.iterations) {
                    if (sweeps >= p.max_sweeps) {
                        warnings.emplace_back("lasso reached max_sweeps before converging");
                        break;
                    }
                }
                return m;
            }
            case ModelKind::mgbr: return models::fit_sgd(x, y, spec.get<models::SgdParams>(), spec.seed);
            case ModelKind::madab: return models::AdaBoostModel::fit(x, y, spec.get<models::AdaBoostParams>());
            case ModelKind::dnn: return models::MlpModel::fit(x, y, spec.get<models::MlpParams>(), spec.seed);
        }
        throw Error(ErrorKind::Config, "unhandled model kind");
    }();
    return TrainedModel(spec, std::move(fitted), train.pollutant, std::move(warnings));
}

double gradient_check(const ModelSpec& spec, std::span<const double> input, std::span<const double> target) {
    if (spec.kind != ModelKind::dnn) throw Error(ErrorKind::Config, "gradient check applies to dnn specs only");
    const auto& p = spec.get<models::MlpParams>();
    SplitMix64 root(spec.seed);
    const models::Mlp net(input.size(), p.hidden, target.size(), root.next());
    const Matrix x = Eigen::Map<const Eigen::RowVectorXd>(input.data(), static_cast<Eigen::Index>(input.size()));
    const Matrix y = Eigen::Map<const Eigen::RowVectorXd>(target.data(), static_cast<Eigen::Index>(target.size()));
    return models::gradient_check(net, x, y);
}

}  // namespace aqlock
