#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "aqlock/dataset.hpp"
#include "aqlock/models.hpp"

namespace aqlock {

enum class SplitMode { chronological, random };

std::string_view to_string(SplitMode mode);
std::optional<SplitMode> parse_split_mode(std::string_view name);

struct SplitSpec {
    SplitMode mode = SplitMode::chronological;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
};

struct TrainTest {
    SupervisedSet train;
    SupervisedSet test;
};

/// Chronological: the last ceil(N_city * fraction) rows of every city are
/// test rows. Random: a seeded shuffle, ceil(N * fraction) test rows. Both
/// parts keep the original row order.
TrainTest split(const SupervisedSet& set, const SplitSpec& spec);

struct RmseResult {
    double mean = 0.0;
    double std = 0.0;
    /// sqrt((mean^2 + std^2) / 2)
    double joint = 0.0;
};

RmseResult rmse(const Matrix& predictions, const Matrix& targets);

struct EvalRow {
    PollutantKind pollutant = PollutantKind::CO;
    ModelKind kind = ModelKind::linreg;
    std::string scope;  // "pooled" or a city name
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    /// Empty when the cell failed; `error` then says why.
    std::optional<RmseResult> rmse;
    std::optional<double> relative_error;
    std::string error;
};

struct EvalReport {
    std::vector<EvalRow> rows;

    bool any_failure() const;
    /// Rows for one pollutant in report order.
    std::vector<const EvalRow*> for_pollutant(PollutantKind p) const;
};

enum class PoolingMode { pooled, per_city };

std::string_view to_string(PoolingMode mode);
std::optional<PoolingMode> parse_pooling_mode(std::string_view name);

struct BenchmarkOptions {
    SplitSpec split;
    PoolingMode pooling = PoolingMode::pooled;
    /// Applied to inputs and targets (fitted on the training rows only);
    /// predictions are mapped back before scoring.
    ScalingMode scaling = ScalingMode::none;
    int jobs = 1;
    /// Keep fitted models in the result (needed to write model files).
    bool keep_models = true;
};

struct BenchmarkCellModel {
    PollutantKind pollutant;
    std::string scope;
    TrainedModel model;
};

struct BenchmarkResult {
    EvalReport report;
    std::vector<BenchmarkCellModel> models;
};

/// Builds one supervised set per pollutant (and scope), splits it, fits every
/// spec and scores the test part. relative_error = rmse_mean / mean |target
/// mean| over the test rows. Rows are ordered by (pollutant, scope, kind),
/// independent of `jobs`; a failing cell is recorded and the run continues.
BenchmarkResult run_benchmark(std::span<const CityDataset> cities,
                              std::span<const PollutantKind> pollutants,
                              std::span<const ModelSpec> specs, const BenchmarkOptions& options);

/// `pollutant,kind,scope,rmse_mean,rmse_std,rmse_joint,relative_error,n_train,n_test`.
void write_report_csv(std::ostream& out, const EvalReport& report);
nlohmann::json report_to_json(const EvalReport& report, const nlohmann::json& config_echo);

}  // namespace aqlock
