#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "aqlock/dataset.hpp"
#include "aqlock/evaluation.hpp"
#include "aqlock/ingest.hpp"
#include "aqlock/models.hpp"
#include "aqlock/similarity.hpp"

namespace aqlock::pipeline {

struct CityConfig {
    std::string name;
    GeoPoint center;
    double box_half_width = 0.25;
    std::filesystem::path policy_csv;
    std::optional<std::filesystem::path> grid_dir;
    std::optional<std::filesystem::path> density_csv;
};

struct PipelineConfig {
    int year = 2020;
    std::vector<CityConfig> cities;
    PolicyColumns policy_columns = PolicyColumns::tracker_defaults();
    MeasureMaxima maxima = kDefaultMaxima;
    std::vector<PollutantKind> pollutants{kAllPollutants.begin(), kAllPollutants.end()};
    AggregationMode aggregation = AggregationMode::per_grid;
    std::vector<ModelSpec> models;
    SplitSpec split;
    PoolingMode pooling = PoolingMode::pooled;
    ScalingMode scaling = ScalingMode::none;
    ScreenOptions screen;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 0;
    int jobs = 1;
    /// The effective JSON document (after overrides), echoed into reports.
    nlohmann::json source;
};

/// Applies `key.path=value` overrides to a config document. The value is
/// parsed as JSON when possible, otherwise taken as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Validates the whole document; relative paths resolve against `base_dir`.
/// Throws Error{Config} naming the offending key.
PipelineConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);

struct LoadOptions {
    std::vector<std::string> overrides;
    std::optional<std::filesystem::path> output_dir;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
};

/// Reads the file, applies overrides (config < env AQLOCK_OUT < --out).
PipelineConfig load_config(const std::filesystem::path& path, const LoadOptions& options);

std::filesystem::path datasets_dir(const PipelineConfig& cfg);

/// Per-city datasets from the configured policy CSVs and grids/density CSVs.
std::vector<CityDataset> ingest_cities(const PipelineConfig& cfg);
std::vector<CityDataset> load_datasets(const PipelineConfig& cfg);

int cmd_ingest(const PipelineConfig& cfg, std::ostream& out);
int cmd_screen(const PipelineConfig& cfg, std::ostream& out);
int cmd_benchmark(const PipelineConfig& cfg, std::ostream& out);

struct PredictRequest {
    std::filesystem::path model_path;
    /// CSV with the 10 canonical input columns; when absent the latest
    /// complete period of every ingested city is used.
    std::optional<std::filesystem::path> input_csv;
};
int cmd_predict(const std::optional<PipelineConfig>& cfg, const PredictRequest& req, std::ostream& out);

/// Entry point shared by the executable and the tests. Exit codes: 0 ok,
/// 1 partial cell failures, 2 input/config errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aqlock::pipeline
