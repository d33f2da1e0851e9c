#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "aqlock/evaluation.hpp"
#include "aqlock/similarity.hpp"

namespace aqlock {

enum class FigureId { R2_bars, DTW_bars, RMSE_CO_O3, RMSE_NO2_SO2 };

std::string_view to_string(FigureId id);
std::optional<FigureId> parse_figure_id(std::string_view name);

struct FigureRow {
    std::string group;
    std::string category;
    /// Unset marks a missing cell; it is written out, never dropped.
    std::optional<double> value;

    friend bool operator==(const FigureRow&, const FigureRow&) = default;
};

struct FigureData {
    FigureId id = FigureId::R2_bars;
    std::string caption;
    std::vector<FigureRow> rows;

    friend bool operator==(const FigureData&, const FigureData&) = default;
};

/// Pooled-scope R^2 per (measure, pollutant), measures in canonical order.
FigureData figure_r2(std::span<const ScreenRow> screen);
/// Pooled-scope DTW distance per (measure, pollutant).
FigureData figure_dtw(std::span<const ScreenRow> screen);
/// Test rmse_mean per (kind, pollutant) split into {CO, O3} and {NO2, SO2}.
std::pair<FigureData, FigureData> figure_rmse(const EvalReport& report);

void write_figure_csv(std::ostream& out, const FigureData& fig);
nlohmann::json figure_to_json(const FigureData& fig);
FigureData figure_from_json(const nlohmann::json& j);
FigureData read_figure_csv(std::istream& in, FigureId id, std::string caption);

/// Writes fig_<id>.csv and fig_<id>.json under `dir`.
void write_figure(const std::filesystem::path& dir, const FigureData& fig);

struct ScreenSummary {
    double max_r2 = 0.0;
    std::size_t cells = 0;
    std::size_t missing = 0;
    /// Every defined pooled R^2 is below 0.20.
    bool all_cod_below_020 = false;
};

ScreenSummary summarize_screen(std::span<const ScreenRow> screen);
std::string screen_summary_text(std::span<const ScreenRow> screen);
std::string benchmark_summary_text(const EvalReport& report);

}  // namespace aqlock
