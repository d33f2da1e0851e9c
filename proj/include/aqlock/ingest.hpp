#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aqlock/calendar.hpp"
#include "aqlock/dataset.hpp"

namespace aqlock {

struct BoundingBox {
    double lon_min = 0.0;
    double lat_min = 0.0;
    double lon_max = 0.0;
    double lat_max = 0.0;

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Row-major pollutant density raster (mol/m^2) with a nodata sentinel.
class DensityGrid {
public:
    DensityGrid(std::size_t width, std::size_t height, std::vector<double> values,
                double nodata = -9999.0, double pixel_size_m = 50.0, BoundingBox bbox = {},
                std::string label = {});

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    std::span<const double> values() const { return values_; }
    double nodata() const { return nodata_; }
    double pixel_size_m() const { return pixel_size_m_; }
    const BoundingBox& bbox() const { return bbox_; }
    const std::string& label() const { return label_; }

    bool is_nodata(double v) const { return v == nodata_; }

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<double> values_;
    double nodata_;
    double pixel_size_m_;
    BoundingBox bbox_;
    std::string label_;
};

struct GridStats {
    double mean = 0.0;
    double std = 0.0;
    double valid_fraction = 0.0;
};

/// Population mean/std over non-nodata pixels.
GridStats grid_stats(const DensityGrid& grid);

struct DatedGrid {
    Date date;
    DensityGrid grid;
};

enum class AggregationMode {
    /// Average the per-grid means and per-grid stds of a period.
    per_grid,
    /// Recompute mean/std over all valid pixels of a period's grids.
    pooled_pixels,
};

struct PeriodStat {
    int period_index = 0;
    std::optional<PollutantStat> stat;
};

/// One entry per period of `year`; periods with no grid are empty.
std::vector<PeriodStat> aggregate_periods(std::span<const DatedGrid> grids, int year,
                                          AggregationMode mode = AggregationMode::per_grid);

/// Same reduction starting from already-computed per-grid statistics (the
/// pre-aggregated density CSV route). Matches aggregate_periods(per_grid).
struct DatedStat {
    Date date;
    PollutantStat stat;
};
std::vector<PeriodStat> aggregate_stats(std::span<const DatedStat> stats, int year);

/// Grid on disk: `<name>.json` sidecar plus a CSV body of `height` lines of
/// `width` comma-separated values. Sidecar keys: width, height, bbox
/// [lon_min, lat_min, lon_max, lat_max], pixel_size_m, nodata, timestamp
/// (YYYY-MM-DD), pollutant, values (body file name relative to sidecar).
struct GridFile {
    PollutantKind pollutant;
    DatedGrid grid;
};
GridFile read_grid(const std::filesystem::path& sidecar);
void write_grid(const std::filesystem::path& sidecar, PollutantKind pollutant,
                const DatedGrid& grid);
/// All `*.json` sidecars of a directory, sorted by file name.
std::vector<GridFile> read_grid_directory(const std::filesystem::path& dir);

/// Pre-aggregated per-acquisition statistics: `date,pollutant,mean,std`.
std::map<PollutantKind, std::vector<DatedStat>> read_density_csv(const std::filesystem::path& path);
void write_density_csv(std::ostream& out, const std::map<PollutantKind, std::vector<DatedStat>>& stats);

struct PolicyRow {
    Date date;
    std::array<std::optional<int>, kMeasureCount> levels{};

    friend bool operator==(const PolicyRow&, const PolicyRow&) = default;
};

struct PolicyTable {
    std::vector<PolicyRow> rows;  // strictly increasing dates
    std::string source;

    friend bool operator==(const PolicyTable&, const PolicyTable&) = default;
};

/// Maps each measure onto a CSV column name.
struct PolicyColumns {
    std::array<std::string, kMeasureCount> columns;
    std::string date_column = "date";
    /// Optional row filter, e.g. {"location", "Greece"} on a multi-country export.
    std::optional<std::pair<std::string, std::string>> filter;

    /// Column names used by the public tracker export.
    static PolicyColumns tracker_defaults();
};

PolicyTable parse_policy_csv(std::istream& in, const PolicyColumns& columns,
                             std::string source = {});
PolicyTable parse_policy_csv(const std::filesystem::path& path, const PolicyColumns& columns);
void write_policy_csv(std::ostream& out, const PolicyTable& table, const PolicyColumns& columns);

/// Per-measure ordinal maxima used for normalization (default 4 each).
using MeasureMaxima = std::array<int, kMeasureCount>;
inline constexpr MeasureMaxima kDefaultMaxima = {4, 4, 4, 4, 4, 4, 4, 4};

/// Policy rows of `year`, normalized and averaged per period; one vector of
/// period values per measure.
std::array<std::vector<PeriodValue>, kMeasureCount> measure_periods(const PolicyTable& table,
                                                                   int year,
                                                                   const MeasureMaxima& maxima);

/// Joins measure periods and pollutant period statistics into a dataset
/// covering every period of the year.
CityDataset assemble_city(std::string city_name, int year,
                          const std::array<std::vector<PeriodValue>, kMeasureCount>& measures,
                          const std::map<PollutantKind, std::vector<PeriodStat>>& pollutants,
                          GeoPoint center = {}, double box_half_width = 0.25);

}  // namespace aqlock
