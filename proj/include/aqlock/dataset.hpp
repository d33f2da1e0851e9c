#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "aqlock/calendar.hpp"

namespace aqlock {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Government response measures. The enumerator order is the canonical
/// feature layout of every supervised input row.
enum class MeasureKind {
    RE_IN_MOV,
    IN_TR_CON,
    CA_PUB_EV,
    RE_GAT,
    C_PUB_TRAN,
    C_SCHOOL,
    STAY_HOME_R,
    C_WORKPLACE,
};

enum class PollutantKind { CO, O3, NO2, SO2 };

inline constexpr std::size_t kMeasureCount = 8;
inline constexpr std::size_t kPollutantCount = 4;
inline constexpr std::size_t kInputDim = kMeasureCount + 2;
inline constexpr std::size_t kOutputDim = 2;

inline constexpr std::array<MeasureKind, kMeasureCount> kAllMeasures = {
    MeasureKind::RE_IN_MOV, MeasureKind::IN_TR_CON,  MeasureKind::CA_PUB_EV,
    MeasureKind::RE_GAT,    MeasureKind::C_PUB_TRAN, MeasureKind::C_SCHOOL,
    MeasureKind::STAY_HOME_R, MeasureKind::C_WORKPLACE,
};

inline constexpr std::array<PollutantKind, kPollutantCount> kAllPollutants = {
    PollutantKind::CO, PollutantKind::O3, PollutantKind::NO2, PollutantKind::SO2};

std::string_view to_string(MeasureKind m);
std::string_view to_string(PollutantKind p);
std::optional<MeasureKind> parse_measure(std::string_view name);
std::optional<PollutantKind> parse_pollutant(std::string_view name);

constexpr std::size_t index_of(MeasureKind m) { return static_cast<std::size_t>(m); }
constexpr std::size_t index_of(PollutantKind p) { return static_cast<std::size_t>(p); }

/// Column-integrated density statistics over one period, in mol/m^2.
struct PollutantStat {
    double mean = 0.0;
    double std = 0.0;

    friend bool operator==(const PollutantStat&, const PollutantStat&) = default;
};

struct PeriodRecord {
    int period_index = 0;
    Date start_date;
    std::array<std::optional<double>, kMeasureCount> measures{};
    std::array<std::optional<PollutantStat>, kPollutantCount> pollutants{};

    std::optional<double> measure(MeasureKind m) const { return measures[index_of(m)]; }
    const std::optional<PollutantStat>& pollutant(PollutantKind p) const {
        return pollutants[index_of(p)];
    }
    bool measures_complete() const;

    friend bool operator==(const PeriodRecord&, const PeriodRecord&) = default;
};

struct GeoPoint {
    double longitude = 0.0;
    double latitude = 0.0;

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// One city's period sequence. Construction validates the record
/// invariants (consecutive indices, intensities in [0,1], std >= 0).
class CityDataset {
public:
    CityDataset(std::string city_name, int year, std::vector<PeriodRecord> records,
                GeoPoint center = {}, double box_half_width = 0.25);

    const std::string& city_name() const { return city_name_; }
    int year() const { return year_; }
    const std::vector<PeriodRecord>& records() const { return records_; }
    const GeoPoint& center() const { return center_; }
    double box_half_width() const { return box_half_width_; }

    friend bool operator==(const CityDataset&, const CityDataset&) = default;

private:
    std::string city_name_;
    int year_;
    std::vector<PeriodRecord> records_;
    GeoPoint center_;
    double box_half_width_;
};

/// Header of the per-city CSV: period_index,start_date,<8 measures>,
/// then <pollutant>_mean,<pollutant>_std for CO, O3, NO2, SO2.
std::vector<std::string> city_csv_header();
void write_city_csv(const CityDataset& city, std::ostream& out);
void write_city_csv(const CityDataset& city, const std::filesystem::path& path);
CityDataset read_city_csv(std::istream& in, std::string city_name, GeoPoint center = {},
                          double box_half_width = 0.25);
CityDataset read_city_csv(const std::filesystem::path& path, GeoPoint center = {},
                          double box_half_width = 0.25);

/// Per-column affine map v' = (v - offset) / scale.
struct AffineColumns {
    std::vector<double> offset;
    std::vector<double> scale;

    friend bool operator==(const AffineColumns&, const AffineColumns&) = default;
};

enum class ScalingMode { none, min_max, z_score };

std::string_view to_string(ScalingMode mode);
std::optional<ScalingMode> parse_scaling_mode(std::string_view name);

/// What to do with a constant column: raise (public contract) or map it with
/// unit scale (used inside learners whose training data may legitimately
/// contain an inactive measure).
enum class DegeneratePolicy { error, unit_scale };

struct ScalingSpec {
    ScalingMode mode = ScalingMode::none;
    AffineColumns inputs;
    AffineColumns targets;
    bool fitted = false;

    friend bool operator==(const ScalingSpec&, const ScalingSpec&) = default;
};

struct RowProvenance {
    std::string city_name;
    int period_index = 0;

    friend bool operator==(const RowProvenance&, const RowProvenance&) = default;
};

struct SupervisedSet {
    PollutantKind pollutant = PollutantKind::CO;
    Matrix inputs{0, kInputDim};
    Matrix targets{0, kOutputDim};
    std::vector<RowProvenance> row_provenance;
    ScalingSpec scaling;

    std::size_t rows() const { return static_cast<std::size_t>(inputs.rows()); }

    /// Subset in the given row order (scaling copied as-is).
    SupervisedSet select(std::span<const std::size_t> row_indices) const;

    friend bool operator==(const SupervisedSet& a, const SupervisedSet& b);
};

/// Canonical input column names: the 8 measures then mean and std.
std::vector<std::string> input_column_names();
std::vector<std::string> target_column_names();

void write_supervised_csv(const SupervisedSet& set, std::ostream& out);
SupervisedSet read_supervised_csv(std::istream& in);

// Operations -----------------------------------------------------------------

/// raw_level / max_level; throws OrdinalOutOfRange outside [0, max_level].
double normalize_measure(int raw_level, int max_level = 4);

struct DailyValue {
    Date date;
    double value = 0.0;
};

struct PeriodValue {
    int period_index = 0;
    std::optional<double> value;
};

/// Averages daily values into the year's 2-day periods. One entry per
/// period; periods without any daily value are empty.
std::vector<PeriodValue> resample_to_periods(std::span<const DailyValue> daily, int year);

/// Input row = [8 measures at t, mean_t, std_t], target = [mean_{t+1},
/// std_{t+1}]. Pairs never cross cities; a pair touching any missing
/// constituent is skipped.
SupervisedSet build_supervised(std::span<const CityDataset> cities, PollutantKind pollutant);

ScalingSpec fit_scaling(const SupervisedSet& set, ScalingMode mode,
                        DegeneratePolicy policy = DegeneratePolicy::error);
AffineColumns fit_columns(const Matrix& data, ScalingMode mode, DegeneratePolicy policy,
                          std::span<const std::string> column_names = {});

Matrix apply_columns(const AffineColumns& cols, const Matrix& data);
Matrix invert_columns(const AffineColumns& cols, const Matrix& data);

/// Returns a copy of `set` with inputs/targets mapped through `spec`.
SupervisedSet apply_scaling(const SupervisedSet& set, const ScalingSpec& spec);
SupervisedSet invert_scaling(const SupervisedSet& set, const ScalingSpec& spec);

}  // namespace aqlock
