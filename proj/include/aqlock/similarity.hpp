#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aqlock/dataset.hpp"

namespace aqlock {

/// Qualitative strength of |r|; half-open bands at 0.10/0.40/0.70/0.90.
enum class Band { None, Weak, Moderate, Strong, VeryStrong };

std::string_view to_string(Band band);

struct CorrelationResult {
    double r = 0.0;
    double r_squared = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
    Band band = Band::None;
};

/// Pearson correlation with population moments. Throws
/// UndefinedCorrelation when either series is constant, Shape on length
/// mismatch or n < 3.
CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

/// Two-tailed p of H0: rho = 0, from Student t with n-2 degrees of freedom.
/// Evaluated as I_{1-r^2}((n-2)/2, 1/2), which equals 2(1 - T(|t|)).
double two_tailed_p(double r, std::size_t n);

Band band_of(double abs_r);

enum class DtwCost { absolute, squared };

std::string_view to_string(DtwCost cost);
std::optional<DtwCost> parse_dtw_cost(std::string_view name);

struct DtwResult {
    double distance = 0.0;
    std::vector<std::pair<std::size_t, std::size_t>> path;
};

struct DtwOptions {
    DtwCost cost = DtwCost::absolute;
    /// Sakoe-Chiba half-width; unset means unconstrained.
    std::optional<std::size_t> window;
};

/// Full dynamic-programming DTW with backtracking. Ties prefer the
/// diagonal predecessor, then the vertical one (i-1, j).
DtwResult dtw(std::span<const double> a, std::span<const double> b, const DtwOptions& options = {});

/// (x - mean) / population std; a constant series maps to zeros.
std::vector<double> z_score(std::span<const double> x);

struct ScreenOptions {
    DtwOptions dtw;
    bool z_normalize = true;
    int jobs = 1;
};

/// One (scope, measure) cell. Either half may be missing when its
/// computation failed; the reason is kept for the report.
struct ScreenRow {
    std::string scope;  // city name or "pooled"
    MeasureKind measure = MeasureKind::RE_IN_MOV;
    PollutantKind pollutant = PollutantKind::CO;
    std::size_t n = 0;
    std::optional<CorrelationResult> correlation;
    std::optional<double> dtw_distance;
    std::string error;
};

inline constexpr std::string_view kPooledScope = "pooled";

/// Every measure against the pollutant mean series over periods where both
/// are present; per city (input order) then pooled, measures in canonical
/// order within each scope.
std::vector<ScreenRow> screen_all(std::span<const CityDataset> cities, PollutantKind pollutant,
                                  const ScreenOptions& options = {});

/// `city,measure,pollutant,r,r2,p,band,dtw_distance,n`; missing values empty.
void write_screen_csv(std::ostream& out, std::span<const ScreenRow> rows);

}  // namespace aqlock
