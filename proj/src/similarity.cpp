#include "aqlock/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <boost/math/special_functions/beta.hpp>

#include "aqlock/csv.hpp"
#include "aqlock/error.hpp"
#include "aqlock/parallel.hpp"

namespace aqlock {

std::string_view to_string(Band band) {
    switch (band) {
        case Band::None: return "None";
        case Band::Weak: return "Weak";
        case Band::Moderate: return "Moderate";
        case Band::Strong: return "Strong";
        case Band::VeryStrong: return "VeryStrong";
    }
    return "None";
}

Band band_of(double abs_r) {
    if (!(abs_r >= 0.0 && abs_r <= 1.0)) {
        throw Error(ErrorKind::Domain, "|r| = " + csv::format_double(abs_r) + " outside [0,1]");
    }
    if (abs_r < 0.10) return Band::None;
    if (abs_r < 0.40) return Band::Weak;
    if (abs_r < 0.70) return Band::Moderate;
    if (abs_r < 0.90) return Band::Strong;
    return Band::VeryStrong;
}

double two_tailed_p(double r, std::size_t n) {
    if (n < 3) throw Error(ErrorKind::Shape, "p-value needs n >= 3");
    if (!(std::fabs(r) <= 1.0)) throw Error(ErrorKind::Domain, "|r| > 1");
    const double one_minus_r2 = (1.0 - r) * (1.0 + r);
    if (one_minus_r2 <= 0.0) return 0.0;
    const double df = static_cast<double>(n - 2);
    // P(|T| >= |t|) with t^2 = df r^2 / (1 - r^2), i.e. df / (df + t^2) = 1 - r^2.
    return std::clamp(boost::math::ibeta(df / 2.0, 0.5, one_minus_r2), 0.0, 1.0);
}

CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw Error(ErrorKind::Shape, "series lengths differ (" + std::to_string(x.size()) + " vs " +
                                          std::to_string(y.size()) + ")");
    }
    const std::size_t n = x.size();
    if (n < 3) throw Error(ErrorKind::Shape, "correlation needs at least 3 points");
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw Error(ErrorKind::Domain, "non-finite series value");
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw Error(ErrorKind::UndefinedCorrelation, "a series has zero variance");
    CorrelationResult res;
    res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    res.r_squared = res.r * res.r;
    res.n = n;
    res.p_value = two_tailed_p(res.r, n);
    res.band = band_of(std::fabs(res.r));
    return res;
}

std::string_view to_string(DtwCost cost) { return cost == DtwCost::absolute ? "absolute" : "squared"; }

std::optional<DtwCost> parse_dtw_cost(std::string_view name) {
    if (name == "absolute") return DtwCost::absolute;
    if (name == "squared") return DtwCost::squared;
    return std::nullopt;
}

DtwResult dtw(std::span<const double> a, std::span<const double> b, const DtwOptions& options) {
    const std::size_t n = a.size(), m = b.size();
    if (n == 0 || m == 0) throw Error(ErrorKind::Shape, "DTW needs non-empty series");
    const auto cost = [&](std::size_t i, std::size_t j) {
        const double d = a[i] - b[j];
        return options.cost == DtwCost::absolute ? std::fabs(d) : d * d;
    };
    const std::size_t span = n > m ? n - m : m - n;
    const std::size_t window = options.window ? std::max(*options.window, span) : std::max(n, m);
    const auto inside = [&](std::size_t i, std::size_t j) { return (i > j ? i - j : j - i) <= window; };

    constexpr double inf = std::numeric_limits<double>::infinity();
    // acc(i, j) = cheapest admissible path from (0,0) to (i,j), inclusive.
    std::vector<double> acc(n * m, inf);
    const auto at = [&](std::size_t i, std::size_t j) -> double& { return acc[i * m + j]; };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (!inside(i, j)) continue;
            const double c = cost(i, j);
            if (i == 0 && j == 0) {
                at(i, j) = c;
                continue;
            }
            double best = inf;
            if (i > 0 && j > 0) best = at(i - 1, j - 1);
            if (i > 0) best = std::min(best, at(i - 1, j));
            if (j > 0) best = std::min(best, at(i, j - 1));
            at(i, j) = best + c;
        }
    }

    DtwResult res;
    res.distance = at(n - 1, m - 1);
    std::size_t i = n - 1, j = m - 1;
    res.path.emplace_back(i, j);
    while (i > 0 || j > 0) {
        if (i == 0) {
            --j;
        } else if (j == 0) {
            --i;
        } else {
            const double diag = at(i - 1, j - 1), up = at(i - 1, j), left = at(i, j - 1);
            if (diag <= up && diag <= left) {
                --i;
                --j;
            } else if (up <= left) {
                --i;
            } else {
                --j;
            }
        }
        res.path.emplace_back(i, j);
    }
    std::reverse(res.path.begin(), res.path.end());
    return res;
}

std::vector<double> z_score(std::span<const double> x) {
    std::vector<double> out(x.begin(), x.end());
    if (x.empty()) return out;
    double sum = 0.0;
    for (double v : x) sum += v;
    const double mean = sum / static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(x.size()));
    for (double& v : out) v = sd > 0.0 ? (v - mean) / sd : 0.0;
    return out;
}

namespace {

struct Series {
    std::vector<double> measure;
    std::vector<double> pollutant;
};

Series complete_pairs(const CityDataset& city, MeasureKind m, PollutantKind p) {
    Series s;
    for (const auto& r : city.records()) {
        const auto mv = r.measure(m);
        const auto& pv = r.pollutant(p);
        if (mv && pv) {
            s.measure.push_back(*mv);
            s.pollutant.push_back(pv->mean);
        }
    }
    return s;
}

ScreenRow screen_cell(std::string scope, MeasureKind m, PollutantKind p, const Series& s, const ScreenOptions& opt) {
    ScreenRow row;
    row.scope = std::move(scope);
    row.measure = m;
    row.pollutant = p;
    row.n = s.measure.size();
    try {
        row.correlation = pearson(s.measure, s.pollutant);
    } catch (const Error& e) {
        row.error = std::string(to_string(e.kind())) + ": " + e.what();
    }
    try {
        if (opt.z_normalize) {
            row.dtw_distance = dtw(z_score(s.measure), z_score(s.pollutant), opt.dtw).distance;
        } else {
            row.dtw_distance = dtw(s.measure, s.pollutant, opt.dtw).distance;
        }
    } catch (const Error& e) {
        if (!row.error.empty()) row.error += "; ";
        row.error += std::string(to_string(e.kind())) + ": " + e.what();
    }
    return row;
}

}  // namespace

std::vector<ScreenRow> screen_all(std::span<const CityDataset> cities, PollutantKind pollutant,
                                  const ScreenOptions& options) {
    const bool usable = std::any_of(cities.begin(), cities.end(), [&](const CityDataset& c) {
        return std::count_if(c.records().begin(), c.records().end(),
                             [&](const PeriodRecord& r) { return r.pollutant(pollutant).has_value(); }) >= 3;
    });
    if (!usable) {
        throw Error(ErrorKind::InsufficientData,
                    "no city has 3 periods with " + std::string(to_string(pollutant)) + " present");
    }
    const std::size_t n_scopes = cities.size() + 1;
    std::vector<ScreenRow> rows(n_scopes * kMeasureCount);
    parallel_for(rows.size(), options.jobs, [&](std::size_t cell) {
        const std::size_t scope = cell / kMeasureCount;
        const MeasureKind m = kAllMeasures[cell % kMeasureCount];
        if (scope < cities.size()) {
            rows[cell] = screen_cell(cities[scope].city_name(), m, pollutant,
                                     complete_pairs(cities[scope], m, pollutant), options);
        } else {
            Series pooled;
            for (const auto& c : cities) {
                const auto s = complete_pairs(c, m, pollutant);
                pooled.measure.insert(pooled.measure.end(), s.measure.begin(), s.measure.end());
                pooled.pollutant.insert(pooled.pollutant.end(), s.pollutant.begin(), s.pollutant.end());
            }
            rows[cell] = screen_cell(std::string(kPooledScope), m, pollutant, pooled, options);
        }
    });
    return rows;
}

void write_screen_csv(std::ostream& out, std::span<const ScreenRow> rows) {
    csv::write_row(out, {"city", "measure", "pollutant", "r", "r2", "p", "band", "dtw_distance", "n"});
    for (const auto& row : rows) {
        const auto& c = row.correlation;
        csv::write_row(out, {row.scope, std::string(to_string(row.measure)), std::string(to_string(row.pollutant)),
                             c ? csv::format_double(c->r) : "", c ? csv::format_double(c->r_squared) : "",
                             c ? csv::format_double(c->p_value) : "", c ? std::string(to_string(c->band)) : "",
                             row.dtw_distance ? csv::format_double(*row.dtw_distance) : "",
                             std::to_string(row.n)});
    }
}

}  // namespace aqlock
