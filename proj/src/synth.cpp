#include "aqlock/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "aqlock/error.hpp"
#include "aqlock/rng.hpp"

namespace aqlock::synth {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Profile p) { return p == Profile::linear ? "linear" : "null"; }

std::optional<Profile> parse_profile(std::string_view name) {
    if (name == "linear") return Profile::linear;
    if (name == "null") return Profile::null;
    return std::nullopt;
}

const std::vector<Coupling>& planted_couplings() {
    static const std::vector<Coupling> couplings = {
        {PollutantKind::CO, MeasureKind::C_WORKPLACE, -0.5},
        {PollutantKind::O3, MeasureKind::RE_GAT, 0.4},
        {PollutantKind::NO2, MeasureKind::STAY_HOME_R, -0.9},
        {PollutantKind::SO2, MeasureKind::C_PUB_TRAN, -0.6},
    };
    return couplings;
}

namespace {

constexpr double kBoxHalfWidth = 0.25;
constexpr int kMaxLevel = 4;
constexpr double kMeanRegimeDays = 16.0;
constexpr double kNullRelativeSpread = 0.15;
// Spatial spread relative to the city-wide level.
constexpr double kPatternAmplitude = 0.12;
// Largest relative swing a coupling with |slope| = 1 produces between no
// restriction and full restriction.
constexpr double kModulationDepth = 0.5;

struct CitySeed {
    const char* name;
    GeoPoint center;
};

constexpr std::array<CitySeed, 4> kCities = {{
    {"athens", {23.7275, 37.9838}},
    {"gladsaxe", {12.4893, 55.7320}},
    {"lodz", {19.4560, 51.7592}},
    {"rome", {12.4964, 41.9028}},
}};

// Column-integrated densities in mol/m^2, roughly the magnitudes seen over
// European cities.
double base_level(PollutantKind p) {
    switch (p) {
        case PollutantKind::CO: return 0.03;
        case PollutantKind::O3: return 0.12;
        case PollutantKind::NO2: return 5e-5;
        case PollutantKind::SO2: return 1e-4;
    }
    return 1.0;
}

const Coupling& coupling_for(PollutantKind p) {
    for (const auto& c : planted_couplings()) {
        if (c.pollutant == p) return c;
    }
    throw Error(ErrorKind::Config, "no coupling for pollutant");
}

// Piecewise-constant daily ordinals: level 0 for the first month or two,
// then regimes of geometric length with a fresh level each time.
std::vector<int> daily_levels(SplitMix64& rng, int days) {
    std::vector<int> levels(static_cast<std::size_t>(days), 0);
    int day = 30 + static_cast<int>(rng.below(31));
    int level = 0;
    while (day < days) {
        int next = static_cast<int>(rng.below(kMaxLevel));
        if (next >= level) ++next;
        level = next;
        int length = 1;
        while (rng.uniform() > 1.0 / kMeanRegimeDays) ++length;
        for (int d = day; d < std::min(days, day + length); ++d) levels[static_cast<std::size_t>(d)] = level;
        day += length;
    }
    return levels;
}

// Fixed spatial pattern with exactly zero mean and unit population std.
std::vector<double> spatial_pattern(SplitMix64& rng, std::size_t n) {
    std::vector<double> e(n);
    for (auto& v : e) v = rng.normal();
    double mean = 0.0;
    for (double v : e) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (auto& v : e) {
        v -= mean;
        ss += v * v;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    for (auto& v : e) v /= sd;
    return e;
}

}  // namespace

World generate(const Options& options) {
    if (options.grid_size < 2) throw Error(ErrorKind::Config, "grid_size must be at least 2");
    if (!(options.noise >= 0.0) || !(options.nodata_rate >= 0.0 && options.nodata_rate < 0.5) ||
        !(options.missing_period_rate >= 0.0 && options.missing_period_rate < 1.0)) {
        throw Error(ErrorKind::Config, "synth noise/nodata/missing rates out of range");
    }
    const int year = options.year;
    const int days = days_in_year(year);
    const int periods = periods_in_year(year);
    const Date jan1(year, 1, 1);
    const std::size_t side = options.grid_size;
    const double pixel_size_m = 2.0 * kBoxHalfWidth * 111320.0 / static_cast<double>(side);

    SplitMix64 root(options.seed);
    World world{options, {}};
    for (const auto& seed : kCities) {
        SplitMix64 rng = root.spawn();
        City city{seed.name, seed.center, {}, {}};

        std::array<std::vector<int>, kMeasureCount> levels;
        for (auto& l : levels) l = daily_levels(rng, days);
        for (int d = 0; d < days; ++d) {
            PolicyRow row{jan1.plus_days(d), {}};
            for (std::size_t k = 0; k < kMeasureCount; ++k) row.levels[k] = levels[k][static_cast<std::size_t>(d)];
            city.policy.rows.push_back(row);
        }
        city.policy.source = std::string(seed.name) + " (synthetic)";

        // Period means of the normalized measures, as ingestion will see them.
        std::array<std::vector<double>, kMeasureCount> period_measure;
        for (std::size_t k = 0; k < kMeasureCount; ++k) {
            period_measure[k].assign(static_cast<std::size_t>(periods), 0.0);
            for (int p = 0; p < periods; ++p) {
                const int first = 2 * p;
                const int last = std::min(days - 1, first + 1);
                double sum = 0.0;
                for (int d = first; d <= last; ++d) sum += levels[k][static_cast<std::size_t>(d)];
                period_measure[k][static_cast<std::size_t>(p)] =
                    sum / static_cast<double>(last - first + 1) / kMaxLevel;
            }
        }

        const BoundingBox bbox{seed.center.longitude - kBoxHalfWidth, seed.center.latitude - kBoxHalfWidth,
                               seed.center.longitude + kBoxHalfWidth, seed.center.latitude + kBoxHalfWidth};
        for (auto pol : kAllPollutants) {
            SplitMix64 prng = rng.spawn();
            const std::vector<double> pattern = spatial_pattern(prng, side * side);
            const double base = base_level(pol);
            const Coupling& c = coupling_for(pol);
            auto& grids = city.grids[pol];
            for (int p = 0; p < periods; ++p) {
                double level;
                if (options.profile == Profile::linear) {
                    // Responds to the measure of the previous period.
                    const double m = p > 0 ? period_measure[index_of(c.measure)][static_cast<std::size_t>(p - 1)] : 0.0;
                    level = base * (1.0 + kModulationDepth * c.slope * m);
                } else {
                    level = base * (1.0 + kNullRelativeSpread * prng.normal());
                }
                const double amplitude = kPatternAmplitude * (1.0 + 0.05 * prng.normal());
                const Date start = period_start(p, year);
                const int span = std::min(2, days - 2 * p);
                const Date date = start.plus_days(static_cast<int>(prng.below(static_cast<std::uint64_t>(span))));
                const bool skip = options.missing_period_rate > 0.0 && prng.uniform() < options.missing_period_rate;
                std::vector<double> values(side * side);
                for (std::size_t i = 0; i < values.size(); ++i) {
                    const double v = level * (1.0 + amplitude * pattern[i]) * (1.0 + options.noise * prng.normal());
                    values[i] = prng.uniform() < options.nodata_rate ? -9999.0 : v;
                }
                if (skip) continue;
                grids.push_back({date, DensityGrid(side, side, std::move(values), -9999.0, pixel_size_m, bbox,
                                                   city.name + "/" + std::string(to_string(pol)) + "/" + date.iso())});
            }
        }
        world.cities.push_back(std::move(city));
    }
    return world;
}

std::vector<CityDataset> ingest(const World& world) {
    const int year = world.options.year;
    std::vector<CityDataset> out;
    for (const auto& city : world.cities) {
        const auto measures = measure_periods(city.policy, year, kDefaultMaxima);
        std::map<PollutantKind, std::vector<PeriodStat>> pollutants;
        for (const auto& [pol, grids] : city.grids) pollutants[pol] = aggregate_periods(grids, year);
        out.push_back(assemble_city(city.name, year, measures, pollutants, city.center, kBoxHalfWidth));
    }
    return out;
}

void write(const World& world, const fs::path& dir, Layout layout) {
    const PolicyColumns columns = PolicyColumns::tracker_defaults();
    json cities = json::array();
    for (const auto& city : world.cities) {
        const fs::path policy = fs::path("policy") / (city.name + ".csv");
        fs::create_directories(dir / "policy");
        {
            std::ofstream out(dir / policy, std::ios::binary);
            write_policy_csv(out, city.policy, columns);
            if (!out) throw Error(ErrorKind::Io, "cannot write " + (dir / policy).string());
        }
        json entry = {{"name", city.name},
                      {"center", {city.center.longitude, city.center.latitude}},
                      {"box_half_width", kBoxHalfWidth},
                      {"policy_csv", policy.generic_string()}};
        const fs::path grid_dir = fs::path("grids") / city.name;
        const fs::path density = fs::path("density") / (city.name + ".csv");
        if (layout != Layout::density) {
            fs::create_directories(dir / grid_dir);
            for (const auto& [pol, grids] : city.grids) {
                for (const auto& g : grids) {
                    const std::string stem = std::string(to_string(pol)) + "_" + g.date.iso();
                    write_grid(dir / grid_dir / (stem + ".json"), pol, g);
                }
            }
            entry["grid_dir"] = grid_dir.generic_string();
        }
        if (layout != Layout::grids) {
            std::map<PollutantKind, std::vector<DatedStat>> stats;
            for (const auto& [pol, grids] : city.grids) {
                for (const auto& g : grids) {
                    const GridStats s = grid_stats(g.grid);
                    stats[pol].push_back({g.date, {s.mean, s.std}});
                }
            }
            fs::create_directories(dir / "density");
            std::ofstream out(dir / density, std::ios::binary);
            write_density_csv(out, stats);
            if (!out) throw Error(ErrorKind::Io, "cannot write " + (dir / density).string());
            if (layout == Layout::density) entry["density_csv"] = density.generic_string();
        }
        cities.push_back(std::move(entry));
    }
    const json config = {{"year", world.options.year}, {"cities", cities}, {"seed", world.options.seed}};
    std::ofstream out(dir / "config.json", std::ios::binary);
    out << config.dump(2) << '\n';
    if (!out) throw Error(ErrorKind::Io, "cannot write " + (dir / "config.json").string());
}

}  // namespace aqlock::synth
