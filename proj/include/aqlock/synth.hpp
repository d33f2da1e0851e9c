#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aqlock/dataset.hpp"
#include "aqlock/ingest.hpp"

namespace aqlock::synth {

enum class Profile {
    /// Each pollutant responds linearly, one period late, to one planted
    /// measure (see planted_couplings()).
    linear,
    /// Pollutant levels are independent white noise around a base level.
    null,
};

std::string_view to_string(Profile p);
std::optional<Profile> parse_profile(std::string_view name);

struct Coupling {
    PollutantKind pollutant;
    MeasureKind measure;
    double slope;
};

/// NO2 <- STAY_HOME_R (-0.9), CO <- C_WORKPLACE (-0.5),
/// O3 <- RE_GAT (+0.4), SO2 <- C_PUB_TRAN (-0.6).
const std::vector<Coupling>& planted_couplings();

struct Options {
    std::uint64_t seed = 0;
    Profile profile = Profile::linear;
    int year = 2020;
    /// Relative per-pixel multiplicative noise.
    double noise = 0.01;
    std::size_t grid_size = 12;
    double nodata_rate = 0.02;
    /// Probability that a period has no acquisition at all.
    double missing_period_rate = 0.0;
};

struct City {
    std::string name;
    GeoPoint center;
    PolicyTable policy;
    std::map<PollutantKind, std::vector<DatedGrid>> grids;
};

struct World {
    Options options;
    std::vector<City> cities;
};

/// Four cities, a full year of daily policy levels and one grid per
/// pollutant per period. Pure function of `options`.
World generate(const Options& options);

/// In-memory equivalent of writing the world and running ingestion.
std::vector<CityDataset> ingest(const World& world);

enum class Layout { grids, density, both };

/// Writes policy/<city>.csv, grids/<city>/ (sidecar + body per grid),
/// density/<city>.csv and a ready-to-run config.json pointing at the grids
/// (or at the density files for Layout::density).
void write(const World& world, const std::filesystem::path& dir, Layout layout = Layout::both);

}  // namespace aqlock::synth
