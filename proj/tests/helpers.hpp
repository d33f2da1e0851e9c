#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aqlock/dataset.hpp"
#include "aqlock/error.hpp"
#include "aqlock/rng.hpp"

/// Expects `expr` to throw aqlock::Error with the given kind.
#define CHECK_THROWS_KIND(expr, expected_kind)                                      \
    do {                                                                            \
        bool thrown_ = false;                                                       \
        try {                                                                       \
            (void)(expr);                                                           \
        } catch (const aqlock::Error& e_) {                                         \
            thrown_ = true;                                                         \
            CHECK_MESSAGE(e_.kind() == (expected_kind), "kind was ",                \
                          std::string(aqlock::to_string(e_.kind())), ": ", e_.what()); \
        }                                                                           \
        CHECK_MESSAGE(thrown_, "expected an aqlock::Error from " #expr);            \
    } while (false)

namespace testing {

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("aqlock_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline aqlock::Matrix random_matrix(aqlock::SplitMix64& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0,
                                    double hi = 1.0) {
    aqlock::Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(lo, hi);
    }
    return m;
}

/// A city of `periods` periods in 2020 with random measures and all four
/// pollutants present.
inline aqlock::CityDataset random_city(const std::string& name, int periods, std::uint64_t seed) {
    aqlock::SplitMix64 rng(seed);
    std::vector<aqlock::PeriodRecord> recs;
    for (int p = 0; p < periods; ++p) {
        aqlock::PeriodRecord r;
        r.period_index = p;
        r.start_date = aqlock::period_start(p, 2020);
        for (auto& m : r.measures) m = static_cast<double>(rng.below(5)) / 4.0;
        for (auto& s : r.pollutants) s = aqlock::PollutantStat{rng.uniform(1.0, 2.0), rng.uniform(0.1, 0.2)};
        recs.push_back(r);
    }
    return aqlock::CityDataset(name, 2020, std::move(recs));
}

}  // namespace testing
