#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "aqlock/similarity.hpp"
#include "aqlock/synth.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace aqlock;

namespace {

std::vector<double> series(SplitMix64& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    return v;
}

bool valid_path(const DtwResult& r, std::size_t n, std::size_t m) {
    if (r.path.empty() || r.path.front() != std::make_pair<std::size_t, std::size_t>(0, 0)) return false;
    if (r.path.back() != std::make_pair(n - 1, m - 1)) return false;
    for (std::size_t k = 1; k < r.path.size(); ++k) {
        const auto [i0, j0] = r.path[k - 1];
        const auto [i1, j1] = r.path[k];
        if (i1 < i0 || j1 < j0 || i1 - i0 > 1 || j1 - j0 > 1 || (i1 == i0 && j1 == j0)) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("pearson agrees with the extended-precision oracle") {
    SplitMix64 rng(1);
    for (int t = 0; t < 200; ++t) {
        const auto n = 3 + static_cast<std::size_t>(rng.below(60));
        const auto x = series(rng, n);
        auto y = series(rng, n);
        for (std::size_t i = 0; i < n; ++i) y[i] += 0.7 * x[i];
        const auto res = pearson(x, y);
        CHECK(std::fabs(res.r - static_cast<double>(oracle::pearson_r(x, y))) < 1e-12);
        CHECK(std::fabs(res.p_value - oracle::t_test_p(res.r, n)) < 1e-6);
        CHECK(res.r_squared == res.r * res.r);
        CHECK(res.n == n);
    }
}

TEST_CASE("pearson edge cases") {
    const std::vector<double> x = {1, 2, 3, 4}, flat = {2, 2, 2, 2}, y = {2, 4, 6, 8}, neg = {8, 6, 4, 2};
    CHECK(pearson(x, y).r == doctest::Approx(1.0));
    CHECK(pearson(x, y).p_value == doctest::Approx(0.0));
    CHECK(pearson(x, neg).r == doctest::Approx(-1.0));
    CHECK_THROWS_KIND(pearson(x, flat), ErrorKind::UndefinedCorrelation);
    CHECK_THROWS_KIND(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), ErrorKind::Shape);
    CHECK_THROWS_KIND(pearson(x, std::vector<double>{1, 2, 3}), ErrorKind::Shape);
    CHECK(two_tailed_p(0.0, 10) == doctest::Approx(1.0));
}

TEST_CASE("correlation bands are half-open") {
    CHECK(band_of(0.0) == Band::None);
    CHECK(band_of(0.0999) == Band::None);
    CHECK(band_of(0.10) == Band::Weak);
    CHECK(band_of(0.3999) == Band::Weak);
    CHECK(band_of(0.40) == Band::Moderate);
    CHECK(band_of(0.6999) == Band::Moderate);
    CHECK(band_of(0.70) == Band::Strong);
    CHECK(band_of(0.8999) == Band::Strong);
    CHECK(band_of(0.90) == Band::VeryStrong);
    CHECK(band_of(1.0) == Band::VeryStrong);
    CHECK_THROWS_KIND(band_of(1.01), ErrorKind::Domain);
    CHECK_THROWS_KIND(band_of(-0.1), ErrorKind::Domain);
}

TEST_CASE("DTW matches exhaustive path enumeration") {
    SplitMix64 rng(2);
    for (int t = 0; t < 150; ++t) {
        const auto n = 1 + static_cast<std::size_t>(rng.below(6));
        const auto m = 1 + static_cast<std::size_t>(rng.below(6));
        const auto a = series(rng, n), b = series(rng, m);
        const bool squared = t % 2 == 1;
        const auto res = dtw(a, b, {squared ? DtwCost::squared : DtwCost::absolute, std::nullopt});
        CHECK(res.distance == oracle::dtw_exhaustive(a, b, squared));
        CHECK(valid_path(res, n, m));
    }
}

TEST_CASE("DTW path cost equals the distance and ties prefer the diagonal") {
    const std::vector<double> a = {0, 0, 0}, b = {0, 0, 0};
    const auto res = dtw(a, b);
    CHECK(res.distance == 0.0);
    CHECK(res.path == std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 1}, {2, 2}});

    SplitMix64 rng(3);
    const auto x = series(rng, 30), y = series(rng, 25);
    const auto r = dtw(x, y);
    double sum = 0.0;
    for (auto [i, j] : r.path) sum += std::fabs(x[i] - y[j]);
    CHECK(sum == doctest::Approx(r.distance).epsilon(1e-12));
}

TEST_CASE("DTW window") {
    const std::vector<double> a = {0, 1, 2, 3}, b = {1, 2, 3, 4};
    // Zero window forces the diagonal.
    CHECK(dtw(a, b, {DtwCost::absolute, 0}).distance == 4.0);
    CHECK(dtw(a, b).distance == 2.0);
    // The window widens to the length difference so a path always exists.
    const std::vector<double> c = {0, 1};
    CHECK(std::isfinite(dtw(a, c, {DtwCost::absolute, 0}).distance));
    CHECK_THROWS_KIND(dtw(std::vector<double>{}, b), ErrorKind::Shape);
}

TEST_CASE("z-score") {
    const auto z = z_score(std::vector<double>{1, 2, 3});
    CHECK(z[0] == doctest::Approx(-1.2247448714));
    CHECK(z[1] == doctest::Approx(0.0));
    CHECK(z[2] == doctest::Approx(1.2247448714));
    CHECK(z_score(std::vector<double>{5, 5}) == std::vector<double>{0, 0});
}

TEST_CASE("screening recovers the planted coupling") {
    const auto cities = synth::ingest(synth::generate({}));
    for (const auto& c : synth::planted_couplings()) {
        const auto rows = screen_all(cities, c.pollutant);
        CHECK(rows.size() == (cities.size() + 1) * kMeasureCount);
        const ScreenRow* best = nullptr;
        for (const auto& r : rows) {
            if (r.scope != kPooledScope) continue;
            REQUIRE(r.correlation.has_value());
            if (!best || r.correlation->r_squared > best->correlation->r_squared) best = &r;
        }
        REQUIRE(best != nullptr);
        CHECK(best->measure == c.measure);
        CHECK((best->correlation->r > 0) == (c.slope > 0));
    }
}

TEST_CASE("null-profile p-values are close to uniform") {
    // One-sample Kolmogorov statistic per pollutant over 200 worlds, checked
    // against the 1% critical value 1.63 / sqrt(n).
    std::map<PollutantKind, std::vector<double>> pvalues;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        synth::Options o;
        o.seed = seed;
        o.profile = synth::Profile::null;
        const auto cities = synth::ingest(synth::generate(o));
        for (const auto& c : synth::planted_couplings()) {
            for (const auto& r : screen_all(cities, c.pollutant)) {
                if (r.scope == kPooledScope && r.measure == c.measure) {
                    REQUIRE(r.correlation.has_value());
                    pvalues[c.pollutant].push_back(r.correlation->p_value);
                }
            }
        }
    }
    for (auto& [pollutant, p] : pvalues) {
        REQUIRE(p.size() == 200);
        std::sort(p.begin(), p.end());
        double d = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double n = static_cast<double>(p.size());
            d = std::max({d, (static_cast<double>(i) + 1) / n - p[i], p[i] - static_cast<double>(i) / n});
        }
        INFO(to_string(pollutant));
        CHECK(d < 1.63 / std::sqrt(200.0));
    }
}

TEST_CASE("screening is independent of the thread count") {
    const auto cities = synth::ingest(synth::generate({}));
    ScreenOptions one, many;
    many.jobs = 4;
    std::ostringstream a, b;
    write_screen_csv(a, screen_all(cities, PollutantKind::NO2, one));
    write_screen_csv(b, screen_all(cities, PollutantKind::NO2, many));
    CHECK(a.str() == b.str());
}

TEST_CASE("screening needs at least one usable city") {
    const std::vector<CityDataset> tiny = {testing::random_city("t", 2, 1)};
    CHECK_THROWS_KIND(screen_all(tiny, PollutantKind::CO), ErrorKind::InsufficientData);
}

TEST_CASE("a constant measure leaves its correlation missing, not the row") {
    auto recs = testing::random_city("c", 20, 4).records();
    for (auto& r : recs) r.measures[0] = 0.0;
    const std::vector<CityDataset> cities = {CityDataset("c", 2020, recs)};
    const auto rows = screen_all(cities, PollutantKind::CO);
    CHECK(rows.size() == 2 * kMeasureCount);
    CHECK_FALSE(rows[0].correlation.has_value());
    CHECK(rows[0].dtw_distance.has_value());
    CHECK(rows[0].error.find("undefined-correlation") != std::string::npos);
    CHECK(rows[1].correlation.has_value());
}
