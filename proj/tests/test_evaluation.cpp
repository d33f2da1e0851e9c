#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "aqlock/evaluation.hpp"
#include "aqlock/synth.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace aqlock;

namespace {

const std::vector<CityDataset>& world() {
    static const auto cities = synth::ingest(synth::generate({}));
    return cities;
}

std::vector<ModelSpec> quick_specs() {
    std::vector<ModelSpec> specs;
    for (auto k : kAllModelKinds) {
        auto s = ModelSpec::defaults(k);
        if (k == ModelKind::dnn) s.params = models::MlpParams{{20, 10, 20}, 20, 16, 0.01};
        if (k == ModelKind::rfr) s.params = models::ForestParams{10, 5, 1, 0, true};
        specs.push_back(s);
    }
    return specs;
}

}  // namespace

TEST_CASE("chronological split keeps each city's tail for testing") {
    const std::vector<CityDataset> cities = {testing::random_city("a", 11, 1), testing::random_city("b", 21, 2)};
    const auto set = build_supervised(cities, PollutantKind::CO);
    const auto parts = split(set, {SplitMode::chronological, 0.2, 0});
    // ceil(10 * 0.2) = 2 and ceil(20 * 0.2) = 4.
    CHECK(parts.test.rows() == 6);
    CHECK(parts.train.rows() == 24);
    std::map<std::string, int> last_train, first_test;
    for (const auto& r : parts.train.row_provenance) last_train[r.city_name] = std::max(last_train[r.city_name], r.period_index);
    for (const auto& r : parts.test.row_provenance) {
        if (!first_test.count(r.city_name)) first_test[r.city_name] = r.period_index;
        first_test[r.city_name] = std::min(first_test[r.city_name], r.period_index);
    }
    for (const auto& [city, p] : last_train) CHECK(p < first_test.at(city));
    CHECK(first_test.at("a") == 8);
}

TEST_CASE("an exact fraction does not round up") {
    const std::vector<CityDataset> cities = {testing::random_city("a", 11, 1)};
    const auto set = build_supervised(cities, PollutantKind::CO);
    CHECK(split(set, {SplitMode::chronological, 0.7, 0}).test.rows() == 7);
    CHECK(split(set, {SplitMode::random, 0.3, 0}).test.rows() == 3);
}

TEST_CASE("random split is seeded and partitions the rows") {
    const std::vector<CityDataset> cities = {testing::random_city("a", 51, 3)};
    const auto set = build_supervised(cities, PollutantKind::O3);
    const auto a = split(set, {SplitMode::random, 0.25, 9});
    const auto b = split(set, {SplitMode::random, 0.25, 9});
    const auto c = split(set, {SplitMode::random, 0.25, 10});
    CHECK(a.test == b.test);
    CHECK_FALSE(a.test == c.test);
    CHECK(a.test.rows() == 13);
    CHECK(a.train.rows() + a.test.rows() == set.rows());
    std::set<int> seen;
    for (const auto& r : a.train.row_provenance) seen.insert(r.period_index);
    for (const auto& r : a.test.row_provenance) CHECK(seen.insert(r.period_index).second);
}

TEST_CASE("split preconditions") {
    const std::vector<CityDataset> cities = {testing::random_city("a", 5, 1)};
    const auto set = build_supervised(cities, PollutantKind::CO);
    CHECK_THROWS_KIND(split(set, {}), ErrorKind::InsufficientData);
    const std::vector<CityDataset> more = {testing::random_city("a", 20, 1)};
    const auto big = build_supervised(more, PollutantKind::CO);
    CHECK_THROWS_KIND(split(big, {SplitMode::random, 1.0, 0}), ErrorKind::Config);
    CHECK_THROWS_KIND(split(big, {SplitMode::random, 0.0, 0}), ErrorKind::Config);
}

TEST_CASE("rmse agrees with the two-pass oracle") {
    SplitMix64 rng(4);
    for (int t = 0; t < 50; ++t) {
        const auto n = 1 + static_cast<Eigen::Index>(rng.below(100));
        const Matrix p = testing::random_matrix(rng, n, 2, -5, 5), y = testing::random_matrix(rng, n, 2, -5, 5);
        const auto r = rmse(p, y);
        CHECK(r.mean == doctest::Approx(oracle::rmse_column(p, y, 0)).epsilon(1e-12));
        CHECK(r.std == doctest::Approx(oracle::rmse_column(p, y, 1)).epsilon(1e-12));
        CHECK(r.joint == doctest::Approx(std::sqrt((r.mean * r.mean + r.std * r.std) / 2)).epsilon(1e-15));
    }
    CHECK(rmse(Matrix::Ones(3, 2), Matrix::Ones(3, 2)).joint == 0.0);
    CHECK_THROWS_KIND(rmse(Matrix::Ones(3, 2), Matrix::Ones(2, 2)), ErrorKind::Shape);
}

TEST_CASE("benchmark produces one ordered row per cell") {
    const auto specs = quick_specs();
    BenchmarkOptions opt;
    const auto result = run_benchmark(world(), kAllPollutants, specs, opt);
    REQUIRE(result.report.rows.size() == 36);
    CHECK_FALSE(result.report.any_failure());
    CHECK(result.models.size() == 36);
    for (std::size_t i = 0; i < 36; ++i) {
        const auto& r = result.report.rows[i];
        CHECK(r.pollutant == kAllPollutants[i / 9]);
        CHECK(r.kind == kAllModelKinds[i % 9]);
        CHECK(r.scope == "pooled");
        CHECK(r.n_train + r.n_test == 4 * 182);
        REQUIRE(r.relative_error.has_value());
        CHECK(*r.relative_error < 0.15);
    }
    for (const auto* r : result.report.for_pollutant(PollutantKind::NO2)) {
        if (r->kind == ModelKind::linreg) CHECK(*r->relative_error < 0.01);
    }
}

TEST_CASE("benchmark output does not depend on the thread count") {
    const auto specs = quick_specs();
    BenchmarkOptions one, many;
    many.jobs = 4;
    std::ostringstream a, b;
    write_report_csv(a, run_benchmark(world(), kAllPollutants, specs, one).report);
    write_report_csv(b, run_benchmark(world(), kAllPollutants, specs, many).report);
    CHECK(a.str() == b.str());
}

TEST_CASE("per-city pooling and scaling") {
    const std::vector<ModelSpec> specs = {ModelSpec::defaults(ModelKind::linreg), ModelSpec::defaults(ModelKind::knn)};
    BenchmarkOptions opt;
    opt.pooling = PoolingMode::per_city;
    opt.scaling = ScalingMode::z_score;
    const std::vector<PollutantKind> pols = {PollutantKind::CO};
    const auto result = run_benchmark(world(), pols, specs, opt);
    REQUIRE(result.report.rows.size() == 8);
    CHECK(result.report.rows[0].scope == "athens");
    CHECK(result.report.rows[0].n_test == 37);
    CHECK_FALSE(result.report.any_failure());
}

TEST_CASE("a failing cell is recorded and the run continues") {
    auto recs = world()[0].records();
    for (auto& r : recs) r.pollutants[index_of(PollutantKind::SO2)].reset();
    const std::vector<CityDataset> cities = {CityDataset("solo", 2020, recs)};
    const std::vector<ModelSpec> specs = {ModelSpec::defaults(ModelKind::linreg)};
    const std::vector<PollutantKind> pols = {PollutantKind::SO2, PollutantKind::CO};
    const auto result = run_benchmark(cities, pols, specs, {});
    REQUIRE(result.report.rows.size() == 2);
    CHECK(result.report.any_failure());
    CHECK(result.report.rows[0].pollutant == PollutantKind::CO);
    CHECK(result.report.rows[0].rmse.has_value());
    CHECK_FALSE(result.report.rows[1].rmse.has_value());
    CHECK(result.report.rows[1].error.find("empty-dataset") != std::string::npos);
    std::ostringstream csv;
    write_report_csv(csv, result.report);
    CHECK(csv.str().find("SO2,linreg,pooled,,,,,0,0") != std::string::npos);
    const auto j = report_to_json(result.report, {{"seed", 1}});
    CHECK(j["rows"][1]["rmse_mean"].is_null());
    CHECK(j["config"]["seed"] == 1);
}
