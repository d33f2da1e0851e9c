#include <doctest.h>

#include <sstream>

#include "aqlock/dataset.hpp"
#include "helpers.hpp"

using namespace aqlock;

namespace {

PeriodRecord record(int p, double measure, std::optional<PollutantStat> no2) {
    PeriodRecord r;
    r.period_index = p;
    r.start_date = period_start(p, 2020);
    for (auto& m : r.measures) m = measure;
    r.pollutants[index_of(PollutantKind::NO2)] = no2;
    return r;
}

}  // namespace

TEST_CASE("measure normalization") {
    CHECK(normalize_measure(0) == 0.0);
    CHECK(normalize_measure(2) == 0.5);
    CHECK(normalize_measure(4) == 1.0);
    CHECK(normalize_measure(3, 3) == 1.0);
    CHECK_THROWS_KIND(normalize_measure(5), ErrorKind::OrdinalOutOfRange);
    CHECK_THROWS_KIND(normalize_measure(-1), ErrorKind::OrdinalOutOfRange);
}

TEST_CASE("names parse back to their enumerators") {
    for (auto m : kAllMeasures) CHECK(parse_measure(to_string(m)) == m);
    for (auto p : kAllPollutants) CHECK(parse_pollutant(to_string(p)) == p);
    CHECK_FALSE(parse_measure("SCHOOL").has_value());
    CHECK(input_column_names().size() == kInputDim);
    CHECK(input_column_names()[6] == "STAY_HOME_R");
}

TEST_CASE("daily values average into periods") {
    const std::vector<DailyValue> daily = {
        {Date(2020, 1, 1), 1.0}, {Date(2020, 1, 2), 3.0}, {Date(2020, 1, 6), 5.0}};
    const auto periods = resample_to_periods(daily, 2020);
    REQUIRE(periods.size() == 183);
    CHECK(periods[0].value == 2.0);
    CHECK_FALSE(periods[1].value.has_value());
    CHECK(periods[2].value == 5.0);
    for (int p = 0; p < 183; ++p) CHECK(periods[static_cast<std::size_t>(p)].period_index == p);

    const std::vector<DailyValue> dup = {{Date(2020, 1, 1), 1.0}, {Date(2020, 1, 1), 2.0}};
    CHECK_THROWS_KIND(resample_to_periods(dup, 2020), ErrorKind::AmbiguousInput);
    const std::vector<DailyValue> outside = {{Date(2021, 1, 1), 1.0}};
    CHECK_THROWS_KIND(resample_to_periods(outside, 2020), ErrorKind::Domain);
}

TEST_CASE("city dataset invariants") {
    CHECK_NOTHROW(CityDataset("a", 2020, {record(0, 0.5, {}), record(1, 0.5, {})}));
    CHECK_THROWS_KIND(CityDataset("a", 2020, {record(0, 0.5, {}), record(2, 0.5, {})}), ErrorKind::Domain);
    CHECK_THROWS_KIND(CityDataset("a", 2020, {record(0, 1.5, {})}), ErrorKind::Domain);
    CHECK_THROWS_KIND(CityDataset("a", 2020, {record(0, 0.5, PollutantStat{1.0, -0.1})}), ErrorKind::Domain);
    auto shifted = record(0, 0.5, {});
    shifted.start_date = Date(2020, 1, 2);
    CHECK_THROWS_KIND(CityDataset("a", 2020, {shifted}), ErrorKind::Domain);
}

TEST_CASE("supervised pairs skip gaps and never cross cities") {
    const PollutantStat s{1.0, 0.1};
    // Period 2 lacks NO2, so only (0,1) and (3,4) qualify.
    const CityDataset a("a", 2020,
                        {record(0, 0.25, PollutantStat{1.0, 0.1}), record(1, 0.5, PollutantStat{2.0, 0.2}),
                         record(2, 0.5, std::nullopt), record(3, 0.75, PollutantStat{3.0, 0.3}),
                         record(4, 1.0, PollutantStat{4.0, 0.4})});
    const CityDataset b("b", 2020, {record(0, 0.0, s), record(1, 0.0, s)});
    const std::vector<CityDataset> cities = {a, b};
    const auto set = build_supervised(cities, PollutantKind::NO2);
    REQUIRE(set.rows() == 3);
    CHECK(set.row_provenance[0] == RowProvenance{"a", 0});
    CHECK(set.row_provenance[1] == RowProvenance{"a", 3});
    CHECK(set.row_provenance[2] == RowProvenance{"b", 0});
    CHECK(set.inputs(0, 0) == 0.25);
    CHECK(set.inputs(0, 8) == 1.0);
    CHECK(set.inputs(0, 9) == 0.1);
    CHECK(set.targets(0, 0) == 2.0);
    CHECK(set.targets(0, 1) == 0.2);
    CHECK(set.targets(1, 0) == 4.0);
    CHECK_THROWS_KIND(build_supervised(cities, PollutantKind::CO), ErrorKind::EmptyDataset);
}

TEST_CASE("a full random city gives N-1 rows per pollutant") {
    const std::vector<CityDataset> cities = {testing::random_city("x", 183, 1)};
    for (auto p : kAllPollutants) CHECK(build_supervised(cities, p).rows() == 182);
}

TEST_CASE("scaling maps and inverts") {
    const std::vector<CityDataset> cities = {testing::random_city("x", 60, 3), testing::random_city("y", 60, 4)};
    const auto set = build_supervised(cities, PollutantKind::O3);
    SUBCASE("min-max lands in [0,1]") {
        const auto spec = fit_scaling(set, ScalingMode::min_max);
        const auto scaled = apply_scaling(set, spec);
        CHECK(scaled.inputs.minCoeff() == doctest::Approx(0.0));
        CHECK(scaled.inputs.maxCoeff() == doctest::Approx(1.0));
        const auto back = invert_scaling(scaled, spec);
        CHECK((back.inputs - set.inputs).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((back.targets - set.targets).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("z-score has zero mean and unit population std") {
        const auto spec = fit_scaling(set, ScalingMode::z_score);
        const auto scaled = apply_scaling(set, spec);
        for (Eigen::Index c = 0; c < scaled.inputs.cols(); ++c) {
            const auto col = scaled.inputs.col(c);
            CHECK(std::fabs(col.mean()) < 1e-12);
            CHECK((col.array() - col.mean()).square().mean() == doctest::Approx(1.0));
        }
    }
    SUBCASE("constant columns") {
        Matrix m = Matrix::Ones(5, 2);
        m(0, 1) = 3.0;
        CHECK_THROWS_KIND(fit_columns(m, ScalingMode::min_max, DegeneratePolicy::error), ErrorKind::DegenerateColumn);
        const auto cols = fit_columns(m, ScalingMode::min_max, DegeneratePolicy::unit_scale);
        CHECK(cols.scale[0] == 1.0);
        CHECK(apply_columns(cols, m)(0, 0) == 0.0);
    }
}

TEST_CASE("city and supervised CSV round trips") {
    const auto city = testing::random_city("rt", 20, 9);
    std::stringstream buf;
    write_city_csv(city, buf);
    CHECK(read_city_csv(buf, "rt") == city);

    const std::vector<CityDataset> cities = {city};
    const auto set = build_supervised(cities, PollutantKind::SO2);
    std::stringstream sbuf;
    write_supervised_csv(set, sbuf);
    CHECK(read_supervised_csv(sbuf) == set);
}

TEST_CASE("missing values survive the city CSV") {
    auto recs = testing::random_city("gap", 4, 5).records();
    recs[1].measures[3].reset();
    recs[2].pollutants[0].reset();
    const CityDataset city("gap", 2020, recs);
    std::stringstream buf;
    write_city_csv(city, buf);
    const auto back = read_city_csv(buf, "gap");
    CHECK(back == city);
    CHECK_FALSE(back.records()[1].measures_complete());
}
