#include "aqlock/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "aqlock/csv.hpp"
#include "aqlock/error.hpp"

namespace aqlock {

namespace fs = std::filesystem;
using nlohmann::json;

DensityGrid::DensityGrid(std::size_t width, std::size_t height, std::vector<double> values, double nodata,
                         double pixel_size_m, BoundingBox bbox, std::string label)
    : width_(width),
      height_(height),
      values_(std::move(values)),
      nodata_(nodata),
      pixel_size_m_(pixel_size_m),
      bbox_(bbox),
      label_(std::move(label)) {
    if (values_.size() != width_ * height_) {
        throw Error(ErrorKind::Shape, "grid has " + std::to_string(values_.size()) + " values, expected " +
                                          std::to_string(width_) + "x" + std::to_string(height_));
    }
    for (double v : values_) {
        if (!is_nodata(v) && !std::isfinite(v)) throw Error(ErrorKind::Domain, "grid contains a non-finite value");
    }
}

GridStats grid_stats(const DensityGrid& grid) {
    std::size_t n = 0;
    double sum = 0.0;
    for (double v : grid.values()) {
        if (grid.is_nodata(v)) continue;
        sum += v;
        ++n;
    }
    if (n == 0) throw Error(ErrorKind::NoValidPixels, "grid " + grid.label() + " has no valid pixels");
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : grid.values()) {
        if (!grid.is_nodata(v)) ss += (v - mean) * (v - mean);
    }
    return {mean, std::sqrt(ss / static_cast<double>(n)),
            static_cast<double>(n) / static_cast<double>(grid.values().size())};
}

namespace {

/// Indices of `dates` sorted by date, ties kept in input order.
template <class T, class DateOf>
std::vector<std::size_t> date_order(std::span<const T> items, DateOf date_of) {
    std::vector<std::size_t> idx(items.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return date_of(items[a]) < date_of(items[b]); });
    return idx;
}

std::vector<PeriodStat> empty_periods(int year) {
    std::vector<PeriodStat> out(static_cast<std::size_t>(periods_in_year(year)));
    for (std::size_t p = 0; p < out.size(); ++p) out[p].period_index = static_cast<int>(p);
    return out;
}

std::vector<PeriodStat> average_stats(std::span<const DatedStat> stats, int year) {
    auto out = empty_periods(year);
    std::vector<double> mean_sum(out.size(), 0.0), std_sum(out.size(), 0.0);
    std::vector<int> count(out.size(), 0);
    for (std::size_t i : date_order(stats, [](const DatedStat& s) { return s.date; })) {
        const auto p = static_cast<std::size_t>(period_of(stats[i].date, year));
        mean_sum[p] += stats[i].stat.mean;
        std_sum[p] += stats[i].stat.std;
        ++count[p];
    }
    for (std::size_t p = 0; p < out.size(); ++p) {
        if (count[p] > 0) out[p].stat = PollutantStat{mean_sum[p] / count[p], std_sum[p] / count[p]};
    }
    return out;
}

}  // namespace

std::vector<PeriodStat> aggregate_stats(std::span<const DatedStat> stats, int year) {
    return average_stats(stats, year);
}

std::vector<PeriodStat> aggregate_periods(std::span<const DatedGrid> grids, int year, AggregationMode mode) {
    if (mode == AggregationMode::per_grid) {
        std::vector<DatedStat> stats;
        stats.reserve(grids.size());
        for (const auto& g : grids) {
            const auto s = grid_stats(g.grid);
            stats.push_back({g.date, {s.mean, s.std}});
        }
        return average_stats(stats, year);
    }
    auto out = empty_periods(year);
    std::vector<std::vector<const DatedGrid*>> members(out.size());
    for (std::size_t i : date_order(grids, [](const DatedGrid& g) { return g.date; })) {
        members[static_cast<std::size_t>(period_of(grids[i].date, year))].push_back(&grids[i]);
    }
    for (std::size_t p = 0; p < out.size(); ++p) {
        if (members[p].empty()) continue;
        std::size_t n = 0;
        double sum = 0.0;
        for (const auto* g : members[p]) {
            for (double v : g->grid.values()) {
                if (!g->grid.is_nodata(v)) {
                    sum += v;
                    ++n;
                }
            }
        }
        if (n == 0) throw Error(ErrorKind::NoValidPixels, "period " + std::to_string(p) + " has no valid pixels");
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (const auto* g : members[p]) {
            for (double v : g->grid.values()) {
                if (!g->grid.is_nodata(v)) ss += (v - mean) * (v - mean);
            }
        }
        out[p].stat = PollutantStat{mean, std::sqrt(ss / static_cast<double>(n))};
    }
    return out;
}

// Grid files -------------------------------------------------------------------

GridFile read_grid(const fs::path& sidecar) {
    std::ifstream in(sidecar);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + sidecar.string());
    json meta;
    try {
        in >> meta;
        const auto pollutant_name = meta.at("pollutant").get<std::string>();
        const auto pollutant = parse_pollutant(pollutant_name);
        if (!pollutant) throw Error(ErrorKind::Parse, "unknown pollutant '" + pollutant_name + "'");
        const auto width = meta.at("width").get<std::size_t>();
        const auto height = meta.at("height").get<std::size_t>();
        const auto nodata = meta.value("nodata", -9999.0);
        const auto pixel = meta.value("pixel_size_m", 50.0);
        BoundingBox bbox;
        if (meta.contains("bbox")) {
            const auto b = meta.at("bbox").get<std::vector<double>>();
            if (b.size() != 4) throw Error(ErrorKind::Parse, "bbox must have 4 entries");
            bbox = {b[0], b[1], b[2], b[3]};
        }
        const auto date = Date::parse(meta.at("timestamp").get<std::string>());
        const fs::path body = sidecar.parent_path() / meta.at("values").get<std::string>();
        std::ifstream bin(body);
        if (!bin) throw Error(ErrorKind::Io, "cannot open grid body " + body.string());
        std::vector<double> values;
        values.reserve(width * height);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(bin, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            for (const auto& field : csv::split_line(line)) {
                const auto v = csv::parse_double(field);
                if (!v) {
                    throw Error(ErrorKind::Parse, body.string() + " line " + std::to_string(line_no) +
                                                      ": bad value '" + field + "'");
                }
                values.push_back(*v);
            }
        }
        return {*pollutant, {date, DensityGrid(width, height, std::move(values), nodata, pixel, bbox,
                                               sidecar.stem().string())}};
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, sidecar.string() + ": " + e.what());
    } catch (const Error& e) {
        throw Error(e.kind(), sidecar.string() + ": " + e.what());
    }
}

void write_grid(const fs::path& sidecar, PollutantKind pollutant, const DatedGrid& grid) {
    const auto& g = grid.grid;
    fs::path body = sidecar;
    body.replace_extension(".csv");
    json meta = {
        {"width", g.width()},
        {"height", g.height()},
        {"bbox", {g.bbox().lon_min, g.bbox().lat_min, g.bbox().lon_max, g.bbox().lat_max}},
        {"pixel_size_m", g.pixel_size_m()},
        {"nodata", g.nodata()},
        {"timestamp", grid.date.iso()},
        {"pollutant", std::string(to_string(pollutant))},
        {"values", body.filename().string()},
    };
    std::ofstream out(sidecar, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + sidecar.string());
    out << meta.dump(2) << '\n';
    std::ofstream bout(body, std::ios::binary);
    if (!bout) throw Error(ErrorKind::Io, "cannot write " + body.string());
    const auto values = g.values();
    for (std::size_t r = 0; r < g.height(); ++r) {
        for (std::size_t c = 0; c < g.width(); ++c) {
            if (c) bout << ',';
            bout << csv::format_double(values[r * g.width() + c]);
        }
        bout << '\n';
    }
}

std::vector<GridFile> read_grid_directory(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, "grid directory not found: " + dir.string());
    std::vector<fs::path> sidecars;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") sidecars.push_back(entry.path());
    }
    std::sort(sidecars.begin(), sidecars.end());
    std::vector<GridFile> out;
    out.reserve(sidecars.size());
    for (const auto& p : sidecars) out.push_back(read_grid(p));
    return out;
}

std::map<PollutantKind, std::vector<DatedStat>> read_density_csv(const fs::path& path) {
    const auto table = csv::read_file(path.string());
    std::vector<std::string> missing;
    for (const char* name : {"date", "pollutant", "mean", "std"}) {
        if (!table.column(name)) missing.emplace_back(name);
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw Error(ErrorKind::Schema, path.string() + ": missing columns " + list);
    }
    const auto c_date = *table.column("date"), c_pol = *table.column("pollutant"), c_mean = *table.column("mean"),
               c_std = *table.column("std");
    std::map<PollutantKind, std::vector<DatedStat>> out;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        auto where = [&] { return path.string() + " line " + std::to_string(table.line_numbers[i]); };
        if (row.size() != table.header.size()) throw Error(ErrorKind::Parse, where() + ": wrong field count");
        const auto p = parse_pollutant(row[c_pol]);
        const auto mean = csv::parse_double(row[c_mean]);
        const auto sd = csv::parse_double(row[c_std]);
        if (!p || !mean || !sd || !std::isfinite(*mean) || !std::isfinite(*sd) || *sd < 0.0) {
            throw Error(ErrorKind::Parse, where() + ": bad pollutant statistics");
        }
        out[*p].push_back({Date::parse(row[c_date]), {*mean, *sd}});
    }
    return out;
}

void write_density_csv(std::ostream& out, const std::map<PollutantKind, std::vector<DatedStat>>& stats) {
    csv::write_row(out, {"date", "pollutant", "mean", "std"});
    for (const auto& [p, list] : stats) {
        for (const auto& s : list) {
            csv::write_row(out, {s.date.iso(), std::string(to_string(p)), csv::format_double(s.stat.mean),
                                 csv::format_double(s.stat.std)});
        }
    }
}

// Policy tables ----------------------------------------------------------------

PolicyColumns PolicyColumns::tracker_defaults() {
    PolicyColumns c;
    c.columns = {"restrictions_internal_movements", "international_travel_controls", "cancel_public_events",
                 "restriction_gatherings",          "close_public_transport",        "school_closures",
                 "stay_home_requirements",          "workplace_closures"};
    c.date_column = "date";
    return c;
}

namespace {

std::optional<int> parse_ordinal(const std::string& text) {
    const auto v = csv::parse_double(text);
    if (!v || !std::isfinite(*v) || std::floor(*v) != *v || std::fabs(*v) > 1e6) return std::nullopt;
    return static_cast<int>(*v);
}

}  // namespace

PolicyTable parse_policy_csv(std::istream& in, const PolicyColumns& columns, std::string source) {
    const auto table = csv::parse(in);
    std::vector<std::string> missing;
    auto need = [&](const std::string& name) -> std::size_t {
        const auto c = table.column(name);
        if (!c) missing.push_back(name);
        return c.value_or(0);
    };
    const std::size_t c_date = need(columns.date_column);
    std::array<std::size_t, kMeasureCount> c_measure{};
    for (std::size_t m = 0; m < kMeasureCount; ++m) c_measure[m] = need(columns.columns[m]);
    std::size_t c_filter = 0;
    if (columns.filter) c_filter = need(columns.filter->first);
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw Error(ErrorKind::Schema, "policy CSV " + source + " is missing columns: " + list);
    }
    PolicyTable out;
    out.source = std::move(source);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        if (row.size() != table.header.size()) {
            throw Error(ErrorKind::Parse, out.source + " line " + std::to_string(table.line_numbers[i]) +
                                              ": expected " + std::to_string(table.header.size()) + " fields");
        }
        if (columns.filter && row[c_filter] != columns.filter->second) continue;
        PolicyRow r;
        r.date = Date::parse(row[c_date]);
        for (std::size_t m = 0; m < kMeasureCount; ++m) r.levels[m] = parse_ordinal(row[c_measure[m]]);
        out.rows.push_back(r);
    }
    if (out.rows.empty()) throw Error(ErrorKind::EmptyInput, "policy CSV " + out.source + " has no rows");
    std::stable_sort(out.rows.begin(), out.rows.end(),
                     [](const PolicyRow& a, const PolicyRow& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < out.rows.size(); ++i) {
        if (out.rows[i].date == out.rows[i - 1].date) {
            throw Error(ErrorKind::AmbiguousInput, "policy CSV " + out.source + " repeats date " + out.rows[i].date.iso());
        }
    }
    return out;
}

PolicyTable parse_policy_csv(const fs::path& path, const PolicyColumns& columns) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    return parse_policy_csv(in, columns, path.string());
}

void write_policy_csv(std::ostream& out, const PolicyTable& table, const PolicyColumns& columns) {
    std::vector<std::string> header = {columns.date_column};
    for (const auto& c : columns.columns) header.push_back(c);
    csv::write_row(out, header);
    for (const auto& r : table.rows) {
        std::vector<std::string> f = {r.date.iso()};
        for (const auto& l : r.levels) f.push_back(l ? std::to_string(*l) : std::string{});
        csv::write_row(out, f);
    }
}

std::array<std::vector<PeriodValue>, kMeasureCount> measure_periods(const PolicyTable& table, int year,
                                                                   const MeasureMaxima& maxima) {
    std::array<std::vector<PeriodValue>, kMeasureCount> out;
    for (std::size_t m = 0; m < kMeasureCount; ++m) {
        std::vector<DailyValue> daily;
        for (const auto& r : table.rows) {
            if (r.date.year() != year || !r.levels[m]) continue;
            try {
                daily.push_back({r.date, normalize_measure(*r.levels[m], maxima[m])});
            } catch (const Error& e) {
                throw Error(e.kind(), table.source + " " + r.date.iso() + " " +
                                          std::string(to_string(kAllMeasures[m])) + ": " + e.what());
            }
        }
        out[m] = resample_to_periods(daily, year);
    }
    return out;
}

CityDataset assemble_city(std::string city_name, int year,
                          const std::array<std::vector<PeriodValue>, kMeasureCount>& measures,
                          const std::map<PollutantKind, std::vector<PeriodStat>>& pollutants, GeoPoint center,
                          double box_half_width) {
    const int n = periods_in_year(year);
    std::vector<PeriodRecord> records(static_cast<std::size_t>(n));
    for (int p = 0; p < n; ++p) {
        auto& r = records[static_cast<std::size_t>(p)];
        r.period_index = p;
        r.start_date = period_start(p, year);
        for (std::size_t m = 0; m < kMeasureCount; ++m) {
            if (static_cast<std::size_t>(p) < measures[m].size()) r.measures[m] = measures[m][static_cast<std::size_t>(p)].value;
        }
        for (const auto& [pol, stats] : pollutants) {
            if (static_cast<std::size_t>(p) < stats.size()) r.pollutants[index_of(pol)] = stats[static_cast<std::size_t>(p)].stat;
        }
    }
    return CityDataset(std::move(city_name), year, std::move(records), center, box_half_width);
}

}  // namespace aqlock
