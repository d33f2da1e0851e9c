#include "aqlock/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "aqlock/csv.hpp"
#include "aqlock/error.hpp"

namespace aqlock {

namespace {

constexpr std::array<std::string_view, kMeasureCount> kMeasureNames = {
    "RE_IN_MOV", "IN_TR_CON", "CA_PUB_EV", "RE_GAT", "C_PUB_TRAN", "C_SCHOOL", "STAY_HOME_R", "C_WORKPLACE"};
constexpr std::array<std::string_view, kPollutantCount> kPollutantNames = {"CO", "O3", "NO2", "SO2"};

std::string opt_field(const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string{}; }

double require_double(const std::string& text, std::string_view what, std::size_t line) {
    const auto v = csv::parse_double(text);
    if (!v) {
        throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": bad " + std::string(what) + " '" + text + "'");
    }
    return *v;
}

}  // namespace

std::string_view to_string(MeasureKind m) { return kMeasureNames[index_of(m)]; }
std::string_view to_string(PollutantKind p) { return kPollutantNames[index_of(p)]; }

std::optional<MeasureKind> parse_measure(std::string_view name) {
    for (std::size_t i = 0; i < kMeasureCount; ++i) {
        if (kMeasureNames[i] == name) return kAllMeasures[i];
    }
    return std::nullopt;
}

std::optional<PollutantKind> parse_pollutant(std::string_view name) {
    for (std::size_t i = 0; i < kPollutantCount; ++i) {
        if (kPollutantNames[i] == name) return kAllPollutants[i];
    }
    return std::nullopt;
}

bool PeriodRecord::measures_complete() const {
    return std::all_of(measures.begin(), measures.end(), [](const auto& m) { return m.has_value(); });
}

CityDataset::CityDataset(std::string city_name, int year, std::vector<PeriodRecord> records, GeoPoint center,
                         double box_half_width)
    : city_name_(std::move(city_name)),
      year_(year),
      records_(std::move(records)),
      center_(center),
      box_half_width_(box_half_width) {
    auto bad = [&](const PeriodRecord& r, const std::string& what) {
        return Error(ErrorKind::Domain,
                     city_name_ + " period " + std::to_string(r.period_index) + ": " + what);
    };
    for (std::size_t k = 0; k < records_.size(); ++k) {
        const auto& r = records_[k];
        if (k > 0 && r.period_index != records_[k - 1].period_index + 1) {
            throw bad(r, "records must be strictly consecutive");
        }
        if (r.start_date != period_start(r.period_index, year_)) {
            throw bad(r, "start date " + r.start_date.iso() + " does not begin the period");
        }
        for (std::size_t m = 0; m < kMeasureCount; ++m) {
            if (const auto& v = r.measures[m]; v && !(*v >= 0.0 && *v <= 1.0)) {
                throw bad(r, std::string(kMeasureNames[m]) + " intensity outside [0,1]");
            }
        }
        for (std::size_t p = 0; p < kPollutantCount; ++p) {
            if (const auto& s = r.pollutants[p]; s && (!std::isfinite(s->mean) || !std::isfinite(s->std) || s->std < 0.0)) {
                throw bad(r, std::string(kPollutantNames[p]) + " statistics invalid");
            }
        }
    }
}

std::vector<std::string> city_csv_header() {
    std::vector<std::string> h = {"period_index", "start_date"};
    for (auto name : kMeasureNames) h.emplace_back(name);
    for (auto name : kPollutantNames) {
        h.push_back(std::string(name) + "_mean");
        h.push_back(std::string(name) + "_std");
    }
    return h;
}

void write_city_csv(const CityDataset& city, std::ostream& out) {
    csv::write_row(out, city_csv_header());
    for (const auto& r : city.records()) {
        std::vector<std::string> f = {std::to_string(r.period_index), r.start_date.iso()};
        for (const auto& m : r.measures) f.push_back(opt_field(m));
        for (const auto& s : r.pollutants) {
            f.push_back(s ? csv::format_double(s->mean) : std::string{});
            f.push_back(s ? csv::format_double(s->std) : std::string{});
        }
        csv::write_row(out, f);
    }
}

void write_city_csv(const CityDataset& city, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    write_city_csv(city, out);
}

CityDataset read_city_csv(std::istream& in, std::string city_name, GeoPoint center, double box_half_width) {
    const auto table = csv::parse(in);
    if (table.header != city_csv_header()) {
        throw Error(ErrorKind::Schema, "city CSV header does not match the canonical layout");
    }
    if (table.rows.empty()) throw Error(ErrorKind::EmptyInput, "city CSV has no records");
    std::vector<PeriodRecord> records;
    int year = 0;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const auto line = table.line_numbers[i];
        if (row.size() != table.header.size()) {
            throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": expected " +
                                              std::to_string(table.header.size()) + " fields");
        }
        PeriodRecord r;
        r.period_index = static_cast<int>(require_double(row[0], "period_index", line));
        r.start_date = Date::parse(row[1]);
        if (i == 0) year = r.start_date.year();
        for (std::size_t m = 0; m < kMeasureCount; ++m) {
            if (!row[2 + m].empty()) r.measures[m] = require_double(row[2 + m], kMeasureNames[m], line);
        }
        for (std::size_t p = 0; p < kPollutantCount; ++p) {
            const auto& mean = row[2 + kMeasureCount + 2 * p];
            const auto& sd = row[3 + kMeasureCount + 2 * p];
            if (mean.empty() != sd.empty()) {
                throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " +
                                                  std::string(kPollutantNames[p]) + " mean/std must both be present or both empty");
            }
            if (!mean.empty()) {
                r.pollutants[p] = PollutantStat{require_double(mean, "mean", line), require_double(sd, "std", line)};
            }
        }
        records.push_back(std::move(r));
    }
    return CityDataset(std::move(city_name), year, std::move(records), center, box_half_width);
}

CityDataset read_city_csv(const std::filesystem::path& path, GeoPoint center, double box_half_width) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    try {
        return read_city_csv(in, path.stem().string(), center, box_half_width);
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

// Supervised sets -------------------------------------------------------------

std::vector<std::string> input_column_names() {
    std::vector<std::string> names;
    for (auto name : kMeasureNames) names.emplace_back(name);
    names.emplace_back("pollutant_mean");
    names.emplace_back("pollutant_std");
    return names;
}

std::vector<std::string> target_column_names() { return {"next_mean", "next_std"}; }

SupervisedSet SupervisedSet::select(std::span<const std::size_t> row_indices) const {
    SupervisedSet out;
    out.pollutant = pollutant;
    out.scaling = scaling;
    out.inputs.resize(static_cast<Eigen::Index>(row_indices.size()), inputs.cols());
    out.targets.resize(static_cast<Eigen::Index>(row_indices.size()), targets.cols());
    out.row_provenance.reserve(row_indices.size());
    for (std::size_t k = 0; k < row_indices.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(row_indices[k]);
        out.inputs.row(static_cast<Eigen::Index>(k)) = inputs.row(i);
        out.targets.row(static_cast<Eigen::Index>(k)) = targets.row(i);
        out.row_provenance.push_back(row_provenance[row_indices[k]]);
    }
    return out;
}

bool operator==(const SupervisedSet& a, const SupervisedSet& b) {
    return a.pollutant == b.pollutant && a.inputs.rows() == b.inputs.rows() && a.inputs.cols() == b.inputs.cols() &&
           a.targets.rows() == b.targets.rows() && a.targets.cols() == b.targets.cols() &&
           a.inputs == b.inputs && a.targets == b.targets && a.row_provenance == b.row_provenance &&
           a.scaling == b.scaling;
}

void write_supervised_csv(const SupervisedSet& set, std::ostream& out) {
    std::vector<std::string> header = {"pollutant", "city", "period_index"};
    for (auto& n : input_column_names()) header.push_back(n);
    for (auto& n : target_column_names()) header.push_back(n);
    csv::write_row(out, header);
    for (std::size_t i = 0; i < set.rows(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        std::vector<std::string> f = {std::string(to_string(set.pollutant)), set.row_provenance[i].city_name,
                                      std::to_string(set.row_provenance[i].period_index)};
        for (Eigen::Index c = 0; c < set.inputs.cols(); ++c) f.push_back(csv::format_double(set.inputs(r, c)));
        for (Eigen::Index c = 0; c < set.targets.cols(); ++c) f.push_back(csv::format_double(set.targets(r, c)));
        csv::write_row(out, f);
    }
}

SupervisedSet read_supervised_csv(std::istream& in) {
    const auto table = csv::parse(in);
    const std::size_t width = 3 + kInputDim + kOutputDim;
    if (table.header.size() != width) throw Error(ErrorKind::Schema, "supervised CSV has wrong column count");
    SupervisedSet set;
    const auto n = static_cast<Eigen::Index>(table.rows.size());
    set.inputs.resize(n, kInputDim);
    set.targets.resize(n, kOutputDim);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const auto line = table.line_numbers[i];
        if (row.size() != width) throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": wrong field count");
        const auto p = parse_pollutant(row[0]);
        if (!p) throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": unknown pollutant " + row[0]);
        if (i == 0) set.pollutant = *p;
        set.row_provenance.push_back({row[1], static_cast<int>(require_double(row[2], "period_index", line))});
        const auto r = static_cast<Eigen::Index>(i);
        for (std::size_t c = 0; c < kInputDim; ++c) set.inputs(r, static_cast<Eigen::Index>(c)) = require_double(row[3 + c], "input", line);
        for (std::size_t c = 0; c < kOutputDim; ++c) set.targets(r, static_cast<Eigen::Index>(c)) = require_double(row[3 + kInputDim + c], "target", line);
    }
    return set;
}

// Operations -------------------------------------------------------------------

double normalize_measure(int raw_level, int max_level) {
    if (max_level < 1) throw Error(ErrorKind::OrdinalOutOfRange, "max level must be >= 1");
    if (raw_level < 0 || raw_level > max_level) {
        throw Error(ErrorKind::OrdinalOutOfRange, "ordinal " + std::to_string(raw_level) + " outside [0, " +
                                                      std::to_string(max_level) + "]");
    }
    return static_cast<double>(raw_level) / static_cast<double>(max_level);
}

std::vector<PeriodValue> resample_to_periods(std::span<const DailyValue> daily, int year) {
    const int n_periods = periods_in_year(year);
    std::vector<double> sum(static_cast<std::size_t>(n_periods), 0.0);
    std::vector<int> count(static_cast<std::size_t>(n_periods), 0);
    std::set<int> seen;
    for (const auto& d : daily) {
        const int doy = d.date.day_of_year(year);
        if (doy < 0 || doy >= days_in_year(year)) {
            throw Error(ErrorKind::Domain, "date " + d.date.iso() + " outside year " + std::to_string(year));
        }
        if (!seen.insert(doy).second) {
            throw Error(ErrorKind::AmbiguousInput, "duplicate value for " + d.date.iso());
        }
        sum[static_cast<std::size_t>(doy / 2)] += d.value;
        ++count[static_cast<std::size_t>(doy / 2)];
    }
    std::vector<PeriodValue> out(static_cast<std::size_t>(n_periods));
    for (int p = 0; p < n_periods; ++p) {
        const auto k = static_cast<std::size_t>(p);
        out[k].period_index = p;
        if (count[k] > 0) out[k].value = sum[k] / count[k];
    }
    return out;
}

SupervisedSet build_supervised(std::span<const CityDataset> cities, PollutantKind pollutant) {
    bool any_present = false;
    std::vector<std::pair<const CityDataset*, std::size_t>> rows;
    for (const auto& city : cities) {
        const auto& recs = city.records();
        for (std::size_t k = 0; k < recs.size(); ++k) {
            if (recs[k].pollutant(pollutant)) any_present = true;
            if (k + 1 < recs.size() && recs[k].measures_complete() && recs[k].pollutant(pollutant) &&
                recs[k + 1].pollutant(pollutant)) {
                rows.emplace_back(&city, k);
            }
        }
    }
    if (!any_present) {
        throw Error(ErrorKind::EmptyDataset, std::string(to_string(pollutant)) + " is absent from every record");
    }
    SupervisedSet set;
    set.pollutant = pollutant;
    set.inputs.resize(static_cast<Eigen::Index>(rows.size()), kInputDim);
    set.targets.resize(static_cast<Eigen::Index>(rows.size()), kOutputDim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& [city, k] = rows[i];
        const auto& now = city->records()[k];
        const auto& next = city->records()[k + 1];
        const auto r = static_cast<Eigen::Index>(i);
        for (std::size_t m = 0; m < kMeasureCount; ++m) set.inputs(r, static_cast<Eigen::Index>(m)) = *now.measures[m];
        set.inputs(r, kMeasureCount) = now.pollutant(pollutant)->mean;
        set.inputs(r, kMeasureCount + 1) = now.pollutant(pollutant)->std;
        set.targets(r, 0) = next.pollutant(pollutant)->mean;
        set.targets(r, 1) = next.pollutant(pollutant)->std;
        set.row_provenance.push_back({city->city_name(), now.period_index});
    }
    return set;
}

std::string_view to_string(ScalingMode mode) {
    switch (mode) {
        case ScalingMode::none: return "none";
        case ScalingMode::min_max: return "min_max";
        case ScalingMode::z_score: return "z_score";
    }
    return "none";
}

std::optional<ScalingMode> parse_scaling_mode(std::string_view name) {
    for (auto m : {ScalingMode::none, ScalingMode::min_max, ScalingMode::z_score}) {
        if (to_string(m) == name) return m;
    }
    return std::nullopt;
}

AffineColumns fit_columns(const Matrix& data, ScalingMode mode, DegeneratePolicy policy,
                          std::span<const std::string> column_names) {
    if (data.rows() < 2) throw Error(ErrorKind::InsufficientData, "scaling needs at least 2 rows");
    AffineColumns cols;
    const auto n = static_cast<double>(data.rows());
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
        double offset = 0.0, scale = 1.0;
        const auto col = data.col(c);
        if (mode == ScalingMode::min_max) {
            offset = col.minCoeff();
            scale = col.maxCoeff() - offset;
        } else if (mode == ScalingMode::z_score) {
            offset = col.sum() / n;
            scale = std::sqrt((col.array() - offset).square().sum() / n);
        }
        if (!(scale > 0.0)) {
            if (policy == DegeneratePolicy::error) {
                const std::string name = static_cast<std::size_t>(c) < column_names.size()
                                             ? column_names[static_cast<std::size_t>(c)]
                                             : "#" + std::to_string(c);
                throw Error(ErrorKind::DegenerateColumn, "column " + name + " is constant");
            }
            scale = 1.0;
        }
        cols.offset.push_back(offset);
        cols.scale.push_back(scale);
    }
    return cols;
}

ScalingSpec fit_scaling(const SupervisedSet& set, ScalingMode mode, DegeneratePolicy policy) {
    ScalingSpec spec;
    spec.mode = mode;
    spec.inputs = fit_columns(set.inputs, mode, policy, input_column_names());
    spec.targets = fit_columns(set.targets, mode, policy, target_column_names());
    spec.fitted = true;
    return spec;
}

Matrix apply_columns(const AffineColumns& cols, const Matrix& data) {
    if (static_cast<std::size_t>(data.cols()) != cols.offset.size()) {
        throw Error(ErrorKind::Shape, "scaling column count mismatch");
    }
    Matrix out(data.rows(), data.cols());
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
        const auto k = static_cast<std::size_t>(c);
        out.col(c) = (data.col(c).array() - cols.offset[k]) / cols.scale[k];
    }
    return out;
}

Matrix invert_columns(const AffineColumns& cols, const Matrix& data) {
    if (static_cast<std::size_t>(data.cols()) != cols.offset.size()) {
        throw Error(ErrorKind::Shape, "scaling column count mismatch");
    }
    Matrix out(data.rows(), data.cols());
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
        const auto k = static_cast<std::size_t>(c);
        out.col(c) = data.col(c).array() * cols.scale[k] + cols.offset[k];
    }
    return out;
}

SupervisedSet apply_scaling(const SupervisedSet& set, const ScalingSpec& spec) {
    SupervisedSet out = set;
    out.inputs = apply_columns(spec.inputs, set.inputs);
    out.targets = apply_columns(spec.targets, set.targets);
    out.scaling = spec;
    return out;
}

SupervisedSet invert_scaling(const SupervisedSet& set, const ScalingSpec& spec) {
    SupervisedSet out = set;
    out.inputs = invert_columns(spec.inputs, set.inputs);
    out.targets = invert_columns(spec.targets, set.targets);
    out.scaling = ScalingSpec{};
    return out;
}

}  // namespace aqlock
