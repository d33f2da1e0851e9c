#include "aqlock/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "aqlock/csv.hpp"
#include "aqlock/error.hpp"
#include "aqlock/report.hpp"

namespace aqlock::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& key, const std::string& message) {
    throw Error(ErrorKind::Config, key + ": " + message);
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) config_error(where, "expected an object");
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            config_error(where.empty() ? key : where + "." + key, "unknown key");
        }
    }
}

std::string get_string(const json& v, const std::string& key) {
    if (!v.is_string()) config_error(key, "expected a string");
    return v.get<std::string>();
}

double get_number(const json& v, const std::string& key) {
    if (!v.is_number()) config_error(key, "expected a number");
    return v.get<double>();
}

std::int64_t get_int(const json& v, const std::string& key) {
    if (!v.is_number_integer()) config_error(key, "expected an integer");
    return v.get<std::int64_t>();
}

std::uint64_t get_seed(const json& v, const std::string& key) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        config_error(key, "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

bool get_bool(const json& v, const std::string& key) {
    if (!v.is_boolean()) config_error(key, "expected true or false");
    return v.get<bool>();
}

template <class T, class Parse>
T get_enum(const json& v, const std::string& key, Parse parse) {
    const std::string name = get_string(v, key);
    const auto parsed = parse(name);
    if (!parsed) config_error(key, "unknown value '" + name + "'");
    return *parsed;
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

bool safe_name(const std::string& name) {
    return !name.empty() && name != "." && name != ".." &&
           std::all_of(name.begin(), name.end(), [](char c) {
               return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
           });
}

CityConfig parse_city(const json& c, const std::string& key, const fs::path& base) {
    check_keys(c, key, {"name", "center", "box_half_width", "policy_csv", "grid_dir", "density_csv"});
    CityConfig city;
    if (!c.contains("name")) config_error(key + ".name", "required");
    city.name = get_string(c["name"], key + ".name");
    if (!safe_name(city.name)) config_error(key + ".name", "must be letters, digits, '_', '-' or '.'");
    if (c.contains("center")) {
        const json& ctr = c["center"];
        if (!ctr.is_array() || ctr.size() != 2) config_error(key + ".center", "expected [longitude, latitude]");
        city.center = {get_number(ctr[0], key + ".center[0]"), get_number(ctr[1], key + ".center[1]")};
        if (std::fabs(city.center.longitude) > 180.0 || std::fabs(city.center.latitude) > 90.0) {
            config_error(key + ".center", "outside valid longitude/latitude");
        }
    }
    if (c.contains("box_half_width")) {
        city.box_half_width = get_number(c["box_half_width"], key + ".box_half_width");
        if (!(city.box_half_width > 0.0 && city.box_half_width <= 5.0)) {
            config_error(key + ".box_half_width", "must lie in (0, 5] degrees");
        }
    }
    if (!c.contains("policy_csv")) config_error(key + ".policy_csv", "required");
    city.policy_csv = resolve(base, get_string(c["policy_csv"], key + ".policy_csv"));
    if (c.contains("grid_dir")) city.grid_dir = resolve(base, get_string(c["grid_dir"], key + ".grid_dir"));
    if (c.contains("density_csv")) {
        city.density_csv = resolve(base, get_string(c["density_csv"], key + ".density_csv"));
    }
    if (city.grid_dir.has_value() == city.density_csv.has_value()) {
        config_error(key, "exactly one of grid_dir or density_csv is required");
    }
    return city;
}

void parse_policy_columns(const json& cols, PipelineConfig& cfg) {
    if (!cols.is_object()) config_error("policy.columns", "expected an object");
    for (const auto& [name, value] : cols.items()) {
        const auto m = parse_measure(name);
        if (!m) config_error("policy.columns." + name, "unknown measure");
        cfg.policy_columns.columns[index_of(*m)] = get_string(value, "policy.columns." + name);
    }
}

void parse_policy(const json& p, PipelineConfig& cfg) {
    check_keys(p, "policy", {"date_column", "columns", "max_levels", "filter"});
    if (p.contains("date_column")) cfg.policy_columns.date_column = get_string(p["date_column"], "policy.date_column");
    if (p.contains("columns")) parse_policy_columns(p["columns"], cfg);
    if (p.contains("max_levels")) {
        const json& levels = p["max_levels"];
        if (!levels.is_object()) config_error("policy.max_levels", "expected an object");
        for (const auto& [name, value] : levels.items()) {
            const auto m = parse_measure(name);
            if (!m) config_error("policy.max_levels." + name, "unknown measure");
            const auto level = get_int(value, "policy.max_levels." + name);
            if (level < 1 || level > 100) config_error("policy.max_levels." + name, "must lie in [1, 100]");
            cfg.maxima[index_of(*m)] = static_cast<int>(level);
        }
    }
    if (p.contains("filter")) {
        const json& f = p["filter"];
        check_keys(f, "policy.filter", {"column", "value"});
        if (!f.contains("column") || !f.contains("value")) config_error("policy.filter", "needs column and value");
        cfg.policy_columns.filter = std::make_pair(get_string(f["column"], "policy.filter.column"),
                                                   get_string(f["value"], "policy.filter.value"));
    }
}

ModelSpec parse_model(const json& m, const std::string& key, std::uint64_t global_seed) {
    json entry = m.is_string() ? json{{"kind", m}} : m;
    if (!entry.is_object()) config_error(key, "expected a kind name or an object");
    const bool has_seed = entry.contains("seed");
    try {
        ModelSpec spec = ModelSpec::from_json(entry);
        if (!has_seed && spec.kind != ModelKind::rfr) spec.seed = global_seed;
        return spec;
    } catch (const Error& e) {
        config_error(key, e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw Error(ErrorKind::Config, "override '" + assignment + "' is not key=value");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    json* node = &doc;
    std::string_view rest = key;
    while (true) {
        const auto dot = rest.find('.');
        const std::string part(rest.substr(0, dot));
        if (part.empty()) throw Error(ErrorKind::Config, "override key '" + key + "' has an empty component");
        json* child = nullptr;
        if (node->is_array()) {
            std::size_t idx = 0;
            const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), idx);
            if (ec != std::errc() || ptr != part.data() + part.size() || idx >= node->size()) {
                throw Error(ErrorKind::Config, "override key '" + key + "': bad array index '" + part + "'");
            }
            child = &(*node)[idx];
        } else {
            if (node->is_null()) *node = json::object();
            if (!node->is_object()) {
                throw Error(ErrorKind::Config, "override key '" + key + "' descends into a non-object");
            }
            child = &(*node)[part];
        }
        if (dot == std::string_view::npos) {
            *child = value;
            return;
        }
        node = child;
        rest = rest.substr(dot + 1);
    }
}

PipelineConfig parse_config(const json& doc, const fs::path& base_dir) {
    check_keys(doc, "", {"year", "cities", "policy", "pollutants", "aggregation", "models", "split", "pooling",
                         "scaling", "screen", "output_dir", "seed"});
    PipelineConfig cfg;
    if (doc.contains("seed")) cfg.seed = get_seed(doc["seed"], "seed");
    if (doc.contains("year")) {
        const auto year = get_int(doc["year"], "year");
        if (year < 1900 || year > 2200) config_error("year", "must lie in [1900, 2200]");
        cfg.year = static_cast<int>(year);
    }
    if (!doc.contains("cities")) config_error("cities", "required");
    const json& cities = doc["cities"];
    if (!cities.is_array() || cities.empty()) config_error("cities", "expected a non-empty array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < cities.size(); ++i) {
        cfg.cities.push_back(parse_city(cities[i], "cities[" + std::to_string(i) + "]", base_dir));
        if (!names.insert(cfg.cities.back().name).second) {
            config_error("cities[" + std::to_string(i) + "].name", "duplicate city '" + cfg.cities.back().name + "'");
        }
    }
    if (doc.contains("policy")) {
        parse_policy(doc["policy"], cfg);
    }
    if (doc.contains("pollutants")) {
        const json& p = doc["pollutants"];
        if (!p.is_array() || p.empty()) config_error("pollutants", "expected a non-empty array");
        cfg.pollutants.clear();
        for (std::size_t i = 0; i < p.size(); ++i) {
            const auto pol = get_enum<PollutantKind>(p[i], "pollutants[" + std::to_string(i) + "]", parse_pollutant);
            if (std::find(cfg.pollutants.begin(), cfg.pollutants.end(), pol) != cfg.pollutants.end()) {
                config_error("pollutants", "duplicate " + std::string(to_string(pol)));
            }
            cfg.pollutants.push_back(pol);
        }
        std::sort(cfg.pollutants.begin(), cfg.pollutants.end());
    }
    if (doc.contains("aggregation")) {
        cfg.aggregation = get_enum<AggregationMode>(doc["aggregation"], "aggregation",
                                                    [](std::string_view s) -> std::optional<AggregationMode> {
                                                        if (s == "per_grid") return AggregationMode::per_grid;
                                                        if (s == "pooled_pixels") return AggregationMode::pooled_pixels;
                                                        return std::nullopt;
                                                    });
        if (cfg.aggregation == AggregationMode::pooled_pixels) {
            for (const auto& c : cfg.cities) {
                if (c.density_csv) config_error("aggregation", "pooled_pixels needs grid_dir inputs (city " + c.name + ")");
            }
        }
    }
    if (doc.contains("models")) {
        const json& models = doc["models"];
        if (!models.is_array() || models.empty()) config_error("models", "expected a non-empty array");
        for (std::size_t i = 0; i < models.size(); ++i) {
            cfg.models.push_back(parse_model(models[i], "models[" + std::to_string(i) + "]", cfg.seed));
        }
    } else {
        for (auto kind : kAllModelKinds) {
            ModelSpec spec = ModelSpec::defaults(kind);
            if (kind != ModelKind::rfr) spec.seed = cfg.seed;
            cfg.models.push_back(spec);
        }
    }
    cfg.split.seed = cfg.seed;
    if (doc.contains("split")) {
        const json& s = doc["split"];
        check_keys(s, "split", {"mode", "test_fraction", "seed"});
        if (s.contains("mode")) cfg.split.mode = get_enum<SplitMode>(s["mode"], "split.mode", parse_split_mode);
        if (s.contains("test_fraction")) {
            cfg.split.test_fraction = get_number(s["test_fraction"], "split.test_fraction");
            if (!(cfg.split.test_fraction > 0.0 && cfg.split.test_fraction < 1.0)) {
                config_error("split.test_fraction", "must lie in (0, 1)");
            }
        }
        if (s.contains("seed")) cfg.split.seed = get_seed(s["seed"], "split.seed");
    }
    if (doc.contains("pooling")) cfg.pooling = get_enum<PoolingMode>(doc["pooling"], "pooling", parse_pooling_mode);
    if (doc.contains("scaling")) cfg.scaling = get_enum<ScalingMode>(doc["scaling"], "scaling", parse_scaling_mode);
    if (doc.contains("screen")) {
        const json& s = doc["screen"];
        check_keys(s, "screen", {"cost", "z_normalize", "window"});
        if (s.contains("cost")) cfg.screen.dtw.cost = get_enum<DtwCost>(s["cost"], "screen.cost", parse_dtw_cost);
        if (s.contains("z_normalize")) cfg.screen.z_normalize = get_bool(s["z_normalize"], "screen.z_normalize");
        if (s.contains("window") && !s["window"].is_null()) {
            const auto w = get_int(s["window"], "screen.window");
            if (w < 0) config_error("screen.window", "must be non-negative");
            cfg.screen.dtw.window = static_cast<std::size_t>(w);
        }
    }
    if (doc.contains("output_dir")) cfg.output_dir = resolve(base_dir, get_string(doc["output_dir"], "output_dir"));
    else cfg.output_dir = base_dir / "out";
    cfg.source = doc;
    cfg.source.erase("output_dir");
    return cfg;
}

PipelineConfig load_config(const fs::path& path, const LoadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open config " + path.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorKind::Config, path.string() + ": not valid JSON");
    for (const auto& o : options.overrides) apply_override(doc, o);
    if (options.seed) doc["seed"] = *options.seed;
    if (options.jobs < 1) throw Error(ErrorKind::Config, "jobs must be at least 1");
    PipelineConfig cfg = parse_config(doc, path.parent_path().empty() ? fs::path(".") : path.parent_path());
    if (const char* env = std::getenv("AQLOCK_OUT"); env && *env) cfg.output_dir = env;
    if (options.output_dir) cfg.output_dir = *options.output_dir;
    cfg.jobs = options.jobs;
    cfg.screen.jobs = options.jobs;
    return cfg;
}

fs::path datasets_dir(const PipelineConfig& cfg) { return cfg.output_dir / "datasets"; }

std::vector<CityDataset> ingest_cities(const PipelineConfig& cfg) {
    // Check every input path before reading anything.
    for (const auto& c : cfg.cities) {
        if (!fs::is_regular_file(c.policy_csv)) throw Error(ErrorKind::Io, "policy CSV not found: " + c.policy_csv.string());
        if (c.grid_dir && !fs::is_directory(*c.grid_dir)) {
            throw Error(ErrorKind::Io, "grid directory not found: " + c.grid_dir->string());
        }
        if (c.density_csv && !fs::is_regular_file(*c.density_csv)) {
            throw Error(ErrorKind::Io, "density CSV not found: " + c.density_csv->string());
        }
    }
    std::vector<CityDataset> out;
    for (const auto& c : cfg.cities) {
        try {
            const PolicyTable policy = parse_policy_csv(c.policy_csv, cfg.policy_columns);
            const auto measures = measure_periods(policy, cfg.year, cfg.maxima);
            std::map<PollutantKind, std::vector<PeriodStat>> pollutants;
            if (c.grid_dir) {
                std::map<PollutantKind, std::vector<DatedGrid>> grids;
                for (auto& g : read_grid_directory(*c.grid_dir)) grids[g.pollutant].push_back(std::move(g.grid));
                for (auto p : cfg.pollutants) {
                    if (auto it = grids.find(p); it != grids.end()) {
                        pollutants[p] = aggregate_periods(it->second, cfg.year, cfg.aggregation);
                    }
                }
            } else {
                const auto stats = read_density_csv(*c.density_csv);
                for (auto p : cfg.pollutants) {
                    if (auto it = stats.find(p); it != stats.end()) pollutants[p] = aggregate_stats(it->second, cfg.year);
                }
            }
            out.push_back(assemble_city(c.name, cfg.year, measures, pollutants, c.center, c.box_half_width));
        } catch (const Error& e) {
            throw Error(e.kind(), "city '" + c.name + "': " + e.what());
        }
    }
    return out;
}

std::vector<CityDataset> load_datasets(const PipelineConfig& cfg) {
    std::vector<CityDataset> out;
    for (const auto& c : cfg.cities) {
        const fs::path path = datasets_dir(cfg) / (c.name + ".csv");
        if (!fs::is_regular_file(path)) {
            throw Error(ErrorKind::Io, "dataset not found: " + path.string() + " (run ingest first)");
        }
        CityDataset d = read_city_csv(path, c.center, c.box_half_width);
        if (d.year() != cfg.year) {
            throw Error(ErrorKind::Config, path.string() + " covers " + std::to_string(d.year()) + ", config says " +
                                               std::to_string(cfg.year));
        }
        out.push_back(std::move(d));
    }
    return out;
}

int cmd_ingest(const PipelineConfig& cfg, std::ostream& out) {
    const auto cities = ingest_cities(cfg);
    fs::create_directories(datasets_dir(cfg));
    for (const auto& city : cities) {
        write_city_csv(city, datasets_dir(cfg) / (city.city_name() + ".csv"));
        std::size_t complete = 0;
        std::array<std::size_t, kPollutantCount> present{};
        for (const auto& r : city.records()) {
            if (r.measures_complete()) ++complete;
            for (auto p : kAllPollutants) {
                if (r.pollutant(p)) ++present[index_of(p)];
            }
        }
        out << city.city_name() << ": " << city.records().size() << " periods, measures complete " << complete;
        for (auto p : cfg.pollutants) out << ", " << to_string(p) << ' ' << present[index_of(p)];
        out << '\n';
    }
    return 0;
}

int cmd_screen(const PipelineConfig& cfg, std::ostream& out) {
    const auto cities = load_datasets(cfg);
    std::vector<ScreenRow> rows;
    int status = 0;
    for (auto p : cfg.pollutants) {
        try {
            auto part = screen_all(cities, p, cfg.screen);
            rows.insert(rows.end(), part.begin(), part.end());
        } catch (const Error& e) {
            out << "screen " << to_string(p) << " failed: " << e.what() << '\n';
            status = 1;
        }
    }
    const fs::path dir = cfg.output_dir / "screen";
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "screen.csv", std::ios::binary);
        write_screen_csv(f, rows);
        if (!f) throw Error(ErrorKind::Io, "cannot write " + (dir / "screen.csv").string());
    }
    if (!rows.empty()) {
        write_figure(cfg.output_dir / "figures", figure_r2(rows));
        write_figure(cfg.output_dir / "figures", figure_dtw(rows));
    }
    const std::string summary = screen_summary_text(rows);
    write_text(dir / "summary.txt", summary);
    out << summary;
    return status;
}

namespace {

void forecast_demo(const std::vector<CityDataset>& cities, const BenchmarkResult& result, std::ostream& out) {
    out << "forecast (best model per pollutant, latest complete period):\n";
    for (auto p : kAllPollutants) {
        const auto rows = result.report.for_pollutant(p);
        const EvalRow* best = nullptr;
        for (const auto* r : rows) {
            if (r->rmse && r->scope == kPooledScope && (!best || r->rmse->mean < best->rmse->mean)) best = r;
        }
        if (!best) continue;
        const TrainedModel* model = nullptr;
        for (const auto& m : result.models) {
            if (m.pollutant == p && m.scope == kPooledScope && m.model.spec().kind == best->kind) model = &m.model;
        }
        if (!model) continue;
        for (const auto& city : cities) {
            const auto& recs = city.records();
            for (auto it = recs.rbegin(); it != recs.rend(); ++it) {
                if (!it->measures_complete() || !it->pollutant(p)) continue;
                Matrix x(1, kInputDim);
                for (std::size_t k = 0; k < kMeasureCount; ++k) x(0, static_cast<Eigen::Index>(k)) = *it->measures[k];
                x(0, kMeasureCount) = it->pollutant(p)->mean;
                x(0, kMeasureCount + 1) = it->pollutant(p)->std;
                const Matrix y = model->predict(x);
                out << "  " << to_string(p) << ' ' << city.city_name() << " [" << to_string(best->kind) << "] period "
                    << it->period_index << " (" << it->start_date.iso() << ") mean " << csv::format_double(x(0, kMeasureCount))
                    << " -> next period mean " << csv::format_double(y(0, 0)) << " (std " << csv::format_double(y(0, 1))
                    << ")\n";
                break;
            }
        }
    }
}

}  // namespace

int cmd_benchmark(const PipelineConfig& cfg, std::ostream& out) {
    const auto cities = load_datasets(cfg);
    BenchmarkOptions options;
    options.split = cfg.split;
    options.pooling = cfg.pooling;
    options.scaling = cfg.scaling;
    options.jobs = cfg.jobs;
    const BenchmarkResult result = run_benchmark(cities, cfg.pollutants, cfg.models, options);

    const fs::path dir = cfg.output_dir / "benchmark";
    fs::create_directories(dir / "models");
    {
        std::ofstream f(dir / "report.csv", std::ios::binary);
        write_report_csv(f, result.report);
        if (!f) throw Error(ErrorKind::Io, "cannot write " + (dir / "report.csv").string());
    }
    write_json(dir / "report.json", report_to_json(result.report, cfg.source));
    std::map<std::string, int> used;
    for (const auto& m : result.models) {
        std::string stem = std::string(to_string(m.pollutant)) + "_" + std::string(to_string(m.model.spec().kind));
        if (m.scope != kPooledScope) stem += "_" + m.scope;
        if (const int n = used[stem]++; n > 0) stem += "_" + std::to_string(n);
        write_json(dir / "models" / (stem + ".json"), m.model.to_json());
    }
    if (!result.report.rows.empty()) {
        const auto [a, b] = figure_rmse(result.report);
        write_figure(cfg.output_dir / "figures", a);
        write_figure(cfg.output_dir / "figures", b);
    }
    const std::string summary = benchmark_summary_text(result.report);
    write_text(dir / "summary.txt", summary);
    out << summary;
    forecast_demo(cities, result, out);
    return result.report.any_failure() ? 1 : 0;
}

int cmd_predict(const std::optional<PipelineConfig>& cfg, const PredictRequest& req, std::ostream& out) {
    std::ifstream in(req.model_path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open model " + req.model_path.string());
    const json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorKind::Parse, req.model_path.string() + ": not valid JSON");
    const TrainedModel model = TrainedModel::from_json(j);

    if (req.input_csv) {
        const csv::Table table = csv::read_file(req.input_csv->string());
        const auto names = input_column_names();
        std::vector<std::size_t> cols;
        for (const auto& n : names) {
            const auto c = table.column(n);
            if (!c) throw Error(ErrorKind::Schema, req.input_csv->string() + ": missing column " + n);
            cols.push_back(*c);
        }
        Matrix x(static_cast<Eigen::Index>(table.rows.size()), kInputDim);
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            for (std::size_t k = 0; k < cols.size(); ++k) {
                const auto v = cols[k] < table.rows[i].size() ? csv::parse_double(table.rows[i][cols[k]]) : std::nullopt;
                if (!v) {
                    throw Error(ErrorKind::Parse, req.input_csv->string() + " line " +
                                                      std::to_string(table.line_numbers[i]) + ": bad " + names[k]);
                }
                x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = *v;
            }
        }
        const Matrix y = model.predict(x);
        csv::write_row(out, {"row", "next_mean", "next_std"});
        for (Eigen::Index i = 0; i < y.rows(); ++i) {
            csv::write_row(out, {std::to_string(i), csv::format_double(y(i, 0)), csv::format_double(y(i, 1))});
        }
        return 0;
    }
    if (!cfg) throw Error(ErrorKind::Config, "predict needs --input or --config");
    if (!model.pollutant()) throw Error(ErrorKind::Config, "model file does not name its pollutant");
    const PollutantKind p = *model.pollutant();
    csv::write_row(out, {"city", "period_index", "start_date", "current_mean", "next_mean", "next_std"});
    for (const auto& city : load_datasets(*cfg)) {
        const auto& recs = city.records();
        for (auto it = recs.rbegin(); it != recs.rend(); ++it) {
            if (!it->measures_complete() || !it->pollutant(p)) continue;
            Matrix x(1, kInputDim);
            for (std::size_t k = 0; k < kMeasureCount; ++k) x(0, static_cast<Eigen::Index>(k)) = *it->measures[k];
            x(0, kMeasureCount) = it->pollutant(p)->mean;
            x(0, kMeasureCount + 1) = it->pollutant(p)->std;
            const Matrix y = model.predict(x);
            csv::write_row(out, {city.city_name(), std::to_string(it->period_index), it->start_date.iso(),
                                 csv::format_double(x(0, kMeasureCount)), csv::format_double(y(0, 0)),
                                 csv::format_double(y(0, 1))});
            break;
        }
    }
    return 0;
}

}  // namespace aqlock::pipeline
