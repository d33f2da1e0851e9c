#include "aqlock/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "aqlock/csv.hpp"
#include "aqlock/error.hpp"

namespace aqlock {

using nlohmann::json;

std::string_view to_string(FigureId id) {
    switch (id) {
        case FigureId::R2_bars: return "R2_bars";
        case FigureId::DTW_bars: return "DTW_bars";
        case FigureId::RMSE_CO_O3: return "RMSE_CO_O3";
        case FigureId::RMSE_NO2_SO2: return "RMSE_NO2_SO2";
    }
    return "R2_bars";
}

std::optional<FigureId> parse_figure_id(std::string_view name) {
    for (auto id : {FigureId::R2_bars, FigureId::DTW_bars, FigureId::RMSE_CO_O3, FigureId::RMSE_NO2_SO2}) {
        if (to_string(id) == name) return id;
    }
    return std::nullopt;
}

namespace {

std::vector<PollutantKind> screen_pollutants(std::span<const ScreenRow> screen) {
    std::vector<PollutantKind> out;
    for (auto p : kAllPollutants) {
        if (std::any_of(screen.begin(), screen.end(), [p](const ScreenRow& r) { return r.pollutant == p; })) {
            out.push_back(p);
        }
    }
    return out;
}

const ScreenRow* pooled_row(std::span<const ScreenRow> screen, MeasureKind m, PollutantKind p) {
    for (const auto& r : screen) {
        if (r.scope == kPooledScope && r.measure == m && r.pollutant == p) return &r;
    }
    return nullptr;
}

template <class Value>
FigureData screen_figure(std::span<const ScreenRow> screen, FigureId id, std::string caption, Value value) {
    if (screen.empty()) throw Error(ErrorKind::EmptyInput, "screen table is empty");
    FigureData fig{id, std::move(caption), {}};
    const auto pollutants = screen_pollutants(screen);
    for (auto m : kAllMeasures) {
        for (auto p : pollutants) {
            const ScreenRow* row = pooled_row(screen, m, p);
            fig.rows.push_back({std::string(to_string(m)), std::string(to_string(p)),
                                row ? value(*row) : std::nullopt});
        }
    }
    return fig;
}

FigureData rmse_figure(const EvalReport& report, FigureId id, std::string caption,
                       std::initializer_list<PollutantKind> pollutants) {
    FigureData fig{id, std::move(caption), {}};
    for (auto kind : kAllModelKinds) {
        for (auto p : pollutants) {
            for (const auto& r : report.rows) {
                if (r.kind != kind || r.pollutant != p) continue;
                std::string category(to_string(p));
                if (r.scope != kPooledScope) category += "@" + r.scope;
                fig.rows.push_back({std::string(to_string(kind)), std::move(category),
                                    r.rmse ? std::optional<double>(r.rmse->mean) : std::nullopt});
            }
        }
    }
    return fig;
}

}  // namespace

FigureData figure_r2(std::span<const ScreenRow> screen) {
    return screen_figure(screen, FigureId::R2_bars,
                         "Coefficient of determination (R^2) of each measure against pollutant mean density, "
                         "pooled over cities",
                         [](const ScreenRow& r) {
                             return r.correlation ? std::optional<double>(r.correlation->r_squared) : std::nullopt;
                         });
}

FigureData figure_dtw(std::span<const ScreenRow> screen) {
    return screen_figure(screen, FigureId::DTW_bars,
                         "DTW alignment distance between each measure and pollutant mean density, pooled over cities",
                         [](const ScreenRow& r) { return r.dtw_distance; });
}

std::pair<FigureData, FigureData> figure_rmse(const EvalReport& report) {
    if (report.rows.empty()) throw Error(ErrorKind::EmptyInput, "evaluation report is empty");
    return {rmse_figure(report, FigureId::RMSE_CO_O3, "Test RMSE of the next-period mean density, CO and O3",
                        {PollutantKind::CO, PollutantKind::O3}),
            rmse_figure(report, FigureId::RMSE_NO2_SO2, "Test RMSE of the next-period mean density, NO2 and SO2",
                        {PollutantKind::NO2, PollutantKind::SO2})};
}

void write_figure_csv(std::ostream& out, const FigureData& fig) {
    csv::write_row(out, {"group", "category", "value"});
    for (const auto& r : fig.rows) {
        csv::write_row(out, {r.group, r.category, r.value ? csv::format_double(*r.value) : ""});
    }
}

json figure_to_json(const FigureData& fig) {
    json rows = json::array();
    for (const auto& r : fig.rows) {
        rows.push_back({{"group", r.group}, {"category", r.category}, {"value", r.value ? json(*r.value) : json(nullptr)}});
    }
    return {{"figure_id", std::string(to_string(fig.id))}, {"caption", fig.caption}, {"rows", rows}};
}

FigureData figure_from_json(const json& j) {
    try {
        FigureData fig;
        const auto id = parse_figure_id(j.at("figure_id").get<std::string>());
        if (!id) throw Error(ErrorKind::Parse, "unknown figure_id");
        fig.id = *id;
        fig.caption = j.at("caption").get<std::string>();
        for (const auto& r : j.at("rows")) {
            FigureRow row{r.at("group").get<std::string>(), r.at("category").get<std::string>(), std::nullopt};
            if (!r.at("value").is_null()) row.value = r.at("value").get<double>();
            fig.rows.push_back(std::move(row));
        }
        return fig;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("figure json: ") + e.what());
    }
}

FigureData read_figure_csv(std::istream& in, FigureId id, std::string caption) {
    const csv::Table table = csv::parse(in);
    if (table.header != std::vector<std::string>{"group", "category", "value"}) {
        throw Error(ErrorKind::Schema, "figure csv header must be group,category,value");
    }
    FigureData fig{id, std::move(caption), {}};
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        if (row.size() != 3) {
            throw Error(ErrorKind::Parse, "figure csv line " + std::to_string(table.line_numbers[i]) + ": expected 3 fields");
        }
        FigureRow out{row[0], row[1], std::nullopt};
        if (!row[2].empty()) {
            out.value = csv::parse_double(row[2]);
            if (!out.value) {
                throw Error(ErrorKind::Parse, "figure csv line " + std::to_string(table.line_numbers[i]) + ": bad value");
            }
        }
        fig.rows.push_back(std::move(out));
    }
    return fig;
}

void write_figure(const std::filesystem::path& dir, const FigureData& fig) {
    std::filesystem::create_directories(dir);
    const std::string stem = "fig_" + std::string(to_string(fig.id));
    std::ofstream csv_out(dir / (stem + ".csv"), std::ios::binary);
    write_figure_csv(csv_out, fig);
    std::ofstream json_out(dir / (stem + ".json"), std::ios::binary);
    json_out << figure_to_json(fig).dump(2) << '\n';
    if (!csv_out || !json_out) throw Error(ErrorKind::Io, "cannot write figure files under " + dir.string());
}

ScreenSummary summarize_screen(std::span<const ScreenRow> screen) {
    ScreenSummary s;
    std::size_t defined = 0;
    bool all_below = true;
    for (const auto& r : screen) {
        if (r.scope != kPooledScope) continue;
        ++s.cells;
        if (!r.correlation) {
            ++s.missing;
            continue;
        }
        ++defined;
        s.max_r2 = std::max(s.max_r2, r.correlation->r_squared);
        if (!(r.correlation->r_squared < 0.20)) all_below = false;
    }
    s.all_cod_below_020 = defined > 0 && all_below;
    return s;
}

std::string screen_summary_text(std::span<const ScreenRow> screen) {
    std::ostringstream out;
    for (auto p : screen_pollutants(screen)) {
        const ScreenRow* best = nullptr;
        for (auto m : kAllMeasures) {
            const ScreenRow* row = pooled_row(screen, m, p);
            if (row && row->correlation && (!best || row->correlation->r_squared > best->correlation->r_squared)) {
                best = row;
            }
        }
        out << to_string(p) << ": ";
        if (best) {
            out << "strongest measure " << to_string(best->measure) << " (r=" << csv::format_double(best->correlation->r)
                << ", R2=" << csv::format_double(best->correlation->r_squared) << ", "
                << to_string(best->correlation->band) << ")\n";
        } else {
            out << "no defined pooled correlation\n";
        }
    }
    const ScreenSummary s = summarize_screen(screen);
    out << "pooled cells: " << s.cells << ", missing: " << s.missing << ", max R2: " << csv::format_double(s.max_r2)
        << '\n';
    out << "all measures CoD < 0.20: " << (s.all_cod_below_020 ? "yes" : "no") << '\n';
    return out.str();
}

std::string benchmark_summary_text(const EvalReport& report) {
    std::ostringstream out;
    for (auto p : kAllPollutants) {
        const auto rows = report.for_pollutant(p);
        if (rows.empty()) continue;
        const EvalRow* best = nullptr;
        std::size_t failed = 0;
        for (const auto* r : rows) {
            if (!r->rmse) {
                ++failed;
                continue;
            }
            if (!best || r->rmse->mean < best->rmse->mean) best = r;
        }
        out << to_string(p) << ": ";
        if (best) {
            out << "best " << to_string(best->kind) << " [" << best->scope
                << "] rmse_mean=" << csv::format_double(best->rmse->mean);
            if (best->relative_error) out << " relative_error=" << csv::format_double(*best->relative_error);
        } else {
            out << "no successful cell";
        }
        if (failed > 0) out << ", " << failed << " failed";
        out << '\n';
    }
    for (const auto& r : report.rows) {
        if (!r.rmse) out << "failed " << to_string(r.pollutant) << '/' << to_string(r.kind) << " [" << r.scope << "]: " << r.error << '\n';
    }
    return out.str();
}

}  // namespace aqlock
