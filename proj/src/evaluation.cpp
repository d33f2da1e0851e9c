#include "aqlock/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

#include "aqlock/csv.hpp"
#include "aqlock/error.hpp"
#include "aqlock/parallel.hpp"
#include "aqlock/rng.hpp"
#include "aqlock/similarity.hpp"

namespace aqlock {

using nlohmann::json;

std::string_view to_string(SplitMode mode) { return mode == SplitMode::chronological ? "chronological" : "random"; }

std::optional<SplitMode> parse_split_mode(std::string_view name) {
    if (name == "chronological") return SplitMode::chronological;
    if (name == "random") return SplitMode::random;
    return std::nullopt;
}

std::string_view to_string(PoolingMode mode) { return mode == PoolingMode::pooled ? "pooled" : "per_city"; }

std::optional<PoolingMode> parse_pooling_mode(std::string_view name) {
    if (name == "pooled") return PoolingMode::pooled;
    if (name == "per_city") return PoolingMode::per_city;
    return std::nullopt;
}

namespace {

std::size_t test_count(std::size_t n, double fraction) {
    // The epsilon keeps e.g. 0.7 * 10 = 7.000000000000001 from rounding up to 8.
    return static_cast<std::size_t>(std::ceil(static_cast<double>(n) * fraction - 1e-9));
}

}  // namespace

TrainTest split(const SupervisedSet& set, const SplitSpec& spec) {
    if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
        throw Error(ErrorKind::Config, "test_fraction must lie in (0,1)");
    }
    const std::size_t n = set.rows();
    if (n < 5) throw Error(ErrorKind::InsufficientData, "split needs at least 5 rows, got " + std::to_string(n));
    std::vector<bool> is_test(n, false);
    if (spec.mode == SplitMode::chronological) {
        std::vector<std::string> order;
        std::map<std::string, std::vector<std::size_t>> by_city;
        for (std::size_t i = 0; i < n; ++i) {
            auto& rows = by_city[set.row_provenance[i].city_name];
            if (rows.empty()) order.push_back(set.row_provenance[i].city_name);
            rows.push_back(i);
        }
        for (const auto& city : order) {
            auto rows = by_city[city];
            std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
                return set.row_provenance[a].period_index < set.row_provenance[b].period_index;
            });
            const std::size_t k = std::min(test_count(rows.size(), spec.test_fraction), rows.size());
            for (std::size_t j = rows.size() - k; j < rows.size(); ++j) is_test[rows[j]] = true;
        }
    } else {
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        SplitMix64 rng(spec.seed);
        rng.shuffle(std::span<std::size_t>(perm));
        const std::size_t k = test_count(n, spec.test_fraction);
        for (std::size_t j = 0; j < k; ++j) is_test[perm[j]] = true;
    }
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < n; ++i) (is_test[i] ? test_rows : train_rows).push_back(i);
    if (test_rows.empty() || train_rows.empty()) {
        throw Error(ErrorKind::InsufficientData, "split leaves an empty train or test part");
    }
    return {set.select(train_rows), set.select(test_rows)};
}

RmseResult rmse(const Matrix& predictions, const Matrix& targets) {
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols()) {
        throw Error(ErrorKind::Shape, "prediction and target shapes differ");
    }
    if (predictions.rows() < 1 || predictions.cols() != 2) throw Error(ErrorKind::Shape, "rmse needs M x 2 with M >= 1");
    const auto m = static_cast<double>(predictions.rows());
    const Matrix d = predictions - targets;
    RmseResult r;
    r.mean = std::sqrt(d.col(0).squaredNorm() / m);
    r.std = std::sqrt(d.col(1).squaredNorm() / m);
    r.joint = std::sqrt((r.mean * r.mean + r.std * r.std) / 2.0);
    return r;
}

bool EvalReport::any_failure() const {
    return std::any_of(rows.begin(), rows.end(), [](const EvalRow& r) { return !r.rmse.has_value(); });
}

std::vector<const EvalRow*> EvalReport::for_pollutant(PollutantKind p) const {
    std::vector<const EvalRow*> out;
    for (const auto& r : rows) {
        if (r.pollutant == p) out.push_back(&r);
    }
    return out;
}

BenchmarkResult run_benchmark(std::span<const CityDataset> cities, std::span<const PollutantKind> pollutants,
                              std::span<const ModelSpec> specs, const BenchmarkOptions& options) {
    std::vector<PollutantKind> pols(pollutants.begin(), pollutants.end());
    std::sort(pols.begin(), pols.end());
    pols.erase(std::unique(pols.begin(), pols.end()), pols.end());
    std::vector<std::size_t> spec_order(specs.size());
    std::iota(spec_order.begin(), spec_order.end(), std::size_t{0});
    std::stable_sort(spec_order.begin(), spec_order.end(),
                     [&](std::size_t a, std::size_t b) { return specs[a].kind < specs[b].kind; });

    struct Group {
        PollutantKind pollutant;
        std::string scope;
        std::optional<TrainTest> parts;
        std::string error;
    };
    std::vector<std::pair<std::string, std::vector<CityDataset>>> scopes;
    if (options.pooling == PoolingMode::pooled) {
        scopes.emplace_back(std::string(kPooledScope), std::vector<CityDataset>(cities.begin(), cities.end()));
    } else {
        for (const auto& c : cities) scopes.emplace_back(c.city_name(), std::vector<CityDataset>{c});
    }
    std::vector<Group> groups;
    for (auto p : pols) {
        for (const auto& [scope, members] : scopes) {
            Group g{p, scope, std::nullopt, {}};
            try {
                g.parts = split(build_supervised(members, p), options.split);
            } catch (const Error& e) {
                g.error = std::string(to_string(e.kind())) + ": " + e.what();
            }
            groups.push_back(std::move(g));
        }
    }

    const std::size_t n_cells = groups.size() * specs.size();
    std::vector<EvalRow> rows(n_cells);
    std::vector<std::optional<TrainedModel>> fitted(n_cells);
    parallel_for(n_cells, options.jobs, [&](std::size_t cell) {
        const Group& g = groups[cell / specs.size()];
        const ModelSpec& spec = specs[spec_order[cell % specs.size()]];
        EvalRow& row = rows[cell];
        row.pollutant = g.pollutant;
        row.kind = spec.kind;
        row.scope = g.scope;
        if (!g.parts) {
            row.error = g.error;
            return;
        }
        row.n_train = g.parts->train.rows();
        row.n_test = g.parts->test.rows();
        try {
            SupervisedSet train = g.parts->train;
            Matrix test_inputs = g.parts->test.inputs;
            ScalingSpec scaling;
            if (options.scaling != ScalingMode::none) {
                scaling = fit_scaling(train, options.scaling, DegeneratePolicy::unit_scale);
                train = apply_scaling(train, scaling);
                test_inputs = apply_columns(scaling.inputs, test_inputs);
            }
            TrainedModel model = fit(spec, train, FitOptions{options.jobs});
            Matrix pred = model.predict(test_inputs);
            if (options.scaling != ScalingMode::none) pred = invert_columns(scaling.targets, pred);
            const Matrix& truth = g.parts->test.targets;
            row.rmse = rmse(pred, truth);
            const double denom = truth.col(0).cwiseAbs().mean();
            row.relative_error = denom > 0.0 ? row.rmse->mean / denom : std::numeric_limits<double>::infinity();
            if (options.keep_models) fitted[cell] = std::move(model);
        } catch (const Error& e) {
            row.error = std::string(to_string(e.kind())) + ": " + e.what();
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });

    BenchmarkResult result;
    result.report.rows = std::move(rows);
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
        if (fitted[cell]) {
            const Group& g = groups[cell / specs.size()];
            result.models.push_back({g.pollutant, g.scope, std::move(*fitted[cell])});
        }
    }
    return result;
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
    csv::write_row(out, {"pollutant", "kind", "scope", "rmse_mean", "rmse_std", "rmse_joint", "relative_error",
                         "n_train", "n_test"});
    for (const auto& r : report.rows) {
        const auto& e = r.rmse;
        csv::write_row(out, {std::string(to_string(r.pollutant)), std::string(to_string(r.kind)), r.scope,
                             e ? csv::format_double(e->mean) : "", e ? csv::format_double(e->std) : "",
                             e ? csv::format_double(e->joint) : "",
                             r.relative_error ? csv::format_double(*r.relative_error) : "",
                             std::to_string(r.n_train), std::to_string(r.n_test)});
    }
}

json report_to_json(const EvalReport& report, const json& config_echo) {
    json rows = json::array();
    for (const auto& r : report.rows) {
        json row = {{"pollutant", std::string(to_string(r.pollutant))},
                    {"kind", std::string(to_string(r.kind))},
                    {"scope", r.scope},
                    {"n_train", r.n_train},
                    {"n_test", r.n_test}};
        if (r.rmse) {
            row["rmse_mean"] = r.rmse->mean;
            row["rmse_std"] = r.rmse->std;
            row["rmse_joint"] = r.rmse->joint;
        } else {
            row["rmse_mean"] = row["rmse_std"] = row["rmse_joint"] = nullptr;
        }
        row["relative_error"] = r.relative_error && std::isfinite(*r.relative_error) ? json(*r.relative_error) : json(nullptr);
        row["error"] = r.error.empty() ? json(nullptr) : json(r.error);
        rows.push_back(std::move(row));
    }
    return {{"format", "aqlock-eval-report"}, {"version", 1}, {"config", config_echo}, {"rows", rows}};
}

}  // namespace aqlock
