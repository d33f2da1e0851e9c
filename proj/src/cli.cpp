#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aqlock/error.hpp"
#include "aqlock/pipeline.hpp"
#include "aqlock/synth.hpp"

namespace aqlock::pipeline {

namespace fs = std::filesystem;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Lockdown measures vs. air-pollutant density: ingestion, screening and forecasting benchmark"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    std::vector<std::string> overrides;

    auto add_common = [&](CLI::App* cmd, bool with_config) {
        if (with_config) cmd->add_option("--config", config_path, "Pipeline config (JSON)")->required();
        cmd->add_option("--out", out_dir, "Output directory (overrides config and AQLOCK_OUT)");
        cmd->add_option("--seed", seed, "Global seed");
        cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1, 1024));
        cmd->add_option("--set", overrides, "Config override key=value (repeatable)");
    };
    CLI::App* ingest = app.add_subcommand("ingest", "Build per-city period datasets");
    add_common(ingest, true);
    CLI::App* screen = app.add_subcommand("screen", "Correlate and align measures against pollutant series");
    add_common(screen, true);
    CLI::App* bench = app.add_subcommand("benchmark", "Train and score every configured model kind");
    add_common(bench, true);

    CLI::App* synth_cmd = app.add_subcommand("synth", "Write a synthetic four-city input tree");
    std::string profile = "linear";
    std::string layout = "both";
    double noise = 0.01;
    int year = 2020;
    double missing_rate = 0.0;
    synth_cmd->add_option("--out", out_dir, "Directory to write")->required();
    synth_cmd->add_option("--seed", seed, "Generator seed");
    synth_cmd->add_option("--profile", profile, "linear or null")->check(CLI::IsMember({"linear", "null"}));
    synth_cmd->add_option("--noise", noise, "Relative per-pixel noise")->check(CLI::Range(0.0, 1.0));
    synth_cmd->add_option("--format", layout, "grids, density or both")->check(CLI::IsMember({"grids", "density", "both"}));
    synth_cmd->add_option("--year", year, "Calendar year")->check(CLI::Range(1900, 2200));
    synth_cmd->add_option("--missing-rate", missing_rate, "Probability of a period without acquisition")
        ->check(CLI::Range(0.0, 0.99));

    CLI::App* predict = app.add_subcommand("predict", "Forecast next-period density with a saved model");
    std::string model_path;
    std::optional<std::string> input_csv;
    predict->add_option("--model", model_path, "Model JSON written by benchmark")->required();
    predict->add_option("--input", input_csv, "CSV with the 10 input columns");
    predict->add_option("--config", config_path, "Config whose ingested datasets supply the inputs");
    predict->add_option("--out", out_dir, "Output directory of the ingested datasets");
    predict->add_option("--set", overrides, "Config override key=value (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        LoadOptions load;
        load.overrides = overrides;
        if (out_dir) load.output_dir = fs::path(*out_dir);
        load.seed = seed;
        load.jobs = jobs;
        if (*ingest) return cmd_ingest(load_config(config_path, load), out);
        if (*screen) return cmd_screen(load_config(config_path, load), out);
        if (*bench) return cmd_benchmark(load_config(config_path, load), out);
        if (*synth_cmd) {
            synth::Options opts;
            opts.seed = seed.value_or(0);
            opts.profile = *synth::parse_profile(profile);
            opts.noise = noise;
            opts.year = year;
            opts.missing_period_rate = missing_rate;
            const auto world = synth::generate(opts);
            const auto mode = layout == "grids" ? synth::Layout::grids
                              : layout == "density" ? synth::Layout::density
                                                    : synth::Layout::both;
            fs::create_directories(*out_dir);
            synth::write(world, *out_dir, mode);
            out << "wrote " << world.cities.size() << " synthetic cities (" << profile << ", seed " << opts.seed
                << ") to " << *out_dir << '\n';
            return 0;
        }
        if (*predict) {
            std::optional<PipelineConfig> cfg;
            if (!config_path.empty()) cfg = load_config(config_path, load);
            PredictRequest req{model_path, std::nullopt};
            if (input_csv) req.input_csv = fs::path(*input_csv);
            return cmd_predict(cfg, req, out);
        }
    } catch (const Error& e) {
        err << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

}  // namespace aqlock::pipeline
