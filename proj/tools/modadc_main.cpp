// Command-line front end: simulate | recover | bench | psd | calib-table.
// Exit code 0 on success; on failure a machine-readable JSON error
// {experiment_id, stage, message} goes to stderr.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "modadc/harness.hpp"

namespace {

using namespace modadc;

void apply_overrides(ExperimentConfig& cfg, const std::string& out, bool seed_set,
                     std::uint64_t seed) {
    if (!out.empty()) cfg.output_dir = out;
    if (seed_set) {
        cfg.seed = seed;
        cfg.loop.noise_seed = seed;
    }
}

void print_report(const std::string& id, const MetricsReport& rep) {
    std::cout << id << ":";
    if (rep.snr_r_db) std::cout << " snr_r=" << *rep.snr_r_db << " dB";
    if (rep.of) std::cout << " of=" << *rep.of;
    if (rep.sinad_db) std::cout << " sinad=" << *rep.sinad_db << " dB";
    if (rep.noise_floor_delta_db)
        std::cout << " noise_floor_delta=" << *rep.noise_floor_delta_db << " dB";
    std::cout << "\n";
}

int fail_json(const std::string& id, const std::string& stage, const std::string& message) {
    nlohmann::json err{{"experiment_id", id}, {"stage", stage}, {"message", message}};
    std::cerr << err.dump() << "\n";
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"modulo-ADC loop simulator and recovery bench"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int parallel = 1;

    auto add_common = [&](CLI::App* sub, bool needs_config = true) {
        if (needs_config)
            sub->add_option("--config", config_path, "experiment/suite JSON")->required();
        sub->add_option("--out", out_dir, "override output directory");
        sub->add_option("--seed", seed, "override seed")->each([&](const std::string&) {
            seed_set = true;
        });
    };

    CLI::App* c_sim = app.add_subcommand("simulate", "run the folding loop, write trace CSVs");
    add_common(c_sim);
    CLI::App* c_rec = app.add_subcommand("recover", "full pipeline: loop, recovery, metrics");
    add_common(c_rec);
    CLI::App* c_bench = app.add_subcommand("bench", "run a benchmark suite");
    add_common(c_bench);
    c_bench->add_option("--parallel", parallel, "worker threads");
    CLI::App* c_psd = app.add_subcommand("psd", "pipeline with PSD output");
    add_common(c_psd);
    CLI::App* c_cal = app.add_subcommand("calib-table", "emit the calibration sweep table");
    double cal_lambda = 0.1, cal_step = 0.18;
    int cal_rows = 10;
    std::string cal_out = "calib_table.csv";
    c_cal->add_option("--lambda", cal_lambda, "fold threshold, volts");
    c_cal->add_option("--step", cal_step, "hardware step product, volts");
    c_cal->add_option("--rows", cal_rows, "number of C_f rows");
    c_cal->add_option("--out", cal_out, "output CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_cal->parsed()) {
            write_calib_table(cal_lambda, cal_step, cal_rows, cal_out);
            std::cout << "wrote " << cal_out << "\n";
            return 0;
        }
        if (c_bench->parsed()) {
            BenchmarkSuite suite = load_suite_file(config_path);
            if (!out_dir.empty()) suite.output_dir = out_dir;
            if (seed_set) suite.seed = seed;
            std::string table = run_suite(suite, parallel);
            std::cout << "wrote " << table << "\n";
            return 0;
        }

        ExperimentConfig cfg = load_experiment_file(config_path);
        apply_overrides(cfg, out_dir, seed_set, seed);
        if (c_sim->parsed()) {
            ContinuousSignal sig = make_signal(cfg.signal);
            LoopConfig loop = cfg.loop;
            loop.record_ticks = true;
            FoldTrace trace = run_loop(sig, loop, cfg.duration);
            std::filesystem::create_directories(cfg.output_dir);
            write_trace_csv(trace, cfg.output_dir + "/trace.csv");
            write_adc_csv(trace, cfg.output_dir + "/adc_samples.csv");
            write_overfold_csv(trace.overfold_events, cfg.output_dir + "/overfold_events.csv");
            std::cout << cfg.id << ": " << trace.adc.size() << " samples, "
                      << trace.overfold_events.size() << " overfold events\n";
            return 0;
        }
        if (c_psd->parsed()) {
            bool has_psd = false;
            for (const std::string& m : cfg.metrics) has_psd |= (m == "psd");
            if (!has_psd) cfg.metrics.push_back("psd");
        }
        MetricsReport rep = run_experiment(cfg);
        print_report(cfg.id, rep);
        return 0;
    } catch (const HarnessError& e) {
        return fail_json(e.experiment_id, e.stage, e.message);
    } catch (const std::exception& e) {
        return fail_json("", "cli", e.what());
    }
}
