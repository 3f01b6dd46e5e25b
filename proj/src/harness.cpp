#include "modadc/harness.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "modadc/calibration.hpp"
#include "modadc/csv.hpp"
#include "modadc/modulo_math.hpp"

namespace modadc {

using nlohmann::json;

HarnessError::HarnessError(std::string experiment_id_in, std::string stage_in,
                           std::string message_in)
    : std::runtime_error("experiment '" + experiment_id_in + "' [" + stage_in +
                         "]: " + message_in),
      experiment_id(std::move(experiment_id_in)),
      stage(std::move(stage_in)),
      message(std::move(message_in)) {}

namespace {

template <typename T>
void read_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

SignalSpec parse_signal(const json& j) {
    std::string type = j.at("type").get<std::string>();
    if (type == "sine") {
        SineSpec s{};
        s.amplitude = j.at("amplitude").get<double>();
        s.f_m = j.at("f_m").get<double>();
        s.phase = j.value("phase", 0.0);
        return s;
    }
    if (type == "periodic_sinc") {
        PeriodicSincSpec s{};
        s.amplitude = j.at("amplitude").get<double>();
        s.B = j.at("B").get<double>();
        s.f_m = j.at("f_m").get<double>();
        return s;
    }
    if (type == "triangular") {
        TriangularSpec s{};
        s.amplitude = j.at("amplitude").get<double>();
        s.f0 = j.at("f0").get<double>();
        return s;
    }
    if (type == "zero") {
        return ZeroSpec{j.value("f_nominal", 1e3)};
    }
    if (type == "qam" || type == "bpsk" || type == "fsk") {
        CommSpec s{};
        s.scheme = type == "qam" ? CommScheme::Qam
                                 : (type == "bpsk" ? CommScheme::Bpsk : CommScheme::Fsk);
        s.amplitude = j.at("amplitude").get<double>();
        s.symbol_rate = j.at("symbol_rate").get<double>();
        s.B = j.at("B").get<double>();
        s.num_symbols = j.at("num_symbols").get<int>();
        s.seed = j.value("seed", 0ULL);
        s.pulse_rolloff = j.value("pulse_rolloff", 0.35);
        return s;
    }
    throw std::invalid_argument("signal.type unknown: " + type);
}

CalibrationMode parse_mode(const std::string& s) {
    if (s == "ideal") return CalibrationMode::Ideal;
    if (s == "uncalibrated") return CalibrationMode::Uncalibrated;
    if (s == "calibrated") return CalibrationMode::Calibrated;
    throw std::invalid_argument("loop.calibration unknown: " + s);
}

LoopConfig parse_loop(const json& j, std::uint64_t default_seed) {
    LoopConfig c;
    read_if(j, "lambda", c.lambda);
    read_if(j, "q", c.q);
    read_if(j, "v_fs", c.v_fs);
    read_if(j, "g_total", c.g_total);
    read_if(j, "f_ctrl", c.f_ctrl);
    read_if(j, "f_adc", c.f_adc);
    read_if(j, "adc_phase_deg", c.adc_phase_deg);
    read_if(j, "hysteresis", c.hysteresis);
    read_if(j, "comparator_delay", c.comparator_delay);
    read_if(j, "loop_delay_cycles", c.loop_delay_cycles);
    read_if(j, "adc_latency", c.adc_latency);
    read_if(j, "wait_cycles", c.wait_cycles);
    read_if(j, "adc_bits", c.adc_bits);
    read_if(j, "adc_full_scale", c.adc_full_scale);
    read_if(j, "analog_ticks_per_cycle", c.analog_ticks_per_cycle);
    if (j.contains("calibration")) c.calibration = parse_mode(j.at("calibration"));
    read_if(j, "undercomp_margin", c.undercomp_margin);
    read_if(j, "noise_rms", c.noise_rms);
    read_if(j, "noise_bandwidth", c.noise_bandwidth);
    c.noise_seed = default_seed;
    read_if(j, "noise_seed", c.noise_seed);
    read_if(j, "overfold_margin", c.overfold_margin);
    return c;
}

RecoveryAlgorithm parse_algorithm(const std::string& s) {
    if (s == "direct") return RecoveryAlgorithm::Direct;
    if (s == "usf_high_order") return RecoveryAlgorithm::UsfHighOrder;
    if (s == "rsod") return RecoveryAlgorithm::RSoD;
    if (s == "first_order_iter") return RecoveryAlgorithm::FirstOrderIter;
    throw std::invalid_argument("recovery.algorithm unknown: " + s);
}

RecoveryConfig parse_recovery(const json& j) {
    RecoveryConfig c;
    if (j.contains("algorithm")) c.algorithm = parse_algorithm(j.at("algorithm"));
    read_if(j, "order_n", c.order_n);
    read_if(j, "max_iters", c.max_iters);
    read_if(j, "tol", c.tol);
    read_if(j, "strict", c.strict);
    return c;
}

ExperimentConfig parse_experiment(const json& j) {
    int version = j.value("schema_version", 0);
    if (version != 1) throw std::invalid_argument("schema_version must be 1");
    ExperimentConfig cfg;
    read_if(j, "id", cfg.id);
    read_if(j, "seed", cfg.seed);
    read_if(j, "output_dir", cfg.output_dir);
    cfg.duration = j.at("duration").get<double>();
    read_if(j, "write_trace", cfg.write_trace);
    cfg.signal = parse_signal(j.at("signal"));
    cfg.loop = parse_loop(j.value("loop", json::object()), cfg.seed);
    if (j.contains("recovery")) {
        cfg.recovery = parse_recovery(j.at("recovery"));
        cfg.recovery_omega = j.at("recovery").value("omega", 0.0);
    }
    if (j.contains("metrics")) cfg.metrics = j.at("metrics").get<std::vector<std::string>>();
    if (j.contains("psd_params")) {
        cfg.psd_segment_len = j.at("psd_params").value("segment_len", cfg.psd_segment_len);
        cfg.psd_overlap = j.at("psd_params").value("overlap", cfg.psd_overlap);
    }
    if (j.contains("psd_compare")) {
        const json& p = j.at("psd_compare");
        cfg.psd_compare.enabled = p.value("enabled", true);
        read_if(p, "bits", cfg.psd_compare.bits);
        read_if(p, "band_lo", cfg.psd_compare.band_lo);
        read_if(p, "band_hi", cfg.psd_compare.band_hi);
    }
    if (j.contains("calib_table")) {
        const json& p = j.at("calib_table");
        cfg.calib_table.enabled = p.value("enabled", true);
        read_if(p, "lambda", cfg.calib_table.lambda);
        read_if(p, "step_product", cfg.calib_table.step_product);
        read_if(p, "rows", cfg.calib_table.rows);
    }
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool wants(const ExperimentConfig& cfg, const std::string& metric) {
    for (const std::string& m : cfg.metrics)
        if (m == metric) return true;
    return false;
}

}  // namespace

ExperimentConfig parse_experiment_json(const std::string& text) {
    try {
        return parse_experiment(json::parse(text));
    } catch (const HarnessError&) {
        throw;
    } catch (const std::exception& e) {
        throw HarnessError("<config>", "config", e.what());
    }
}

ExperimentConfig load_experiment_file(const std::string& path) {
    return parse_experiment_json(slurp(path));
}

BenchmarkSuite parse_suite_json(const std::string& text) {
    try {
        json j = json::parse(text);
        int version = j.value("schema_version", 0);
        if (version != 1) throw std::invalid_argument("schema_version must be 1");
        BenchmarkSuite suite;
        read_if(j, "output_dir", suite.output_dir);
        read_if(j, "seed", suite.seed);
        for (const json& a : j.at("algorithms")) {
            SuiteAlgorithm alg;
            alg.cfg = parse_recovery(a);
            alg.name = a.value("name", std::string(to_string(alg.cfg.algorithm)));
            alg.f_adc_override = a.value("f_adc", 0.0);
            suite.algorithms.push_back(alg);
        }
        if (suite.algorithms.empty()) throw std::invalid_argument("suite.algorithms empty");
        for (const json& r : j.at("rows")) {
            json row = r;
            row["schema_version"] = 1;
            if (!row.contains("seed")) row["seed"] = suite.seed;
            ExperimentConfig cfg = parse_experiment(row);
            cfg.write_trace = r.value("write_trace", false);
            suite.rows.push_back(cfg);
        }
        if (suite.rows.empty()) throw std::invalid_argument("suite.rows empty");
        return suite;
    } catch (const HarnessError&) {
        throw;
    } catch (const std::exception& e) {
        throw HarnessError("<suite>", "config", e.what());
    }
}

BenchmarkSuite load_suite_file(const std::string& path) { return parse_suite_json(slurp(path)); }

MetricsReport run_experiment(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    auto fail = [&](const char* stage, const std::exception& e) -> HarnessError {
        return HarnessError(cfg.id, stage, e.what());
    };

    MetricsReport report;
    try {
        fs::create_directories(cfg.output_dir);
    } catch (const std::exception& e) {
        throw fail("io", e);
    }

    if (cfg.calib_table.enabled) {
        try {
            write_calib_table(cfg.calib_table.lambda, cfg.calib_table.step_product,
                              cfg.calib_table.rows, cfg.output_dir + "/calib_table.csv");
        } catch (const std::exception& e) {
            throw fail("calibration", e);
        }
    }

    ContinuousSignal signal = [&] {
        try {
            return make_signal(cfg.signal);
        } catch (const std::exception& e) {
            throw fail("signal", e);
        }
    }();

    LoopConfig loop = cfg.loop;
    loop.record_ticks = cfg.write_trace;
    FoldTrace trace = [&] {
        try {
            return run_loop(signal, loop, cfg.duration);
        } catch (const std::exception& e) {
            throw fail("loop", e);
        }
    }();

    std::vector<double> y_hat(trace.adc.size());
    std::vector<long long> c_f(trace.adc.size());
    std::vector<double> ideal(trace.adc.size());
    for (std::size_t k = 0; k < trace.adc.size(); ++k) {
        y_hat[k] = trace.adc[k].volts;
        c_f[k] = trace.adc[k].c_f;
        ideal[k] = signal.eval(trace.adc[k].t_k);
    }

    RecoveryInput rin;
    rin.y_hat = y_hat;
    rin.lambda = trace.config.lambda;
    rin.f_s = trace.config.f_adc;
    rin.omega = cfg.recovery_omega > 0.0
                    ? cfg.recovery_omega
                    : std::max(signal.bandlimit_omega(),
                               trace.config.noise_rms > 0.0 ? trace.config.noise_bandwidth : 0.0);
    rin.c_f_at_sample = c_f;
    // Quantization plus the in-flight excursion can leave |y_hat| above
    // lambda; allow for both.
    rin.tolerance = std::max(0.5 * rin.lambda,
                             2.0 * trace.config.adc_full_scale / std::ldexp(1.0, loop.adc_bits));

    RecoveredSignal rec = [&] {
        try {
            return recover(rin, cfg.recovery);
        } catch (const std::exception& e) {
            throw fail("recovery", e);
        }
    }();

    try {
        if (wants(cfg, "snr_r")) {
            double ps = 0.0, pe = 0.0;
            auto skip = static_cast<std::size_t>(rec.boundary_skip);
            for (std::size_t k = skip; k < ideal.size() - skip; ++k) {
                double e = ideal[k] - rec.g_tilde[k];
                ps += ideal[k] * ideal[k];
                pe += e * e;
            }
            if (ps == 0.0) {
                report.snr_r_db = pe == 0.0 ? std::numeric_limits<double>::infinity()
                                            : -std::numeric_limits<double>::infinity();
            } else {
                report.snr_r_db = snr_r(ideal, rec.g_tilde, skip);
            }
        }
        if (wants(cfg, "of")) {
            report.of = oversampling_factor(trace.config.f_adc, 2.0 * signal.bandlimit_omega());
        }
        if (wants(cfg, "sinad")) {
            const auto* s = std::get_if<SineSpec>(&cfg.signal);
            if (s == nullptr)
                throw std::invalid_argument("sinad metric requires a sine signal");
            report.sinad_db = sinad(rec.g_tilde, trace.config.f_adc, s->f_m);
        }
        if (wants(cfg, "psd") || cfg.psd_compare.enabled) {
            report.psd = psd(rec.g_tilde, trace.config.f_adc, cfg.psd_segment_len, cfg.psd_overlap);
        }
        if (cfg.psd_compare.enabled) {
            // Conventional path: the same samples quantized by an ADC whose
            // full scale is matched to the input amplitude (no folding).
            double fs_conv = signal.amplitude_bound();
            std::vector<double> conv(ideal.size());
            for (std::size_t k = 0; k < ideal.size(); ++k)
                conv[k] = quantize(ideal[k], cfg.psd_compare.bits, fs_conv).volts;
            auto psd_conv =
                psd(conv, trace.config.f_adc, cfg.psd_segment_len, cfg.psd_overlap);
            report.noise_floor_delta_db =
                noise_floor_delta(psd_conv, report.psd,
                                  {cfg.psd_compare.band_lo, cfg.psd_compare.band_hi});
            write_psd_csv(psd_conv, cfg.output_dir + "/psd_conventional.csv");
        }
    } catch (const HarnessError&) {
        throw;
    } catch (const std::exception& e) {
        throw fail("metrics", e);
    }

    try {
        if (cfg.write_trace && trace.ticks_recorded)
            write_trace_csv(trace, cfg.output_dir + "/trace.csv");
        write_adc_csv(trace, cfg.output_dir + "/adc_samples.csv");
        write_overfold_csv(trace.overfold_events, cfg.output_dir + "/overfold_events.csv");
        write_recovery_csv(rin, rec, cfg.output_dir + "/recovery.csv");
        if (!report.psd.empty()) write_psd_csv(report.psd, cfg.output_dir + "/psd.csv");
        write_metrics_csv(report, cfg.output_dir + "/metrics.csv");
    } catch (const std::exception& e) {
        throw fail("io", e);
    }
    return report;
}

std::string run_suite(const BenchmarkSuite& suite, int parallelism) {
    if (parallelism < 1) throw HarnessError("<suite>", "config", "parallelism must be >= 1");
    namespace fs = std::filesystem;
    fs::create_directories(suite.output_dir);

    struct Cell {
        std::string of_text = "-";
        std::string snr_text = "-";
    };
    std::size_t n_rows = suite.rows.size();
    std::size_t n_algs = suite.algorithms.size();
    std::vector<Cell> cells(n_rows * n_algs);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            std::size_t r = i / n_algs;
            std::size_t a = i % n_algs;
            ExperimentConfig cfg = suite.rows[r];
            const SuiteAlgorithm& alg = suite.algorithms[a];
            cfg.id = cfg.id + "." + alg.name;
            cfg.output_dir = suite.output_dir + "/" + suite.rows[r].id + "/" + alg.name;
            cfg.recovery = alg.cfg;
            if (alg.f_adc_override > 0.0) cfg.loop.f_adc = alg.f_adc_override;
            cfg.metrics = {"snr_r", "of"};
            try {
                MetricsReport rep = run_experiment(cfg);
                if (rep.of) cells[i].of_text = fmt_f2(*rep.of);
                if (rep.snr_r_db)
                    cells[i].snr_text =
                        std::isinf(*rep.snr_r_db) ? "inf" : fmt_f2(*rep.snr_r_db);
            } catch (const HarnessError& e) {
                cells[i].of_text = "FAIL(" + e.stage + ")";
                cells[i].snr_text = "FAIL(" + e.stage + ")";
            }
        }
    };
    std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(parallelism), cells.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t + 1 < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();

    std::string table_path = suite.output_dir + "/bench_table.csv";
    CsvWriter w(table_path);
    std::string header = "id,signal,rho";
    for (const SuiteAlgorithm& alg : suite.algorithms)
        header += "," + alg.name + "_of," + alg.name + "_snr_r_db";
    w.raw_line(header);
    for (std::size_t r = 0; r < n_rows; ++r) {
        ContinuousSignal sig = make_signal(suite.rows[r].signal);
        double rho_val = sig.amplitude_bound() / suite.rows[r].loop.lambda;
        std::string line = suite.rows[r].id + "," + sig.name() + "," + fmt_f2(rho_val);
        for (std::size_t a = 0; a < n_algs; ++a) {
            const Cell& c = cells[r * n_algs + a];
            line += "," + c.of_text + "," + c.snr_text;
        }
        w.raw_line(line);
    }
    return table_path;
}

void write_calib_table(double lambda, double step_product, int rows, const std::string& path) {
    if (rows < 1) throw std::invalid_argument("calib table rows must be >= 1");
    auto p = CalibrationParams::from_step(lambda, step_product);
    CsvWriter w(path);
    w.raw_line("C_f,ideal_v,raw_v,calibrated_v");
    for (int c = 1; c <= rows; ++c) {
        std::string line = std::to_string(c);
        line += ',';
        line += fmt_g17(ideal_feedback(c, lambda));
        line += ',';
        line += fmt_g17(raw_feedback(c, p));
        line += ',';
        line += fmt_g17(calibrated_feedback(c, p));
        w.raw_line(line);
    }
}

}  // namespace modadc
