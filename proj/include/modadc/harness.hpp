// Experiment front end: versioned JSON configs drive the
// signal -> loop -> recovery -> metrics pipeline and emit fixed-format CSVs.
// A benchmark suite runs a grid of rows x algorithms, optionally in
// parallel; outputs are byte-identical regardless of parallelism.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "modadc/loop_sim.hpp"
#include "modadc/metrics.hpp"
#include "modadc/recovery.hpp"
#include "modadc/signals.hpp"

namespace modadc {

// Carries the machine-readable error triple the CLI prints on stderr.
class HarnessError : public std::runtime_error {
  public:
    HarnessError(std::string experiment_id, std::string stage, std::string message);
    const std::string experiment_id;
    const std::string stage;
    const std::string message;
};

struct PsdCompareConfig {
    bool enabled = false;
    int bits = 7;          // conventional-path quantizer, input scaled to its full scale
    double band_lo = 5e3;  // Hz
    double band_hi = 45e3;
};

struct CalibTableConfig {
    bool enabled = false;
    double lambda = 0.1;
    double step_product = 0.18;  // hardware step G*2^q*V_LSB
    int rows = 10;
};

struct ExperimentConfig {
    std::string id = "experiment";
    SignalSpec signal = SineSpec{1.0, 1e3, 0.0};
    LoopConfig loop;
    RecoveryConfig recovery;
    double recovery_omega = 0.0;  // 0 -> signal bandlimit (plus noise band if any)
    std::vector<std::string> metrics = {"snr_r", "of"};
    std::string output_dir = "out";
    std::uint64_t seed = 1;
    double duration = 0.0;  // seconds, required
    bool write_trace = true;
    std::size_t psd_segment_len = 4096;
    double psd_overlap = 0.5;
    PsdCompareConfig psd_compare;
    CalibTableConfig calib_table;
};

struct SuiteAlgorithm {
    std::string name;
    RecoveryConfig cfg;
    double f_adc_override = 0.0;  // 0 -> row's f_adc
};

struct BenchmarkSuite {
    std::string output_dir = "bench_out";
    std::uint64_t seed = 1;
    std::vector<SuiteAlgorithm> algorithms;
    std::vector<ExperimentConfig> rows;
};

ExperimentConfig parse_experiment_json(const std::string& text);
ExperimentConfig load_experiment_file(const std::string& path);
BenchmarkSuite parse_suite_json(const std::string& text);
BenchmarkSuite load_suite_file(const std::string& path);

// Runs one experiment, writes its CSVs under cfg.output_dir, and returns the
// computed metrics. Module errors are rethrown as HarnessError with the
// experiment id and stage attached.
MetricsReport run_experiment(const ExperimentConfig& cfg);

// Runs every (row, algorithm) cell, writes per-cell outputs plus the suite
// table; returns the table path. Cell failures are recorded in the table and
// do not abort the suite.
std::string run_suite(const BenchmarkSuite& suite, int parallelism);

// C_f = 1..rows table of ideal / raw / calibrated feedback voltages.
void write_calib_table(double lambda, double step_product, int rows, const std::string& path);

}  // namespace modadc
