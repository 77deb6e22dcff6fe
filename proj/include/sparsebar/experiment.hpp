#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sparsebar/circuit.hpp"
#include "sparsebar/config.hpp"
#include "sparsebar/datasets.hpp"
#include "sparsebar/training.hpp"

namespace sparsebar {

inline constexpr const char* kToolVersion = "1.0.0";

struct PreparedData {
    Dataset train;  // voltage domain
    Dataset test;
    VoltageNormalizer normalizer;  // fitted on the training part
    LoadStats load_stats;
};

Dataset load_dataset(const DatasetSpec& spec, LoadStats* stats = nullptr);
// load -> optional seeded subset -> split -> normalize with train statistics.
PreparedData prepare_data(const ExperimentConfig& config, std::uint64_t seed);
// Test split only, normalized with an existing normalizer.
Dataset prepare_test_data(const ExperimentConfig& config, std::uint64_t seed, const VoltageNormalizer& normalizer);

// One structured mask per junction; junction j uses derive_seed(seed, j).
std::vector<MaskMatrix> build_masks(const NetworkTopology& topology, const std::vector<double>& densities,
                                    std::uint64_t seed);

// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

struct TrainedRun {
    TrainResult result;
    EvalResult test;
    MemristorCount memristors;
    PowerBreakdown mean_power;  // over the test set, via the circuit
};

TrainedRun train_and_evaluate(const ExperimentConfig& config, const PreparedData& data,
                              const std::vector<double>& densities, std::uint64_t seed);

// Mean static power of a programmed network over a dataset.
PowerBreakdown mean_static_power(const ConductanceNetwork& net, const Dataset& data, double inverter_power_uw);

struct SweepRow {
    double density = 0.0;
    std::size_t fan_out = 0;
    std::size_t fan_in = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double test_accuracy = 0.0;
    std::size_t epochs = 0;
    std::string stop_reason;
    std::size_t memristors = 0;
    double crossbar_power_uw = 0.0;
};

// One trained run per density at the penultimate junction (junction J-1);
// point k uses derive_seed(config.seed, k). Failures are recorded per row.
std::vector<SweepRow> sweep_sparsity(const ExperimentConfig& config, std::size_t threads);

struct VariationLevel {
    double noise = 0.0;
    std::vector<double> accuracies;  // per trial
    double mean = 0.0;
    double stddev = 0.0;
    double min = 0.0;
};

struct VariationResult {
    double clean_accuracy = 0.0;
    std::vector<VariationLevel> levels;
};

// Trial t of level l perturbs every conductance with the stream
// derive_seed(seed, {l, t}); results do not depend on execution order.
VariationResult variation_mc(const ConductanceNetwork& net, const Dataset& test, const VariationSpec& spec,
                             std::uint64_t seed, std::size_t threads);

// Applies one trial's write quantization and variation to a copy of `net`.
ConductanceNetwork perturbed_network(const ConductanceNetwork& net, const VariationSpec& spec, double noise, Rng& rng);

struct PowerVariant {
    std::string name;
    std::vector<double> densities;
    MemristorCount memristors;
    PowerBreakdown mean_power;
    double test_accuracy = 0.0;
    std::vector<double> crossbar_per_sample;
};

struct PowerComparison {
    PowerVariant fc;
    PowerVariant sparse;
    std::size_t sparse_lower_count = 0;  // test inputs where sparse crossbar power < FC
    double crossbar_reduction = 0.0;     // fractions
    double total_reduction = 0.0;
    double memristor_reduction = 0.0;
};

// Throws ConfigError when the two networks differ in layer sizes.
PowerComparison compare_power(const ConductanceNetwork& fc, const ConductanceNetwork& sparse, const Dataset& test,
                              double inverter_power_uw);

// Published reference wattages (HSPICE) for the four benchmark structures;
// attached to reports as annotations only.
struct PowerReference {
    const char* dataset;
    const char* structure;
    double fc_uw;
    double sparse_uw;
};
std::optional<PowerReference> power_reference(const std::string& dataset_name);

struct RunOptions {
    std::filesystem::path out_dir;
    std::size_t threads = 1;
    std::filesystem::path checkpoint;  // eval
};

// Executes the configured experiment, writes report.json and CSVs under
// out_dir, and returns the report. Exit status travels in report["exit_code"].
nlohmann::json run(const ExperimentConfig& config, const RunOptions& options);
nlohmann::json run_eval(const ExperimentConfig& config, const RunOptions& options);

}  // namespace sparsebar
