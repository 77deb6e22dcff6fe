#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sparsebar/device.hpp"
#include "sparsebar/training.hpp"

namespace sparsebar {

enum class ExperimentKind { train, sweep_sparsity, variation_mc, power_report };

std::string to_string(ExperimentKind k);

enum class DatasetFormat { csv, mnist };

struct DatasetSpec {
    std::string name;
    DatasetFormat format = DatasetFormat::csv;
    std::filesystem::path path;  // csv
    std::string label_column;
    std::vector<std::string> feature_columns;
    std::filesystem::path images;  // mnist
    std::filesystem::path labels;
    bool downsample = true;
    std::size_t subset = 0;  // seeded subset of this many samples before splitting; 0 = all
    double train_fraction = 0.8;
};

struct VariationSpec {
    std::vector<double> noise_levels{0.0, 0.05, 0.10, 0.25};
    std::size_t trials = 30;
    std::optional<int> bits;
    bool perturb_before_quantize = false;  // default order: quantize, then perturb
    std::filesystem::path checkpoint;      // empty: train first
};

struct SweepSpec {
    std::vector<double> densities;  // applied at the penultimate junction
};

struct PowerSpec {
    std::filesystem::path fc_checkpoint;  // both empty: train both variants
    std::filesystem::path sparse_checkpoint;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::train;
    std::uint64_t seed = 1;
    DatasetSpec dataset;
    std::vector<std::size_t> layers;
    std::vector<double> densities;  // one per junction; empty = fully connected
    DeviceParams device;
    TrainConfig train;
    double inverter_power_uw = 0.5;
    std::size_t subarray_rows = 64;
    std::size_t subarray_cols = 64;
    VariationSpec variation;
    SweepSpec sweep;
    PowerSpec power;

    // Validates shapes and, through the topology module, density feasibility.
    void validate() const;
};

// Relative checkpoint paths resolve against `base_dir`. Relative dataset files
// resolve against $SPARSEBAR_DATA_DIR when set, else against dataset.root
// (itself relative to `base_dir`), else against `base_dir`.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical YAML echo of every resolved field.
std::string echo_config(const ExperimentConfig& config);

}  // namespace sparsebar
