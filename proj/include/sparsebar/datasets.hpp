#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sparsebar/device.hpp"

namespace sparsebar {

// Samples x features, row-major, with class labels in [0, class_count).
struct Dataset {
    std::string name;
    std::size_t feature_count = 0;
    std::size_t class_count = 0;
    std::vector<double> features;
    std::vector<std::size_t> labels;
    std::vector<std::string> class_names;     // may be empty (numeric labels)
    std::vector<std::string> feature_names;   // may be empty

    std::size_t size() const noexcept { return labels.size(); }
    std::span<const double> sample(std::size_t i) const {
        return {features.data() + i * feature_count, feature_count};
    }
    Dataset subset(std::span<const std::size_t> indices) const;
};

// Which CSV columns to read.
struct TabularSchema {
    std::string label_column;
    std::vector<std::string> feature_columns;  // empty: every other column, in file order
};

struct LoadStats {
    std::size_t rows_read = 0;
    std::size_t rows_dropped_missing = 0;
};

// CSV with a header row. Empty, "?", "NA" and "NaN" fields count as missing
// and drop the row. Malformed rows raise DataError listing line numbers.
// Class indices follow the sorted order of distinct label strings.
Dataset load_tabular(const std::filesystem::path& path, const TabularSchema& schema, LoadStats* stats = nullptr);

// Standard IDX image/label pair. With `downsample`, 28x28 images are reduced
// to 14x14 by non-overlapping 2x2 means. Raw pixel values (0..255) are kept.
Dataset load_mnist(const std::filesystem::path& images, const std::filesystem::path& labels, bool downsample);

// 2x2 mean pooling of one row-major image of even dimensions.
std::vector<double> mean_pool_2x2(std::span<const double> image, std::size_t rows, std::size_t cols);

// Per-feature affine map of [min, max] onto [-vdd/2, +vdd/2]. Degenerate
// features (max <= min) map to 0. Values outside the fitted range are
// clamped onto the rails.
class VoltageNormalizer {
public:
    VoltageNormalizer() = default;
    VoltageNormalizer(std::vector<double> mins, std::vector<double> maxs, double vdd);

    static VoltageNormalizer fit(const Dataset& data, const DeviceParams& device);

    Dataset apply(const Dataset& data) const;
    double to_voltage(std::size_t feature, double raw) const;
    double to_raw(std::size_t feature, double volts) const;

    const std::vector<double>& mins() const noexcept { return mins_; }
    const std::vector<double>& maxs() const noexcept { return maxs_; }
    double vdd() const noexcept { return vdd_; }

private:
    std::vector<double> mins_;
    std::vector<double> maxs_;
    double vdd_ = 0.5;
};

// Fits on `dataset` and maps it. Test data should go through the training
// set's normalizer instead.
Dataset normalize_to_voltage(const Dataset& dataset, const DeviceParams& device);

struct Split {
    Dataset train;
    Dataset test;
};

// Seeded shuffle, then the first round(train_fraction * n) samples train.
Split split(const Dataset& dataset, double train_fraction, std::uint64_t seed);

// Indices behind split(); exposed for checking partitions.
std::vector<std::size_t> split_order(std::size_t n, std::uint64_t seed);
std::size_t train_count(std::size_t n, double train_fraction);

}  // namespace sparsebar
