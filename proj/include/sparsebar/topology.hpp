#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sparsebar {

// Layer sizes N_1..N_L of a feed-forward network; junction j (0-based here)
// connects layer j to layer j+1.
class NetworkTopology {
public:
    explicit NetworkTopology(std::vector<std::size_t> layer_sizes);

    const std::vector<std::size_t>& layer_sizes() const noexcept { return layers_; }
    std::size_t layer_count() const noexcept { return layers_.size(); }
    std::size_t junction_count() const noexcept { return layers_.size() - 1; }
    std::size_t inputs(std::size_t junction) const { return layers_.at(junction); }
    std::size_t outputs(std::size_t junction) const { return layers_.at(junction + 1); }

    // "4-4-3"
    std::string to_string() const;

    friend bool operator==(const NetworkTopology&, const NetworkTopology&) = default;

private:
    std::vector<std::size_t> layers_;
};

// Binary connection matrix of one junction. Rows are succeeding-layer
// neurons, columns are preceding-layer neurons. Biases are not represented.
class MaskMatrix {
public:
    MaskMatrix() = default;
    MaskMatrix(std::size_t rows, std::size_t cols, std::uint8_t fill = 0);

    static MaskMatrix full(std::size_t rows, std::size_t cols) { return MaskMatrix(rows, cols, 1); }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool at(std::size_t r, std::size_t c) const { return bits_[r * cols_ + c] != 0; }
    void set(std::size_t r, std::size_t c, bool on) { bits_[r * cols_ + c] = on ? 1 : 0; }

    std::size_t popcount() const noexcept;
    std::size_t row_sum(std::size_t r) const;
    std::size_t col_sum(std::size_t c) const;
    std::vector<std::size_t> row_indices(std::size_t r) const;

    // True when every row sum and every column sum is equal.
    bool is_structured() const;
    // Common fan-in / fan-out; only meaningful when is_structured().
    std::size_t fan_in() const { return rows_ ? row_sum(0) : 0; }
    std::size_t fan_out() const { return cols_ ? col_sum(0) : 0; }

    friend bool operator==(const MaskMatrix&, const MaskMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::uint8_t> bits_;
};

// W_j / (N_j * N_{j+1}).
double junction_density(const MaskMatrix& mask);

struct FeasibleDensity {
    double density;
    std::size_t fan_out;
    std::size_t fan_in;
};

// Every density admitting integer fan-out and fan-in, ascending.
std::vector<FeasibleDensity> feasible_densities(std::size_t n_prev, std::size_t n_next);

// Resolves a requested density to its exact fan-out. Throws ConfigError
// naming the nearest feasible densities when none matches within 1e-9.
FeasibleDensity resolve_density(std::size_t n_prev, std::size_t n_next, double density);

// Fan-balanced mask: every input drives exactly FO outputs and every output
// receives exactly FI inputs. Pure function of its arguments.
MaskMatrix generate_structured_mask(std::size_t n_prev, std::size_t n_next, double density,
                                    std::uint64_t seed);

// Comparison generator without fan balance: exactly round(D * N_j * N_{j+1})
// connections chosen uniformly (at least one).
MaskMatrix generate_unstructured_mask(std::size_t n_prev, std::size_t n_next, double density,
                                      std::uint64_t seed);

// One crossbar tile: a set of output neurons sharing the same input set.
struct SubArray {
    std::vector<std::size_t> outputs;
    std::vector<std::size_t> inputs;
};

struct SubArrayPartition {
    std::vector<SubArray> blocks;
    std::size_t max_rows = 0;  // inputs per tile
    std::size_t max_cols = 0;  // outputs per tile
};

SubArrayPartition partition_subarrays(const MaskMatrix& mask, std::size_t max_rows, std::size_t max_cols);

// Mask text format:
//   mask <junction> <n_next> <n_prev>
//   <n_next lines of n_prev '0'/'1' characters>
// `junction` is 1-based in the text.
void write_mask(std::ostream& os, const MaskMatrix& mask, std::size_t junction);
// Reads one mask block; returns the junction number through `junction`.
MaskMatrix read_mask(std::istream& is, std::size_t& junction);

}  // namespace sparsebar
