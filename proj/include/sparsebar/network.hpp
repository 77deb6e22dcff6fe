#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sparsebar/topology.hpp"

namespace sparsebar {

// Row-packed index of one junction's present entries. The bias column is
// appended as input column `inputs` and is present in every row; it is
// always the last entry of its row.
struct JunctionLayout {
    std::size_t inputs = 0;   // N_j (excluding bias)
    std::size_t outputs = 0;  // N_{j+1}
    std::vector<std::size_t> row_begin;  // outputs + 1 offsets
    std::vector<std::int32_t> column;    // extended input column per entry

    static JunctionLayout from_mask(const MaskMatrix& mask);

    std::size_t entries() const noexcept { return column.size(); }
    std::size_t row_size(std::size_t r) const { return row_begin[r + 1] - row_begin[r]; }
};

// Topology, masks and their packed layouts. Immutable once built.
class NetworkStructure {
public:
    NetworkStructure(NetworkTopology topology, std::vector<MaskMatrix> masks);

    // Fully connected structure.
    static NetworkStructure dense(const NetworkTopology& topology);

    const NetworkTopology& topology() const noexcept { return topology_; }
    const std::vector<MaskMatrix>& masks() const noexcept { return masks_; }
    const MaskMatrix& mask(std::size_t j) const { return masks_.at(j); }
    const JunctionLayout& layout(std::size_t j) const { return layouts_.at(j); }
    std::size_t junction_count() const noexcept { return masks_.size(); }

    friend bool operator==(const NetworkStructure& a, const NetworkStructure& b) {
        return a.topology_ == b.topology_ && a.masks_ == b.masks_;
    }

private:
    NetworkTopology topology_;
    std::vector<MaskMatrix> masks_;
    std::vector<JunctionLayout> layouts_;
};

// Positive- and negative-polarity values for every present entry of one
// junction, parallel to JunctionLayout::column.
struct PolarityPair {
    std::vector<double> p;
    std::vector<double> n;

    explicit PolarityPair(std::size_t entries = 0, double fill = 0.0) : p(entries, fill), n(entries, fill) {}
    std::size_t size() const noexcept { return p.size(); }
};

// Values per junction, one PolarityPair each.
using JunctionValues = std::vector<PolarityPair>;

JunctionValues make_values(const NetworkStructure& s, double fill = 0.0);

// Dense N_{j+1} x (N_j + 1) row-major expansion with zeros at absent entries.
std::vector<double> to_dense(const JunctionLayout& layout, const std::vector<double>& packed);

}  // namespace sparsebar
