#include "sparsebar/network.hpp"

#include <string>

#include "sparsebar/error.hpp"

namespace sparsebar {

JunctionLayout JunctionLayout::from_mask(const MaskMatrix& mask) {
    JunctionLayout l;
    l.inputs = mask.cols();
    l.outputs = mask.rows();
    l.row_begin.reserve(l.outputs + 1);
    l.column.reserve(mask.popcount() + l.outputs);
    l.row_begin.push_back(0);
    for (std::size_t r = 0; r < l.outputs; ++r) {
        for (std::size_t c = 0; c < l.inputs; ++c)
            if (mask.at(r, c)) l.column.push_back(static_cast<std::int32_t>(c));
        l.column.push_back(static_cast<std::int32_t>(l.inputs));
        l.row_begin.push_back(l.column.size());
    }
    return l;
}

NetworkStructure::NetworkStructure(NetworkTopology topology, std::vector<MaskMatrix> masks)
    : topology_(std::move(topology)), masks_(std::move(masks)) {
    if (masks_.size() != topology_.junction_count())
        throw ConfigError("expected " + std::to_string(topology_.junction_count()) + " masks, got " +
                          std::to_string(masks_.size()));
    for (std::size_t j = 0; j < masks_.size(); ++j) {
        if (masks_[j].rows() != topology_.outputs(j) || masks_[j].cols() != topology_.inputs(j))
            throw ConfigError("mask " + std::to_string(j + 1) + " does not match layer sizes " +
                              topology_.to_string());
        layouts_.push_back(JunctionLayout::from_mask(masks_[j]));
    }
}

NetworkStructure NetworkStructure::dense(const NetworkTopology& topology) {
    std::vector<MaskMatrix> masks;
    for (std::size_t j = 0; j < topology.junction_count(); ++j)
        masks.push_back(MaskMatrix::full(topology.outputs(j), topology.inputs(j)));
    return NetworkStructure(topology, std::move(masks));
}

JunctionValues make_values(const NetworkStructure& s, double fill) {
    JunctionValues v;
    v.reserve(s.junction_count());
    for (std::size_t j = 0; j < s.junction_count(); ++j) v.emplace_back(s.layout(j).entries(), fill);
    return v;
}

std::vector<double> to_dense(const JunctionLayout& layout, const std::vector<double>& packed) {
    const std::size_t width = layout.inputs + 1;
    std::vector<double> dense(layout.outputs * width, 0.0);
    for (std::size_t r = 0; r < layout.outputs; ++r)
        for (std::size_t k = layout.row_begin[r]; k < layout.row_begin[r + 1]; ++k)
            dense[r * width + static_cast<std::size_t>(layout.column[k])] = packed[k];
    return dense;
}

}  // namespace sparsebar
