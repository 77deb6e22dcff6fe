#include "sparsebar/topology.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "sparsebar/error.hpp"
#include "sparsebar/rng.hpp"

namespace sparsebar {

NetworkTopology::NetworkTopology(std::vector<std::size_t> layer_sizes) : layers_(std::move(layer_sizes)) {
    if (layers_.size() < 2) throw ConfigError("network needs at least two layers");
    for (std::size_t n : layers_)
        if (n == 0) throw ConfigError("layer sizes must be positive");
}

std::string NetworkTopology::to_string() const {
    std::string s;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (i) s += '-';
        s += std::to_string(layers_[i]);
    }
    return s;
}

MaskMatrix::MaskMatrix(std::size_t rows, std::size_t cols, std::uint8_t fill)
    : rows_(rows), cols_(cols), bits_(rows * cols, fill ? 1 : 0) {}

std::size_t MaskMatrix::popcount() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::size_t MaskMatrix::row_sum(std::size_t r) const {
    const auto* row = bits_.data() + r * cols_;
    return static_cast<std::size_t>(std::count(row, row + cols_, std::uint8_t{1}));
}

std::size_t MaskMatrix::col_sum(std::size_t c) const {
    std::size_t s = 0;
    for (std::size_t r = 0; r < rows_; ++r) s += bits_[r * cols_ + c];
    return s;
}

std::vector<std::size_t> MaskMatrix::row_indices(std::size_t r) const {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < cols_; ++c)
        if (at(r, c)) out.push_back(c);
    return out;
}

bool MaskMatrix::is_structured() const {
    if (rows_ == 0 || cols_ == 0) return false;
    const std::size_t fi = row_sum(0);
    const std::size_t fo = col_sum(0);
    for (std::size_t r = 1; r < rows_; ++r)
        if (row_sum(r) != fi) return false;
    for (std::size_t c = 1; c < cols_; ++c)
        if (col_sum(c) != fo) return false;
    return cols_ * fo == rows_ * fi;
}

double junction_density(const MaskMatrix& mask) {
    return static_cast<double>(mask.popcount()) / static_cast<double>(mask.rows() * mask.cols());
}

std::vector<FeasibleDensity> feasible_densities(std::size_t n_prev, std::size_t n_next) {
    std::vector<FeasibleDensity> out;
    if (n_prev == 0 || n_next == 0) return out;
    for (std::size_t fo = 1; fo <= n_next; ++fo) {
        if ((n_prev * fo) % n_next != 0) continue;
        out.push_back({static_cast<double>(fo) / static_cast<double>(n_next), fo, n_prev * fo / n_next});
    }
    return out;
}

FeasibleDensity resolve_density(std::size_t n_prev, std::size_t n_next, double density) {
    const auto options = feasible_densities(n_prev, n_next);
    if (!(density > 0.0 && density <= 1.0)) {
        std::ostringstream msg;
        msg << "density " << density << " outside (0, 1]";
        throw ConfigError(msg.str());
    }
    for (const auto& f : options)
        if (std::abs(f.density - density) <= 1e-9) return f;

    // Nearest neighbours on either side.
    const FeasibleDensity* below = nullptr;
    const FeasibleDensity* above = nullptr;
    for (const auto& f : options) {
        if (f.density < density) below = &f;
        if (f.density > density && !above) above = &f;
    }
    std::ostringstream msg;
    msg << "density " << density << " is infeasible for a " << n_prev << "->" << n_next
        << " junction (fan-out " << density * static_cast<double>(n_next) << " is not an integer "
        << "with integer fan-in); nearest feasible:";
    if (below) msg << ' ' << below->density;
    if (above) msg << ' ' << above->density;
    throw ConfigError(msg.str());
}

MaskMatrix generate_structured_mask(std::size_t n_prev, std::size_t n_next, double density,
                                    std::uint64_t seed) {
    const FeasibleDensity f = resolve_density(n_prev, n_next, density);

    // Shifted window: input i feeds outputs (i*FO + k) mod n_next. The n_prev*FO
    // consecutive slots cover every residue exactly FI times.
    MaskMatrix base(n_next, n_prev);
    for (std::size_t i = 0; i < n_prev; ++i)
        for (std::size_t k = 0; k < f.fan_out; ++k) base.set((i * f.fan_out + k) % n_next, i, true);

    // Seeded relabeling of both sides keeps every row and column sum.
    Rng rng(derive_seed(seed, {n_prev, n_next, f.fan_out}));
    std::vector<std::size_t> row_perm(n_next), col_perm(n_prev);
    std::iota(row_perm.begin(), row_perm.end(), 0);
    std::iota(col_perm.begin(), col_perm.end(), 0);
    fisher_yates(row_perm, rng);
    fisher_yates(col_perm, rng);

    MaskMatrix mask(n_next, n_prev);
    for (std::size_t r = 0; r < n_next; ++r)
        for (std::size_t c = 0; c < n_prev; ++c)
            if (base.at(r, c)) mask.set(row_perm[r], col_perm[c], true);
    return mask;
}

MaskMatrix generate_unstructured_mask(std::size_t n_prev, std::size_t n_next, double density,
                                      std::uint64_t seed) {
    if (!(density > 0.0 && density <= 1.0)) throw ConfigError("density outside (0, 1]");
    const std::size_t total = n_prev * n_next;
    const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(density * static_cast<double>(total))));

    // Selection sampling: each slot is kept with probability needed/remaining.
    Rng rng(derive_seed(seed, {n_prev, n_next, keep, 0x75}));
    MaskMatrix mask(n_next, n_prev);
    std::size_t needed = keep;
    for (std::size_t s = 0; s < total && needed > 0; ++s) {
        if (uniform_index(rng, total - s) < needed) {
            mask.set(s / n_prev, s % n_prev, true);
            --needed;
        }
    }
    return mask;
}

SubArrayPartition partition_subarrays(const MaskMatrix& mask, std::size_t max_rows, std::size_t max_cols) {
    if (max_rows == 0 || max_cols == 0) throw ConfigError("sub-array limits must be positive");
    SubArrayPartition part;
    part.max_rows = max_rows;
    part.max_cols = max_cols;

    // Group outputs by identical input sets, in order of first appearance.
    std::map<std::vector<std::size_t>, std::size_t> open_block;
    for (std::size_t r = 0; r < mask.rows(); ++r) {
        auto inputs = mask.row_indices(r);
        if (inputs.size() > max_rows) {
            std::ostringstream msg;
            msg << "output " << r << " has fan-in " << inputs.size() << " > sub-array rows " << max_rows;
            throw ConfigError(msg.str());
        }
        if (inputs.empty()) continue;
        auto it = open_block.find(inputs);
        if (it != open_block.end() && part.blocks[it->second].outputs.size() < max_cols) {
            part.blocks[it->second].outputs.push_back(r);
            continue;
        }
        part.blocks.push_back({{r}, inputs});
        open_block[std::move(inputs)] = part.blocks.size() - 1;
    }
    return part;
}

void write_mask(std::ostream& os, const MaskMatrix& mask, std::size_t junction) {
    os << "mask " << junction << ' ' << mask.rows() << ' ' << mask.cols() << '\n';
    std::string line(mask.cols(), '0');
    for (std::size_t r = 0; r < mask.rows(); ++r) {
        for (std::size_t c = 0; c < mask.cols(); ++c) line[c] = mask.at(r, c) ? '1' : '0';
        os << line << '\n';
    }
}

MaskMatrix read_mask(std::istream& is, std::size_t& junction) {
    std::string header;
    if (!std::getline(is, header)) throw DataError("mask: missing header line");
    std::istringstream hs(header);
    std::string tag;
    std::size_t rows = 0, cols = 0;
    if (!(hs >> tag >> junction >> rows >> cols) || tag != "mask")
        throw DataError("mask: malformed header '" + header + "'");
    MaskMatrix mask(rows, cols);
    std::string line;
    for (std::size_t r = 0; r < rows; ++r) {
        if (!std::getline(is, line) || line.size() != cols)
            throw DataError("mask " + std::to_string(junction) + ": row " + std::to_string(r) +
                            " missing or not " + std::to_string(cols) + " characters");
        for (std::size_t c = 0; c < cols; ++c) {
            if (line[c] != '0' && line[c] != '1')
                throw DataError("mask " + std::to_string(junction) + ": invalid character in row " +
                                std::to_string(r));
            mask.set(r, c, line[c] == '1');
        }
    }
    return mask;
}

}  // namespace sparsebar
