#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "sparsebar/network.hpp"
#include "sparsebar/rng.hpp"
#include "sparsebar/topology.hpp"
#include "sparsebar/training.hpp"

namespace sparsebar::test {

// Random feasible density for an n_prev -> n_next junction.
inline double random_density(std::size_t n_prev, std::size_t n_next, Rng& rng) {
    const auto options = feasible_densities(n_prev, n_next);
    return options[uniform_index(rng, options.size())].density;
}

// Random topology with `layers` layers of 1..max_width neurons and a random
// feasible structured mask per junction.
inline NetworkStructure random_structure(Rng& rng, std::size_t layers, std::size_t max_width) {
    std::vector<std::size_t> sizes(layers);
    for (auto& s : sizes) s = 1 + uniform_index(rng, max_width);
    const NetworkTopology topo(sizes);
    std::vector<MaskMatrix> masks;
    for (std::size_t j = 0; j < topo.junction_count(); ++j) {
        const double d = random_density(topo.inputs(j), topo.outputs(j), rng);
        masks.push_back(generate_structured_mask(topo.inputs(j), topo.outputs(j), d, rng()));
    }
    return NetworkStructure(topo, std::move(masks));
}

inline ThetaParams random_theta(const NetworkStructure& s, Rng& rng, double scale) {
    std::normal_distribution<double> normal(0.0, scale);
    ThetaParams t{s, make_values(s)};
    for (auto& pair : t.theta)
        for (std::size_t k = 0; k < pair.size(); ++k) {
            pair.p[k] = normal(rng);
            pair.n[k] = normal(rng);
        }
    return t;
}

inline std::vector<double> random_input(std::size_t n, Rng& rng, double amplitude) {
    std::vector<double> x(n);
    for (auto& v : x) v = uniform(rng, -amplitude, amplitude);
    return x;
}

}  // namespace sparsebar::test
