#include "sparsebar/circuit.hpp"

#include <cassert>
#include <cmath>
#include <string>

#include "sparsebar/error.hpp"
#include "sparsebar/kernels.hpp"

namespace sparsebar {

void ConductanceNetwork::validate() const {
    device.validate();
    if (sigma.size() != structure.junction_count()) throw ConfigError("conductance tables do not match junction count");
    for (std::size_t j = 0; j < sigma.size(); ++j) {
        const auto& pair = sigma[j];
        if (pair.p.size() != structure.layout(j).entries() || pair.n.size() != pair.p.size())
            throw ConfigError("junction " + std::to_string(j + 1) + ": conductance table size mismatch");
        for (std::size_t k = 0; k < pair.size(); ++k)
            for (double s : {pair.p[k], pair.n[k]})
                if (!(s >= device.sigma_min && s <= device.sigma_max))
                    throw ConfigError("junction " + std::to_string(j + 1) + ": conductance " + std::to_string(s) +
                                      " µS outside device range");
    }
}

double inverter_vtc(double v, const DeviceParams& p) {
    return -p.half_vdd() * std::tanh(p.vtc_gain * v);
}

double inverter_vtc_slope(double v, const DeviceParams& p) {
    const double t = std::tanh(p.vtc_gain * v);
    return -p.half_vdd() * p.vtc_gain * (1.0 - t * t);
}

void crossbar_node_voltages(const JunctionLayout& layout, const PolarityPair& sigma,
                            std::span<const double> xp, std::span<const double> xn,
                            std::span<double> v_net) {
    for (std::size_t r = 0; r < layout.outputs; ++r) {
        const std::size_t b = layout.row_begin[r];
        const auto s = kernels::row_sums(layout.column.data() + b, sigma.p.data() + b, sigma.n.data() + b,
                                         xp.data(), xn.data(), layout.row_size(r));
        // Bias pair is always present, so the row conductance is positive.
        assert(s.total > 0.0);
        v_net[r] = s.weighted / s.total;
    }
}

void load_input(std::span<const double> input, const DeviceParams& p, std::vector<double>& xp,
                std::vector<double>& xn) {
    xp.resize(input.size() + 1);
    xn.resize(input.size() + 1);
    for (std::size_t i = 0; i < input.size(); ++i) {
        xp[i] = input[i];
        xn[i] = -input[i];
    }
    xp.back() = p.half_vdd();
    xn.back() = -p.half_vdd();
}

void activate_hidden(std::span<const double> net, const DeviceParams& p, std::vector<double>& vp,
                     std::vector<double>& vn) {
    vp.resize(net.size() + 1);
    vn.resize(net.size() + 1);
    for (std::size_t i = 0; i < net.size(); ++i) {
        vn[i] = inverter_vtc(net[i], p);
        vp[i] = p.regeneration == Regeneration::cascaded ? inverter_vtc(vn[i], p) : -vn[i];
    }
    vp.back() = p.half_vdd();
    vn.back() = -p.half_vdd();
}

void activate_output(std::span<const double> net, const DeviceParams& p, std::vector<double>& out) {
    out.resize(net.size());
    for (std::size_t i = 0; i < net.size(); ++i) out[i] = inverter_vtc(net[i], p);
}

void forward_circuit(const ConductanceNetwork& net, std::span<const double> input, ForwardTrace& trace) {
    const auto& topo = net.structure.topology();
    if (input.size() != topo.inputs(0))
        throw ConfigError("input has " + std::to_string(input.size()) + " values, network expects " +
                          std::to_string(topo.inputs(0)));
    const std::size_t junctions = topo.junction_count();
    trace.vp.resize(junctions);
    trace.vn.resize(junctions);
    trace.net.resize(junctions);
    load_input(input, net.device, trace.vp[0], trace.vn[0]);
    for (std::size_t j = 0; j < junctions; ++j) {
        trace.net[j].resize(topo.outputs(j));
        crossbar_node_voltages(net.structure.layout(j), net.sigma[j], trace.vp[j], trace.vn[j], trace.net[j]);
        if (j + 1 < junctions)
            activate_hidden(trace.net[j], net.device, trace.vp[j + 1], trace.vn[j + 1]);
        else
            activate_output(trace.net[j], net.device, trace.output);
    }
}

ForwardTrace forward_circuit(const ConductanceNetwork& net, std::span<const double> input) {
    ForwardTrace t;
    forward_circuit(net, input, t);
    return t;
}

std::size_t classify(std::span<const double> outputs) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < outputs.size(); ++i)
        if (outputs[i] > outputs[best]) best = i;
    return best;
}

MemristorCount memristor_count(const NetworkTopology& topology, const std::vector<MaskMatrix>& masks) {
    if (masks.size() != topology.junction_count()) throw ConfigError("mask count does not match topology");
    MemristorCount c;
    for (std::size_t j = 0; j < masks.size(); ++j) {
        const std::size_t n = 2 * masks[j].popcount() + 2 * topology.outputs(j);
        c.per_junction.push_back(n);
        c.total += n;
    }
    return c;
}

std::size_t inverter_count(const NetworkTopology& topology) {
    const auto& layers = topology.layer_sizes();
    std::size_t n = layers.back();
    for (std::size_t l = 1; l + 1 < layers.size(); ++l) n += 2 * layers[l];
    return n;
}

PowerBreakdown static_power(const ConductanceNetwork& net, const ForwardTrace& trace, double inverter_power_uw) {
    PowerBreakdown pw;
    for (std::size_t j = 0; j < net.structure.junction_count(); ++j) {
        const auto& layout = net.structure.layout(j);
        const auto& sg = net.sigma[j];
        for (std::size_t r = 0; r < layout.outputs; ++r) {
            const std::size_t b = layout.row_begin[r];
            pw.crossbar_uw += kernels::row_branch_power(layout.column.data() + b, sg.p.data() + b, sg.n.data() + b,
                                                        trace.vp[j].data(), trace.vn[j].data(), trace.net[j][r],
                                                        layout.row_size(r));
        }
    }
    pw.inverter_uw = static_cast<double>(inverter_count(net.structure.topology())) * inverter_power_uw;
    return pw;
}

}  // namespace sparsebar
