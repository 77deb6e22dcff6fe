#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sparsebar/device.hpp"
#include "sparsebar/network.hpp"

namespace sparsebar {

// Programmed crossbar: two memristors (p, n) per present weight plus a bias
// pair per succeeding neuron. Conductances in µS.
struct ConductanceNetwork {
    NetworkStructure structure;
    JunctionValues sigma;
    DeviceParams device;

    // Throws ConfigError when shapes disagree or a conductance is out of range.
    void validate() const;
};

// Voltages of one evaluation. Layer signals are stored extended: entry N_l
// is the bias input (+vdd/2 on the p side, -vdd/2 on the n side).
struct ForwardTrace {
    std::vector<std::vector<double>> vp;   // layers 0..L-2, size N_l + 1
    std::vector<std::vector<double>> vn;
    std::vector<std::vector<double>> net;  // per junction, size N_{j+1}
    std::vector<double> output;            // N_L
};

// Inverter transfer curve: -(vdd/2) * tanh(gain * v).
double inverter_vtc(double v, const DeviceParams& p);
double inverter_vtc_slope(double v, const DeviceParams& p);

// Node voltages of one junction by the closed-form divider; xp/xn are
// extended input signals (bias last).
void crossbar_node_voltages(const JunctionLayout& layout, const PolarityPair& sigma,
                            std::span<const double> xp, std::span<const double> xn,
                            std::span<double> v_net);

// Fills the extended signal pair of an input layer from single-ended values.
void load_input(std::span<const double> input, const DeviceParams& p, std::vector<double>& xp,
                std::vector<double>& xn);

// Activation of one layer from its node voltages. Hidden layers write the
// extended differential pair; the output layer writes single-ended values.
void activate_hidden(std::span<const double> net, const DeviceParams& p, std::vector<double>& vp,
                     std::vector<double>& vn);
void activate_output(std::span<const double> net, const DeviceParams& p, std::vector<double>& out);

// Throws ConfigError on a length mismatch. The trace is reused across calls.
void forward_circuit(const ConductanceNetwork& net, std::span<const double> input, ForwardTrace& trace);
ForwardTrace forward_circuit(const ConductanceNetwork& net, std::span<const double> input);

// Index of the largest output; ties go to the lowest index.
std::size_t classify(std::span<const double> outputs);

struct MemristorCount {
    std::vector<std::size_t> per_junction;
    std::size_t total = 0;
};

// 2 per present weight plus a bias pair per succeeding neuron.
MemristorCount memristor_count(const NetworkTopology& topology, const std::vector<MaskMatrix>& masks);

// Inverters in the circuit: two per hidden neuron, one per output neuron.
std::size_t inverter_count(const NetworkTopology& topology);

struct PowerBreakdown {
    double crossbar_uw = 0.0;
    double inverter_uw = 0.0;
    double total_uw() const noexcept { return crossbar_uw + inverter_uw; }
};

// Static power of a completed evaluation. Crossbar term: sum over present
// memristors of (V_source - V_net)^2 * sigma; V^2 * µS gives µW.
PowerBreakdown static_power(const ConductanceNetwork& net, const ForwardTrace& trace, double inverter_power_uw);

}  // namespace sparsebar
