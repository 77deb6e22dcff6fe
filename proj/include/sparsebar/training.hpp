#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sparsebar/circuit.hpp"
#include "sparsebar/datasets.hpp"
#include "sparsebar/device.hpp"
#include "sparsebar/network.hpp"

namespace sparsebar {

// How the gradient passes through the per-row normalization. `full` is the
// exact Jacobian; `diagonal` drops the cross-terms from the shared
// normalizer.
enum class G2Gradient { full, diagonal };

struct TrainConfig {
    static constexpr std::size_t kEpochCeiling = 100000;

    double learning_rate = 0.1;
    // Epoch e (1-based) uses learning_rate / (1 + lr_decay * (e - 1)).
    double lr_decay = 0.0;
    // When the epoch limit is reached, return the parameters of the epoch with
    // the best training accuracy (ties: lower mean loss) instead of the last.
    bool keep_best = true;
    std::size_t max_epochs = 10000;
    double target_accuracy = 0.98;
    std::size_t batch_size = 1;
    std::uint64_t seed = 1;
    double init_scale = 0.1;
    // One-hot targets at +/- target_level * vdd/2.
    double target_level = 0.9;
    G2Gradient g2_gradient = G2Gradient::full;

    void validate() const;
};

// Unconstrained trainable parameters, one per present memristor. Absent
// (masked) positions are not stored and read as exactly zero.
struct ThetaParams {
    NetworkStructure structure;
    JunctionValues theta;

    // Dense N_{j+1} x (N_j + 1) views, bias column last.
    std::vector<double> dense_p(std::size_t j) const { return to_dense(structure.layout(j), theta[j].p); }
    std::vector<double> dense_n(std::size_t j) const { return to_dense(structure.layout(j), theta[j].n); }
};

// Effective non-negative weights after normalization; every row sums to one.
struct MappedWeights {
    NetworkStructure structure;
    JunctionValues weight;
    std::vector<std::vector<double>> row_conductance;  // S_j per succeeding neuron, µS
};

ThetaParams init_theta(const NetworkStructure& structure, const TrainConfig& config);

ConductanceNetwork to_conductance_network(const ThetaParams& theta, const DeviceParams& device);

MappedWeights map_weights(const ThetaParams& theta, const DeviceParams& device);

// Weighted-sum evaluation with the same inverter cascade as the circuit.
void forward_abstract(const MappedWeights& weights, std::span<const double> input, const DeviceParams& device,
                      ForwardTrace& trace);
ForwardTrace forward_abstract(const MappedWeights& weights, std::span<const double> input, const DeviceParams& device);

std::vector<double> one_hot_target(std::size_t label, std::size_t classes, const DeviceParams& device, double level);

struct Gradient {
    JunctionValues d_theta;
    double loss = 0.0;  // 0.5 * sum (t - O)^2
};

// Exact gradient of the squared error w.r.t. every present theta. Throws
// DivergenceError naming the layer and neuron of a non-finite value.
Gradient backward(const ThetaParams& theta, std::span<const double> input, std::span<const double> target,
                  const DeviceParams& device, G2Gradient mode = G2Gradient::full);

// Reusable single-sample SGD update.
class SgdStepper {
public:
    SgdStepper(const NetworkStructure& structure, const DeviceParams& device, G2Gradient mode);

    // Forward, backward and theta -= eta * gradient. Returns the sample loss.
    double step(ThetaParams& theta, std::span<const double> input, std::span<const double> target, double eta);

    // Loss and gradient without updating.
    double gradient(const ThetaParams& theta, std::span<const double> input, std::span<const double> target,
                    JunctionValues& out);

private:
    void forward(const ThetaParams& theta, std::span<const double> input);
    double backprop(std::span<const double> target, JunctionValues& out);

    NetworkStructure structure_;
    DeviceParams device_;
    G2Gradient mode_;
    JunctionValues sigma_;
    std::vector<std::vector<double>> row_total_;
    ForwardTrace trace_;
    std::vector<std::vector<double>> delta_;
    std::vector<double> gxp_, gxn_;
    JunctionValues grad_;
};

enum class StopReason { target_hit, epoch_limit, diverged };
std::string to_string(StopReason r);

struct EpochRecord {
    std::size_t epoch;
    double loss;            // mean per-sample loss over the epoch
    double train_accuracy;  // after the epoch
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    std::size_t epochs_run = 0;
    StopReason stop_reason = StopReason::epoch_limit;
    std::size_t selected_epoch = 0;  // epoch whose parameters are returned
    double wall_seconds = 0.0;
    std::string divergence_message;
};

struct TrainResult {
    ThetaParams theta;
    TrainReport report;
};

// Plain per-sample SGD on voltage-domain data, reshuffled each epoch.
// Stops at target training accuracy or max_epochs; a non-finite loss
// aborts with StopReason::diverged and the last finite parameters.
TrainResult train(const Dataset& train_set, const NetworkStructure& structure, const TrainConfig& config,
                  const DeviceParams& device);

struct EvalResult {
    double accuracy = 0.0;
    std::size_t correct = 0;
    std::size_t total = 0;
    std::vector<std::size_t> confusion;  // classes x classes, row = true label
    std::vector<std::size_t> predictions;
};

EvalResult evaluate(const ThetaParams& theta, const Dataset& data, const DeviceParams& device);
EvalResult evaluate(const ConductanceNetwork& net, const Dataset& data);

}  // namespace sparsebar
