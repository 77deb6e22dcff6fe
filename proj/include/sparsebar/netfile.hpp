#pragma once

// Versioned flat text file for trained networks.
//
//   sparsebar-network 1
//   kind conductance|theta
//   topology <N_1> ... <N_L>
//   device <key> <value> ...
//   mask ...                          (one block per junction, mask format)
//   table <junction> p|n              (one line per succeeding neuron: the
//   ...                                present entries in column order, bias last)
//   normalizer <features>             (optional)
//   min ... / max ...
//   train <key> <value> ...           (optional, theta checkpoints)
//   end
//
// Conductance tables carry 9 significant digits (µS); theta tables are
// written losslessly.

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "sparsebar/circuit.hpp"
#include "sparsebar/datasets.hpp"
#include "sparsebar/training.hpp"

namespace sparsebar {

enum class CheckpointKind { conductance, theta };

struct Checkpoint {
    CheckpointKind kind = CheckpointKind::conductance;
    NetworkStructure structure;
    JunctionValues values;
    DeviceParams device;
    std::optional<VoltageNormalizer> normalizer;
    std::optional<TrainConfig> train_config;

    // For theta checkpoints the conductances come from the range map.
    ConductanceNetwork conductance_network() const;
    // Throws ConfigError for conductance checkpoints.
    ThetaParams theta_params() const;
};

void write_network(std::ostream& os, const ConductanceNetwork& net,
                   const std::optional<VoltageNormalizer>& normalizer = std::nullopt);
void write_checkpoint(std::ostream& os, const ThetaParams& theta, const DeviceParams& device, const TrainConfig& config,
                      const std::optional<VoltageNormalizer>& normalizer = std::nullopt);

Checkpoint read_checkpoint(std::istream& is);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace sparsebar
