#pragma once

#include "sparsebar/rng.hpp"

namespace sparsebar {

enum class QuantGrid { linear, logarithmic };

// How a hidden layer produces its non-inverted output: through a second
// physical inverter, or as the exact negation of the inverted signal.
enum class Regeneration { cascaded, ideal };

// Memristor and neuron-supply parameters. Conductances are in µS, voltages in V.
struct DeviceParams {
    double sigma_min = 0.12;
    double sigma_max = 7.9;
    double vdd = 0.5;
    double write_threshold = 4.0;  // recorded only
    double vtc_gain = 20.0;        // 1/V
    QuantGrid quant_grid = QuantGrid::linear;
    Regeneration regeneration = Regeneration::cascaded;

    double half_vdd() const noexcept { return 0.5 * vdd; }
    double span() const noexcept { return sigma_max - sigma_min; }

    // Throws ConfigError when the invariants do not hold.
    void validate() const;
};

// sigma_min + (sigma_max - sigma_min) * logistic(theta). Throws on non-finite theta.
double theta_to_conductance(double theta, const DeviceParams& p);

// d sigma / d theta, always positive.
double conductance_derivative(double theta, const DeviceParams& p);

struct Quantized {
    double value;
    bool clamped;  // input was outside [sigma_min, sigma_max]
};

// Nearest of 2^bits levels spanning [sigma_min, sigma_max], endpoints included.
Quantized quantize_conductance(double sigma, int bits, const DeviceParams& p);

// sigma * (1 + eps), eps ~ N(0, rel_noise^2), clamped to the device range.
double perturb_conductance(double sigma, double rel_noise, Rng& rng, const DeviceParams& p);

}  // namespace sparsebar
