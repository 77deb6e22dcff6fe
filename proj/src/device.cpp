#include "sparsebar/device.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "sparsebar/error.hpp"

namespace sparsebar {
namespace {

double logistic(double x) {
    // Evaluated on the side that cannot overflow.
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void require_finite(double theta) {
    if (!std::isfinite(theta)) throw ConfigError("theta must be finite");
}

}  // namespace

void DeviceParams::validate() const {
    if (!(sigma_min > 0.0 && sigma_min < sigma_max))
        throw ConfigError("device: need 0 < sigma_min < sigma_max");
    if (!(vdd > 0.0)) throw ConfigError("device: vdd must be positive");
    if (!(vtc_gain > 0.0)) throw ConfigError("device: vtc_gain must be positive");
}

double theta_to_conductance(double theta, const DeviceParams& p) {
    require_finite(theta);
    return p.sigma_min + p.span() * logistic(theta);
}

double conductance_derivative(double theta, const DeviceParams& p) {
    require_finite(theta);
    const double s = logistic(theta);
    return p.span() * s * (1.0 - s);
}

Quantized quantize_conductance(double sigma, int bits, const DeviceParams& p) {
    if (bits < 1 || bits > 30) throw ConfigError("quantization bits must be in [1, 30]");
    Quantized q{std::clamp(sigma, p.sigma_min, p.sigma_max), sigma < p.sigma_min || sigma > p.sigma_max};
    const double steps = std::ldexp(1.0, bits) - 1.0;

    if (p.quant_grid == QuantGrid::linear) {
        const double level = std::round((q.value - p.sigma_min) / p.span() * steps);
        q.value = level == steps ? p.sigma_max : p.sigma_min + p.span() * (level / steps);
    } else {
        const double lmin = std::log(p.sigma_min);
        const double lspan = std::log(p.sigma_max) - lmin;
        const double level = std::round((std::log(q.value) - lmin) / lspan * steps);
        q.value = level == 0.0     ? p.sigma_min
                  : level == steps ? p.sigma_max
                                   : std::exp(lmin + lspan * (level / steps));
    }
    return q;
}

double perturb_conductance(double sigma, double rel_noise, Rng& rng, const DeviceParams& p) {
    if (!(rel_noise >= 0.0)) throw ConfigError("noise level must be non-negative");
    if (rel_noise == 0.0) return sigma;
    std::normal_distribution<double> eps(0.0, rel_noise);
    return std::clamp(sigma * (1.0 + eps(rng)), p.sigma_min, p.sigma_max);
}

}  // namespace sparsebar
