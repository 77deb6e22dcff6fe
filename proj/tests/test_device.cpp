#include "doctest.h"

#include <cmath>
#include <limits>
#include <set>

#include "sparsebar/device.hpp"
#include "sparsebar/error.hpp"

using namespace sparsebar;

TEST_CASE("g1 maps every finite theta into the device range") {
    const DeviceParams p;
    CHECK(theta_to_conductance(0.0, p) == doctest::Approx(0.5 * (0.12 + 7.9)));
    for (double t : {-1e6, -40.0, -3.0, 0.1, 3.0, 40.0, 1e6}) {
        const double s = theta_to_conductance(t, p);
        CHECK(s >= p.sigma_min);
        CHECK(s <= p.sigma_max);
    }
    CHECK(theta_to_conductance(-1e6, p) == doctest::Approx(p.sigma_min));
    CHECK(theta_to_conductance(1e6, p) == doctest::Approx(p.sigma_max));
    CHECK_THROWS_AS(theta_to_conductance(std::numeric_limits<double>::quiet_NaN(), p), ConfigError);
    CHECK_THROWS_AS(theta_to_conductance(std::numeric_limits<double>::infinity(), p), ConfigError);
}

TEST_CASE("g1 derivative matches central differences") {
    const DeviceParams p;
    for (double t : {-4.0, -1.0, 0.0, 0.7, 3.5}) {
        const double h = 1e-6;
        const double fd = (theta_to_conductance(t + h, p) - theta_to_conductance(t - h, p)) / (2 * h);
        CHECK(conductance_derivative(t, p) == doctest::Approx(fd).epsilon(1e-7));
        CHECK(conductance_derivative(t, p) > 0.0);
    }
}

TEST_CASE("device parameter validation") {
    DeviceParams p;
    p.validate();
    p.sigma_min = 8.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = {};
    p.vtc_gain = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = {};
    p.vdd = -1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("linear quantization uses 2^bits levels including both ends") {
    const DeviceParams p;
    std::set<double> levels;
    for (int i = 0; i <= 2000; ++i) {
        const double s = p.sigma_min + p.span() * i / 2000.0;
        levels.insert(quantize_conductance(s, 4, p).value);
    }
    CHECK(levels.size() == 16);
    CHECK(*levels.begin() == p.sigma_min);
    CHECK(*levels.rbegin() == p.sigma_max);
    const double step = p.span() / 15.0;
    for (double s : {0.5, 2.0, 5.0}) CHECK(std::abs(quantize_conductance(s, 4, p).value - s) <= 0.5 * step + 1e-12);

    const auto q = quantize_conductance(9.0, 4, p);
    CHECK(q.clamped);
    CHECK(q.value == p.sigma_max);
    CHECK_THROWS_AS(quantize_conductance(1.0, 0, p), ConfigError);
}

TEST_CASE("logarithmic quantization spaces levels geometrically") {
    DeviceParams p;
    p.quant_grid = QuantGrid::logarithmic;
    std::set<double> levels;
    for (int i = 0; i <= 4000; ++i) levels.insert(quantize_conductance(p.sigma_min + p.span() * i / 4000.0, 3, p).value);
    REQUIRE(levels.size() == 8);
    std::vector<double> v(levels.begin(), levels.end());
    for (std::size_t k = 1; k + 1 < v.size(); ++k) CHECK(v[k + 1] / v[k] == doctest::Approx(v[k] / v[k - 1]));
}

TEST_CASE("perturbation is an identity at zero noise and stays in range") {
    const DeviceParams p;
    Rng rng(5);
    CHECK(perturb_conductance(3.3, 0.0, rng, p) == 3.3);
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double s = perturb_conductance(4.0, 0.1, rng, p);
        CHECK(s >= p.sigma_min);
        CHECK(s <= p.sigma_max);
        sum += s;
    }
    CHECK(sum / n == doctest::Approx(4.0).epsilon(0.01));
    CHECK_THROWS_AS(perturb_conductance(1.0, -0.1, rng, p), ConfigError);
}
