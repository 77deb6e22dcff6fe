#include "doctest.h"

#include <cmath>

#include "sparsebar/error.hpp"
#include "sparsebar/training.hpp"
#include "support.hpp"

using namespace sparsebar;

namespace {

double loss_at(const ThetaParams& theta, std::span<const double> x, std::span<const double> t, const DeviceParams& d) {
    const auto trace = forward_abstract(map_weights(theta, d), x, d);
    double l = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) l += 0.5 * (t[k] - trace.output[k]) * (t[k] - trace.output[k]);
    return l;
}

}  // namespace

TEST_CASE("mapped weights obey the sum-to-one constraint and positivity") {
    Rng rng(17);
    const DeviceParams dev;
    for (int rep = 0; rep < 50; ++rep) {
        const auto s = test::random_structure(rng, 3, 10);
        const auto theta = test::random_theta(s, rng, 3.0);
        const auto w = map_weights(theta, dev);
        for (std::size_t j = 0; j < s.junction_count(); ++j) {
            const auto& layout = s.layout(j);
            for (std::size_t r = 0; r < layout.outputs; ++r) {
                double sum = 0.0;
                for (std::size_t k = layout.row_begin[r]; k < layout.row_begin[r + 1]; ++k) {
                    CHECK(w.weight[j].p[k] > 0.0);
                    CHECK(w.weight[j].n[k] > 0.0);
                    sum += w.weight[j].p[k] + w.weight[j].n[k];
                }
                CHECK(std::abs(sum - 1.0) <= 1e-12);
            }
        }
    }
}

TEST_CASE("abstract and circuit forward passes agree") {
    Rng rng(23);
    const DeviceParams dev;
    for (int rep = 0; rep < 100; ++rep) {
        const auto s = test::random_structure(rng, 2 + uniform_index(rng, 3), 10);
        const auto theta = test::random_theta(s, rng, 2.0);
        const auto x = test::random_input(s.topology().inputs(0), rng, 0.25);
        const auto a = forward_abstract(map_weights(theta, dev), x, dev);
        const auto c = forward_circuit(to_conductance_network(theta, dev), x);
        for (std::size_t j = 0; j < a.net.size(); ++j)
            for (std::size_t r = 0; r < a.net[j].size(); ++r) CHECK(std::abs(a.net[j][r] - c.net[j][r]) <= 1e-12);
        CHECK(classify(a.output) == classify(c.output));
    }
}

TEST_CASE("backward matches central differences in both regeneration modes") {
    Rng rng(41);
    for (auto regen : {Regeneration::cascaded, Regeneration::ideal}) {
        DeviceParams dev;
        dev.regeneration = regen;
        for (int rep = 0; rep < 10; ++rep) {
            const auto s = test::random_structure(rng, 3, 6);
            auto theta = test::random_theta(s, rng, 0.5);
            const auto x = test::random_input(s.topology().inputs(0), rng, 0.01);
            const auto t = one_hot_target(uniform_index(rng, s.topology().layer_sizes().back()),
                                          s.topology().layer_sizes().back(), dev, 0.9);
            const auto g = backward(theta, x, t, dev);
            double num = 0.0, den = 0.0;
            for (std::size_t j = 0; j < theta.theta.size(); ++j) {
                for (auto side : {0, 1}) {
                    auto& vals = side == 0 ? theta.theta[j].p : theta.theta[j].n;
                    const auto& an = side == 0 ? g.d_theta[j].p : g.d_theta[j].n;
                    for (std::size_t k = 0; k < vals.size(); ++k) {
                        const double keep = vals[k];
                        const double h = 1e-5;
                        vals[k] = keep + h;
                        const double up = loss_at(theta, x, t, dev);
                        vals[k] = keep - h;
                        const double down = loss_at(theta, x, t, dev);
                        vals[k] = keep;
                        const double fd = (up - down) / (2 * h);
                        num += (fd - an[k]) * (fd - an[k]);
                        den += fd * fd;
                    }
                }
            }
            CHECK(std::sqrt(num / std::max(den, 1e-300)) <= 1e-5);
        }
    }
}

TEST_CASE("SgdStepper gradient equals backward and a step lowers the loss") {
    Rng rng(5);
    const DeviceParams dev;
    const auto s = test::random_structure(rng, 3, 8);
    auto theta = test::random_theta(s, rng, 0.3);
    const auto x = test::random_input(s.topology().inputs(0), rng, 0.2);
    const auto t = one_hot_target(0, s.topology().layer_sizes().back(), dev, 0.9);
    SgdStepper stepper(s, dev, G2Gradient::full);
    JunctionValues g;
    const double l0 = stepper.gradient(theta, x, t, g);
    const auto ref = backward(theta, x, t, dev);
    CHECK(l0 == doctest::Approx(ref.loss).epsilon(1e-12));
    for (std::size_t j = 0; j < g.size(); ++j)
        for (std::size_t k = 0; k < g[j].size(); ++k) CHECK(g[j].p[k] == doctest::Approx(ref.d_theta[j].p[k]).epsilon(1e-10));
    stepper.step(theta, x, t, 1.0);
    CHECK(loss_at(theta, x, t, dev) < l0);
}

TEST_CASE("one-hot targets sit at the scaled rails") {
    const DeviceParams dev;
    const auto t = one_hot_target(2, 3, dev, 0.9);
    CHECK(t[2] == doctest::Approx(0.225));
    CHECK(t[0] == doctest::Approx(-0.225));
    CHECK_THROWS(one_hot_target(3, 3, dev, 0.9));
}

TEST_CASE("training learns a separable toy problem deterministically") {
    Dataset d;
    d.feature_count = 2;
    d.class_count = 2;
    Rng rng(9);
    for (int i = 0; i < 80; ++i) {
        const std::size_t label = i % 2;
        const double cx = label ? 0.15 : -0.15;
        d.features.push_back(cx + uniform(rng, -0.05, 0.05));
        d.features.push_back(-cx + uniform(rng, -0.05, 0.05));
        d.labels.push_back(label);
    }
    const NetworkStructure s = NetworkStructure::dense(NetworkTopology({2, 4, 2}));
    TrainConfig cfg;
    cfg.learning_rate = 5.0;
    cfg.max_epochs = 200;
    cfg.target_accuracy = 1.0;
    const DeviceParams dev;
    const auto a = train(d, s, cfg, dev);
    CHECK(a.report.stop_reason == StopReason::target_hit);
    CHECK(evaluate(a.theta, d, dev).accuracy == 1.0);
    const auto b = train(d, s, cfg, dev);
    CHECK(a.report.epochs_run == b.report.epochs_run);
    for (std::size_t j = 0; j < a.theta.theta.size(); ++j) CHECK(a.theta.theta[j].p == b.theta.theta[j].p);
}

TEST_CASE("divergence stops training and keeps the last finite parameters") {
    Dataset d;
    d.feature_count = 1;
    d.class_count = 2;
    // Bounded activations keep every finite update finite, so a corrupt sample
    // is the practical way to reach the divergence path.
    d.features = {0.2, std::nan("")};
    d.labels = {0, 1};
    TrainConfig cfg;
    cfg.max_epochs = 50;
    const auto r = train(d, NetworkStructure::dense(NetworkTopology({1, 2})), cfg, DeviceParams{});
    CHECK(r.report.stop_reason == StopReason::diverged);
    CHECK_FALSE(r.report.divergence_message.empty());
    for (const auto& pair : r.theta.theta)
        for (double v : pair.p) CHECK(std::isfinite(v));
}

TEST_CASE("train config validation") {
    TrainConfig c;
    c.validate();
    c.learning_rate = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.max_epochs = TrainConfig::kEpochCeiling + 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.batch_size = 4;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}
