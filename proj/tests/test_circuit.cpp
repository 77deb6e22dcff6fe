#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "sparsebar/circuit.hpp"
#include "sparsebar/error.hpp"
#include "support.hpp"

using namespace sparsebar;

namespace {

// Modified nodal analysis of one junction: every extended input line is a
// node pinned by an ideal voltage source, every output column is a floating
// node, and each present memristor is a conductance between the two. Solved
// as one dense linear system, independently of the closed-form divider.
std::vector<double> mna_solve(const MaskMatrix& mask, const PolarityPair& sigma, const JunctionLayout& layout,
                              const std::vector<double>& xp, const std::vector<double>& xn) {
    const std::size_t lines = 2 * (mask.cols() + 1);  // p and n line per extended input
    const std::size_t outs = mask.rows();
    const std::size_t nodes = lines + outs;
    const std::size_t dim = nodes + lines;  // plus one current per source
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    auto stamp = [&](std::size_t u, std::size_t v, double g) {
        const auto iu = static_cast<Eigen::Index>(u), iv = static_cast<Eigen::Index>(v);
        a(iu, iu) += g;
        a(iv, iv) += g;
        a(iu, iv) -= g;
        a(iv, iu) -= g;
    };
    for (std::size_t r = 0; r < outs; ++r) {
        for (std::size_t k = layout.row_begin[r]; k < layout.row_begin[r + 1]; ++k) {
            const auto c = static_cast<std::size_t>(layout.column[k]);
            stamp(2 * c, lines + r, sigma.p[k]);
            stamp(2 * c + 1, lines + r, sigma.n[k]);
        }
    }
    for (std::size_t s = 0; s < lines; ++s) {
        const auto row = static_cast<Eigen::Index>(nodes + s);
        a(row, static_cast<Eigen::Index>(s)) = 1.0;
        a(static_cast<Eigen::Index>(s), row) = 1.0;
        b(row) = s % 2 == 0 ? xp[s / 2] : xn[s / 2];
    }
    const Eigen::VectorXd v = a.fullPivLu().solve(b);
    std::vector<double> out(outs);
    for (std::size_t r = 0; r < outs; ++r) out[r] = v(static_cast<Eigen::Index>(lines + r));
    return out;
}

}  // namespace

TEST_CASE("inverter VTC is an odd, saturating, inverting curve") {
    const DeviceParams p;
    CHECK(inverter_vtc(0.0, p) == 0.0);
    CHECK(inverter_vtc(0.1, p) == doctest::Approx(-inverter_vtc(-0.1, p)));
    CHECK(inverter_vtc(1.0, p) == doctest::Approx(-0.25).epsilon(1e-9));
    CHECK(inverter_vtc(-1.0, p) == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(inverter_vtc_slope(0.0, p) == doctest::Approx(-0.25 * 20));
    const double h = 1e-7;
    for (double v : {-0.05, -0.01, 0.0, 0.02, 0.1}) {
        const double fd = (inverter_vtc(v + h, p) - inverter_vtc(v - h, p)) / (2 * h);
        CHECK(inverter_vtc_slope(v, p) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("crossbar node voltages solve Kirchhoff's current law") {
    Rng rng(31);
    const DeviceParams dev;
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t n_prev = 1 + uniform_index(rng, 9);
        const std::size_t n_next = 1 + uniform_index(rng, 9);
        const auto mask = generate_structured_mask(n_prev, n_next, test::random_density(n_prev, n_next, rng), rng());
        const auto layout = JunctionLayout::from_mask(mask);
        PolarityPair sigma(layout.entries());
        for (std::size_t k = 0; k < sigma.size(); ++k) {
            sigma.p[k] = uniform(rng, dev.sigma_min, dev.sigma_max);
            sigma.n[k] = uniform(rng, dev.sigma_min, dev.sigma_max);
        }
        std::vector<double> xp, xn;
        load_input(test::random_input(n_prev, rng, 0.25), dev, xp, xn);
        std::vector<double> v(n_next);
        crossbar_node_voltages(layout, sigma, xp, xn, v);
        const auto oracle = mna_solve(mask, sigma, layout, xp, xn);
        for (std::size_t r = 0; r < n_next; ++r) CHECK(v[r] == doctest::Approx(oracle[r]).epsilon(1e-10));
    }
}

TEST_CASE("bias lines sit at the rails and inputs are differential") {
    const DeviceParams p;
    std::vector<double> xp, xn;
    const std::vector<double> in{0.1, -0.2};
    load_input(in, p, xp, xn);
    REQUIRE(xp.size() == 3);
    CHECK(xp[0] == 0.1);
    CHECK(xn[1] == 0.2);
    CHECK(xp[2] == 0.25);
    CHECK(xn[2] == -0.25);
}

TEST_CASE("hidden layers regenerate the non-inverted signal") {
    DeviceParams p;
    std::vector<double> vp, vn;
    const std::vector<double> net{0.01, -0.02};
    activate_hidden(net, p, vp, vn);
    CHECK(vn[0] == doctest::Approx(inverter_vtc(0.01, p)));
    CHECK(vp[0] == doctest::Approx(inverter_vtc(vn[0], p)));
    CHECK(vp.back() == p.half_vdd());
    CHECK(vn.back() == -p.half_vdd());
    p.regeneration = Regeneration::ideal;
    activate_hidden(net, p, vp, vn);
    CHECK(vp[1] == -vn[1]);
}

TEST_CASE("classification picks the largest output, lowest index on ties") {
    CHECK(classify(std::vector<double>{0.1, 0.3, 0.2}) == 1);
    CHECK(classify(std::vector<double>{0.2, 0.2, 0.1}) == 0);
}

TEST_CASE("memristor and inverter counts") {
    const NetworkTopology iris({4, 4, 3});
    CHECK(memristor_count(iris, NetworkStructure::dense(iris).masks()).total == 70);
    const NetworkTopology mnist({196, 100, 10});
    CHECK(memristor_count(mnist, NetworkStructure::dense(mnist).masks()).total == 41420);
    const std::vector<MaskMatrix> sparse{generate_structured_mask(196, 100, 0.25, 3), MaskMatrix::full(10, 100)};
    const auto c = memristor_count(mnist, sparse);
    CHECK(c.total == 12020);
    CHECK(c.per_junction == std::vector<std::size_t>{10000, 2020});
    CHECK(inverter_count(iris) == 11);
    CHECK(inverter_count(NetworkTopology({23, 80, 60, 13})) == 293);
}

TEST_CASE("static power equals the sum of branch dissipations") {
    const DeviceParams dev;
    const NetworkTopology topo({2, 1});
    ConductanceNetwork net{NetworkStructure::dense(topo), {}, dev};
    net.sigma = make_values(net.structure);
    // Entries: input 0, input 1, bias.
    net.sigma[0].p = {1.0, 2.0, 0.5};
    net.sigma[0].n = {3.0, 1.0, 0.5};
    net.validate();
    const std::vector<double> x{0.1, -0.2};
    const auto trace = forward_circuit(net, x);
    const double xp[] = {0.1, -0.2, 0.25}, xn[] = {-0.1, 0.2, -0.25};
    double num = 0.0, den = 0.0;
    for (int k = 0; k < 3; ++k) {
        num += net.sigma[0].p[k] * xp[k] + net.sigma[0].n[k] * xn[k];
        den += net.sigma[0].p[k] + net.sigma[0].n[k];
    }
    const double v = num / den;
    CHECK(trace.net[0][0] == doctest::Approx(v).epsilon(1e-14));
    double expected = 0.0;
    for (int k = 0; k < 3; ++k)
        expected += net.sigma[0].p[k] * (xp[k] - v) * (xp[k] - v) + net.sigma[0].n[k] * (xn[k] - v) * (xn[k] - v);
    const auto pw = static_power(net, trace, 0.5);
    CHECK(pw.crossbar_uw == doctest::Approx(expected).epsilon(1e-13));
    CHECK(pw.inverter_uw == doctest::Approx(0.5));
    CHECK(pw.total_uw() == doctest::Approx(expected + 0.5));
}

TEST_CASE("forward pass rejects mismatched inputs and invalid networks") {
    const DeviceParams dev;
    ConductanceNetwork net{NetworkStructure::dense(NetworkTopology({3, 2})), {}, dev};
    net.sigma = make_values(net.structure, 1.0);
    CHECK_THROWS_AS(forward_circuit(net, std::vector<double>{0.1}), ConfigError);
    net.sigma[0].p[0] = 100.0;
    CHECK_THROWS_AS(net.validate(), ConfigError);
}
