#include "doctest.h"

#include <sstream>
#include <string>

#include "sparsebar/error.hpp"
#include "sparsebar/topology.hpp"

using namespace sparsebar;

TEST_CASE("topology describes layers and junctions") {
    const NetworkTopology t({4, 4, 3});
    CHECK(t.junction_count() == 2);
    CHECK(t.inputs(1) == 4);
    CHECK(t.outputs(1) == 3);
    CHECK(t.to_string() == "4-4-3");
    CHECK_THROWS_AS(NetworkTopology({4}), ConfigError);
    CHECK_THROWS_AS(NetworkTopology({4, 0, 3}), ConfigError);
}

TEST_CASE("feasible densities follow integer fan-in and fan-out") {
    const auto f = feasible_densities(4, 4);
    REQUIRE(f.size() == 4);
    CHECK(f[0].density == doctest::Approx(0.25));
    CHECK(f[0].fan_out == 1);
    CHECK(f[0].fan_in == 1);

    const auto mnist = resolve_density(196, 100, 0.25);
    CHECK(mnist.fan_out == 25);
    CHECK(mnist.fan_in == 49);

    // 10 -> 8 admits only FO = 4 or 8.
    const auto bcw = feasible_densities(10, 8);
    REQUIRE(bcw.size() == 2);
    CHECK(bcw[0].density == doctest::Approx(0.5));
}

TEST_CASE("infeasible densities are rejected with nearby suggestions") {
    try {
        resolve_density(4, 4, 0.3);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("0.25") != std::string::npos);
        CHECK(msg.find("0.5") != std::string::npos);
    }
    CHECK_THROWS_AS(resolve_density(10, 8, 0.25), ConfigError);
    CHECK_THROWS_AS(resolve_density(4, 4, 0.0), ConfigError);
    CHECK_THROWS_AS(resolve_density(4, 4, 1.5), ConfigError);
}

TEST_CASE("structured masks are fan balanced, exact and seed deterministic") {
    struct Case {
        std::size_t p, n;
        double d;
    };
    for (const auto [p, n, d] : {Case{4, 4, 0.25}, Case{196, 100, 0.25}, Case{10, 8, 0.5}, Case{80, 60, 0.25},
                                 Case{6, 4, 0.5}}) {
        const auto m = generate_structured_mask(p, n, d, 7);
        const auto f = resolve_density(p, n, d);
        CHECK(m.popcount() == p * f.fan_out);
        CHECK(m.is_structured());
        for (std::size_t r = 0; r < n; ++r) CHECK(m.row_sum(r) == f.fan_in);
        for (std::size_t c = 0; c < p; ++c) CHECK(m.col_sum(c) == f.fan_out);
        CHECK(junction_density(m) == doctest::Approx(d));
        CHECK(m == generate_structured_mask(p, n, d, 7));
    }
    CHECK_FALSE(generate_structured_mask(196, 100, 0.25, 1) == generate_structured_mask(196, 100, 0.25, 2));
    CHECK(generate_structured_mask(5, 3, 1.0, 9) == MaskMatrix::full(3, 5));
}

TEST_CASE("unstructured masks hit the requested count") {
    const auto m = generate_unstructured_mask(20, 10, 0.3, 3);
    CHECK(m.popcount() == 60);
    CHECK(generate_unstructured_mask(3, 3, 0.01, 3).popcount() == 1);
}

TEST_CASE("mask text round trip") {
    const auto m = generate_structured_mask(12, 8, 0.25, 11);
    std::stringstream ss;
    write_mask(ss, m, 2);
    CHECK(ss.str().rfind("mask 2 8 12\n", 0) == 0);
    std::size_t junction = 0;
    const auto back = read_mask(ss, junction);
    CHECK(junction == 2);
    CHECK(back == m);

    std::istringstream bad("mask 1 2 2\n1 0\n1 x\n");
    CHECK_THROWS_AS(read_mask(bad, junction), DataError);
}

TEST_CASE("subarray partition groups rows by input set") {
    const auto m = generate_structured_mask(196, 100, 0.25, 5);
    const auto part = partition_subarrays(m, 64, 64);
    std::size_t rows = 0;
    for (const auto& b : part.blocks) {
        CHECK(b.inputs.size() <= 64);
        CHECK(b.outputs.size() <= 64);
        rows += b.outputs.size();
    }
    CHECK(rows == 100);
    CHECK_THROWS_AS(partition_subarrays(MaskMatrix::full(4, 100), 64, 64), ConfigError);
}
