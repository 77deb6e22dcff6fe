#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sparsebar/error.hpp"
#include "sparsebar/experiment.hpp"

using namespace sparsebar;
namespace fs = std::filesystem;

namespace {

ExperimentConfig iris_config(const std::string& extra = "") {
    const std::string text = "experiment: train\nseed: 3\n"
                             "dataset: {name: iris, path: iris.csv, label_column: species}\n"
                             "network: {layers: [4, 4, 3], densities: [0.25, 1.0]}\n"
                             "train: {learning_rate: 5, lr_decay: 0.005, max_epochs: 150}\n" +
                             extra;
    auto c = parse_config(text, SPARSEBAR_TEST_DATA_DIR);
    c.validate();
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const auto d = fs::temp_directory_path() / "sparsebar_tests" / name;
    fs::remove_all(d);
    return d;
}

}  // namespace

TEST_CASE("repeated runs write byte-identical metric CSVs") {
    const auto c = iris_config();
    const auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
    const auto ra = run(c, {a, 1, {}});
    run(c, {b, 1, {}});
    CHECK(ra["exit_code"] == 0);
    for (const char* f : {"train_loss.csv", "metrics.csv", "masks.txt", "checkpoint.net", "network.net"}) {
        INFO(f);
        CHECK(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    CHECK(ra["memristors"]["total"] == 46);
    CHECK(ra["network"]["mask_blocks"] == 2);
}

TEST_CASE("a sweep's FC point equals a plain run with its derived seed") {
    auto c = iris_config("sweep: {densities: [0.3, 0.5, 1.0]}\n");
    c.kind = ExperimentKind::sweep_sparsity;
    const auto rows = sweep_sparsity(c, 2);
    REQUIRE(rows.size() == 3);
    CHECK_FALSE(rows[0].ok);  // 0.3 is infeasible on 4 -> 4
    CHECK(rows[0].error.find("0.25") != std::string::npos);
    CHECK(rows[1].ok);
    CHECK(rows[1].memristors == 2 * (8 + 12) + 2 * (4 + 3));
    CHECK(rows[2].memristors == 70);
    CHECK(rows[2].seed == derive_seed(c.seed, {2}));

    const auto data = prepare_data(c, rows[2].seed);
    const auto plain = train_and_evaluate(c, data, {1.0, 1.0}, rows[2].seed);
    CHECK(plain.test.accuracy == rows[2].test_accuracy);
    CHECK(plain.result.report.epochs_run == rows[2].epochs);
    CHECK(plain.mean_power.crossbar_uw == rows[2].crossbar_power_uw);

    // Adding points leaves existing ones unchanged.
    auto longer = c;
    longer.sweep.densities.push_back(0.75);
    const auto more = sweep_sparsity(longer, 1);
    CHECK(more[2].test_accuracy == rows[2].test_accuracy);
}

TEST_CASE("Monte Carlo trials are order independent and exact at zero noise") {
    const auto c = iris_config();
    const auto data = prepare_data(c, c.seed);
    const auto trained = train_and_evaluate(c, data, c.densities, c.seed);
    const auto net = to_conductance_network(trained.result.theta, c.device);
    VariationSpec spec;
    spec.noise_levels = {0.0, 0.1, 0.25};
    spec.trials = 8;
    const auto one = variation_mc(net, data.test, spec, 5, 1);
    const auto many = variation_mc(net, data.test, spec, 5, 3);
    for (std::size_t l = 0; l < spec.noise_levels.size(); ++l) CHECK(one.levels[l].accuracies == many.levels[l].accuracies);
    for (double a : one.levels[0].accuracies) CHECK(a == one.clean_accuracy);
    CHECK(one.levels[0].stddev == 0.0);
    CHECK(one.levels[0].mean == one.clean_accuracy);

    spec.bits = 4;
    const auto q = variation_mc(net, data.test, spec, 5, 1);
    CHECK(q.levels[0].stddev == 0.0);  // quantization alone is deterministic
}

TEST_CASE("power comparison on IRIS") {
    const auto c = iris_config();
    const auto data = prepare_data(c, c.seed);
    const auto fc = to_conductance_network(train_and_evaluate(c, data, {1.0, 1.0}, c.seed).result.theta, c.device);
    const auto sp = to_conductance_network(train_and_evaluate(c, data, c.densities, c.seed).result.theta, c.device);
    const auto cmp = compare_power(fc, sp, data.test, c.inverter_power_uw);
    CHECK(cmp.fc.memristors.total == 70);
    CHECK(cmp.sparse.memristors.total == 46);
    CHECK(cmp.fc.crossbar_per_sample.size() == data.test.size());
    CHECK(cmp.fc.mean_power.inverter_uw == cmp.sparse.mean_power.inverter_uw);

    ConductanceNetwork other{NetworkStructure::dense(NetworkTopology({4, 5, 3})), {}, c.device};
    other.sigma = make_values(other.structure, 1.0);
    CHECK_THROWS_AS(compare_power(fc, other, data.test, 0.5), ConfigError);

    const auto ref = power_reference("mnist");
    REQUIRE(ref);
    CHECK(ref->fc_uw == 1221.0);
    CHECK(ref->sparse_uw == 527.0);
    CHECK_FALSE(power_reference("cifar"));
}

TEST_CASE("eval re-scores a saved checkpoint identically") {
    const auto c = iris_config();
    const auto dir = fresh_dir("eval");
    const auto trained = run(c, {dir, 1, {}});
    const auto report = run_eval(c, {fs::path(), 1, dir / "checkpoint.net"});
    CHECK(report["circuit"]["accuracy"] == trained["test"]["accuracy"]);
    CHECK(report["paths_agree"] == true);
}

TEST_CASE("parallel_for propagates worker exceptions") {
    std::vector<int> hits(10, 0);
    parallel_for(10, 3, [&](std::size_t i) { hits[i] = 1; });
    CHECK(std::count(hits.begin(), hits.end(), 1) == 10);
    CHECK_THROWS_AS(parallel_for(5, 2, [](std::size_t i) {
                        if (i == 3) throw DataError("boom");
                    }),
                    DataError);
}
