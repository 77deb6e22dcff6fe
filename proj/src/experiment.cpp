#include "sparsebar/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include "sparsebar/error.hpp"
#include "sparsebar/kernels.hpp"
#include "sparsebar/netfile.hpp"
#include "sparsebar/rng.hpp"

namespace sparsebar {
namespace {

using nlohmann::json;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& dir, const char* name) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / name).string());
    return out;
}

std::vector<double> full_densities(const ExperimentConfig& c) {
    if (!c.densities.empty()) return c.densities;
    return std::vector<double>(c.layers.size() - 1, 1.0);
}

json base_report(const ExperimentConfig& c, const char* command) {
    json r;
    r["tool"] = "sparsebar";
    r["version"] = kToolVersion;
    r["command"] = command;
    r["experiment"] = to_string(c.kind);
    r["seed"] = c.seed;
    r["kernels"] = std::string(kernels::isa_name(kernels::active_isa()));
    r["config"] = echo_config(c);
    r["started"] = utc_now();
    return r;
}

void finish_report(json& r, const std::filesystem::path& out_dir) {
    r["finished"] = utc_now();
    if (!r.contains("exit_code")) r["exit_code"] = 0;
    if (out_dir.empty()) return;
    auto out = open_out(out_dir, "report.json");
    out << r.dump(2) << '\n';
}

json eval_json(const EvalResult& e, std::size_t classes) {
    json j;
    j["accuracy"] = e.accuracy;
    j["correct"] = e.correct;
    j["total"] = e.total;
    json rows = json::array();
    for (std::size_t r = 0; r < classes; ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < classes; ++c) row.push_back(e.confusion[r * classes + c]);
        rows.push_back(row);
    }
    j["confusion"] = rows;
    return j;
}

json count_json(const MemristorCount& m) {
    return {{"per_junction", m.per_junction}, {"total", m.total}};
}

json power_json(const PowerBreakdown& p) {
    return {{"crossbar_uw", p.crossbar_uw}, {"inverter_uw", p.inverter_uw}, {"total_uw", p.total_uw()}};
}

json reference_json(const std::string& dataset) {
    const auto ref = power_reference(dataset);
    if (!ref) return nullptr;
    char text[96];
    std::snprintf(text, sizeof text, "%g -> %g uW (published HSPICE reference)", ref->fc_uw, ref->sparse_uw);
    return {{"dataset", ref->dataset},
            {"structure", ref->structure},
            {"fc_uw", ref->fc_uw},
            {"sparse_uw", ref->sparse_uw},
            {"annotation", text},
            {"note", "published transistor-level figures; reference only, not computed here"}};
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

Dataset load_dataset(const DatasetSpec& spec, LoadStats* stats) {
    Dataset d = spec.format == DatasetFormat::mnist
                    ? load_mnist(spec.images, spec.labels, spec.downsample)
                    : load_tabular(spec.path, {spec.label_column, spec.feature_columns}, stats);
    d.name = spec.name;
    return d;
}

namespace {

Dataset apply_subset(const Dataset& d, const DatasetSpec& spec, std::uint64_t seed) {
    if (spec.subset == 0 || spec.subset >= d.size()) return d;
    auto order = split_order(d.size(), derive_seed(seed, {0x5ab5e7}));
    order.resize(spec.subset);
    return d.subset(order);
}

}  // namespace

PreparedData prepare_data(const ExperimentConfig& config, std::uint64_t seed) {
    PreparedData p;
    const Dataset all = apply_subset(load_dataset(config.dataset, &p.load_stats), config.dataset, seed);
    auto parts = split(all, config.dataset.train_fraction, seed);
    p.normalizer = VoltageNormalizer::fit(parts.train, config.device);
    p.train = p.normalizer.apply(parts.train);
    p.test = p.normalizer.apply(parts.test);
    return p;
}

Dataset prepare_test_data(const ExperimentConfig& config, std::uint64_t seed, const VoltageNormalizer& normalizer) {
    const Dataset all = apply_subset(load_dataset(config.dataset), config.dataset, seed);
    return normalizer.apply(split(all, config.dataset.train_fraction, seed).test);
}

std::vector<MaskMatrix> build_masks(const NetworkTopology& topology, const std::vector<double>& densities,
                                    std::uint64_t seed) {
    std::vector<MaskMatrix> masks;
    for (std::size_t j = 0; j < topology.junction_count(); ++j) {
        const double d = densities.empty() ? 1.0 : densities.at(j);
        masks.push_back(generate_structured_mask(topology.inputs(j), topology.outputs(j), d, derive_seed(seed, {0x3a5c, j})));
    }
    return masks;
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
    }
    if (failure) std::rethrow_exception(failure);
}

PowerBreakdown mean_static_power(const ConductanceNetwork& net, const Dataset& data, double inverter_power_uw) {
    PowerBreakdown mean;
    ForwardTrace trace;
    for (std::size_t i = 0; i < data.size(); ++i) {
        forward_circuit(net, data.sample(i), trace);
        mean.crossbar_uw += static_power(net, trace, inverter_power_uw).crossbar_uw;
    }
    if (data.size()) mean.crossbar_uw /= static_cast<double>(data.size());
    mean.inverter_uw = static_cast<double>(inverter_count(net.structure.topology())) * inverter_power_uw;
    return mean;
}

TrainedRun train_and_evaluate(const ExperimentConfig& config, const PreparedData& data,
                              const std::vector<double>& densities, std::uint64_t seed) {
    const NetworkTopology topo(config.layers);
    const NetworkStructure structure(topo, build_masks(topo, densities, seed));
    TrainConfig tc = config.train;
    tc.seed = seed;
    TrainedRun run{train(data.train, structure, tc, config.device), {}, {}, {}};
    const auto net = to_conductance_network(run.result.theta, config.device);
    run.test = evaluate(net, data.test);
    run.memristors = memristor_count(topo, structure.masks());
    run.mean_power = mean_static_power(net, data.test, config.inverter_power_uw);
    return run;
}

std::vector<SweepRow> sweep_sparsity(const ExperimentConfig& config, std::size_t threads) {
    const NetworkTopology topo(config.layers);
    const std::size_t pen = topo.junction_count() - 2;
    std::vector<SweepRow> rows(config.sweep.densities.size());
    parallel_for(rows.size(), threads, [&](std::size_t k) {
        SweepRow& row = rows[k];
        row.density = config.sweep.densities[k];
        row.seed = derive_seed(config.seed, {k});
        try {
            const auto f = resolve_density(topo.inputs(pen), topo.outputs(pen), row.density);
            row.fan_out = f.fan_out;
            row.fan_in = f.fan_in;
            auto densities = full_densities(config);
            densities[pen] = row.density;
            const auto data = prepare_data(config, row.seed);
            const auto run = train_and_evaluate(config, data, densities, row.seed);
            row.test_accuracy = run.test.accuracy;
            row.epochs = run.result.report.epochs_run;
            row.stop_reason = to_string(run.result.report.stop_reason);
            row.memristors = run.memristors.total;
            row.crossbar_power_uw = run.mean_power.crossbar_uw;
            row.ok = run.result.report.stop_reason != StopReason::diverged;
            if (!row.ok) row.error = run.result.report.divergence_message;
        } catch (const Error& e) {
            row.ok = false;
            row.error = e.what();
        }
    });
    return rows;
}

ConductanceNetwork perturbed_network(const ConductanceNetwork& net, const VariationSpec& spec, double noise, Rng& rng) {
    ConductanceNetwork out = net;
    auto program = [&](double s) {
        if (spec.bits && !spec.perturb_before_quantize) s = quantize_conductance(s, *spec.bits, net.device).value;
        s = perturb_conductance(s, noise, rng, net.device);
        if (spec.bits && spec.perturb_before_quantize) s = quantize_conductance(s, *spec.bits, net.device).value;
        return s;
    };
    for (auto& pair : out.sigma) {
        for (std::size_t k = 0; k < pair.size(); ++k) {
            pair.p[k] = program(pair.p[k]);
            pair.n[k] = program(pair.n[k]);
        }
    }
    return out;
}

VariationResult variation_mc(const ConductanceNetwork& net, const Dataset& test, const VariationSpec& spec,
                             std::uint64_t seed, std::size_t threads) {
    VariationResult r;
    r.clean_accuracy = evaluate(net, test).accuracy;
    const std::size_t levels = spec.noise_levels.size();
    const std::size_t trials = spec.trials;
    std::vector<double> acc(levels * trials);
    parallel_for(acc.size(), threads, [&](std::size_t task) {
        const std::size_t l = task / trials;
        const std::size_t t = task % trials;
        Rng rng(derive_seed(seed, {0x7a41, l, t}));
        acc[task] = evaluate(perturbed_network(net, spec, spec.noise_levels[l], rng), test).accuracy;
    });
    for (std::size_t l = 0; l < levels; ++l) {
        VariationLevel lv;
        lv.noise = spec.noise_levels[l];
        lv.accuracies.assign(acc.begin() + static_cast<std::ptrdiff_t>(l * trials),
                             acc.begin() + static_cast<std::ptrdiff_t>((l + 1) * trials));
        const auto [lo, hi] = std::minmax_element(lv.accuracies.begin(), lv.accuracies.end());
        lv.min = *lo;
        // Identical trials report their common value exactly, free of summation rounding.
        lv.mean = *lo == *hi ? *lo : mean_of(lv.accuracies);
        double ss = 0.0;
        for (double a : lv.accuracies) ss += (a - lv.mean) * (a - lv.mean);
        lv.stddev = trials > 1 && *lo != *hi ? std::sqrt(ss / static_cast<double>(trials - 1)) : 0.0;
        r.levels.push_back(std::move(lv));
    }
    return r;
}

PowerComparison compare_power(const ConductanceNetwork& fc, const ConductanceNetwork& sparse, const Dataset& test,
                              double inverter_power_uw) {
    if (!(fc.structure.topology() == sparse.structure.topology()))
        throw ConfigError("power comparison needs identical layer sizes, got " + fc.structure.topology().to_string() +
                          " and " + sparse.structure.topology().to_string());
    PowerComparison cmp;
    auto fill = [&](PowerVariant& v, const ConductanceNetwork& net, const char* name) {
        v.name = name;
        for (const auto& m : net.structure.masks()) v.densities.push_back(junction_density(m));
        v.memristors = memristor_count(net.structure.topology(), net.structure.masks());
        v.test_accuracy = evaluate(net, test).accuracy;
        ForwardTrace trace;
        for (std::size_t i = 0; i < test.size(); ++i) {
            forward_circuit(net, test.sample(i), trace);
            v.crossbar_per_sample.push_back(static_power(net, trace, inverter_power_uw).crossbar_uw);
        }
        v.mean_power.crossbar_uw = mean_of(v.crossbar_per_sample);
        v.mean_power.inverter_uw = static_cast<double>(inverter_count(net.structure.topology())) * inverter_power_uw;
    };
    fill(cmp.fc, fc, "fc");
    fill(cmp.sparse, sparse, "sparse");
    for (std::size_t i = 0; i < test.size(); ++i)
        if (cmp.sparse.crossbar_per_sample[i] < cmp.fc.crossbar_per_sample[i]) ++cmp.sparse_lower_count;
    auto reduction = [](double before, double after) { return before > 0.0 ? (before - after) / before : 0.0; };
    cmp.crossbar_reduction = reduction(cmp.fc.mean_power.crossbar_uw, cmp.sparse.mean_power.crossbar_uw);
    cmp.total_reduction = reduction(cmp.fc.mean_power.total_uw(), cmp.sparse.mean_power.total_uw());
    cmp.memristor_reduction = reduction(static_cast<double>(cmp.fc.memristors.total),
                                        static_cast<double>(cmp.sparse.memristors.total));
    return cmp;
}

std::optional<PowerReference> power_reference(const std::string& dataset_name) {
    static constexpr PowerReference table[] = {
        {"bcw", "10-8-2", 13.4, 8.87},
        {"mnist", "196-100-10", 1221.0, 527.0},
        {"iris", "4-4-3", 7.67, 7.45},
        {"mhealth", "23-80-60-13", 703.2, 639.0},
    };
    for (const auto& r : table)
        if (dataset_name == r.dataset) return r;
    return std::nullopt;
}

namespace {

void write_masks(const std::filesystem::path& dir, const NetworkStructure& s) {
    auto out = open_out(dir, "masks.txt");
    for (std::size_t j = 0; j < s.junction_count(); ++j) write_mask(out, s.mask(j), j + 1);
}

json run_train(const ExperimentConfig& c, const RunOptions& o) {
    json r = base_report(c, "train");
    const auto data = prepare_data(c, c.seed);
    const auto run = train_and_evaluate(c, data, full_densities(c), c.seed);
    const auto& rep = run.result.report;
    const auto& structure = run.result.theta.structure;
    const std::size_t classes = c.layers.back();

    const double train_acc = rep.selected_epoch ? rep.epochs[rep.selected_epoch - 1].train_accuracy : 0.0;
    json partitions = json::array();
    for (std::size_t j = 0; j < structure.junction_count(); ++j) {
        try {
            const auto part = partition_subarrays(structure.mask(j), c.subarray_rows, c.subarray_cols);
            partitions.push_back({{"junction", j + 1}, {"blocks", part.blocks.size()}});
        } catch (const ConfigError& e) {
            partitions.push_back({{"junction", j + 1}, {"error", e.what()}});
        }
    }
    r["dataset"] = {{"name", c.dataset.name},
                    {"train_samples", data.train.size()},
                    {"test_samples", data.test.size()},
                    {"features", data.train.feature_count},
                    {"classes", data.train.class_count},
                    {"rows_dropped_missing", data.load_stats.rows_dropped_missing}};
    r["network"] = {{"structure", structure.topology().to_string()},
                    {"densities", full_densities(c)},
                    {"mask_blocks", structure.junction_count()},
                    {"subarrays", partitions}};
    r["metrics"] = {{"test_accuracy", run.test.accuracy},
                    {"train_accuracy", train_acc},
                    {"epochs", rep.epochs_run},
                    {"selected_epoch", rep.selected_epoch},
                    {"stop_reason", to_string(rep.stop_reason)},
                    {"wall_seconds", rep.wall_seconds}};
    r["test"] = eval_json(run.test, classes);
    r["memristors"] = count_json(run.memristors);
    r["inverters"] = inverter_count(structure.topology());
    r["power"] = power_json(run.mean_power);
    r["power_reference"] = reference_json(c.dataset.name);
    if (rep.stop_reason == StopReason::diverged) {
        r["error"] = rep.divergence_message;
        r["exit_code"] = 4;
    }

    if (!o.out_dir.empty()) {
        {
            auto out = open_out(o.out_dir, "train_loss.csv");
            out << "epoch,loss,train_acc\n";
            for (const auto& e : rep.epochs) out << e.epoch << ',' << num(e.loss) << ',' << num(e.train_accuracy) << '\n';
        }
        {
            auto out = open_out(o.out_dir, "metrics.csv");
            out << "metric,value\n";
            out << "test_accuracy," << num(run.test.accuracy) << '\n';
            out << "train_accuracy," << num(train_acc) << '\n';
            out << "epochs," << rep.epochs_run << '\n';
            out << "selected_epoch," << rep.selected_epoch << '\n';
            out << "stop_reason," << to_string(rep.stop_reason) << '\n';
            out << "memristors," << run.memristors.total << '\n';
            out << "inverters," << inverter_count(structure.topology()) << '\n';
            out << "crossbar_power_uw," << num(run.mean_power.crossbar_uw) << '\n';
            out << "inverter_power_uw," << num(run.mean_power.inverter_uw) << '\n';
            out << "total_power_uw," << num(run.mean_power.total_uw()) << '\n';
        }
        write_masks(o.out_dir, structure);
        {
            auto out = open_out(o.out_dir, "checkpoint.net");
            TrainConfig tc = c.train;
            tc.seed = c.seed;
            write_checkpoint(out, run.result.theta, c.device, tc, data.normalizer);
        }
        {
            auto out = open_out(o.out_dir, "network.net");
            write_network(out, to_conductance_network(run.result.theta, c.device), data.normalizer);
        }
    }
    return r;
}

json run_sweep(const ExperimentConfig& c, const RunOptions& o) {
    json r = base_report(c, "sweep");
    const auto rows = sweep_sparsity(c, o.threads);
    json points = json::array();
    for (const auto& row : rows) {
        json p = {{"density", row.density}, {"seed", row.seed}, {"ok", row.ok}};
        if (row.ok) {
            p["test_accuracy"] = row.test_accuracy;
            p["epochs"] = row.epochs;
            p["stop_reason"] = row.stop_reason;
            p["memristors"] = row.memristors;
            p["crossbar_power_uw"] = row.crossbar_power_uw;
        } else {
            p["error"] = row.error;
        }
        points.push_back(p);
    }
    r["penultimate_junction"] = c.layers.size() - 2;
    r["points"] = points;
    if (!o.out_dir.empty()) {
        auto out = open_out(o.out_dir, "sweep.csv");
        out << "density,fan_out,fan_in,test_accuracy,epochs,stop_reason,memristor_count,crossbar_power_uw,status\n";
        for (const auto& row : rows)
            out << num(row.density) << ',' << row.fan_out << ',' << row.fan_in << ',' << num(row.test_accuracy) << ','
                << row.epochs << ',' << row.stop_reason << ',' << row.memristors << ',' << num(row.crossbar_power_uw)
                << ',' << (row.ok ? "ok" : "failed") << '\n';
    }
    return r;
}

json run_variation(const ExperimentConfig& c, const RunOptions& o) {
    json r = base_report(c, "varmc");
    ConductanceNetwork net{NetworkStructure::dense(NetworkTopology(c.layers)), {}, c.device};
    Dataset test;
    if (!c.variation.checkpoint.empty()) {
        const auto cp = read_checkpoint(c.variation.checkpoint);
        net = cp.conductance_network();
        const auto normalizer = cp.normalizer ? *cp.normalizer : prepare_data(c, c.seed).normalizer;
        test = prepare_test_data(c, c.seed, normalizer);
        r["checkpoint"] = c.variation.checkpoint.string();
    } else {
        const auto data = prepare_data(c, c.seed);
        const auto run = train_and_evaluate(c, data, full_densities(c), c.seed);
        if (run.result.report.stop_reason == StopReason::diverged) {
            r["error"] = run.result.report.divergence_message;
            r["exit_code"] = 4;
            return r;
        }
        net = to_conductance_network(run.result.theta, c.device);
        test = data.test;
        r["trained"] = {{"epochs", run.result.report.epochs_run},
                        {"stop_reason", to_string(run.result.report.stop_reason)}};
    }
    const auto res = variation_mc(net, test, c.variation, c.seed, o.threads);
    r["clean_accuracy"] = res.clean_accuracy;
    r["test_samples"] = test.size();
    json levels = json::array();
    for (const auto& lv : res.levels)
        levels.push_back({{"noise", lv.noise}, {"mean", lv.mean}, {"std", lv.stddev}, {"min", lv.min}, {"trials", lv.accuracies.size()}});
    r["levels"] = levels;
    r["noise_model"] = "sigma' = clamp(sigma * (1 + eps)), eps ~ N(0, level^2); level read as relative standard deviation";
    r["quantization"] = c.variation.bits ? json(*c.variation.bits) : json(nullptr);
    r["order"] = c.variation.perturb_before_quantize ? "perturb-then-quantize" : "quantize-then-perturb";
    if (!o.out_dir.empty()) {
        {
            auto out = open_out(o.out_dir, "varmc_trials.csv");
            out << "noise_level,trial,accuracy\n";
            for (const auto& lv : res.levels)
                for (std::size_t t = 0; t < lv.accuracies.size(); ++t)
                    out << num(lv.noise) << ',' << t << ',' << num(lv.accuracies[t]) << '\n';
        }
        {
            auto out = open_out(o.out_dir, "varmc_summary.csv");
            out << "noise_level,trials,mean_accuracy,std_accuracy,min_accuracy,clean_accuracy\n";
            for (const auto& lv : res.levels)
                out << num(lv.noise) << ',' << lv.accuracies.size() << ',' << num(lv.mean) << ',' << num(lv.stddev) << ','
                    << num(lv.min) << ',' << num(res.clean_accuracy) << '\n';
        }
    }
    return r;
}

json variant_json(const PowerVariant& v) {
    return {{"densities", v.densities},
            {"memristors", count_json(v.memristors)},
            {"power", power_json(v.mean_power)},
            {"test_accuracy", v.test_accuracy}};
}

json run_power(const ExperimentConfig& c, const RunOptions& o) {
    json r = base_report(c, "power");
    ConductanceNetwork fc{NetworkStructure::dense(NetworkTopology(c.layers)), {}, c.device};
    ConductanceNetwork sparse = fc;
    Dataset test;
    if (!c.power.fc_checkpoint.empty() || !c.power.sparse_checkpoint.empty()) {
        if (c.power.fc_checkpoint.empty() || c.power.sparse_checkpoint.empty())
            throw ConfigError("power: give both fc_checkpoint and sparse_checkpoint, or neither");
        const auto a = read_checkpoint(c.power.fc_checkpoint);
        const auto b = read_checkpoint(c.power.sparse_checkpoint);
        fc = a.conductance_network();
        sparse = b.conductance_network();
        const auto normalizer = a.normalizer ? *a.normalizer : prepare_data(c, c.seed).normalizer;
        test = prepare_test_data(c, c.seed, normalizer);
    } else {
        const auto data = prepare_data(c, c.seed);
        const auto fc_run = train_and_evaluate(c, data, std::vector<double>(c.layers.size() - 1, 1.0), c.seed);
        const auto sp_run = train_and_evaluate(c, data, full_densities(c), c.seed);
        fc = to_conductance_network(fc_run.result.theta, c.device);
        sparse = to_conductance_network(sp_run.result.theta, c.device);
        test = data.test;
    }
    const auto cmp = compare_power(fc, sparse, test, c.inverter_power_uw);
    r["fc"] = variant_json(cmp.fc);
    r["sparse"] = variant_json(cmp.sparse);
    r["reduction"] = {{"crossbar", cmp.crossbar_reduction},
                      {"total", cmp.total_reduction},
                      {"memristors", cmp.memristor_reduction},
                      {"memristors_percent", std::round(100.0 * cmp.memristor_reduction)}};
    r["sparse_crossbar_lower_inputs"] = cmp.sparse_lower_count;
    r["test_samples"] = test.size();
    r["power_reference"] = reference_json(c.dataset.name);
    if (!o.out_dir.empty()) {
        {
            auto out = open_out(o.out_dir, "power.csv");
            out << "variant,memristors,crossbar_uw,inverter_uw,total_uw,test_accuracy\n";
            for (const auto* v : {&cmp.fc, &cmp.sparse})
                out << v->name << ',' << v->memristors.total << ',' << num(v->mean_power.crossbar_uw) << ','
                    << num(v->mean_power.inverter_uw) << ',' << num(v->mean_power.total_uw()) << ','
                    << num(v->test_accuracy) << '\n';
        }
        {
            auto out = open_out(o.out_dir, "power_per_sample.csv");
            out << "sample,fc_crossbar_uw,sparse_crossbar_uw\n";
            for (std::size_t i = 0; i < test.size(); ++i)
                out << i << ',' << num(cmp.fc.crossbar_per_sample[i]) << ',' << num(cmp.sparse.crossbar_per_sample[i])
                    << '\n';
        }
    }
    return r;
}

}  // namespace

json run(const ExperimentConfig& config, const RunOptions& options) {
    json r;
    switch (config.kind) {
        case ExperimentKind::train: r = run_train(config, options); break;
        case ExperimentKind::sweep_sparsity: r = run_sweep(config, options); break;
        case ExperimentKind::variation_mc: r = run_variation(config, options); break;
        case ExperimentKind::power_report: r = run_power(config, options); break;
    }
    finish_report(r, options.out_dir);
    return r;
}

json run_eval(const ExperimentConfig& config, const RunOptions& options) {
    json r = base_report(config, "eval");
    if (options.checkpoint.empty()) throw ConfigError("eval needs a checkpoint");
    const auto cp = read_checkpoint(options.checkpoint);
    if (!(cp.structure.topology() == NetworkTopology(config.layers)))
        throw ConfigError("checkpoint structure " + cp.structure.topology().to_string() + " does not match config");
    const auto normalizer = cp.normalizer ? *cp.normalizer : prepare_data(config, config.seed).normalizer;
    const Dataset test = prepare_test_data(config, config.seed, normalizer);
    const std::size_t classes = config.layers.back();
    const auto net = cp.conductance_network();
    const auto circuit = evaluate(net, test);
    r["checkpoint"] = options.checkpoint.string();
    r["circuit"] = eval_json(circuit, classes);
    std::optional<EvalResult> abstract;
    if (cp.kind == CheckpointKind::theta) {
        abstract = evaluate(cp.theta_params(), test, cp.device);
        r["abstract"] = eval_json(*abstract, classes);
        r["paths_agree"] = abstract->predictions == circuit.predictions;
    }
    r["power"] = power_json(mean_static_power(net, test, config.inverter_power_uw));
    r["memristors"] = count_json(memristor_count(cp.structure.topology(), cp.structure.masks()));
    if (!options.out_dir.empty()) {
        auto out = open_out(options.out_dir, "eval.csv");
        out << "path,accuracy,correct,total\n";
        out << "circuit," << num(circuit.accuracy) << ',' << circuit.correct << ',' << circuit.total << '\n';
        if (abstract)
            out << "abstract," << num(abstract->accuracy) << ',' << abstract->correct << ',' << abstract->total << '\n';
    }
    finish_report(r, options.out_dir);
    return r;
}

}  // namespace sparsebar
