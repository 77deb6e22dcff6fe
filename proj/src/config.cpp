#include "sparsebar/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "sparsebar/error.hpp"
#include "sparsebar/topology.hpp"

namespace sparsebar {
namespace {

template <class T>
T get(const YAML::Node& node, const char* key, T fallback) {
    const auto child = node[key];
    if (!child) return fallback;
    try {
        return child.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(std::string("config: bad value for '") + key + "'");
    }
}

template <class T>
std::vector<T> get_list(const YAML::Node& node, const char* key) {
    const auto child = node[key];
    if (!child) return {};
    if (!child.IsSequence()) throw ConfigError(std::string("config: '") + key + "' must be a list");
    try {
        return child.as<std::vector<T>>();
    } catch (const YAML::Exception&) {
        throw ConfigError(std::string("config: bad list for '") + key + "'");
    }
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
    if (p.empty() || p.is_absolute()) return p;
    return base / p;
}

// Dataset files live under $SPARSEBAR_DATA_DIR when set, otherwise under
// dataset.root (relative to the config file), otherwise next to the config.
std::filesystem::path data_root(const YAML::Node& ds, const std::filesystem::path& base) {
    if (const char* env = std::getenv("SPARSEBAR_DATA_DIR"); env && *env) return env;
    const auto root = get<std::string>(ds, "root", "");
    return root.empty() ? base : resolve(root, base);
}

ExperimentKind parse_kind(const std::string& s) {
    if (s == "train") return ExperimentKind::train;
    if (s == "sweep-sparsity" || s == "sweep") return ExperimentKind::sweep_sparsity;
    if (s == "variation-mc" || s == "varmc") return ExperimentKind::variation_mc;
    if (s == "power-report" || s == "power") return ExperimentKind::power_report;
    throw ConfigError("config: unknown experiment kind '" + s + "'");
}

}  // namespace

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::train: return "train";
        case ExperimentKind::sweep_sparsity: return "sweep-sparsity";
        case ExperimentKind::variation_mc: return "variation-mc";
        case ExperimentKind::power_report: return "power-report";
    }
    return "unknown";
}

void ExperimentConfig::validate() const {
    const NetworkTopology topo(layers);
    if (!densities.empty() && densities.size() != topo.junction_count())
        throw ConfigError("config: expected " + std::to_string(topo.junction_count()) + " densities, got " +
                          std::to_string(densities.size()));
    for (std::size_t j = 0; j < densities.size(); ++j) resolve_density(topo.inputs(j), topo.outputs(j), densities[j]);
    if (kind == ExperimentKind::sweep_sparsity) {
        if (sweep.densities.empty()) throw ConfigError("config: sweep.densities is empty");
        if (topo.junction_count() < 2) throw ConfigError("config: a sparsity sweep needs at least two junctions");
    }
    if (kind == ExperimentKind::variation_mc) {
        if (variation.trials < 1) throw ConfigError("config: variation.trials must be >= 1");
        for (double n : variation.noise_levels)
            if (!(n >= 0.0)) throw ConfigError("config: noise levels must be non-negative");
        if (variation.bits && (*variation.bits < 1 || *variation.bits > 16))
            throw ConfigError("config: variation.bits must be in [1, 16]");
    }
    if (!(dataset.train_fraction > 0.0 && dataset.train_fraction < 1.0))
        throw ConfigError("config: dataset.train_fraction must be in (0, 1)");
    if (!(inverter_power_uw >= 0.0)) throw ConfigError("config: inverter_power_uw must be non-negative");
    device.validate();
    train.validate();
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");

    ExperimentConfig c;
    c.kind = parse_kind(get<std::string>(root, "experiment", "train"));
    c.seed = get<std::uint64_t>(root, "seed", c.seed);

    const auto ds = root["dataset"];
    if (!ds) throw ConfigError("config: missing 'dataset' section");
    const auto format = get<std::string>(ds, "format", "csv");
    if (format == "csv") c.dataset.format = DatasetFormat::csv;
    else if (format == "mnist") c.dataset.format = DatasetFormat::mnist;
    else throw ConfigError("config: dataset.format must be csv or mnist");
    c.dataset.name = get<std::string>(ds, "name", format);
    const auto root_dir = data_root(ds, base_dir);
    c.dataset.path = resolve(get<std::string>(ds, "path", ""), root_dir);
    c.dataset.label_column = get<std::string>(ds, "label_column", "");
    c.dataset.feature_columns = get_list<std::string>(ds, "features");
    c.dataset.images = resolve(get<std::string>(ds, "images", ""), root_dir);
    c.dataset.labels = resolve(get<std::string>(ds, "labels", ""), root_dir);
    c.dataset.downsample = get<bool>(ds, "downsample", true);
    c.dataset.subset = get<std::size_t>(ds, "subset", 0);
    c.dataset.train_fraction = get<double>(ds, "train_fraction", 0.8);
    if (c.dataset.format == DatasetFormat::csv && (c.dataset.path.empty() || c.dataset.label_column.empty()))
        throw ConfigError("config: csv datasets need 'path' and 'label_column'");
    if (c.dataset.format == DatasetFormat::mnist && (c.dataset.images.empty() || c.dataset.labels.empty()))
        throw ConfigError("config: mnist datasets need 'images' and 'labels'");

    const auto net = root["network"];
    if (!net) throw ConfigError("config: missing 'network' section");
    c.layers = get_list<std::size_t>(net, "layers");
    c.densities = get_list<double>(net, "densities");
    c.subarray_rows = get<std::size_t>(net, "subarray_rows", c.subarray_rows);
    c.subarray_cols = get<std::size_t>(net, "subarray_cols", c.subarray_cols);

    if (const auto d = root["device"]) {
        c.device.sigma_min = get<double>(d, "sigma_min", c.device.sigma_min);
        c.device.sigma_max = get<double>(d, "sigma_max", c.device.sigma_max);
        c.device.vdd = get<double>(d, "vdd", c.device.vdd);
        c.device.write_threshold = get<double>(d, "write_threshold", c.device.write_threshold);
        c.device.vtc_gain = get<double>(d, "vtc_gain", c.device.vtc_gain);
        const auto grid = get<std::string>(d, "quant_grid", "linear");
        if (grid != "linear" && grid != "log") throw ConfigError("config: device.quant_grid must be linear or log");
        c.device.quant_grid = grid == "log" ? QuantGrid::logarithmic : QuantGrid::linear;
        const auto regen = get<std::string>(d, "regeneration", "cascaded");
        if (regen != "cascaded" && regen != "ideal")
            throw ConfigError("config: device.regeneration must be cascaded or ideal");
        c.device.regeneration = regen == "ideal" ? Regeneration::ideal : Regeneration::cascaded;
    }
    if (const auto ci = root["circuit"]) c.inverter_power_uw = get<double>(ci, "inverter_power_uw", c.inverter_power_uw);

    if (const auto t = root["train"]) {
        c.train.learning_rate = get<double>(t, "learning_rate", c.train.learning_rate);
        c.train.lr_decay = get<double>(t, "lr_decay", c.train.lr_decay);
        c.train.keep_best = get<bool>(t, "keep_best", c.train.keep_best);
        c.train.max_epochs = get<std::size_t>(t, "max_epochs", c.train.max_epochs);
        c.train.target_accuracy = get<double>(t, "target_accuracy", c.train.target_accuracy);
        c.train.batch_size = get<std::size_t>(t, "batch_size", c.train.batch_size);
        c.train.init_scale = get<double>(t, "init_scale", c.train.init_scale);
        c.train.target_level = get<double>(t, "target_level", c.train.target_level);
        const auto g2 = get<std::string>(t, "g2_gradient", "full");
        if (g2 != "full" && g2 != "diagonal") throw ConfigError("config: train.g2_gradient must be full or diagonal");
        c.train.g2_gradient = g2 == "diagonal" ? G2Gradient::diagonal : G2Gradient::full;
    }
    c.train.seed = c.seed;

    if (const auto v = root["variation"]) {
        if (v["noise_levels"]) c.variation.noise_levels = get_list<double>(v, "noise_levels");
        c.variation.trials = get<std::size_t>(v, "trials", c.variation.trials);
        if (v["bits"] && !v["bits"].IsNull()) c.variation.bits = get<int>(v, "bits", 4);
        const auto order = get<std::string>(v, "order", "quantize-then-perturb");
        if (order != "quantize-then-perturb" && order != "perturb-then-quantize")
            throw ConfigError("config: variation.order must be quantize-then-perturb or perturb-then-quantize");
        c.variation.perturb_before_quantize = order == "perturb-then-quantize";
        c.variation.checkpoint = resolve(get<std::string>(v, "checkpoint", ""), base_dir);
    }
    if (const auto s = root["sweep"]) c.sweep.densities = get_list<double>(s, "densities");
    if (const auto p = root["power"]) {
        c.power.fc_checkpoint = resolve(get<std::string>(p, "fc_checkpoint", ""), base_dir);
        c.power.sparse_checkpoint = resolve(get<std::string>(p, "sparse_checkpoint", ""), base_dir);
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

std::string echo_config(const ExperimentConfig& c) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "experiment" << YAML::Value << to_string(c.kind);
    out << YAML::Key << "seed" << YAML::Value << c.seed;

    out << YAML::Key << "dataset" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << c.dataset.name;
    out << YAML::Key << "format" << YAML::Value << (c.dataset.format == DatasetFormat::mnist ? "mnist" : "csv");
    if (c.dataset.format == DatasetFormat::csv) {
        out << YAML::Key << "path" << YAML::Value << c.dataset.path.string();
        out << YAML::Key << "label_column" << YAML::Value << c.dataset.label_column;
        if (!c.dataset.feature_columns.empty())
            out << YAML::Key << "features" << YAML::Value << YAML::Flow << c.dataset.feature_columns;
    } else {
        out << YAML::Key << "images" << YAML::Value << c.dataset.images.string();
        out << YAML::Key << "labels" << YAML::Value << c.dataset.labels.string();
        out << YAML::Key << "downsample" << YAML::Value << c.dataset.downsample;
    }
    out << YAML::Key << "subset" << YAML::Value << c.dataset.subset;
    out << YAML::Key << "train_fraction" << YAML::Value << c.dataset.train_fraction;
    out << YAML::EndMap;

    out << YAML::Key << "network" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "layers" << YAML::Value << YAML::Flow << c.layers;
    out << YAML::Key << "densities" << YAML::Value << YAML::Flow << c.densities;
    out << YAML::Key << "subarray_rows" << YAML::Value << c.subarray_rows;
    out << YAML::Key << "subarray_cols" << YAML::Value << c.subarray_cols;
    out << YAML::EndMap;

    out << YAML::Key << "device" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "sigma_min" << YAML::Value << c.device.sigma_min;
    out << YAML::Key << "sigma_max" << YAML::Value << c.device.sigma_max;
    out << YAML::Key << "vdd" << YAML::Value << c.device.vdd;
    out << YAML::Key << "write_threshold" << YAML::Value << c.device.write_threshold;
    out << YAML::Key << "vtc_gain" << YAML::Value << c.device.vtc_gain;
    out << YAML::Key << "quant_grid" << YAML::Value << (c.device.quant_grid == QuantGrid::logarithmic ? "log" : "linear");
    out << YAML::Key << "regeneration" << YAML::Value
        << (c.device.regeneration == Regeneration::ideal ? "ideal" : "cascaded");
    out << YAML::EndMap;

    out << YAML::Key << "circuit" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "inverter_power_uw" << YAML::Value << c.inverter_power_uw;
    out << YAML::EndMap;

    out << YAML::Key << "train" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "learning_rate" << YAML::Value << c.train.learning_rate;
    out << YAML::Key << "max_epochs" << YAML::Value << c.train.max_epochs;
    out << YAML::Key << "target_accuracy" << YAML::Value << c.train.target_accuracy;
    out << YAML::Key << "batch_size" << YAML::Value << c.train.batch_size;
    out << YAML::Key << "lr_decay" << YAML::Value << c.train.lr_decay;
    out << YAML::Key << "keep_best" << YAML::Value << c.train.keep_best;
    out << YAML::Key << "init_scale" << YAML::Value << c.train.init_scale;
    out << YAML::Key << "target_level" << YAML::Value << c.train.target_level;
    out << YAML::Key << "g2_gradient" << YAML::Value << (c.train.g2_gradient == G2Gradient::diagonal ? "diagonal" : "full");
    out << YAML::EndMap;

    {
        out << YAML::Key << "variation" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "noise_levels" << YAML::Value << YAML::Flow << c.variation.noise_levels;
        out << YAML::Key << "trials" << YAML::Value << c.variation.trials;
        if (c.variation.bits) out << YAML::Key << "bits" << YAML::Value << *c.variation.bits;
        out << YAML::Key << "order" << YAML::Value
            << (c.variation.perturb_before_quantize ? "perturb-then-quantize" : "quantize-then-perturb");
        if (!c.variation.checkpoint.empty())
            out << YAML::Key << "checkpoint" << YAML::Value << c.variation.checkpoint.string();
        out << YAML::EndMap;
    }
    if (!c.sweep.densities.empty()) {
        out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "densities" << YAML::Value << YAML::Flow << c.sweep.densities;
        out << YAML::EndMap;
    }
    if (!c.power.fc_checkpoint.empty() || !c.power.sparse_checkpoint.empty()) {
        out << YAML::Key << "power" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "fc_checkpoint" << YAML::Value << c.power.fc_checkpoint.string();
        out << YAML::Key << "sparse_checkpoint" << YAML::Value << c.power.sparse_checkpoint.string();
        out << YAML::EndMap;
    }
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace sparsebar
