#include "sparsebar/netfile.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "sparsebar/error.hpp"

namespace sparsebar {
namespace {

constexpr int kFormatVersion = 1;

std::string fmt_number(double v, int digits) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

const char* regeneration_name(Regeneration r) { return r == Regeneration::ideal ? "ideal" : "cascaded"; }
const char* grid_name(QuantGrid g) { return g == QuantGrid::logarithmic ? "log" : "linear"; }
const char* g2_name(G2Gradient g) { return g == G2Gradient::diagonal ? "diagonal" : "full"; }

void write_header(std::ostream& os, const char* kind, const NetworkStructure& s, const DeviceParams& d) {
    os << "sparsebar-network " << kFormatVersion << '\n';
    os << "kind " << kind << '\n';
    os << "topology";
    for (std::size_t n : s.topology().layer_sizes()) os << ' ' << n;
    os << '\n';
    os << "device sigma_min " << fmt_number(d.sigma_min, 17) << " sigma_max " << fmt_number(d.sigma_max, 17) << " vdd "
       << fmt_number(d.vdd, 17) << " write_threshold " << fmt_number(d.write_threshold, 17) << " vtc_gain "
       << fmt_number(d.vtc_gain, 17) << " regeneration " << regeneration_name(d.regeneration) << " quant_grid "
       << grid_name(d.quant_grid) << '\n';
    for (std::size_t j = 0; j < s.junction_count(); ++j) write_mask(os, s.mask(j), j + 1);
}

void write_tables(std::ostream& os, const NetworkStructure& s, const JunctionValues& values, int digits) {
    for (std::size_t j = 0; j < s.junction_count(); ++j) {
        const auto& layout = s.layout(j);
        for (int side = 0; side < 2; ++side) {
            const auto& v = side == 0 ? values[j].p : values[j].n;
            os << "table " << j + 1 << ' ' << (side == 0 ? 'p' : 'n') << '\n';
            for (std::size_t r = 0; r < layout.outputs; ++r) {
                for (std::size_t k = layout.row_begin[r]; k < layout.row_begin[r + 1]; ++k) {
                    if (k != layout.row_begin[r]) os << ' ';
                    os << fmt_number(v[k], digits);
                }
                os << '\n';
            }
        }
    }
}

void write_normalizer(std::ostream& os, const std::optional<VoltageNormalizer>& n) {
    if (!n) return;
    os << "normalizer " << n->mins().size() << '\n';
    os << "min";
    for (double v : n->mins()) os << ' ' << fmt_number(v, 17);
    os << "\nmax";
    for (double v : n->maxs()) os << ' ' << fmt_number(v, 17);
    os << '\n';
}

[[noreturn]] void bad(const std::string& what) { throw DataError("network file: " + what); }

std::string next_line(std::istream& is, const char* expecting) {
    std::string line;
    if (!std::getline(is, line)) bad(std::string("unexpected end of file, expecting ") + expecting);
    return line;
}

std::map<std::string, std::string> key_values(std::istringstream& ls) {
    std::map<std::string, std::string> kv;
    std::string k, v;
    while (ls >> k >> v) kv[k] = v;
    return kv;
}

double to_double(const std::map<std::string, std::string>& kv, const std::string& key, double fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        bad("bad value for " + key);
    }
}

}  // namespace

ConductanceNetwork Checkpoint::conductance_network() const {
    if (kind == CheckpointKind::conductance) return {structure, values, device};
    return to_conductance_network(theta_params(), device);
}

ThetaParams Checkpoint::theta_params() const {
    if (kind != CheckpointKind::theta) throw ConfigError("checkpoint holds conductances, not trainable parameters");
    return {structure, values};
}

void write_network(std::ostream& os, const ConductanceNetwork& net, const std::optional<VoltageNormalizer>& normalizer) {
    write_header(os, "conductance", net.structure, net.device);
    write_tables(os, net.structure, net.sigma, 9);
    write_normalizer(os, normalizer);
    os << "end\n";
}

void write_checkpoint(std::ostream& os, const ThetaParams& theta, const DeviceParams& device, const TrainConfig& config,
                      const std::optional<VoltageNormalizer>& normalizer) {
    write_header(os, "theta", theta.structure, device);
    write_tables(os, theta.structure, theta.theta, 17);
    write_normalizer(os, normalizer);
    os << "train learning_rate " << fmt_number(config.learning_rate, 17) << " max_epochs " << config.max_epochs
       << " target_accuracy " << fmt_number(config.target_accuracy, 17) << " batch_size " << config.batch_size
       << " seed " << config.seed << " init_scale " << fmt_number(config.init_scale, 17) << " target_level "
       << fmt_number(config.target_level, 17) << " g2_gradient " << g2_name(config.g2_gradient) << " lr_decay "
       << fmt_number(config.lr_decay, 17) << " keep_best " << (config.keep_best ? 1 : 0) << '\n';
    os << "end\n";
}

Checkpoint read_checkpoint(std::istream& is) {
    std::istringstream magic(next_line(is, "format line"));
    std::string tag;
    int version = 0;
    if (!(magic >> tag >> version) || tag != "sparsebar-network") bad("not a sparsebar network file");
    if (version != kFormatVersion) bad("unsupported format version " + std::to_string(version));

    Checkpoint cp{CheckpointKind::conductance, NetworkStructure::dense(NetworkTopology({1, 1})), {}, {}, {}, {}};
    {
        std::istringstream ls(next_line(is, "kind"));
        std::string k, v;
        ls >> k >> v;
        if (k != "kind" || (v != "conductance" && v != "theta")) bad("bad kind line");
        cp.kind = v == "theta" ? CheckpointKind::theta : CheckpointKind::conductance;
    }
    std::vector<std::size_t> layers;
    {
        std::istringstream ls(next_line(is, "topology"));
        std::string k;
        ls >> k;
        if (k != "topology") bad("missing topology line");
        std::size_t n;
        while (ls >> n) layers.push_back(n);
    }
    const NetworkTopology topology(layers);
    {
        std::istringstream ls(next_line(is, "device"));
        std::string k;
        ls >> k;
        if (k != "device") bad("missing device line");
        const auto kv = key_values(ls);
        DeviceParams d;
        d.sigma_min = to_double(kv, "sigma_min", d.sigma_min);
        d.sigma_max = to_double(kv, "sigma_max", d.sigma_max);
        d.vdd = to_double(kv, "vdd", d.vdd);
        d.write_threshold = to_double(kv, "write_threshold", d.write_threshold);
        d.vtc_gain = to_double(kv, "vtc_gain", d.vtc_gain);
        if (auto it = kv.find("regeneration"); it != kv.end())
            d.regeneration = it->second == "ideal" ? Regeneration::ideal : Regeneration::cascaded;
        if (auto it = kv.find("quant_grid"); it != kv.end())
            d.quant_grid = it->second == "log" ? QuantGrid::logarithmic : QuantGrid::linear;
        d.validate();
        cp.device = d;
    }
    std::vector<MaskMatrix> masks;
    for (std::size_t j = 0; j < topology.junction_count(); ++j) {
        std::size_t junction = 0;
        masks.push_back(read_mask(is, junction));
        if (junction != j + 1) bad("mask blocks out of order");
    }
    cp.structure = NetworkStructure(topology, std::move(masks));
    cp.values = make_values(cp.structure);

    for (std::size_t j = 0; j < cp.structure.junction_count(); ++j) {
        const auto& layout = cp.structure.layout(j);
        for (char side : {'p', 'n'}) {
            std::istringstream hs(next_line(is, "table header"));
            std::string k;
            std::size_t junction = 0;
            char s = 0;
            if (!(hs >> k >> junction >> s) || k != "table" || junction != j + 1 || s != side)
                bad("expected 'table " + std::to_string(j + 1) + ' ' + side + "'");
            auto& dst = side == 'p' ? cp.values[j].p : cp.values[j].n;
            for (std::size_t r = 0; r < layout.outputs; ++r) {
                std::istringstream rs(next_line(is, "table row"));
                for (std::size_t k2 = layout.row_begin[r]; k2 < layout.row_begin[r + 1]; ++k2)
                    if (!(rs >> dst[k2])) bad("table " + std::to_string(j + 1) + " row " + std::to_string(r) + " too short");
                double extra;
                if (rs >> extra) bad("table " + std::to_string(j + 1) + " row " + std::to_string(r) + " too long");
            }
        }
    }

    while (true) {
        const std::string line = next_line(is, "end");
        std::istringstream ls(line);
        std::string k;
        ls >> k;
        if (k == "end") break;
        if (k == "normalizer") {
            std::size_t n = 0;
            ls >> n;
            std::vector<double> mins(n), maxs(n);
            for (auto* vec : {&mins, &maxs}) {
                std::istringstream vs(next_line(is, "normalizer row"));
                std::string tag2;
                vs >> tag2;
                for (auto& v : *vec)
                    if (!(vs >> v)) bad("normalizer row too short");
            }
            cp.normalizer = VoltageNormalizer(std::move(mins), std::move(maxs), cp.device.vdd);
        } else if (k == "train") {
            const auto kv = key_values(ls);
            TrainConfig c;
            c.learning_rate = to_double(kv, "learning_rate", c.learning_rate);
            c.max_epochs = static_cast<std::size_t>(to_double(kv, "max_epochs", static_cast<double>(c.max_epochs)));
            c.target_accuracy = to_double(kv, "target_accuracy", c.target_accuracy);
            c.batch_size = static_cast<std::size_t>(to_double(kv, "batch_size", 1.0));
            if (auto it = kv.find("seed"); it != kv.end()) c.seed = std::stoull(it->second);
            c.init_scale = to_double(kv, "init_scale", c.init_scale);
            c.target_level = to_double(kv, "target_level", c.target_level);
            c.lr_decay = to_double(kv, "lr_decay", c.lr_decay);
            c.keep_best = to_double(kv, "keep_best", 1.0) != 0.0;
            if (auto it = kv.find("g2_gradient"); it != kv.end())
                c.g2_gradient = it->second == "diagonal" ? G2Gradient::diagonal : G2Gradient::full;
            cp.train_config = c;
        } else {
            bad("unknown section '" + k + "'");
        }
    }
    if (cp.kind == CheckpointKind::conductance) cp.conductance_network().validate();
    return cp;
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return read_checkpoint(in);
}

}  // namespace sparsebar
