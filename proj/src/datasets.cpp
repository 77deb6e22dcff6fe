#include "sparsebar/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <sstream>

#include "sparsebar/error.hpp"
#include "sparsebar/rng.hpp"

namespace sparsebar {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\"");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\"");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

bool is_missing(const std::string& field) {
    return field.empty() || field == "?" || field == "NA" || field == "NaN" || field == "nan";
}

bool parse_double(const std::string& s, double& out) {
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& buf, std::size_t offset, const std::filesystem::path& path) {
    if (offset + 4 > buf.size())
        throw DataError(path.string() + ": truncated header at byte offset " + std::to_string(offset));
    return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
           (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

void check_magic(std::uint32_t magic, std::uint32_t expected, const std::filesystem::path& path) {
    if (magic != expected) {
        std::ostringstream msg;
        msg << path.string() << ": bad magic 0x" << std::hex << magic << " at byte offset 0 (expected 0x" << expected << ')';
        throw DataError(msg.str());
    }
}

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset d;
    d.name = name;
    d.feature_count = feature_count;
    d.class_count = class_count;
    d.class_names = class_names;
    d.feature_names = feature_names;
    d.features.reserve(indices.size() * feature_count);
    d.labels.reserve(indices.size());
    for (std::size_t i : indices) {
        const auto s = sample(i);
        d.features.insert(d.features.end(), s.begin(), s.end());
        d.labels.push_back(labels[i]);
    }
    return d;
}

Dataset load_tabular(const std::filesystem::path& path, const TabularSchema& schema, LoadStats* stats) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || trim(line).empty()) throw DataError(path.string() + ": empty file (no header row)");
    const auto header = split_csv_line(line);

    auto column_of = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DataError(path.string() + ": no column named '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t label_col = column_of(schema.label_column);
    std::vector<std::size_t> feature_cols;
    if (schema.feature_columns.empty()) {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (c != label_col) feature_cols.push_back(c);
    } else {
        for (const auto& name : schema.feature_columns) feature_cols.push_back(column_of(name));
    }

    Dataset d;
    d.name = path.stem().string();
    d.feature_count = feature_cols.size();
    for (std::size_t c : feature_cols) d.feature_names.push_back(header[c]);

    std::vector<std::string> raw_labels;
    std::vector<std::string> problems;
    LoadStats local;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ++local.rows_read;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            problems.push_back("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                               " fields, found " + std::to_string(fields.size()));
            continue;
        }
        bool missing = is_missing(fields[label_col]);
        for (std::size_t c : feature_cols) missing = missing || is_missing(fields[c]);
        if (missing) {
            ++local.rows_dropped_missing;
            continue;
        }
        std::vector<double> row;
        row.reserve(feature_cols.size());
        bool ok = true;
        for (std::size_t c : feature_cols) {
            double v;
            if (!parse_double(fields[c], v)) {
                problems.push_back("line " + std::to_string(line_no) + ": column '" + header[c] + "' value '" +
                                   fields[c] + "' is not a number");
                ok = false;
                break;
            }
            row.push_back(v);
        }
        if (!ok) continue;
        d.features.insert(d.features.end(), row.begin(), row.end());
        raw_labels.push_back(fields[label_col]);
    }
    if (!problems.empty()) {
        std::string msg = path.string() + ": " + std::to_string(problems.size()) + " malformed row(s)";
        for (std::size_t i = 0; i < problems.size() && i < 20; ++i) msg += "\n  " + problems[i];
        throw DataError(msg);
    }
    if (raw_labels.empty()) throw DataError(path.string() + ": no usable samples");

    std::map<std::string, std::size_t> classes;
    for (const auto& l : raw_labels) classes.emplace(l, 0);
    for (auto& [name, index] : classes) {
        index = d.class_names.size();
        d.class_names.push_back(name);
    }
    d.class_count = classes.size();
    for (const auto& l : raw_labels) d.labels.push_back(classes.at(l));
    if (stats) *stats = local;
    return d;
}

std::vector<double> mean_pool_2x2(std::span<const double> image, std::size_t rows, std::size_t cols) {
    std::vector<double> out((rows / 2) * (cols / 2));
    for (std::size_t r = 0; r < rows / 2; ++r)
        for (std::size_t c = 0; c < cols / 2; ++c) {
            const std::size_t a = 2 * r * cols + 2 * c;
            out[r * (cols / 2) + c] = 0.25 * (image[a] + image[a + 1] + image[a + cols] + image[a + cols + 1]);
        }
    return out;
}

Dataset load_mnist(const std::filesystem::path& images, const std::filesystem::path& labels, bool downsample) {
    const auto img = read_file(images);
    const auto lab = read_file(labels);
    check_magic(read_be32(img, 0, images), 0x00000803, images);
    check_magic(read_be32(lab, 0, labels), 0x00000801, labels);
    const std::size_t count = read_be32(img, 4, images);
    const std::size_t rows = read_be32(img, 8, images);
    const std::size_t cols = read_be32(img, 12, images);
    const std::size_t label_count = read_be32(lab, 4, labels);
    if (label_count != count)
        throw DataError(labels.string() + ": " + std::to_string(label_count) + " labels for " + std::to_string(count) +
                        " images (count field at byte offset 4)");
    const std::size_t pixels = rows * cols;
    if (img.size() < 16 + count * pixels)
        throw DataError(images.string() + ": truncated at byte offset " + std::to_string(img.size()) + ", expected " +
                        std::to_string(16 + count * pixels) + " bytes");
    if (lab.size() < 8 + count)
        throw DataError(labels.string() + ": truncated at byte offset " + std::to_string(lab.size()) + ", expected " +
                        std::to_string(8 + count) + " bytes");
    if (downsample && (rows % 2 || cols % 2)) throw DataError(images.string() + ": odd image size cannot be pooled 2x2");

    Dataset d;
    d.name = "mnist";
    d.class_count = 10;
    d.feature_count = downsample ? pixels / 4 : pixels;
    d.features.reserve(count * d.feature_count);
    d.labels.reserve(count);
    std::vector<double> raw(pixels);
    for (std::size_t n = 0; n < count; ++n) {
        const unsigned char* p = img.data() + 16 + n * pixels;
        std::copy(p, p + pixels, raw.begin());
        if (downsample) {
            const auto pooled = mean_pool_2x2(raw, rows, cols);
            d.features.insert(d.features.end(), pooled.begin(), pooled.end());
        } else {
            d.features.insert(d.features.end(), raw.begin(), raw.end());
        }
        const std::size_t label = lab[8 + n];
        if (label > 9) throw DataError(labels.string() + ": label " + std::to_string(label) + " at byte offset " +
                                       std::to_string(8 + n));
        d.labels.push_back(label);
    }
    for (int c = 0; c < 10; ++c) d.class_names.push_back(std::to_string(c));
    return d;
}

VoltageNormalizer::VoltageNormalizer(std::vector<double> mins, std::vector<double> maxs, double vdd)
    : mins_(std::move(mins)), maxs_(std::move(maxs)), vdd_(vdd) {
    if (mins_.size() != maxs_.size()) throw ConfigError("normalizer: min/max length mismatch");
}

VoltageNormalizer VoltageNormalizer::fit(const Dataset& data, const DeviceParams& device) {
    std::vector<double> mins(data.feature_count, 0.0), maxs(data.feature_count, 0.0);
    for (std::size_t f = 0; f < data.feature_count; ++f) {
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t i = 0; i < data.size(); ++i) {
            lo = std::min(lo, data.sample(i)[f]);
            hi = std::max(hi, data.sample(i)[f]);
        }
        mins[f] = data.size() ? lo : 0.0;
        maxs[f] = data.size() ? hi : 0.0;
    }
    return VoltageNormalizer(std::move(mins), std::move(maxs), device.vdd);
}

double VoltageNormalizer::to_voltage(std::size_t f, double raw) const {
    const double span = maxs_[f] - mins_[f];
    if (!(span > 0.0)) return 0.0;
    const double u = std::clamp((raw - mins_[f]) / span, 0.0, 1.0);
    return vdd_ * (u - 0.5);
}

double VoltageNormalizer::to_raw(std::size_t f, double volts) const {
    return mins_[f] + (volts / vdd_ + 0.5) * (maxs_[f] - mins_[f]);
}

Dataset VoltageNormalizer::apply(const Dataset& data) const {
    if (data.feature_count != mins_.size()) throw ConfigError("normalizer: feature count mismatch");
    Dataset out = data;
    for (std::size_t i = 0; i < data.size(); ++i)
        for (std::size_t f = 0; f < data.feature_count; ++f)
            out.features[i * data.feature_count + f] = to_voltage(f, data.sample(i)[f]);
    return out;
}

Dataset normalize_to_voltage(const Dataset& dataset, const DeviceParams& device) {
    return VoltageNormalizer::fit(dataset, device).apply(dataset);
}

std::vector<std::size_t> split_order(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, {0x5b1e}));
    fisher_yates(order, rng);
    return order;
}

std::size_t train_count(std::size_t n, double train_fraction) {
    return static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
}

Split split(const Dataset& dataset, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must be in (0, 1)");
    const auto order = split_order(dataset.size(), seed);
    const std::size_t k = train_count(dataset.size(), train_fraction);
    const std::span<const std::size_t> all(order);
    return {dataset.subset(all.first(k)), dataset.subset(all.subspan(k))};
}

}  // namespace sparsebar
