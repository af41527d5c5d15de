#include "fmcl/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "fmcl/rng.hpp"

namespace fmcl {

EmbeddingDataset::EmbeddingDataset(std::size_t dim, std::size_t num_classes)
    : dim_(dim), num_classes_(num_classes)
{
    if (dim == 0) throw std::invalid_argument("EmbeddingDataset: dim must be positive");
    if (num_classes == 0) throw std::invalid_argument("EmbeddingDataset: num_classes must be positive");
}

void EmbeddingDataset::add(std::span<const double> vector, int label)
{
    if (vector.size() != dim_) {
        throw std::invalid_argument("EmbeddingDataset: vector has " + std::to_string(vector.size()) +
                                    " components, expected " + std::to_string(dim_));
    }
    if (label < 0 || static_cast<std::size_t>(label) >= num_classes_) {
        throw std::invalid_argument("EmbeddingDataset: label " + std::to_string(label) + " out of range");
    }
    for (double v : vector) {
        if (!std::isfinite(v)) throw std::invalid_argument("EmbeddingDataset: non-finite component");
    }
    values_.insert(values_.end(), vector.begin(), vector.end());
    labels_.push_back(label);
}

std::vector<std::size_t> EmbeddingDataset::class_counts() const
{
    std::vector<std::size_t> counts(num_classes_, 0);
    for (int y : labels_) ++counts[static_cast<std::size_t>(y)];
    return counts;
}

EmbeddingDataset EmbeddingDataset::subset(std::span<const std::size_t> indices) const
{
    EmbeddingDataset out(dim_, num_classes_);
    out.values_.reserve(indices.size() * dim_);
    out.labels_.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= size()) throw std::out_of_range("EmbeddingDataset::subset: index out of range");
        const auto v = vector(i);
        out.values_.insert(out.values_.end(), v.begin(), v.end());
        out.labels_.push_back(labels_[i]);
    }
    return out;
}

void SyntheticSpec::validate() const
{
    if (num_latent_clusters == 0) throw std::invalid_argument("synthetic: num_latent_clusters must be positive");
    if (num_classes == 0) throw std::invalid_argument("synthetic: num_classes must be positive");
    if (dim < 2) throw std::invalid_argument("synthetic: dim must be at least 2");
    if (samples_per_class_per_cluster == 0) throw std::invalid_argument("synthetic: zero samples requested");
    if (!(class_mean_separation > 0.0) || !std::isfinite(class_mean_separation)) {
        throw std::invalid_argument("synthetic: class_mean_separation must be positive");
    }
    if (!(within_class_stddev >= 0.0) || !std::isfinite(within_class_stddev)) {
        throw std::invalid_argument("synthetic: within_class_stddev must be non-negative");
    }
    if (layout == LabelLayout::low_overlap && num_classes < 2) {
        throw std::invalid_argument("synthetic: low_overlap layout needs at least 2 classes");
    }
}

std::size_t SyntheticSpec::output_classes() const
{
    if (layout == LabelLayout::low_overlap) return 1 + num_latent_clusters * (num_classes - 1);
    if (layout == LabelLayout::disjoint) return num_latent_clusters * num_classes;
    return num_classes;
}

namespace {

// Region index of (cluster, label) for each layout; regions own prototypes.
std::size_t region_count(const SyntheticSpec& spec)
{
    const bool per_cluster = spec.layout == LabelLayout::distinct || spec.layout == LabelLayout::disjoint;
    return per_cluster ? spec.num_latent_clusters * spec.num_classes
                                                : spec.num_classes;
}

// Pairwise distinct prototypes at least `separation` apart. Axis-aligned when
// the dimension allows it, otherwise evenly spaced on a circle in the first
// two axes with the chord between neighbours equal to the separation.
std::vector<std::vector<double>> place_prototypes(std::size_t regions, std::size_t dim, double separation)
{
    std::vector<std::vector<double>> protos(regions, std::vector<double>(dim, 0.0));
    if (regions <= dim) {
        const double scale = separation / std::numbers::sqrt2;
        for (std::size_t r = 0; r < regions; ++r) protos[r][r] = scale;
        return protos;
    }
    const double angle = 2.0 * std::numbers::pi / static_cast<double>(regions);
    const double radius = separation / (2.0 * std::sin(angle / 2.0)) * (1.0 + 1e-9);
    for (std::size_t r = 0; r < regions; ++r) {
        protos[r][0] = radius * std::cos(angle * static_cast<double>(r));
        protos[r][1] = radius * std::sin(angle * static_cast<double>(r));
    }
    return protos;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec)
{
    spec.validate();
    const std::size_t k = spec.num_latent_clusters;
    const std::size_t c = spec.num_classes;
    const std::size_t labels_out = spec.output_classes();
    const auto regions = place_prototypes(region_count(spec), spec.dim, spec.class_mean_separation);

    SyntheticData out;
    out.prototypes.assign(k, std::vector<std::vector<double>>(labels_out));
    std::vector<double> sample(spec.dim);
    for (std::size_t g = 0; g < k; ++g) {
        EmbeddingDataset ds(spec.dim, labels_out);
        for (std::size_t r = 0; r < c; ++r) {
            std::size_t region = 0;
            std::size_t label = 0;
            switch (spec.layout) {
            case LabelLayout::distinct:
                region = g * c + r;
                label = r;
                break;
            case LabelLayout::permuted:
                region = r;
                label = (r + c - g % c) % c;
                break;
            case LabelLayout::low_overlap:
                region = r;
                label = r == 0 ? 0 : 1 + g * (c - 1) + (r - 1);
                break;
            case LabelLayout::disjoint:
                region = g * c + r;
                label = g * c + r;
                break;
            }
            const auto& proto = regions[region];
            out.prototypes[g][label] = proto;
            SeededStream stream(spec.seed, "synthetic", {g, label});
            for (std::size_t n = 0; n < spec.samples_per_class_per_cluster; ++n) {
                for (std::size_t d = 0; d < spec.dim; ++d) {
                    sample[d] = proto[d] + spec.within_class_stddev * stream.normal();
                }
                ds.add(sample, static_cast<int>(label));
            }
        }
        out.clusters.push_back(std::move(ds));
        out.ground_truth.push_back(static_cast<int>(g));
    }
    return out;
}

std::string format_double(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::string format_embeddings(const EmbeddingDataset& dataset)
{
    std::string out;
    out += std::to_string(dataset.size()) + ' ' + std::to_string(dataset.dim()) + ' ' +
           std::to_string(dataset.num_classes()) + '\n';
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        out += std::to_string(dataset.label(i));
        for (double v : dataset.vector(i)) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("write_embeddings: row " + std::to_string(i) + " has a non-finite value");
            }
            out += ' ';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

void write_embeddings(const EmbeddingDataset& dataset, const std::filesystem::path& path)
{
    const std::string text = format_embeddings(dataset);
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("write_embeddings: cannot open " + path.string());
    file << text;
    if (!file) throw std::runtime_error("write_embeddings: write failed for " + path.string());
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
        if (pos >= line.size()) break;
        const std::size_t start = pos;
        while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' && line[pos] != '\r') ++pos;
        fields.push_back(line.substr(start, pos - start));
    }
    return fields;
}

template <typename T>
bool parse_number(std::string_view field, T& out)
{
    const auto res = std::from_chars(field.data(), field.data() + field.size(), out);
    return res.ec == std::errc{} && res.ptr == field.data() + field.size();
}

}  // namespace

EmbeddingDataset parse_embeddings(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("embeddings: missing header");
    const auto header = split_fields(line);
    std::size_t count = 0;
    std::size_t dim = 0;
    std::size_t classes = 0;
    if (header.size() != 3 || !parse_number(header[0], count) || !parse_number(header[1], dim) ||
        !parse_number(header[2], classes) || dim == 0 || classes == 0) {
        throw std::runtime_error("embeddings: malformed header '" + line + "'");
    }

    EmbeddingDataset ds(dim, classes);
    std::vector<double> row(dim);
    for (std::size_t i = 0; i < count; ++i) {
        const std::string where = "embeddings: row " + std::to_string(i) + " (line " + std::to_string(i + 2) + ")";
        if (!std::getline(in, line)) throw std::runtime_error(where + ": missing");
        const auto fields = split_fields(line);
        if (fields.size() != dim + 1) {
            throw std::runtime_error(where + ": expected " + std::to_string(dim) + " values, found " +
                                     std::to_string(fields.empty() ? 0 : fields.size() - 1));
        }
        long long label = 0;
        if (!parse_number(fields[0], label)) throw std::runtime_error(where + ": malformed label");
        if (label < 0 || static_cast<unsigned long long>(label) >= classes) {
            throw std::runtime_error(where + ": label " + std::to_string(label) + " out of range");
        }
        for (std::size_t d = 0; d < dim; ++d) {
            if (!parse_number(fields[d + 1], row[d]) || !std::isfinite(row[d])) {
                throw std::runtime_error(where + ": malformed value in column " + std::to_string(d + 1));
            }
        }
        ds.add(row, static_cast<int>(label));
    }
    while (std::getline(in, line)) {
        if (!split_fields(line).empty()) {
            throw std::runtime_error("embeddings: trailing data after " + std::to_string(count) + " rows");
        }
    }
    return ds;
}

EmbeddingDataset read_embeddings(const std::filesystem::path& path)
{
    std::ifstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("read_embeddings: cannot open " + path.string());
    std::ostringstream buf;
    buf << file.rdbuf();
    return parse_embeddings(buf.str());
}

std::string to_string(LabelLayout layout)
{
    switch (layout) {
    case LabelLayout::distinct: return "distinct";
    case LabelLayout::permuted: return "permuted";
    case LabelLayout::low_overlap: return "low_overlap";
    case LabelLayout::disjoint: return "disjoint";
    }
    return "distinct";
}

LabelLayout parse_label_layout(const std::string& name)
{
    if (name == "distinct") return LabelLayout::distinct;
    if (name == "permuted") return LabelLayout::permuted;
    if (name == "low_overlap") return LabelLayout::low_overlap;
    if (name == "disjoint") return LabelLayout::disjoint;
    throw std::invalid_argument("unknown label layout '" + name + "'");
}

}  // namespace fmcl
