#include "nbgraph/vectorstore.hpp"

#include "nbgraph/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace nbgraph {

namespace {

std::uint32_t load_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u32le(unsigned char* p, std::uint32_t v) {
    p[0] = static_cast<unsigned char>(v & 0xffu);
    p[1] = static_cast<unsigned char>((v >> 8) & 0xffu);
    p[2] = static_cast<unsigned char>((v >> 16) & 0xffu);
    p[3] = static_cast<unsigned char>((v >> 24) & 0xffu);
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) {
            end = text.size();
        }
        std::string line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(std::move(line));
        start = end + 1;
    }
    return lines;
}

float parse_float(const std::string& token, std::size_t line_no) {
    std::size_t used = 0;
    float v = 0.0f;
    try {
        v = std::stof(token, &used);
    } catch (const std::exception&) {
        throw FormatError("line " + std::to_string(line_no) + ": not a number: '" + token + "'");
    }
    while (used < token.size() && (token[used] == ' ' || token[used] == '\t')) {
        ++used;
    }
    if (used != token.size()) {
        throw FormatError("line " + std::to_string(line_no) + ": trailing characters in '" +
                          token + "'");
    }
    return v;
}

VectorDataset read_binary(const std::filesystem::path& path) {
    const std::string bytes = slurp(path);
    if (bytes.size() < kEmbHeaderBytes) {
        throw FormatError(path.string() + ": file shorter than EMB1 header");
    }
    if (std::memcmp(bytes.data(), kEmbMagic, 4) != 0) {
        throw FormatError(path.string() + ": bad magic, expected EMB1");
    }
    const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint32_t n = load_u32le(raw + 4);
    const std::uint32_t d = load_u32le(raw + 8);
    const std::size_t expected =
        kEmbHeaderBytes + static_cast<std::size_t>(n) * static_cast<std::size_t>(d) * 4;
    if (bytes.size() != expected) {
        throw FormatError(path.string() + ": payload is " +
                          std::to_string(bytes.size() - kEmbHeaderBytes) + " bytes, header declares " +
                          std::to_string(expected - kEmbHeaderBytes));
    }
    std::vector<float> values(static_cast<std::size_t>(n) * d);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::uint32_t word = load_u32le(raw + kEmbHeaderBytes + 4 * i);
        values[i] = std::bit_cast<float>(word);
    }
    VectorDataset ds(n, d, std::move(values), path.stem().string());
    ds.validate();
    return ds;
}

VectorDataset read_tsv(const std::filesystem::path& path) {
    const auto lines = split_lines(slurp(path));
    std::vector<float> values;
    std::size_t dim = 0;
    std::size_t rows = 0;
    char sep = '\t';
    bool first = true;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::string& line = lines[li];
        if (line.empty()) {
            continue;
        }
        if (first) {
            sep = line.find('\t') != std::string::npos ? '\t' : ',';
            if (line.find('\t') == std::string::npos && line.find(',') == std::string::npos) {
                sep = '\t';
            }
        }
        std::size_t cols = 0;
        std::size_t start = 0;
        while (true) {
            std::size_t end = line.find(sep, start);
            const std::string token =
                line.substr(start, end == std::string::npos ? std::string::npos : end - start);
            values.push_back(parse_float(token, li + 1));
            ++cols;
            if (end == std::string::npos) {
                break;
            }
            start = end + 1;
        }
        if (first) {
            dim = cols;
            first = false;
        } else if (cols != dim) {
            throw FormatError("line " + std::to_string(li + 1) + ": expected " +
                              std::to_string(dim) + " columns, found " + std::to_string(cols));
        }
        ++rows;
    }
    VectorDataset ds(rows, dim, std::move(values), path.stem().string());
    ds.validate();
    return ds;
}

} // namespace

VectorDataset::VectorDataset(std::size_t rows, std::size_t dim, std::vector<float> values,
                             std::string name)
    : rows_(rows), dim_(dim), values_(std::move(values)), name_(std::move(name)) {
    if (values_.size() != rows_ * dim_) {
        throw ValidationError("dataset value count " + std::to_string(values_.size()) +
                              " does not match " + std::to_string(rows_) + " x " +
                              std::to_string(dim_));
    }
}

void VectorDataset::set_labels(LabelSet labels) {
    if (labels.size() != rows_) {
        throw ValidationError("label count " + std::to_string(labels.size()) +
                              " does not match dataset size " + std::to_string(rows_));
    }
    labels_ = std::move(labels);
}

void VectorDataset::validate() const {
    if (rows_ == 0) {
        throw ValidationError("dataset has no rows");
    }
    if (dim_ == 0) {
        throw ValidationError("dataset has zero dimensions");
    }
    for (std::size_t i = 0; i < rows_; ++i) {
        for (float v : row(i)) {
            if (!std::isfinite(v)) {
                throw ValidationError("row " + std::to_string(i) + " contains a non-finite value");
            }
        }
    }
    if (labels_ && labels_->size() != rows_) {
        throw ValidationError("label count does not match dataset size");
    }
}

VectorDataset VectorDataset::with_row(std::span<const float> vector) const {
    if (vector.size() != dim_) {
        throw ParameterError("appended vector has dimension " + std::to_string(vector.size()) +
                             ", dataset has " + std::to_string(dim_));
    }
    std::vector<float> values = values_;
    values.insert(values.end(), vector.begin(), vector.end());
    return VectorDataset(rows_ + 1, dim_, std::move(values), name_);
}

VectorDataset VectorDataset::permuted(std::span<const std::size_t> perm) const {
    if (perm.size() != rows_) {
        throw ParameterError("permutation length does not match dataset size");
    }
    std::vector<float> values(values_.size());
    for (std::size_t i = 0; i < rows_; ++i) {
        const auto src = row(perm[i]);
        std::copy(src.begin(), src.end(), values.begin() + static_cast<std::ptrdiff_t>(i * dim_));
    }
    VectorDataset out(rows_, dim_, std::move(values), name_);
    if (labels_) {
        LabelSet l;
        l.names = labels_->names;
        l.ids.resize(rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            l.ids[i] = labels_->ids[perm[i]];
        }
        out.labels_ = std::move(l);
    }
    return out;
}

VectorDataset read_embeddings(const std::filesystem::path& path, EmbeddingFormat format) {
    return format == EmbeddingFormat::binary ? read_binary(path) : read_tsv(path);
}

void write_embeddings(const VectorDataset& dataset, const std::filesystem::path& path) {
    dataset.validate();
    if (dataset.size() > UINT32_MAX || dataset.dim() > UINT32_MAX) {
        throw ValidationError("dataset too large for EMB1 header");
    }
    std::string bytes(kEmbHeaderBytes + dataset.values().size() * 4, '\0');
    auto* raw = reinterpret_cast<unsigned char*>(bytes.data());
    std::memcpy(raw, kEmbMagic, 4);
    store_u32le(raw + 4, static_cast<std::uint32_t>(dataset.size()));
    store_u32le(raw + 8, static_cast<std::uint32_t>(dataset.dim()));
    const auto values = dataset.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        store_u32le(raw + kEmbHeaderBytes + 4 * i, std::bit_cast<std::uint32_t>(values[i]));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

EmbeddingFormat sniff_embedding_format(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() == 4 && std::memcmp(magic, kEmbMagic, 4) == 0) {
        return EmbeddingFormat::binary;
    }
    return EmbeddingFormat::tsv;
}

LabelSet make_labels(std::span<const std::string> raw) {
    LabelSet out;
    std::unordered_map<std::string, int> index;
    out.ids.reserve(raw.size());
    for (const auto& name : raw) {
        auto [it, inserted] = index.try_emplace(name, static_cast<int>(out.names.size()));
        if (inserted) {
            out.names.push_back(name);
        }
        out.ids.push_back(it->second);
    }
    return out;
}

LabelSet make_labels(std::span<const int> ids) {
    std::vector<std::string> raw;
    raw.reserve(ids.size());
    for (int id : ids) {
        raw.push_back(std::to_string(id));
    }
    return make_labels(raw);
}

LabelSet read_labels(const std::filesystem::path& path) {
    auto lines = split_lines(slurp(path));
    if (lines.empty()) {
        throw ValidationError(path.string() + ": label file is empty");
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) {
            throw ValidationError(path.string() + ": blank label on line " + std::to_string(i + 1));
        }
    }
    return make_labels(lines);
}

std::vector<std::string> read_texts(const std::filesystem::path& path) {
    auto lines = split_lines(slurp(path));
    for (auto& line : lines) {
        std::string decoded;
        decoded.reserve(line.size());
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '\\' && i + 1 < line.size() && line[i + 1] == 'n') {
                decoded.push_back('\n');
                ++i;
            } else {
                decoded.push_back(line[i]);
            }
        }
        line = std::move(decoded);
    }
    return lines;
}

} // namespace nbgraph
