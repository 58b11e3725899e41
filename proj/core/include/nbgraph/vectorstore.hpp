#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nbgraph {

/// Dense class labels: `ids[i]` indexes into `names`, ids are assigned in
/// order of first appearance.
struct LabelSet {
    std::vector<int> ids;
    std::vector<std::string> names;

    std::size_t size() const noexcept { return ids.size(); }
    std::size_t num_classes() const noexcept { return names.size(); }
    friend bool operator==(const LabelSet&, const LabelSet&) = default;
};

/// Row-major N x D matrix of float32 embeddings with optional labels.
/// Immutable once validated; share by const reference.
class VectorDataset {
public:
    VectorDataset() = default;
    VectorDataset(std::size_t rows, std::size_t dim, std::vector<float> values,
                  std::string name = {});

    std::size_t size() const noexcept { return rows_; }
    std::size_t dim() const noexcept { return dim_; }
    const std::string& name() const noexcept { return name_; }
    void set_name(std::string name) { name_ = std::move(name); }

    std::span<const float> row(std::size_t i) const {
        return {values_.data() + i * dim_, dim_};
    }
    std::span<const float> values() const noexcept { return values_; }

    const std::optional<LabelSet>& labels() const noexcept { return labels_; }
    void set_labels(LabelSet labels);

    /// Throws ValidationError naming the first offending row.
    void validate() const;

    /// Returns a copy with `vector` appended as the last row. Labels are
    /// dropped because the new row has none.
    VectorDataset with_row(std::span<const float> vector) const;

    /// Rows reordered so that row i of the result is row perm[i] of this.
    VectorDataset permuted(std::span<const std::size_t> perm) const;

    friend bool operator==(const VectorDataset&, const VectorDataset&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t dim_ = 0;
    std::vector<float> values_;
    std::string name_;
    std::optional<LabelSet> labels_;
};

enum class EmbeddingFormat { binary, tsv };

/// EMB1 layout: "EMB1", u32le N, u32le D, N*D float32le row-major.
inline constexpr char kEmbMagic[4] = {'E', 'M', 'B', '1'};
inline constexpr std::size_t kEmbHeaderBytes = 12;

VectorDataset read_embeddings(const std::filesystem::path& path, EmbeddingFormat format);
void write_embeddings(const VectorDataset& dataset, const std::filesystem::path& path);

/// Guesses the format from the first four bytes.
EmbeddingFormat sniff_embedding_format(const std::filesystem::path& path);

LabelSet read_labels(const std::filesystem::path& path);
LabelSet make_labels(std::span<const std::string> raw);
LabelSet make_labels(std::span<const int> ids);

/// Raw documents, one per LF-delimited record; the two-character sequence
/// "\n" inside a record stands for an embedded newline.
std::vector<std::string> read_texts(const std::filesystem::path& path);

} // namespace nbgraph
