#include "nbgraph/errors.hpp"
#include "nbgraph/vectorstore.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>

using namespace nbgraph;

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
}

void write_raw(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string header(std::uint32_t n, std::uint32_t d) {
    std::string h = "EMB1";
    for (std::uint32_t v : {n, d}) {
        for (int b = 0; b < 4; ++b) {
            h.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
        }
    }
    return h;
}

} // namespace

TEST(Vectorstore, BinaryRoundTripIsBitExact) {
    test::TempDir dir;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const VectorDataset d = test::random_dataset(100, 384, seed, 3.0);
        write_embeddings(d, dir / "x.emb");
        const VectorDataset back = read_embeddings(dir / "x.emb", EmbeddingFormat::binary);
        ASSERT_EQ(back.size(), d.size());
        ASSERT_EQ(back.dim(), d.dim());
        for (std::size_t i = 0; i < d.values().size(); ++i) {
            ASSERT_EQ(std::bit_cast<std::uint32_t>(back.values()[i]),
                      std::bit_cast<std::uint32_t>(d.values()[i]));
        }
    }
}

TEST(Vectorstore, SingleValueFileIsSixteenBytes) {
    test::TempDir dir;
    write_embeddings(VectorDataset(1, 1, {0.5f}), dir / "one.emb");
    EXPECT_EQ(std::filesystem::file_size(dir / "one.emb"), kEmbHeaderBytes + 4);
    std::ifstream in(dir / "one.emb", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    EXPECT_EQ(bytes.substr(0, 12), header(1, 1));
    float v = 0.0f;
    std::memcpy(&v, bytes.data() + 12, 4);
    EXPECT_EQ(v, 0.5f);
}

TEST(Vectorstore, ReadsHandWrittenHeader) {
    test::TempDir dir;
    std::string bytes = header(2, 3);
    const float vals[6] = {1, 2, 3, 4, 5, 6};
    bytes.append(reinterpret_cast<const char*>(vals), sizeof vals);
    write_raw(dir / "h.emb", bytes);
    const VectorDataset d = read_embeddings(dir / "h.emb", EmbeddingFormat::binary);
    EXPECT_EQ(d.size(), 2u);
    EXPECT_EQ(d.dim(), 3u);
    EXPECT_EQ(d.row(1)[2], 6.0f);
}

TEST(Vectorstore, TruncatedBinaryIsFormatError) {
    test::TempDir dir;
    write_raw(dir / "t.emb", header(2, 3));
    EXPECT_THROW(read_embeddings(dir / "t.emb", EmbeddingFormat::binary), FormatError);
    write_raw(dir / "short.emb", "EMB1\x02");
    EXPECT_THROW(read_embeddings(dir / "short.emb", EmbeddingFormat::binary), FormatError);
    write_raw(dir / "magic.emb", header(0, 0).replace(0, 4, "EMB2"));
    EXPECT_THROW(read_embeddings(dir / "magic.emb", EmbeddingFormat::binary), FormatError);
}

TEST(Vectorstore, EmptyDatasetRejected) {
    test::TempDir dir;
    write_raw(dir / "empty.emb", header(0, 4));
    EXPECT_THROW(read_embeddings(dir / "empty.emb", EmbeddingFormat::binary), ValidationError);
    EXPECT_THROW(write_embeddings(VectorDataset(0, 4, {}), dir / "w.emb"), ValidationError);
}

TEST(Vectorstore, NonFiniteNamesRow) {
    test::TempDir dir;
    write_text(dir / "nan.tsv", "1\t2\n3\tnan\n");
    try {
        read_embeddings(dir / "nan.tsv", EmbeddingFormat::tsv);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos) << e.what();
    }
}

TEST(Vectorstore, TsvTabAndComma) {
    test::TempDir dir;
    write_text(dir / "a.tsv", "1.0\t0.0\n0.0\t1.0");
    const VectorDataset a = read_embeddings(dir / "a.tsv", EmbeddingFormat::tsv);
    EXPECT_EQ(a, VectorDataset(2, 2, {1, 0, 0, 1}, a.name()));
    write_text(dir / "b.csv", "1.0,0.0\n0.0,1.0\n");
    EXPECT_EQ(read_embeddings(dir / "b.csv", EmbeddingFormat::tsv).values().size(), 4u);
    EXPECT_EQ(sniff_embedding_format(dir / "b.csv"), EmbeddingFormat::tsv);
    write_embeddings(a, dir / "a.emb");
    EXPECT_EQ(sniff_embedding_format(dir / "a.emb"), EmbeddingFormat::binary);
}

TEST(Vectorstore, TsvRaggedRowsAreFormatError) {
    test::TempDir dir;
    write_text(dir / "r.tsv", "1\t2\t3\n4\t5\n");
    EXPECT_THROW(read_embeddings(dir / "r.tsv", EmbeddingFormat::tsv), FormatError);
    write_text(dir / "x.tsv", "1\tabc\n");
    EXPECT_THROW(read_embeddings(dir / "x.tsv", EmbeddingFormat::tsv), FormatError);
}

TEST(Vectorstore, MissingFileIsIoError) {
    EXPECT_THROW(read_embeddings("/nonexistent/x.emb", EmbeddingFormat::binary), IoError);
    EXPECT_THROW(write_embeddings(VectorDataset(1, 1, {1.0f}), "/nonexistent/dir/x.emb"), IoError);
}

TEST(Vectorstore, LabelsFirstAppearanceOrder) {
    test::TempDir dir;
    write_text(dir / "l.txt", "a\nb\na\n");
    const LabelSet l = read_labels(dir / "l.txt");
    EXPECT_EQ(l.ids, (std::vector<int>{0, 1, 0}));
    EXPECT_EQ(l.names, (std::vector<std::string>{"a", "b"}));
    write_text(dir / "x.txt", "x");
    EXPECT_EQ(read_labels(dir / "x.txt").ids, std::vector<int>{0});
}

TEST(Vectorstore, LabelErrors) {
    test::TempDir dir;
    write_text(dir / "blank.txt", "a\n\nb\n");
    try {
        read_labels(dir / "blank.txt");
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
    write_text(dir / "empty.txt", "");
    EXPECT_THROW(read_labels(dir / "empty.txt"), ValidationError);
}

TEST(Vectorstore, LabelIdsAreABijection) {
    std::mt19937 rng(3);
    std::vector<std::string> raw;
    for (int i = 0; i < 500; ++i) {
        raw.push_back("c" + std::to_string(rng() % 17));
    }
    const LabelSet l = make_labels(raw);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        EXPECT_EQ(l.names[static_cast<std::size_t>(l.ids[i])], raw[i]);
    }
    std::set<std::string> distinct(raw.begin(), raw.end());
    EXPECT_EQ(l.num_classes(), distinct.size());
}

TEST(Vectorstore, LabelCountMustMatch) {
    VectorDataset d(2, 1, {1.0f, 2.0f});
    EXPECT_THROW(d.set_labels(make_labels(std::vector<int>{0, 1, 0})), ValidationError);
}

TEST(Vectorstore, ReadTextsDecodesNewlines) {
    test::TempDir dir;
    write_text(dir / "t.txt", "one\\ntwo\nthree\n");
    const auto texts = read_texts(dir / "t.txt");
    ASSERT_EQ(texts.size(), 2u);
    EXPECT_EQ(texts[0], "one\ntwo");
}
