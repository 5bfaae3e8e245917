#include <cstdint>
#include <string>
#include <vector>

#include "pqlm/bytesio.hpp"
#include "pqlm/embedfile.hpp"
#include "test_helpers.hpp"

using namespace pqlm;

namespace {

Vocab tiny_vocab() {
  Vocab v;
  v.add("sun");
  v.add("moon");
  return v;
}

EmbeddingMatrix tiny_matrix() {
  // 6 tokens (4 reserved + 2 words), dim 3; values chosen to exercise
  // negative, fractional, and float32-rounded entries.
  auto m = EmbeddingMatrix::zeros(6, 3);
  double fill = -2.5;
  for (auto& x : m.values) {
    x = fill;
    fill += 0.3125;  // exactly representable step
  }
  m.values[4] = 0.1;  // not exactly representable in float32
  return m;
}

}  // namespace

TEST_CASE("embedding artifact round trip") {
  const auto vocab = tiny_vocab();
  const auto matrix = tiny_matrix();
  const auto bytes = embeddings_to_bytes(matrix, vocab);

  REQUIRE(bytes.size() > 12);
  CHECK(bytes[0] == 'P');
  CHECK(bytes[1] == 'Q');
  CHECK(bytes[2] == 'L');
  CHECK(bytes[3] == 'M');

  const auto [loaded, loaded_vocab] = embeddings_from_bytes(bytes);
  REQUIRE(loaded.rows == matrix.rows);
  REQUIRE(loaded.dim == matrix.dim);
  REQUIRE(loaded_vocab.size() == vocab.size());
  for (std::size_t id = 0; id < vocab.size(); ++id)
    CHECK(loaded_vocab.token_of(static_cast<int>(id)) == vocab.token_of(static_cast<int>(id)));

  // Values come back float32-rounded, not as the original doubles.
  for (std::size_t k = 0; k < matrix.values.size(); ++k)
    CHECK(loaded.values[k] == static_cast<double>(static_cast<float>(matrix.values[k])));
  CHECK(loaded.values[4] != matrix.values[4]);
}

TEST_CASE("re-serialization is byte-identical") {
  const auto vocab = tiny_vocab();
  const auto matrix = tiny_matrix();
  const auto bytes = embeddings_to_bytes(matrix, vocab);
  const auto [loaded, loaded_vocab] = embeddings_from_bytes(bytes);
  const auto again = embeddings_to_bytes(loaded, loaded_vocab);
  CHECK(again == bytes);
}

TEST_CASE("file and stream writers agree") {
  testutil::TempDir dir;
  const auto vocab = tiny_vocab();
  const auto matrix = tiny_matrix();
  const auto path = dir.file("embed.pqlm");
  const auto n = write_embeddings_file(matrix, vocab, path);
  const auto disk = testutil::slurp(path);
  CHECK(disk.size() == n);
  CHECK(disk == embeddings_to_bytes(matrix, vocab));

  const auto [loaded, loaded_vocab] = read_embeddings_file(path);
  CHECK(loaded.values == embeddings_from_bytes(disk).first.values);
  CHECK(loaded_vocab.size() == vocab.size());
}

TEST_CASE("golden byte layout for a minimal artifact") {
  // One extra token "a", 5 rows x dim 1, all zeros. Pinning the prefix
  // guards the on-disk layout against accidental re-ordering.
  Vocab v;
  v.add("a");
  const auto m = EmbeddingMatrix::zeros(5, 1);
  const auto bytes = embeddings_to_bytes(m, v);

  const std::vector<std::uint8_t> header = {
      'P', 'Q', 'L', 'M',
      1, 0, 0, 0,    // version
      0, 0, 0, 0,    // flags
      5, 0, 0, 0,    // vocab_size
      1, 0, 0, 0,    // dim
      5, 0, '<', 'p', 'a', 'd', '>',
      5, 0, '<', 'u', 'n', 'k', '>',
      5, 0, '<', 'b', 'o', 's', '>',
      5, 0, '<', 'e', 'o', 's', '>',
      1, 0, 'a',
  };
  REQUIRE(bytes.size() == header.size() + 5 * 4 + 4);
  for (std::size_t k = 0; k < header.size(); ++k) CHECK(bytes[k] == header[k]);
  for (std::size_t k = header.size(); k + 4 < bytes.size(); ++k) CHECK(bytes[k] == 0);
}

TEST_CASE("format violations are rejected") {
  const auto vocab = tiny_vocab();
  const auto matrix = tiny_matrix();
  const auto bytes = embeddings_to_bytes(matrix, vocab);

  SUBCASE("bad magic") {
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(embeddings_from_bytes(bad), FormatError);
  }
  SUBCASE("unknown version") {
    auto bad = bytes;
    bad[4] = 9;
    CHECK_THROWS_AS(embeddings_from_bytes(bad), FormatError);
  }
  SUBCASE("truncated") {
    auto bad = bytes;
    bad.resize(bad.size() - 5);
    CHECK_THROWS_AS(embeddings_from_bytes(bad), FormatError);
  }
  SUBCASE("trailing bytes") {
    auto bad = bytes;
    bad.push_back(0);
    CHECK_THROWS_AS(embeddings_from_bytes(bad), FormatError);
  }
  SUBCASE("flipped payload bit fails the checksum") {
    auto bad = bytes;
    bad[bad.size() - 10] ^= 0x01;
    CHECK_THROWS_AS(embeddings_from_bytes(bad), CorruptionError);
  }
  SUBCASE("empty input") {
    CHECK_THROWS_AS(embeddings_from_bytes({}), FormatError);
  }
}

TEST_CASE("writer validates its inputs") {
  const auto vocab = tiny_vocab();
  auto matrix = tiny_matrix();
  matrix.rows = 5;  // no longer matches vocab.size()
  matrix.values.resize(15);
  CHECK_THROWS_AS(embeddings_to_bytes(matrix, vocab), std::invalid_argument);
}

namespace {

// Hand-assembled artifact with a chosen token list and zero matrix; the
// checksum is valid, so only vocab-level validation can reject it.
std::vector<std::uint8_t> craft_artifact(const std::vector<std::string>& tokens) {
  ByteWriter w;
  w.raw("PQLM", 4);
  w.u32(kEmbeddingFileVersion);
  w.u32(0);
  w.u32(static_cast<std::uint32_t>(tokens.size()));
  w.u32(1);
  for (const auto& t : tokens) w.str16(t);
  for (std::size_t k = 0; k < tokens.size(); ++k) w.f32(0.0f);
  w.u32(crc32_ieee(w.bytes.data(), w.bytes.size()));
  return w.bytes;
}

}  // namespace

TEST_CASE("reader rejects vocab inconsistencies past the checksum") {
  const std::vector<std::string> good = {"<pad>", "<unk>", "<bos>", "<eos>", "sun"};
  CHECK_NOTHROW(embeddings_from_bytes(craft_artifact(good)));

  SUBCASE("duplicate token") {
    CHECK_THROWS_AS(embeddings_from_bytes(
                        craft_artifact({"<pad>", "<unk>", "<bos>", "<eos>", "sun", "sun"})),
                    FormatError);
  }
  SUBCASE("corrupted reserved slot") {
    CHECK_THROWS_AS(embeddings_from_bytes(
                        craft_artifact({"<pad>", "<unk>", "<BOS>", "<eos>", "sun"})),
                    FormatError);
  }
  SUBCASE("vocab smaller than the reserved block") {
    CHECK_THROWS_AS(embeddings_from_bytes(craft_artifact({"<pad>", "<unk>"})), FormatError);
  }
}
