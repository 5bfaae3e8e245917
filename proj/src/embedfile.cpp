#include "pqlm/embedfile.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "pqlm/bytesio.hpp"

namespace pqlm {

EmbeddingMatrix EmbeddingMatrix::zeros(std::size_t rows, std::size_t dim) {
  EmbeddingMatrix m;
  m.rows = rows;
  m.dim = dim;
  m.values.assign(rows * dim, 0.0);
  return m;
}

EmbeddingMatrix EmbeddingMatrix::random(std::size_t rows, std::size_t dim, std::uint64_t seed) {
  EmbeddingMatrix m = zeros(rows, dim);
  Rng rng(seed);
  rng.fill_uniform(m.values, -0.1, 0.1);
  return m;
}

namespace {
constexpr char kMagic[4] = {'P', 'Q', 'L', 'M'};
}

std::vector<std::uint8_t> embeddings_to_bytes(const EmbeddingMatrix& matrix, const Vocab& vocab) {
  if (matrix.rows == 0) throw std::invalid_argument("write_embeddings: empty vocab");
  if (matrix.rows != vocab.size()) {
    throw std::invalid_argument("write_embeddings: matrix rows != vocab size");
  }
  if (matrix.values.size() != matrix.rows * matrix.dim) {
    throw std::invalid_argument("write_embeddings: matrix storage size mismatch");
  }

  ByteWriter w;
  w.bytes.reserve(20 + vocab.size() * 8 + matrix.values.size() * 4 + 4);
  w.raw(kMagic, 4);
  w.u32(kEmbeddingFileVersion);
  w.u32(0); // flags
  w.u32(static_cast<std::uint32_t>(matrix.rows));
  w.u32(static_cast<std::uint32_t>(matrix.dim));
  for (const auto& tok : vocab.tokens()) w.str16(tok);
  for (double d : matrix.values) w.f32(static_cast<float>(d));
  w.u32(crc32_ieee(w.bytes.data(), w.bytes.size()));
  return std::move(w.bytes);
}

std::size_t write_embeddings(const EmbeddingMatrix& matrix, const Vocab& vocab,
                             std::ostream& sink) {
  const auto bytes = embeddings_to_bytes(matrix, vocab);
  sink.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
  if (!sink) throw std::runtime_error("write_embeddings: sink write failed");
  return bytes.size();
}

std::size_t write_embeddings_file(const EmbeddingMatrix& matrix, const Vocab& vocab,
                                  const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_embeddings: cannot open " + path);
  return write_embeddings(matrix, vocab, out);
}

std::pair<EmbeddingMatrix, Vocab> embeddings_from_bytes(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes, "embedding file");
  const std::uint8_t* magic = r.raw(4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("embedding file: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kEmbeddingFileVersion) {
    throw FormatError("embedding file: unsupported version " + std::to_string(version));
  }
  const std::uint32_t flags = r.u32();
  if (flags != 0) throw FormatError("embedding file: unsupported flags");
  const std::uint32_t vocab_size = r.u32();
  const std::uint32_t dim = r.u32();
  if (vocab_size < Vocab::kNumReserved) {
    throw FormatError("embedding file: vocab smaller than the reserved tokens");
  }

  std::vector<std::string> tokens;
  tokens.reserve(vocab_size);
  for (std::uint32_t i = 0; i < vocab_size; ++i) tokens.push_back(r.str16());

  EmbeddingMatrix matrix = EmbeddingMatrix::zeros(vocab_size, dim);
  for (double& v : matrix.values) v = static_cast<double>(r.f32());

  const std::size_t payload_end = r.pos();
  const std::uint32_t stored_crc = r.u32();
  if (r.remaining() != 0) throw FormatError("embedding file: trailing bytes");
  if (crc32_ieee(bytes.data(), payload_end) != stored_crc) {
    throw CorruptionError("embedding file: CRC mismatch");
  }

  Vocab vocab;
  for (std::size_t i = 0; i < static_cast<std::size_t>(Vocab::kNumReserved); ++i) {
    if (tokens[i] != vocab.token_of(static_cast<int>(i))) {
      throw FormatError("embedding file: reserved token slot " + std::to_string(i) +
                        " holds '" + tokens[i] + "'");
    }
  }
  for (std::size_t i = Vocab::kNumReserved; i < tokens.size(); ++i) {
    if (vocab.contains(tokens[i])) {
      throw FormatError("embedding file: duplicate token '" + tokens[i] + "'");
    }
    vocab.add(std::move(tokens[i]));
  }
  return {std::move(matrix), std::move(vocab)};
}

std::pair<EmbeddingMatrix, Vocab> read_embeddings(std::istream& source) {
  std::vector<std::uint8_t> bytes;
  char chunk[4096];
  while (source.read(chunk, sizeof chunk) || source.gcount() > 0) {
    bytes.insert(bytes.end(), chunk, chunk + source.gcount());
  }
  return embeddings_from_bytes(bytes);
}

std::pair<EmbeddingMatrix, Vocab> read_embeddings_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_embeddings: cannot open " + path);
  return read_embeddings(in);
}

}  // namespace pqlm
