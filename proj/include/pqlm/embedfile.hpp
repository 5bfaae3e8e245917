#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "pqlm/embedding.hpp"
#include "pqlm/textprep.hpp"

namespace pqlm {

// Portable embedding artifact (.pqlm), little-endian throughout:
//   "PQLM" | version u32 = 1 | flags u32 = 0 | vocab_size u32 | dim u32
//   per token: u16 byte length + UTF-8 bytes, in id order
//   matrix: vocab_size x dim float32, row-major
//   CRC-32 (IEEE) over all preceding bytes, u32
// Doubles are rounded to nearest float32 on write; a round-trip reproduces
// the rounded matrix bit-exactly.

inline constexpr std::uint32_t kEmbeddingFileVersion = 1;

std::size_t write_embeddings(const EmbeddingMatrix& matrix, const Vocab& vocab,
                             std::ostream& sink);
std::size_t write_embeddings_file(const EmbeddingMatrix& matrix, const Vocab& vocab,
                                  const std::string& path);
std::vector<std::uint8_t> embeddings_to_bytes(const EmbeddingMatrix& matrix, const Vocab& vocab);

std::pair<EmbeddingMatrix, Vocab> read_embeddings(std::istream& source);
std::pair<EmbeddingMatrix, Vocab> read_embeddings_file(const std::string& path);
std::pair<EmbeddingMatrix, Vocab> embeddings_from_bytes(const std::vector<std::uint8_t>& bytes);

}  // namespace pqlm
