#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pqlm {

enum class Sentiment { Negative = 0, Neutral = 1, Positive = 2, Irrelevant = 3 };

inline constexpr int kNumSentiments = 4;

const char* sentiment_name(Sentiment s);
std::optional<Sentiment> parse_sentiment(std::string_view s);

struct RawDocument {
  std::string text;
  std::optional<Sentiment> label;
};

// Emoji byte sequence (UTF-8, no variation selector) to snake_case
// descriptor. Curated subset; anything absent passes through clean()
// unchanged.
const std::unordered_map<std::string_view, std::string_view>& emoji_table();

// Tweet cleanup: '#' stripped (tag word kept), scheme-prefixed URLs
// removed, emoji replaced with ':name:' descriptors, whitespace collapsed.
// Total and idempotent; returns "" when nothing survives.
std::string clean(std::string_view text);

// Bytewise ASCII lowercase + whitespace split.
std::vector<std::string> tokenize(std::string_view text);

class Vocab {
 public:
  static constexpr int kPadId = 0;
  static constexpr int kUnkId = 1;
  static constexpr int kBosId = 2;
  static constexpr int kEosId = 3;
  static constexpr int kNumReserved = 4;

  Vocab();

  // Appends a token with the next free id. Duplicate tokens are rejected.
  int add(std::string token);

  int id_of(std::string_view token) const; // kUnkId when absent
  const std::string& token_of(int id) const;
  bool contains(std::string_view token) const;
  std::size_t size() const { return id_to_token_.size(); }
  const std::vector<std::string>& tokens() const { return id_to_token_; }

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, int> token_to_id_;
};

// Most frequent tokens up to max_size - 4 (reserved ids keep 0..3); equal
// counts break lexicographically.
Vocab build_vocab(const std::vector<std::vector<std::string>>& docs, std::size_t max_size);

std::vector<int> encode_ids(const Vocab& vocab, const std::vector<std::string>& tokens);
std::vector<std::string> decode_ids(const Vocab& vocab, const std::vector<int>& ids);

// clean + tokenize each text, dropping documents that clean to nothing.
std::vector<std::vector<std::string>> prepare_corpus(const std::vector<std::string>& texts);

// Corpus file: one document per line; blank lines are skipped.
std::vector<std::string> load_corpus(const std::string& path);
void save_corpus(const std::string& path, const std::vector<std::string>& docs);

// Labeled file: `label<TAB>text` per line, labels from the 4-way set.
std::vector<RawDocument> load_labeled_tsv(const std::string& path);
void save_labeled_tsv(const std::string& path, const std::vector<RawDocument>& docs);

// Vocab file: one token per line in id order.
void save_vocab(const std::string& path, const Vocab& vocab);
Vocab load_vocab(const std::string& path);

}  // namespace pqlm
