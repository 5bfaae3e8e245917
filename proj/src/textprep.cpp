#include "pqlm/textprep.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <stdexcept>

#include "pqlm/common.hpp"

namespace pqlm {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

// Length of the UTF-8 sequence starting at the lead byte; 1 for malformed
// lead bytes so the scan always advances.
std::size_t utf8_len(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

bool scheme_at(std::string_view s, std::size_t pos) {
  static constexpr std::string_view kHttp = "http://";
  static constexpr std::string_view kHttps = "https://";
  auto matches = [&](std::string_view scheme) {
    if (pos + scheme.size() > s.size()) return false;
    for (std::size_t i = 0; i < scheme.size(); ++i) {
      if (ascii_lower(s[pos + i]) != scheme[i]) return false;
    }
    return true;
  };
  return matches(kHttp) || matches(kHttps);
}

constexpr std::string_view kVariationSelector = "️";

}  // namespace

const char* sentiment_name(Sentiment s) {
  switch (s) {
    case Sentiment::Negative: return "negative";
    case Sentiment::Neutral: return "neutral";
    case Sentiment::Positive: return "positive";
    case Sentiment::Irrelevant: return "irrelevant";
  }
  throw std::invalid_argument("sentiment_name: bad enum value");
}

std::optional<Sentiment> parse_sentiment(std::string_view s) {
  if (s == "negative") return Sentiment::Negative;
  if (s == "neutral") return Sentiment::Neutral;
  if (s == "positive") return Sentiment::Positive;
  if (s == "irrelevant") return Sentiment::Irrelevant;
  return std::nullopt;
}

// Stage order matters for idempotence: once '#' and URLs are gone, no later
// stage can reintroduce them (descriptors contain neither), so a second
// pass finds nothing to do.
std::string clean(std::string_view text) {
  // Hash symbols out, tag words kept.
  std::string no_hash;
  no_hash.reserve(text.size());
  for (char c : text) {
    if (c != '#') no_hash.push_back(c);
  }

  // URLs: scheme prefix through the end of the non-whitespace run.
  std::string no_url;
  no_url.reserve(no_hash.size());
  for (std::size_t i = 0; i < no_hash.size();) {
    if (scheme_at(no_hash, i)) {
      while (i < no_hash.size() && !is_space(no_hash[i])) ++i;
      continue;
    }
    no_url.push_back(no_hash[i]);
    ++i;
  }

  // Emoji to ':name:' descriptors; a variation selector riding on a matched
  // emoji is consumed with it. Unknown sequences pass through.
  const auto& table = emoji_table();
  std::string replaced;
  replaced.reserve(no_url.size());
  for (std::size_t i = 0; i < no_url.size();) {
    const std::size_t len = utf8_len(static_cast<unsigned char>(no_url[i]));
    const std::string_view cp(no_url.data() + i, std::min(len, no_url.size() - i));
    auto it = table.find(cp);
    if (it != table.end()) {
      replaced.push_back(':');
      replaced.append(it->second);
      replaced.push_back(':');
      i += cp.size();
      if (no_url.compare(i, kVariationSelector.size(), kVariationSelector) == 0) {
        i += kVariationSelector.size();
      }
    } else {
      replaced.append(cp);
      i += cp.size();
    }
  }

  // Whitespace runs collapse to single spaces, ends trimmed.
  std::string out;
  out.reserve(replaced.size());
  bool pending_space = false;
  for (char c : replaced) {
    if (is_space(c)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    if (is_space(c)) {
      if (!cur.empty()) {
        tokens.push_back(std::move(cur));
        cur.clear();
      }
    } else {
      cur.push_back(ascii_lower(c));
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

Vocab::Vocab() {
  add("<pad>");
  add("<unk>");
  add("<bos>");
  add("<eos>");
}

int Vocab::add(std::string token) {
  auto [it, inserted] = token_to_id_.emplace(token, static_cast<int>(id_to_token_.size()));
  if (!inserted) throw std::invalid_argument("Vocab::add: duplicate token '" + token + "'");
  id_to_token_.push_back(std::move(token));
  return it->second;
}

int Vocab::id_of(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  return it == token_to_id_.end() ? kUnkId : it->second;
}

const std::string& Vocab::token_of(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    throw std::out_of_range("Vocab::token_of: id " + std::to_string(id) + " out of range");
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

bool Vocab::contains(std::string_view token) const {
  return token_to_id_.count(std::string(token)) != 0;
}

Vocab build_vocab(const std::vector<std::vector<std::string>>& docs, std::size_t max_size) {
  if (docs.empty()) throw std::invalid_argument("build_vocab: empty corpus");
  if (max_size <= Vocab::kNumReserved) {
    throw std::invalid_argument("build_vocab: max_size must exceed the reserved tokens");
  }

  // std::map orders keys, which is the lexicographic tie-break for free.
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : docs) {
    for (const auto& tok : doc) ++counts[tok];
  }

  std::vector<std::pair<std::string_view, std::size_t>> ranked;
  ranked.reserve(counts.size());
  for (const auto& [tok, n] : counts) ranked.emplace_back(tok, n);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocab vocab;
  const std::size_t keep = std::min(ranked.size(), max_size - Vocab::kNumReserved);
  for (std::size_t i = 0; i < keep; ++i) {
    vocab.add(std::string(ranked[i].first));
  }
  return vocab;
}

std::vector<int> encode_ids(const Vocab& vocab, const std::vector<std::string>& tokens) {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& tok : tokens) ids.push_back(vocab.id_of(tok));
  return ids;
}

std::vector<std::string> decode_ids(const Vocab& vocab, const std::vector<int>& ids) {
  std::vector<std::string> tokens;
  tokens.reserve(ids.size());
  for (int id : ids) tokens.push_back(vocab.token_of(id));
  return tokens;
}

std::vector<std::vector<std::string>> prepare_corpus(const std::vector<std::string>& texts) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(texts.size());
  for (const auto& text : texts) {
    auto tokens = tokenize(clean(text));
    if (!tokens.empty()) docs.push_back(std::move(tokens));
  }
  return docs;
}

std::vector<std::string> load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_corpus: cannot open " + path);
  std::vector<std::string> docs;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) docs.push_back(line);
  }
  return docs;
}

void save_corpus(const std::string& path, const std::vector<std::string>& docs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_corpus: cannot open " + path);
  for (const auto& doc : docs) out << doc << '\n';
  if (!out) throw std::runtime_error("save_corpus: write failed for " + path);
}

std::vector<RawDocument> load_labeled_tsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_labeled_tsv: cannot open " + path);
  std::vector<RawDocument> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw FormatError("load_labeled_tsv: line " + std::to_string(lineno) + " has no tab");
    }
    const auto label = parse_sentiment(line.substr(0, tab));
    if (!label) {
      throw FormatError("load_labeled_tsv: line " + std::to_string(lineno) +
                        " has unknown label '" + line.substr(0, tab) + "'");
    }
    docs.push_back(RawDocument{line.substr(tab + 1), label});
  }
  return docs;
}

void save_labeled_tsv(const std::string& path, const std::vector<RawDocument>& docs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_labeled_tsv: cannot open " + path);
  for (const auto& doc : docs) {
    if (!doc.label) throw std::invalid_argument("save_labeled_tsv: document without label");
    out << sentiment_name(*doc.label) << '\t' << doc.text << '\n';
  }
  if (!out) throw std::runtime_error("save_labeled_tsv: write failed for " + path);
}

void save_vocab(const std::string& path, const Vocab& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_vocab: cannot open " + path);
  for (const auto& tok : vocab.tokens()) out << tok << '\n';
  if (!out) throw std::runtime_error("save_vocab: write failed for " + path);
}

Vocab load_vocab(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_vocab: cannot open " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  Vocab vocab;
  if (tokens.size() < Vocab::kNumReserved) {
    throw FormatError("load_vocab: fewer than " + std::to_string(Vocab::kNumReserved) +
                      " entries in " + path);
  }
  for (std::size_t i = 0; i < static_cast<std::size_t>(Vocab::kNumReserved); ++i) {
    if (tokens[i] != vocab.token_of(static_cast<int>(i))) {
      throw FormatError("load_vocab: reserved slot " + std::to_string(i) + " holds '" +
                        tokens[i] + "'");
    }
  }
  for (std::size_t i = Vocab::kNumReserved; i < tokens.size(); ++i) {
    vocab.add(std::move(tokens[i]));
  }
  return vocab;
}

}  // namespace pqlm
