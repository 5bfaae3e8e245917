#include <stdexcept>
#include <string>
#include <vector>

#include "pqlm/textprep.hpp"
#include "test_helpers.hpp"

using namespace pqlm;

TEST_CASE("clean strips URLs and hash marks, maps emoji") {
  CHECK(clean("check https://x.co now") == "check now");
  CHECK(clean("#great day") == "great day");
  CHECK(clean("hi \xF0\x9F\x98\x80") == "hi :grinning_face:");
  CHECK(clean("see http://a.b/c?d=e and https://f.g") == "see and");
  CHECK(clean("tail https://x.co") == "tail");
  CHECK(clean("a   b\t c\nd") == "a b c d");
  CHECK(clean("   ") == "");
  CHECK(clean("") == "");
  CHECK(clean("https://only.url") == "");
  CHECK(clean("#tag1 #tag2") == "tag1 tag2");
}

TEST_CASE("clean keeps unknown emoji and plain unicode") {
  // Anything outside the curated table passes through untouched.
  const std::string rare = "ok \xF0\x9F\xA6\xA5 done";  // sloth, deliberately unmapped
  if (emoji_table().count("\xF0\x9F\xA6\xA5") == 0) CHECK(clean(rare) == rare);
  CHECK(clean("caf\xC3\xA9") == "caf\xC3\xA9");
}

TEST_CASE("clean is idempotent") {
  const std::vector<std::string> samples = {
      "check https://x.co now", "#great day", "hi \xF0\x9F\x98\x80",
      "mixed #tags http://u.v \xF0\x9F\x98\x82 end", "plain words", "",
      "\xF0\x9F\x98\x80\xF0\x9F\x98\x80", "a#b", "pre http://x post #y"};
  for (const auto& s : samples) {
    const auto once = clean(s);
    CHECK(clean(once) == once);
  }
}

TEST_CASE("emoji table spot checks") {
  const auto& table = emoji_table();
  REQUIRE(table.size() >= 16);
  REQUIRE(table.count("\xF0\x9F\x98\x80") == 1);
  CHECK(table.at("\xF0\x9F\x98\x80") == "grinning_face");
  for (const auto& [bytes, name] : table) {
    CHECK(!bytes.empty());
    CHECK(!name.empty());
    for (char ch : name) {
      const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '_';
      CHECK(ok);
    }
  }
}

TEST_CASE("tokenize lowercases and splits") {
  CHECK(tokenize("Great Day") == std::vector<std::string>{"great", "day"});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("a  b") == std::vector<std::string>{"a", "b"});
  CHECK(tokenize("  lead trail  ") == std::vector<std::string>{"lead", "trail"});
  CHECK(tokenize("MiXeD") == std::vector<std::string>{"mixed"});
  CHECK(tokenize(":Grinning_Face:") == std::vector<std::string>{":grinning_face:"});
}

TEST_CASE("vocab reserved ids are stable") {
  Vocab v;
  REQUIRE(v.size() == 4);
  CHECK(v.token_of(Vocab::kPadId) == "<pad>");
  CHECK(v.token_of(Vocab::kUnkId) == "<unk>");
  CHECK(v.token_of(Vocab::kBosId) == "<bos>");
  CHECK(v.token_of(Vocab::kEosId) == "<eos>");
  CHECK(v.id_of("<pad>") == Vocab::kPadId);
  CHECK(v.id_of("missing") == Vocab::kUnkId);
  CHECK(!v.contains("missing"));

  const int id = v.add("word");
  CHECK(id == 4);
  CHECK(v.id_of("word") == 4);
  CHECK_THROWS_AS(v.add("word"), std::invalid_argument);
  CHECK_THROWS_AS(v.token_of(99), std::out_of_range);
}

TEST_CASE("vocab build: frequency order with lexicographic ties") {
  const std::vector<std::vector<std::string>> docs = {{"a", "a", "b"}};
  const auto v6 = build_vocab(docs, 6);
  REQUIRE(v6.size() == 6);
  CHECK(v6.token_of(4) == "a");  // count 2 beats count 1
  CHECK(v6.token_of(5) == "b");

  const auto v5 = build_vocab(docs, 5);
  REQUIRE(v5.size() == 5);
  CHECK(v5.token_of(4) == "a");
  CHECK(v5.id_of("b") == Vocab::kUnkId);

  // Equal counts: lexicographically smaller token gets the lower id.
  const auto tie = build_vocab({{"zeta", "alpha"}}, 10);
  CHECK(tie.token_of(4) == "alpha");
  CHECK(tie.token_of(5) == "zeta");

  CHECK_THROWS_AS(build_vocab(docs, 4), std::invalid_argument);
}

TEST_CASE("encode and decode round trip") {
  const auto v = build_vocab({{"cat", "sat", "cat"}}, 10);
  const auto ids = encode_ids(v, {"cat", "sat", "ghost"});
  CHECK(ids == std::vector<int>{4, 5, Vocab::kUnkId});
  CHECK(decode_ids(v, ids) == std::vector<std::string>{"cat", "sat", "<unk>"});
  CHECK_THROWS_AS(decode_ids(v, {42}), std::out_of_range);
}

TEST_CASE("prepare corpus drops empty documents") {
  const auto docs =
      prepare_corpus({"Check https://x.co NOW", "https://gone.example", "#Great day"});
  REQUIRE(docs.size() == 2);
  CHECK(docs[0] == std::vector<std::string>{"check", "now"});
  CHECK(docs[1] == std::vector<std::string>{"great", "day"});
}

TEST_CASE("sentiment names round trip") {
  for (int k = 0; k < kNumSentiments; ++k) {
    const auto s = static_cast<Sentiment>(k);
    const auto parsed = parse_sentiment(sentiment_name(s));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == s);
  }
  CHECK(!parse_sentiment("confused").has_value());
}

TEST_CASE("corpus file round trip") {
  testutil::TempDir dir;
  const std::vector<std::string> docs = {"first line", "second line", "third"};
  const auto path = dir.file("corpus.txt");
  save_corpus(path, docs);
  CHECK(load_corpus(path) == docs);
  CHECK_THROWS_AS(load_corpus(dir.file("missing.txt")), std::runtime_error);
}

TEST_CASE("labeled tsv round trip and validation") {
  testutil::TempDir dir;
  const std::vector<RawDocument> docs = {
      {"so happy", Sentiment::Positive},
      {"meh", Sentiment::Neutral},
      {"broken again", Sentiment::Negative},
      {"engine specs", Sentiment::Irrelevant},
  };
  const auto path = dir.file("docs.tsv");
  save_labeled_tsv(path, docs);
  const auto loaded = load_labeled_tsv(path);
  REQUIRE(loaded.size() == docs.size());
  for (std::size_t k = 0; k < docs.size(); ++k) {
    CHECK(loaded[k].text == docs[k].text);
    REQUIRE(loaded[k].label.has_value());
    CHECK(*loaded[k].label == *docs[k].label);
  }

  {
    std::ofstream bad(dir.file("bad.tsv"));
    bad << "Elated\tnot a real label line\n";
  }
  CHECK_THROWS_AS(load_labeled_tsv(dir.file("bad.tsv")), FormatError);

  {
    std::ofstream bad(dir.file("notab.tsv"));
    bad << "just text without a tab\n";
  }
  CHECK_THROWS_AS(load_labeled_tsv(dir.file("notab.tsv")), FormatError);
}

TEST_CASE("vocab file round trip") {
  testutil::TempDir dir;
  const auto v = build_vocab({{"cat", "dog", "cat"}}, 10);
  const auto path = dir.file("vocab.txt");
  save_vocab(path, v);
  const auto loaded = load_vocab(path);
  REQUIRE(loaded.size() == v.size());
  for (std::size_t id = 0; id < v.size(); ++id)
    CHECK(loaded.token_of(static_cast<int>(id)) == v.token_of(static_cast<int>(id)));
}
