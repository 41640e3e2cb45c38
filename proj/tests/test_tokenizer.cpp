#include <doctest.h>

#include <random>

#include "citesum/errors.hpp"
#include "citesum/tokenizer.hpp"
#include "citesum/util.hpp"

using namespace citesum;

TEST_CASE("bpe: first merge on a hand-counted corpus") {
  // words "aaab" x2: pairs (a,a)=4, (a,b)=2, (b,</w>)=2 -> merge ("a","a")
  // base alphabet {a, b, </w>} + 6 specials = 9 tokens, so 10 asks one merge
  Vocabulary v = Vocabulary::train_bpe({"aaab aaab"}, 10);
  REQUIRE(v.num_merges() == 1);
  CHECK(v.token(v.size() - 1) == "aa");
}

TEST_CASE("bpe: vocab_size at or below base alphabet") {
  CHECK_THROWS_AS(Vocabulary::train_bpe({"aaab aaab"}, 9), CorpusTooSmall);
  CHECK_THROWS_AS(Vocabulary::train_bpe({"abc"}, 3), CorpusTooSmall);
  CHECK_THROWS_AS(Vocabulary::train_bpe({}, 10), CorpusTooSmall);
}

TEST_CASE("bpe: corpus exhausted before requested merges") {
  // "ab" alone supports only a handful of merges before every word collapses
  CHECK_THROWS_AS(Vocabulary::train_bpe({"ab"}, 40), CorpusTooSmall);
}

TEST_CASE("bpe: training is deterministic") {
  const std::vector<std::string> corpus = {"citation networks form graphs",
                                           "citation graphs cite papers"};
  Vocabulary a = Vocabulary::train_bpe(corpus, 40);
  Vocabulary b = Vocabulary::train_bpe(corpus, 40);
  CHECK(a.to_json() == b.to_json());
}

TEST_CASE("encode/decode: round trip") {
  Vocabulary v = Vocabulary::train_bpe({"citation networks cite papers"}, 32);
  CHECK(v.decode(v.encode("citation networks")) == "citation networks");
  CHECK(v.decode(v.encode("  citation   networks ")) == "citation networks");
  CHECK(v.encode("").empty());
  CHECK(v.decode({}) == "");
}

TEST_CASE("decode: out-of-range id") {
  Vocabulary v = Vocabulary::train_bpe({"abc abd"}, 12);
  CHECK_THROWS_AS(v.decode({v.size()}), UnknownId);
  CHECK_THROWS_AS(v.decode({-1}), UnknownId);
}

TEST_CASE("encode: unknown characters map to unk") {
  Vocabulary v = Vocabulary::train_bpe({"abc abc"}, 11);
  auto ids = v.encode("abz");
  bool has_unk = false;
  for (int id : ids) has_unk = has_unk || id == Vocabulary::kUnk;
  CHECK(has_unk);
  CHECK(v.decode(v.encode("abz")) == "ab<unk>");
}

TEST_CASE("encode never emits non-unk special ids") {
  Vocabulary v = Vocabulary::train_bpe({"the <pad> token appears literally"}, 40);
  for (int id : v.encode("the <pad> <bos> <cls> literally")) {
    CHECK(id != Vocabulary::kPad);
    CHECK(id != Vocabulary::kBos);
    CHECK(id != Vocabulary::kEos);
    CHECK(id != Vocabulary::kCls);
    CHECK(id != Vocabulary::kAbs);
  }
}

TEST_CASE("round trip property over random ascii strings") {
  std::mt19937_64 rng(20240817);
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
  std::vector<std::string> corpus;
  for (int i = 0; i < 40; ++i) {
    std::string text;
    for (int w = 0; w < 6; ++w) {
      if (w) text += ' ';
      const auto len = 1 + uniform_index(rng, 8);
      for (std::size_t c = 0; c < len; ++c)
        text += alphabet[uniform_index(rng, alphabet.size())];
    }
    corpus.push_back(text);
  }
  Vocabulary v = Vocabulary::train_bpe(corpus, 120);
  for (const auto& text : corpus) CHECK(v.decode(v.encode(text)) == text);
  // fresh strings over the same alphabet round-trip too
  for (int i = 0; i < 20; ++i) {
    std::string text;
    for (int w = 0; w < 4; ++w) {
      if (w) text += ' ';
      const auto len = 1 + uniform_index(rng, 10);
      for (std::size_t c = 0; c < len; ++c)
        text += alphabet[uniform_index(rng, alphabet.size())];
    }
    CHECK(v.decode(v.encode(text)) == text);
  }
}

TEST_CASE("persistence round trip") {
  Vocabulary v = Vocabulary::train_bpe({"citation networks cite papers"}, 40);
  Vocabulary rt = Vocabulary::from_json(v.to_json());
  CHECK(rt.to_json() == v.to_json());
  CHECK(rt.fingerprint() == v.fingerprint());
  CHECK(rt.decode(rt.encode("citation papers")) == "citation papers");
}

TEST_CASE("word-level mode") {
  Vocabulary v = Vocabulary::word_level({"alpha beta gamma", "beta delta"});
  CHECK(v.size() == Vocabulary::kNumSpecials + 4);
  CHECK(v.decode(v.encode("alpha delta")) == "alpha delta");
  CHECK(v.decode(v.encode("alpha omega")) == "alpha <unk>");
  Vocabulary rt = Vocabulary::from_json(v.to_json());
  CHECK(rt.decode(rt.encode("beta gamma")) == "beta gamma");
}
