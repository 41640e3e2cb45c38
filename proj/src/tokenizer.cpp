#include "citesum/tokenizer.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "citesum/errors.hpp"
#include "citesum/text.hpp"
#include "citesum/util.hpp"

namespace citesum {

namespace {

constexpr const char* kEow = "</w>";

const std::vector<std::string>& special_strings() {
  static const std::vector<std::string> s = {"<pad>", "<unk>", "<bos>",
                                             "<eos>", "<cls>", "<abs>"};
  return s;
}

// Merges every a,b adjacency left to right in a single pass.
void apply_merge(std::vector<std::string>& symbols, const std::string& a,
                 const std::string& b) {
  std::vector<std::string> out;
  out.reserve(symbols.size());
  std::size_t i = 0;
  while (i < symbols.size()) {
    if (i + 1 < symbols.size() && symbols[i] == a && symbols[i + 1] == b) {
      out.push_back(a + b);
      i += 2;
    } else {
      out.push_back(symbols[i]);
      ++i;
    }
  }
  symbols = std::move(out);
}

}  // namespace

void Vocabulary::index_tokens() {
  ids_.clear();
  for (std::size_t i = 0; i < tokens_.size(); ++i) ids_[tokens_[i]] = static_cast<int>(i);
  merge_rank_.clear();
  for (std::size_t r = 0; r < merges_.size(); ++r)
    merge_rank_[merges_[r]] = static_cast<int>(r);
}

std::vector<std::string> Vocabulary::word_to_symbols(const std::string& word) const {
  std::vector<std::string> symbols;
  symbols.reserve(word.size() + 1);
  for (char c : word) symbols.emplace_back(1, c);
  symbols.emplace_back(kEow);
  return symbols;
}

Vocabulary Vocabulary::train_bpe(const std::vector<std::string>& texts, int vocab_size) {
  // word frequency table, insertion order retained for determinism of nothing
  // but readability; pair counting below is order-independent
  std::map<std::string, long> word_freq;
  std::set<std::string> alphabet;
  for (const auto& t : texts) {
    for (const auto& w : text::split_words(t)) {
      ++word_freq[w];
      for (char c : w) alphabet.insert(std::string(1, c));
    }
  }
  alphabet.insert(kEow);

  Vocabulary v;
  v.mode_ = Mode::Bpe;
  v.tokens_ = special_strings();
  for (const auto& s : alphabet) v.tokens_.push_back(s);

  const int base = static_cast<int>(v.tokens_.size());
  if (vocab_size <= base) {
    throw CorpusTooSmall("vocab_size " + std::to_string(vocab_size) +
                         " must exceed specials + base alphabet (" +
                         std::to_string(base) + ")");
  }
  const int wanted_merges = vocab_size - base;

  std::set<std::string> existing(v.tokens_.begin(), v.tokens_.end());
  std::vector<std::pair<std::vector<std::string>, long>> corpus;
  corpus.reserve(word_freq.size());
  for (const auto& [w, f] : word_freq) corpus.emplace_back(v.word_to_symbols(w), f);

  for (int m = 0; m < wanted_merges; ++m) {
    // std::map keeps candidates in lexicographic order, which pins the
    // tie-break to the smallest pair
    std::map<std::pair<std::string, std::string>, long> pair_count;
    for (const auto& [symbols, f] : corpus) {
      for (std::size_t i = 0; i + 1 < symbols.size(); ++i)
        pair_count[{symbols[i], symbols[i + 1]}] += f;
    }
    std::pair<std::string, std::string> best;
    long best_count = 0;
    for (const auto& [p, c] : pair_count) {
      if (existing.count(p.first + p.second)) continue;  // keep token<->id bijective
      if (c > best_count) {
        best = p;
        best_count = c;
      }
    }
    if (best_count == 0) {
      throw CorpusTooSmall("corpus exhausted after " + std::to_string(m) +
                           " merges, " + std::to_string(wanted_merges) + " requested");
    }
    v.merges_.push_back(best);
    v.tokens_.push_back(best.first + best.second);
    existing.insert(best.first + best.second);
    for (auto& [symbols, f] : corpus) apply_merge(symbols, best.first, best.second);
  }

  v.index_tokens();
  return v;
}

Vocabulary Vocabulary::word_level(const std::vector<std::string>& texts) {
  std::set<std::string> words;
  for (const auto& t : texts)
    for (const auto& w : text::split_words(t)) words.insert(w);
  Vocabulary v;
  v.mode_ = Mode::Word;
  v.tokens_ = special_strings();
  for (const auto& w : words) v.tokens_.push_back(w);
  v.index_tokens();
  return v;
}

std::vector<int> Vocabulary::encode(const std::string& text) const {
  std::vector<int> out;
  for (const auto& word : text::split_words(text)) {
    if (mode_ == Mode::Word) {
      auto it = ids_.find(word);
      out.push_back(it == ids_.end() ? kUnk : it->second);
      continue;
    }
    std::vector<std::string> symbols = word_to_symbols(word);
    while (symbols.size() > 1) {
      int best_rank = -1;
      std::pair<std::string, std::string> best;
      for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
        auto it = merge_rank_.find({symbols[i], symbols[i + 1]});
        if (it != merge_rank_.end() && (best_rank < 0 || it->second < best_rank)) {
          best_rank = it->second;
          best = it->first;
        }
      }
      if (best_rank < 0) break;
      apply_merge(symbols, best.first, best.second);
    }
    for (const auto& s : symbols) {
      auto it = ids_.find(s);
      out.push_back(it == ids_.end() ? kUnk : it->second);
    }
  }
  return out;
}

std::string Vocabulary::decode(const std::vector<int>& ids) const {
  std::string out;
  auto append_word_sep = [&out]() {
    if (!out.empty() && out.back() != ' ') out.push_back(' ');
  };
  for (int id : ids) {
    if (id < 0 || id >= size())
      throw UnknownId("token id " + std::to_string(id) + " out of range [0, " +
                      std::to_string(size()) + ")");
    if (id == kUnk) {
      out += "<unk>";
      if (mode_ == Mode::Word) append_word_sep();
      continue;
    }
    if (is_special(id)) continue;
    const std::string& tok = tokens_[id];
    if (mode_ == Mode::Word) {
      out += tok;
      append_word_sep();
    } else if (tok.size() >= 4 && tok.compare(tok.size() - 4, 4, kEow) == 0) {
      out += tok.substr(0, tok.size() - 4);
      append_word_sep();
    } else {
      out += tok;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size())
    throw UnknownId("token id " + std::to_string(id) + " out of range");
  return tokens_[id];
}

std::string Vocabulary::to_json() const {
  nlohmann::ordered_json j;
  j["mode"] = mode_ == Mode::Bpe ? "bpe" : "word";
  j["tokens"] = tokens_;
  nlohmann::ordered_json merges = nlohmann::ordered_json::array();
  for (const auto& [a, b] : merges_) merges.push_back({a, b});
  j["merges"] = std::move(merges);
  j["specials"] = {{"pad", kPad}, {"unk", kUnk}, {"bos", kBos},
                   {"eos", kEos}, {"cls", kCls}, {"abs", kAbs}};
  return j.dump();
}

Vocabulary Vocabulary::from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedJson(std::string("vocabulary: ") + e.what());
  }
  Vocabulary v;
  v.mode_ = j.at("mode").get<std::string>() == "word" ? Mode::Word : Mode::Bpe;
  v.tokens_ = j.at("tokens").get<std::vector<std::string>>();
  for (const auto& m : j.at("merges"))
    v.merges_.emplace_back(m.at(0).get<std::string>(), m.at(1).get<std::string>());
  v.index_tokens();
  if (v.ids_.size() != v.tokens_.size())
    throw MalformedJson("vocabulary: duplicate token strings break the bijection");
  return v;
}

void Vocabulary::save(const std::string& path) const { write_file(path, to_json()); }

Vocabulary Vocabulary::load(const std::string& path) { return from_json(read_file(path)); }

std::string Vocabulary::fingerprint() const { return fnv1a64_hex(to_json()); }

}  // namespace citesum
