#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace citesum {

// Subword vocabulary. Two modes:
//   - Bpe: byte-level symbols with an end-of-word marker and learned merges.
//   - Word: whitespace vocabulary, used where model tests should not depend
//     on merge training.
// Special ids are fixed so model code can refer to them without a lookup.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr int kCls = 4;  // global-context tag, first position of a pair row
  static constexpr int kAbs = 5;  // separator between document and cited abstract
  static constexpr int kNumSpecials = 6;

  // Learns vocab_size - specials - base_alphabet merges from the corpus.
  // Throws CorpusTooSmall when vocab_size does not exceed specials + base
  // alphabet, or when the corpus runs out of adjacent pairs early.
  static Vocabulary train_bpe(const std::vector<std::string>& texts, int vocab_size);

  // Whitespace vocabulary over the distinct words of the corpus.
  static Vocabulary word_level(const std::vector<std::string>& texts);

  std::vector<int> encode(const std::string& text) const;

  // Inverse of encode up to whitespace normalization (single-space joins).
  // PAD/BOS/EOS/CLS/ABS ids are dropped; UNK renders as "<unk>".
  // Throws UnknownId for ids outside [0, size()).
  std::string decode(const std::vector<int>& ids) const;

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string& token(int id) const;
  bool is_special(int id) const { return id >= 0 && id < kNumSpecials; }
  int num_merges() const { return static_cast<int>(merges_.size()); }

  std::string to_json() const;
  static Vocabulary from_json(const std::string& json_text);
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  // FNV-1a of the serialized form; stored in checkpoints.
  std::string fingerprint() const;

 private:
  enum class Mode { Bpe, Word };

  Vocabulary() = default;
  void index_tokens();
  std::vector<std::string> word_to_symbols(const std::string& word) const;

  Mode mode_ = Mode::Bpe;
  std::vector<std::string> tokens_;  // id -> token text, specials first
  std::unordered_map<std::string, int> ids_;
  std::vector<std::pair<std::string, std::string>> merges_;
  std::map<std::pair<std::string, std::string>, int> merge_rank_;
};

}  // namespace citesum
