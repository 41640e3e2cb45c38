#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "citesum/tokenizer.hpp"

namespace citesum {

struct Section {
  std::string heading;
  std::string text;
};

// One in-text citation occurrence; uid empty when the mention did not resolve
// to a paper identifier in the raw corpus.
struct RawCitation {
  std::string uid;
};

struct RawPaperFile {
  std::string uid;
  std::string title;
  std::string abstract;
  std::vector<Section> body;
  std::vector<RawCitation> bibliography;
};

enum class RejectReason {
  NoIntroduction,
  TooFewDistinctCitations,
  MissingField,
};

struct Rejection {
  RejectReason reason;
  std::string detail;
};

struct PaperRecord {
  std::string uid;
  std::string title;
  std::string abstract;  // the reference summary
  std::vector<Section> sections;
  std::vector<std::string> citation_uids;  // distinct, first-mention order
  // raw in-text citation occurrences seen at ingest; falls back to
  // citation_uids.size() when a record is reloaded from JSONL (mentions are
  // not part of the serialized schema)
  long mention_count = 0;
  // cached at construction
  long word_count = 0;
  long sentence_count = 0;
  long chunk_count = 0;  // sections and subsections

  std::string body_text() const;
  void refresh_cached_counts();
};

struct CorpusStats {
  long sample_count = 0;
  long paper_count = 0;  // distinct uids of samples plus everything they cite
  double avg_distinct_citations = 0;
  double avg_total_citations = 0;
  double avg_chunks = 0;
  double avg_doc_sentences = 0;
  double avg_doc_words = 0;
  double avg_summary_sentences = 0;
  double avg_summary_words = 0;
};

struct Dataset {
  std::map<std::string, PaperRecord> records;
  std::map<std::string, PaperRecord> aux_records;  // citation targets only
  std::vector<std::string> train, val, test;

  const PaperRecord* find(const std::string& uid) const;
  const std::vector<std::string>& split(const std::string& name) const;  // throws UnknownSplit
  void check_invariants() const;  // closure, disjointness, split membership
};

// Maps configurable raw-corpus field names onto the internal schema.
// Bibliography entries may be plain uid strings or objects carrying
// `citation_uid` (null/absent = unresolved mention).
struct FieldMap {
  std::string uid = "uid";
  std::string title = "title";
  std::string abstract = "abstract";
  std::string body = "body";
  std::string heading = "heading";
  std::string text = "text";
  std::string citations = "citations";
  std::string citation_uid = "uid";
};

// One JSONL line -> RawPaperFile. Throws MalformedJson / MissingUid.
RawPaperFile parse_raw_entry(const std::string& line, const FieldMap& fields = {});

// Rule order: introduction section, then >= citation_limit distinct citation
// uids, then field presence. Rejection is a value, not a failure.
std::variant<PaperRecord, Rejection> qualify_paper(const RawPaperFile& raw,
                                                   int citation_limit);
const char* reject_reason_name(RejectReason r);

// Two passes: admit qualified papers, then prune citation uids that do not
// resolve among the admitted set. Records whose pruned list falls below the
// limit are demoted to aux_records (still valid citation targets). Duplicate
// raw uids: first occurrence wins. Throws EmptyResult when no sample records
// remain.
Dataset build_dataset(const std::vector<RawPaperFile>& corpus, int citation_limit);

// Deterministic Fisher-Yates shuffle of the record uids under `seed`, then
// floor(n*ratio) for val and test with the remainder going to train.
Dataset split_dataset(Dataset ds, const std::array<double, 3>& ratios,
                      std::uint64_t seed);

// Greedy packing: whole sections while they fit, else sentences, else a hard
// token split. Every chunk holds <= max_tokens ids and concatenation decodes
// back to the body text (single-space normalization).
std::vector<std::vector<int>> chunk_document(const PaperRecord& rec, int max_tokens,
                                             const Vocabulary& vocab);

CorpusStats compute_stats(const Dataset& ds, const std::string& split);

// Serialized schema, key order pinned:
// {"uid","title","abstract","sections":[{"heading","text"}],"citations":[...]}
std::string record_to_json_line(const PaperRecord& rec);
PaperRecord record_from_json_line(const std::string& line);

}  // namespace citesum
