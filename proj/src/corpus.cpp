#include "citesum/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "citesum/errors.hpp"
#include "citesum/text.hpp"
#include "citesum/util.hpp"

namespace citesum {

std::string PaperRecord::body_text() const {
  std::string out;
  for (const auto& s : sections) {
    if (s.text.empty()) continue;
    if (!out.empty()) out += ' ';
    out += s.text;
  }
  return out;
}

void PaperRecord::refresh_cached_counts() {
  const std::string body = body_text();
  word_count = static_cast<long>(text::split_words(body).size());
  sentence_count = static_cast<long>(text::split_sentences(body).size());
  chunk_count = static_cast<long>(sections.size());
}

const PaperRecord* Dataset::find(const std::string& uid) const {
  if (auto it = records.find(uid); it != records.end()) return &it->second;
  if (auto it = aux_records.find(uid); it != aux_records.end()) return &it->second;
  return nullptr;
}

const std::vector<std::string>& Dataset::split(const std::string& name) const {
  if (name == "train") return train;
  if (name == "val") return val;
  if (name == "test") return test;
  throw UnknownSplit("no split named '" + name + "'");
}

void Dataset::check_invariants() const {
  auto resolves = [this](const std::string& u) {
    return records.count(u) != 0 || aux_records.count(u) != 0;
  };
  for (const auto* m : {&records, &aux_records}) {
    for (const auto& [uid, rec] : *m) {
      std::unordered_set<std::string> seen;
      for (const auto& c : rec.citation_uids) {
        if (!resolves(c))
          throw DanglingEdge("record " + uid + " cites unresolved uid " + c);
        if (!seen.insert(c).second)
          throw DanglingEdge("record " + uid + " lists duplicate citation " + c);
      }
    }
  }
  std::unordered_set<std::string> assigned;
  for (const auto* sp : {&train, &val, &test}) {
    for (const auto& u : *sp) {
      if (!records.count(u))
        throw UnknownSplit("split uid " + u + " is not a sample record");
      if (!assigned.insert(u).second)
        throw UnknownSplit("uid " + u + " appears in more than one split");
    }
  }
}

RawPaperFile parse_raw_entry(const std::string& line, const FieldMap& fields) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedJson(e.what());
  }
  if (!j.is_object()) throw MalformedJson("raw entry is not a JSON object");
  if (!j.contains(fields.uid) || !j[fields.uid].is_string() ||
      j[fields.uid].get<std::string>().empty()) {
    throw MissingUid("raw entry has no '" + fields.uid + "' identifier");
  }

  RawPaperFile raw;
  raw.uid = j[fields.uid].get<std::string>();
  if (j.contains(fields.title) && j[fields.title].is_string())
    raw.title = j[fields.title].get<std::string>();
  if (j.contains(fields.abstract) && j[fields.abstract].is_string())
    raw.abstract = j[fields.abstract].get<std::string>();
  if (j.contains(fields.body) && j[fields.body].is_array()) {
    for (const auto& sec : j[fields.body]) {
      if (!sec.is_object()) continue;
      Section s;
      if (sec.contains(fields.heading) && sec[fields.heading].is_string())
        s.heading = sec[fields.heading].get<std::string>();
      if (sec.contains(fields.text) && sec[fields.text].is_string())
        s.text = sec[fields.text].get<std::string>();
      raw.body.push_back(std::move(s));
    }
  }
  if (j.contains(fields.citations) && j[fields.citations].is_array()) {
    for (const auto& c : j[fields.citations]) {
      RawCitation cit;
      if (c.is_string()) {
        cit.uid = c.get<std::string>();
      } else if (c.is_object() && c.contains(fields.citation_uid) &&
                 c[fields.citation_uid].is_string()) {
        cit.uid = c[fields.citation_uid].get<std::string>();
      }
      raw.bibliography.push_back(std::move(cit));
    }
  }
  return raw;
}

const char* reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::NoIntroduction: return "NoIntroduction";
    case RejectReason::TooFewDistinctCitations: return "TooFewDistinctCitations";
    case RejectReason::MissingField: return "MissingField";
  }
  return "?";
}

std::variant<PaperRecord, Rejection> qualify_paper(const RawPaperFile& raw,
                                                   int citation_limit) {
  if (citation_limit < 1) throw std::invalid_argument("citation_limit must be >= 1");

  bool has_intro = false;
  for (const auto& s : raw.body) {
    if (text::is_introduction_heading(s.heading)) {
      has_intro = true;
      break;
    }
  }
  if (!has_intro) return Rejection{RejectReason::NoIntroduction, raw.uid};

  std::vector<std::string> distinct;
  std::unordered_set<std::string> seen;
  for (const auto& c : raw.bibliography) {
    if (c.uid.empty()) continue;
    if (seen.insert(c.uid).second) distinct.push_back(c.uid);
  }
  if (static_cast<int>(distinct.size()) < citation_limit) {
    return Rejection{RejectReason::TooFewDistinctCitations,
                     raw.uid + ": " + std::to_string(distinct.size()) + " < " +
                         std::to_string(citation_limit)};
  }

  auto missing = [&raw](const char* which) {
    return Rejection{RejectReason::MissingField, raw.uid + ": " + which};
  };
  if (raw.uid.empty()) return missing("uid");
  if (raw.title.empty()) return missing("title");
  if (raw.abstract.empty()) return missing("abstract");
  if (raw.body.empty()) return missing("sections");
  if (raw.bibliography.empty()) return missing("citations");

  PaperRecord rec;
  rec.uid = raw.uid;
  rec.title = raw.title;
  rec.abstract = raw.abstract;
  rec.sections = raw.body;
  rec.citation_uids = std::move(distinct);
  rec.mention_count = static_cast<long>(raw.bibliography.size());
  rec.refresh_cached_counts();
  return rec;
}

Dataset build_dataset(const std::vector<RawPaperFile>& corpus, int citation_limit) {
  Dataset ds;
  std::map<std::string, PaperRecord> qualified;
  std::unordered_set<std::string> seen_uids;
  for (const auto& raw : corpus) {
    if (!seen_uids.insert(raw.uid).second) continue;  // first occurrence wins
    auto result = qualify_paper(raw, citation_limit);
    if (auto* rec = std::get_if<PaperRecord>(&result)) {
      qualified.emplace(rec->uid, std::move(*rec));
    }
  }
  if (qualified.empty()) throw EmptyResult("no paper qualified");

  // second pass: citations must resolve among the admitted papers
  for (auto& [uid, rec] : qualified) {
    std::vector<std::string> kept;
    kept.reserve(rec.citation_uids.size());
    for (const auto& c : rec.citation_uids) {
      if (qualified.count(c)) kept.push_back(c);
    }
    rec.citation_uids = std::move(kept);
  }
  for (auto& [uid, rec] : qualified) {
    if (static_cast<int>(rec.citation_uids.size()) < citation_limit) {
      ds.aux_records.emplace(uid, std::move(rec));
    } else {
      ds.records.emplace(uid, std::move(rec));
    }
  }
  if (ds.records.empty())
    throw EmptyResult("every qualified paper fell below the citation limit");
  return ds;
}

Dataset split_dataset(Dataset ds, const std::array<double, 3>& ratios,
                      std::uint64_t seed) {
  for (double r : ratios) {
    if (!(r > 0)) throw std::invalid_argument("split ratios must be positive");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9)
    throw std::invalid_argument("split ratios must sum to 1");

  std::vector<std::string> uids;
  uids.reserve(ds.records.size());
  for (const auto& [uid, rec] : ds.records) uids.push_back(uid);
  std::mt19937_64 rng(seed);
  deterministic_shuffle(uids, rng);

  const auto n = uids.size();
  const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios[1]));
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios[2]));
  if (n_val == 0 || n_test == 0 || n_val + n_test >= n)
    throw TooFewSamples(std::to_string(n) + " records cannot fill three splits");
  const auto n_train = n - n_val - n_test;

  ds.train.assign(uids.begin(), uids.begin() + n_train);
  ds.val.assign(uids.begin() + n_train, uids.begin() + n_train + n_val);
  ds.test.assign(uids.begin() + n_train + n_val, uids.end());
  return ds;
}

std::vector<std::vector<int>> chunk_document(const PaperRecord& rec, int max_tokens,
                                             const Vocabulary& vocab) {
  if (max_tokens < 16) throw std::invalid_argument("max_tokens must be >= 16");
  std::vector<std::vector<int>> chunks;
  std::vector<int> current;
  const auto cap = static_cast<std::size_t>(max_tokens);

  auto flush = [&]() {
    if (!current.empty()) {
      chunks.push_back(std::move(current));
      current.clear();
    }
  };
  // appends one indivisible unit, hard-splitting only when it alone exceeds cap
  auto append_unit = [&](const std::vector<int>& ids) {
    if (ids.empty()) return;
    if (ids.size() <= cap) {
      if (current.size() + ids.size() > cap) flush();
      current.insert(current.end(), ids.begin(), ids.end());
      return;
    }
    flush();
    std::size_t off = 0;
    while (off < ids.size()) {
      std::size_t take = std::min(cap, ids.size() - off);
      current.assign(ids.begin() + off, ids.begin() + off + take);
      off += take;
      if (current.size() == cap) flush();
    }
  };

  for (const auto& sec : rec.sections) {
    if (sec.text.empty()) continue;
    std::vector<int> sec_ids = vocab.encode(sec.text);
    if (sec_ids.size() <= cap) {
      append_unit(sec_ids);
      continue;
    }
    for (const auto& sent : text::split_sentences(sec.text))
      append_unit(vocab.encode(sent));
  }
  flush();
  return chunks;
}

CorpusStats compute_stats(const Dataset& ds, const std::string& split) {
  const auto& uids = ds.split(split);
  if (uids.empty()) throw std::invalid_argument("split '" + split + "' is empty");

  CorpusStats st;
  st.sample_count = static_cast<long>(uids.size());
  std::set<std::string> papers;
  double distinct = 0, total = 0, chunks = 0, dsent = 0, dword = 0, ssent = 0, sword = 0;
  for (const auto& uid : uids) {
    const auto it = ds.records.find(uid);
    if (it == ds.records.end()) throw UnknownSplit("split uid " + uid + " missing");
    const PaperRecord& r = it->second;
    papers.insert(uid);
    for (const auto& c : r.citation_uids) papers.insert(c);
    distinct += static_cast<double>(r.citation_uids.size());
    total += static_cast<double>(r.mention_count);
    chunks += static_cast<double>(r.chunk_count);
    dsent += static_cast<double>(r.sentence_count);
    dword += static_cast<double>(r.word_count);
    ssent += static_cast<double>(text::split_sentences(r.abstract).size());
    sword += static_cast<double>(text::split_words(r.abstract).size());
  }
  const double n = static_cast<double>(uids.size());
  st.paper_count = static_cast<long>(papers.size());
  st.avg_distinct_citations = distinct / n;
  st.avg_total_citations = total / n;
  st.avg_chunks = chunks / n;
  st.avg_doc_sentences = dsent / n;
  st.avg_doc_words = dword / n;
  st.avg_summary_sentences = ssent / n;
  st.avg_summary_words = sword / n;
  return st;
}

std::string record_to_json_line(const PaperRecord& rec) {
  nlohmann::ordered_json j;
  j["uid"] = rec.uid;
  j["title"] = rec.title;
  j["abstract"] = rec.abstract;
  nlohmann::ordered_json sections = nlohmann::ordered_json::array();
  for (const auto& s : rec.sections) {
    nlohmann::ordered_json sec;
    sec["heading"] = s.heading;
    sec["text"] = s.text;
    sections.push_back(std::move(sec));
  }
  j["sections"] = std::move(sections);
  j["citations"] = rec.citation_uids;
  return j.dump();
}

PaperRecord record_from_json_line(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedJson(e.what());
  }
  PaperRecord rec;
  try {
    rec.uid = j.at("uid").get<std::string>();
    rec.title = j.at("title").get<std::string>();
    rec.abstract = j.at("abstract").get<std::string>();
    for (const auto& s : j.at("sections")) {
      rec.sections.push_back(
          Section{s.at("heading").get<std::string>(), s.at("text").get<std::string>()});
    }
    rec.citation_uids = j.at("citations").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw MalformedJson(std::string("record schema: ") + e.what());
  }
  if (rec.uid.empty()) throw MissingUid("record line has empty uid");
  rec.mention_count = static_cast<long>(rec.citation_uids.size());
  rec.refresh_cached_counts();
  return rec;
}

}  // namespace citesum
