#include "citesum/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace citesum::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

// Abbreviations whose trailing dot does not end a sentence. Compared
// case-insensitively against the last word before the dot (dot included).
const std::array<const char*, 14> kAbbrevs = {
    "e.g.", "i.e.", "etc.", "vs.", "cf.", "al.", "fig.", "figs.",
    "eq.", "dr.", "mr.", "mrs.", "no.", "approx.",
};

std::string last_word_lower(const std::string& s, std::size_t end) {
  // end is one past the terminator; walk back to the previous space
  std::size_t b = end;
  while (b > 0 && !is_space(s[b - 1])) --b;
  std::string w = s.substr(b, end - b);
  std::transform(w.begin(), w.end(), w.begin(), lower);
  return w;
}

bool ends_with_abbrev(const std::string& s, std::size_t dot_pos) {
  std::string w = last_word_lower(s, dot_pos + 1);
  for (const char* a : kAbbrevs) {
    if (w == a) return true;
  }
  // single initial like "J." or a dotted acronym tail like "u.s."
  if (w.size() == 2 && is_alpha(w[0])) return true;
  if (w.size() >= 4 && w[w.size() - 3] == '.') return true;
  return false;
}

}  // namespace

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t b = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

std::vector<std::string> split_sentences(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c != '.' && c != '!' && c != '?') continue;
    // consume a run of terminators (e.g. "?!" or "...")
    std::size_t j = i;
    while (j + 1 < s.size() && (s[j + 1] == '.' || s[j + 1] == '!' || s[j + 1] == '?' ||
                                s[j + 1] == '"' || s[j + 1] == '\'' || s[j + 1] == ')')) {
      ++j;
    }
    bool at_end = (j + 1 >= s.size());
    bool followed_by_space = !at_end && is_space(s[j + 1]);
    if (!at_end && !followed_by_space) continue;
    if (c == '.' && j == i && ends_with_abbrev(s, i)) continue;
    std::string sent = s.substr(start, j + 1 - start);
    // trim
    std::size_t b = 0, e = sent.size();
    while (b < e && is_space(sent[b])) ++b;
    while (e > b && is_space(sent[e - 1])) --e;
    if (e > b) out.push_back(sent.substr(b, e - b));
    start = j + 1;
    i = j;
  }
  if (start < s.size()) {
    std::string tail = s.substr(start);
    std::size_t b = 0, e = tail.size();
    while (b < e && is_space(tail[b])) ++b;
    while (e > b && is_space(tail[e - 1])) --e;
    if (e > b) out.push_back(tail.substr(b, e - b));
  }
  return out;
}

std::vector<std::string> metric_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (is_alnum(c)) {
      cur.push_back(lower(c));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

int count_syllables(const std::string& word) {
  std::string w;
  for (char c : word) {
    if (is_alpha(c)) w.push_back(lower(c));
  }
  if (w.empty()) return 0;
  auto is_vowel = [](char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
  };
  int groups = 0;
  std::size_t last_group_begin = std::string::npos;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (is_vowel(w[i]) && (i == 0 || !is_vowel(w[i - 1]))) {
      ++groups;
      last_group_begin = i;
    }
  }
  if (groups > 0 && w.back() == 'e' && last_group_begin == w.size() - 1) --groups;
  return std::max(groups, 1);
}

int count_letters(const std::string& s) {
  int n = 0;
  for (char c : s) {
    if (is_alpha(c)) ++n;
  }
  return n;
}

std::string normalize_heading(const std::string& heading) {
  std::string h = heading;
  std::transform(h.begin(), h.end(), h.begin(), lower);
  std::size_t b = 0, e = h.size();
  while (b < e && is_space(h[b])) ++b;
  // strip numbering: digits/roman numerals with separators, e.g. "1.", "iv)"
  std::size_t p = b;
  bool saw_numbering = false;
  while (p < e) {
    char c = h[p];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == 'i' || c == 'v' || c == 'x' ||
        c == 'l' || c == 'c') {
      ++p;
    } else if (c == '.' || c == ')' || c == ':' || c == '-') {
      saw_numbering = true;
      ++p;
    } else if (is_space(c) && p > b) {
      saw_numbering = true;
      ++p;
      break;
    } else {
      break;
    }
  }
  if (saw_numbering) b = p;
  while (b < e && (is_space(h[b]) || h[b] == '.' || h[b] == ')' || h[b] == ':')) ++b;
  while (e > b && is_space(h[e - 1])) --e;
  return h.substr(b, e - b);
}

bool is_introduction_heading(const std::string& heading) {
  return normalize_heading(heading) == "introduction";
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace citesum::text
