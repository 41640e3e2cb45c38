#pragma once

#include <string>
#include <vector>

namespace citesum::text {

// Whitespace tokenization; the word count used by corpus stats and readability.
std::vector<std::string> split_words(const std::string& s);

// Rule-based splitter: a sentence ends at . ! or ? followed by whitespace,
// unless the dot terminates a known abbreviation or a single initial.
// The terminator stays attached to its sentence.
std::vector<std::string> split_sentences(const std::string& s);

// Metric tokenization: lowercase, any char outside [a-z0-9] is a separator.
std::vector<std::string> metric_tokens(const std::string& s);

// Maximal aeiouy groups, minus a trailing lone 'e' group, floor of 1.
// Counts 0 for tokens containing no letters.
int count_syllables(const std::string& word);

int count_letters(const std::string& s);

// Lowercases and strips leading numbering ("1.", "I.", "2.3)", ...) plus
// surrounding whitespace.
std::string normalize_heading(const std::string& heading);

bool is_introduction_heading(const std::string& heading);

std::string join(const std::vector<std::string>& parts, const std::string& sep);

}  // namespace citesum::text
