#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace citesum {

// FNV-1a over the raw bytes; used for config and vocabulary fingerprints.
std::uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Unbiased draw in [0, n); pinned rejection sampling so shuffles are
// reproducible across standard libraries (std::shuffle is not).
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n);

// Fisher-Yates with uniform_index draws, back to front.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = uniform_index(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace citesum
