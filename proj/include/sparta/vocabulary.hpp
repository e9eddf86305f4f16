#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sparta {

using TermId = std::uint32_t;

// Bijection between lowercase terms and dense ids 0..V-1. Out-of-vocabulary
// terms have no id; callers decide what to do with the miss (queries drop
// them). Lookups are case-insensitive.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Takes ownership of an ordered term list. Throws if a term is empty,
  // contains whitespace, is not lowercase, or appears twice.
  static Vocabulary from_terms(std::vector<std::string> terms);

  std::optional<TermId> id_of(std::string_view term) const;
  const std::string& term(TermId id) const;
  const std::vector<std::string>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  // FNV-1a over the term list; binds indexes and models to the vocabulary
  // they were built with.
  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, TermId> term_to_id_;
};

// Counts tokens over the given texts and keeps those appearing at least
// min_count times, ordered by descending count then lexicographically.
// Throws "empty corpus" on no texts and "no terms survive min_count" when
// the threshold removes everything.
Vocabulary build_vocabulary(std::span<const std::string> texts,
                            std::size_t min_count);

}  // namespace sparta
