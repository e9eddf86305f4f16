#include "sparta/vocabulary.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "sparta/tokenizer.hpp"

namespace sparta {

namespace {

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace

Vocabulary Vocabulary::from_terms(std::vector<std::string> terms) {
  Vocabulary v;
  v.terms_ = std::move(terms);
  v.term_to_id_.reserve(v.terms_.size());
  for (std::size_t i = 0; i < v.terms_.size(); ++i) {
    const std::string& t = v.terms_[i];
    if (t.empty()) {
      throw std::invalid_argument("vocabulary term is empty");
    }
    for (const char c : t) {
      const auto uc = static_cast<unsigned char>(c);
      if (uc < 0x80 && (std::isspace(uc) || std::isupper(uc))) {
        throw std::invalid_argument("vocabulary term not lowercase or has whitespace: " + t);
      }
    }
    if (!v.term_to_id_.emplace(t, static_cast<TermId>(i)).second) {
      throw std::invalid_argument("duplicate vocabulary term: " + t);
    }
  }
  return v;
}

std::optional<TermId> Vocabulary::id_of(std::string_view term) const {
  const auto it = term_to_id_.find(ascii_lower(term));
  if (it == term_to_id_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::term(TermId id) const {
  if (id >= terms_.size()) {
    throw std::out_of_range("term id " + std::to_string(id) +
                            " out of range (vocabulary size " +
                            std::to_string(terms_.size()) + ")");
  }
  return terms_[id];
}

std::uint64_t Vocabulary::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](unsigned char byte) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  };
  for (const std::string& t : terms_) {
    for (const char c : t) mix(static_cast<unsigned char>(c));
    mix(0);
  }
  return h;
}

Vocabulary build_vocabulary(std::span<const std::string> texts,
                            std::size_t min_count) {
  if (min_count < 1) {
    throw std::invalid_argument("min_count must be >= 1");
  }
  if (texts.empty()) {
    throw std::invalid_argument("empty corpus");
  }
  std::unordered_map<std::string, std::size_t> counts;
  for (const std::string& text : texts) {
    for (std::string& tok : tokenize(text)) {
      ++counts[std::move(tok)];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  kept.reserve(counts.size());
  for (auto& [term, count] : counts) {
    if (count >= min_count) kept.emplace_back(term, count);
  }
  if (kept.empty()) {
    throw std::runtime_error("no terms survive min_count");
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> terms;
  terms.reserve(kept.size());
  for (auto& [term, count] : kept) terms.push_back(std::move(term));
  return Vocabulary::from_terms(std::move(terms));
}

}  // namespace sparta
