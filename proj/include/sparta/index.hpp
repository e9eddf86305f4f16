#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sparta/scoring.hpp"
#include "sparta/vocabulary.hpp"

namespace sparta {

// The nonzero slice of one answer's per-vocabulary-term score table. Each
// entry caches log(ReLU(y_t + b) + 1) for a term with positive activation,
// so query scoring reduces to lookups. Entries are sorted by term id and
// every cached score is strictly positive.
struct SparseEntry {
  TermId term_id = 0;
  float cached_score = 0.0f;

  bool operator==(const SparseEntry&) const = default;
};

struct SparseTermVector {
  std::uint32_t answer_id = 0;
  std::vector<SparseEntry> entries;

  bool operator==(const SparseTermVector&) const = default;
};

struct Posting {
  std::uint32_t answer_id = 0;
  float cached_score = 0.0f;

  bool operator==(const Posting&) const = default;
};

// Term id -> postings sorted by ascending answer id. Immutable once built;
// any number of readers may share it.
struct InvertedIndex {
  std::map<TermId, std::vector<Posting>> postings;
  std::uint32_t num_answers = 0;
  std::uint64_t vocab_fingerprint = 0;
  std::uint32_t top_k = 0;  // truncation used at build time; 0 = none

  bool operator==(const InvertedIndex&) const = default;
};

// Scores every vocabulary term against the encoding and keeps the positive
// activations. top_k > 0 keeps only the top_k largest cached scores (ties by
// ascending term id).
SparseTermVector build_answer_vector(const AnswerEncoding& encoding,
                                     const QueryTermTable& table,
                                     std::size_t top_k,
                                     bool answer_only = false);

// Transposes per-answer sparse vectors into posting lists. Answer ids must
// be dense 0..N-1 (any order, no duplicates). `threads` only splits the
// scoring work; the output is identical for any thread count.
InvertedIndex build_index(std::span<const AnswerEncoding> encodings,
                          const QueryTermTable& table,
                          std::uint64_t vocab_fingerprint, std::size_t top_k,
                          bool answer_only = false, unsigned threads = 1);

// Lookup-sum inference: accumulates cached scores per answer over the query
// tokens (with multiplicity) and returns the k best. Answers no query term
// touches are excluded. Throws "index/vocabulary mismatch" when the
// fingerprint differs from the index.
std::vector<ScoredAnswer> query_index(const InvertedIndex& index,
                                      const Query& query,
                                      std::uint64_t vocab_fingerprint,
                                      std::size_t k);

// Rebuilds one answer's sparse vector from the posting lists.
SparseTermVector reconstruct_answer_vector(const InvertedIndex& index,
                                           std::uint32_t answer_id);

// The k highest-scoring terms of one answer, decoded to strings. Descending
// score, ties by ascending term id.
std::vector<std::pair<std::string, float>> top_k_terms(
    const InvertedIndex& index, const Vocabulary& vocab,
    std::uint32_t answer_id, std::size_t k);

// Index file, little-endian:
//   magic "SPIX" | version u32 (=1) | vocab_fingerprint u64 |
//   num_answers u32 | top_k u32 | num_terms_with_postings u32 |
//   per term: term_id u32, posting_count u32,
//             posting_count x (answer_id u32, score f32)
void save_index(const InvertedIndex& index, const std::filesystem::path& path);
InvertedIndex load_index(const std::filesystem::path& path);

}  // namespace sparta
