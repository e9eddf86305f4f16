#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "sparta/corpus.hpp"
#include "sparta/scoring.hpp"
#include "sparta/vocabulary.hpp"

namespace sparta {

struct Bm25Posting {
  std::uint32_t answer_id = 0;
  std::uint32_t term_frequency = 0;

  bool operator==(const Bm25Posting&) const = default;
};

// Classic lexical index over the same candidates: term frequencies over
// answer+context tokens, document lengths, and the Okapi parameters.
struct Bm25Index {
  std::map<TermId, std::vector<Bm25Posting>> postings;
  std::vector<std::uint32_t> doc_lengths;
  double avg_doc_length = 0.0;
  std::uint32_t num_docs = 0;
  std::uint64_t vocab_fingerprint = 0;
  double k1 = 1.2;
  double b = 0.75;

  bool operator==(const Bm25Index&) const = default;
};

Bm25Index bm25_build(std::span<const AnswerCandidate> candidates,
                     std::uint64_t vocab_fingerprint, double k1 = 1.2,
                     double b = 0.75);

// Smoothed IDF: ln(1 + (N - df + 0.5) / (df + 0.5)). Never negative.
double bm25_idf(std::size_t num_docs, std::size_t doc_freq);

// score(d) = sum over query tokens (with multiplicity) of
//   IDF(t) * tf*(k1+1) / (tf + k1*(1 - b + b*len(d)/avglen)).
// Documents matching no query term are excluded. Top-k descending, ties by
// ascending answer id.
std::vector<ScoredAnswer> bm25_rank(const Bm25Index& index, const Query& query,
                                    std::uint64_t vocab_fingerprint,
                                    std::size_t k);

// Baseline index file, little-endian:
//   magic "SPBM" | version u32 (=1) | vocab_fingerprint u64 |
//   term_count u32 | terms (length-prefixed UTF-8) |
//   num_docs u32 | doc lengths u32 each | k1 f64 | b f64 |
//   num_terms_with_postings u32 |
//   per term: term_id u32, posting_count u32,
//             posting_count x (answer_id u32, tf u32)
// The vocabulary is embedded so searches need no other artifact.
void save_bm25(const Bm25Index& index, const Vocabulary& vocab,
               const std::filesystem::path& path);
std::pair<Bm25Index, Vocabulary> load_bm25(const std::filesystem::path& path);

}  // namespace sparta
