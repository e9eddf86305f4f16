#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sparta/encoder.hpp"

namespace sparta {

// Per-term query embeddings: row i of `embeddings` is the non-contextual
// vector for vocabulary term i. `bias` shifts the activation threshold and
// is always trainable; the embedding rows are trainable only when flagged.
struct QueryTermTable {
  Mat embeddings;  // V x d
  double bias = 0.0;
  bool trainable_embeddings = false;

  Eigen::Index vocab_size() const { return embeddings.rows(); }
  Eigen::Index dim() const { return embeddings.cols(); }
};

// Max-pooled dot product of one query-term embedding against the candidate
// token embeddings, with the first position attaining the max.
struct TermMatchResult {
  double y = 0.0;
  Eigen::Index argmax_position = 0;
};

// When answer_only is set the max runs over the answer span only; the
// default includes context tokens as well.
TermMatchResult term_match(const Vec& term_embedding,
                           const AnswerEncoding& encoding,
                           bool answer_only = false);

// ReLU(y + bias).
inline double sparse_feature(double y, double bias) {
  const double v = y + bias;
  return v > 0.0 ? v : 0.0;
}

// Relevance of a candidate to a query: the sum over query tokens (with
// multiplicity) of log(ReLU(max_j e.s_j + b) + 1). Natural log; an empty
// query scores 0.
double score_answer(const Query& query, const AnswerEncoding& encoding,
                    const QueryTermTable& table, bool answer_only = false);

struct ScoredAnswer {
  std::uint32_t answer_id = 0;
  double score = 0.0;

  bool operator==(const ScoredAnswer&) const = default;
};

// Scores every encoding and returns the k best, descending; score ties are
// broken by ascending answer id. Fewer than k answers gives a shorter list.
std::vector<ScoredAnswer> rank_brute_force(
    const Query& query, std::span<const AnswerEncoding> encodings,
    const QueryTermTable& table, std::size_t k, bool answer_only = false);

// Shared ordering rule for ranked lists.
void sort_ranked(std::vector<ScoredAnswer>& hits);

}  // namespace sparta
