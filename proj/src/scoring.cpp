#include "sparta/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sparta {

TermMatchResult term_match(const Vec& term_embedding,
                           const AnswerEncoding& encoding, bool answer_only) {
  const Eigen::Index begin = answer_only ? encoding.answer_begin : 0;
  const Eigen::Index end = answer_only ? encoding.answer_end : encoding.tokens();
  if (end <= begin) {
    throw std::invalid_argument("empty answer");
  }
  if (term_embedding.size() != encoding.dim()) {
    throw std::invalid_argument("embedding dim mismatch");
  }
  TermMatchResult best{term_embedding.dot(encoding.vectors.col(begin)), begin};
  for (Eigen::Index j = begin + 1; j < end; ++j) {
    const double dot = term_embedding.dot(encoding.vectors.col(j));
    if (dot > best.y) {
      best.y = dot;
      best.argmax_position = j;
    }
  }
  return best;
}

double score_answer(const Query& query, const AnswerEncoding& encoding,
                    const QueryTermTable& table, bool answer_only) {
  double total = 0.0;
  for (const TermId t : query.token_ids) {
    const Vec e = table.embeddings.row(static_cast<Eigen::Index>(t)).transpose();
    const TermMatchResult m = term_match(e, encoding, answer_only);
    total += std::log1p(sparse_feature(m.y, table.bias));
  }
  return total;
}

void sort_ranked(std::vector<ScoredAnswer>& hits) {
  std::sort(hits.begin(), hits.end(), [](const ScoredAnswer& a, const ScoredAnswer& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.answer_id < b.answer_id;
  });
}

std::vector<ScoredAnswer> rank_brute_force(
    const Query& query, std::span<const AnswerEncoding> encodings,
    const QueryTermTable& table, std::size_t k, bool answer_only) {
  if (k < 1) {
    throw std::invalid_argument("k must be >= 1");
  }
  std::vector<ScoredAnswer> hits;
  hits.reserve(encodings.size());
  for (const AnswerEncoding& enc : encodings) {
    hits.push_back({enc.answer_id, score_answer(query, enc, table, answer_only)});
  }
  sort_ranked(hits);
  if (hits.size() > k) hits.resize(k);
  return hits;
}

}  // namespace sparta
