#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparta/corpus.hpp"
#include "sparta/encoder.hpp"
#include "sparta/eval.hpp"
#include "sparta/model.hpp"
#include "sparta/rng.hpp"

namespace sparta::test {

// Naive re-implementation of the relevance score over plain arrays. Kept
// deliberately separate from the library code paths so it can stand as an
// oracle: per query term, the max dot product against the token vectors,
// shifted by the bias, clipped at zero, then log(x + 1), summed.
double oracle_score(const std::vector<std::vector<double>>& query_term_rows,
                    const std::vector<std::vector<double>>& token_columns,
                    double bias);

std::vector<double> matrix_row(const Mat& m, Eigen::Index row);
std::vector<std::vector<double>> encoding_columns(const AnswerEncoding& enc);

// Model with parameters drawn at magnitudes a trained desk-scale model
// reaches, so sparse vectors are neither empty nor dense.
Model random_scored_model(std::size_t vocab_size, std::size_t dim,
                          std::uint32_t window, std::uint64_t seed);

std::vector<AnswerCandidate> random_candidates(std::size_t count,
                                               std::size_t vocab_size,
                                               std::size_t min_tokens,
                                               std::size_t max_tokens,
                                               Rng& rng);

Query random_query(std::size_t vocab_size, std::size_t num_tokens, Rng& rng);

// Corpus whose queries swap each answer's distinguishing word for a fixed
// synonym that never occurs in any answer text, leaving only a shared topic
// word as lexical overlap. Lexical ranking plateaus near the topic-group
// size; a ranker that learns the synonym association can reach the top.
struct SyntheticDataset {
  std::vector<RawCandidate> raw;
  std::vector<EvalRecord> train_queries;
  std::vector<EvalRecord> heldout_queries;
};

SyntheticDataset make_synonym_dataset(std::size_t num_answers,
                                      std::size_t num_heldout,
                                      std::uint64_t seed);

}  // namespace sparta::test
