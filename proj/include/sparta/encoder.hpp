#pragma once

#include <cstdint>
#include <filesystem>
#include <map>

#include <Eigen/Dense>

#include "sparta/corpus.hpp"

namespace sparta {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Contextual per-token embeddings for one candidate. Column j is the
// embedding of token j of the full (truncated) sequence; answer_begin /
// answer_end delimit the answer span within the columns.
struct AnswerEncoding {
  std::uint32_t answer_id = 0;
  Mat vectors;  // d x L
  Eigen::Index answer_begin = 0;
  Eigen::Index answer_end = 0;  // one past the last answer column

  Eigen::Index dim() const { return vectors.rows(); }
  Eigen::Index tokens() const { return vectors.cols(); }
};

// Answer-side encoder parameters: input token embeddings, answer/context
// segment embeddings, and a tanh projection. Position j is contextualized by
// averaging token embeddings over a +/-window neighborhood (clipped to the
// sequence), adding the segment embedding for answer vs. context, and
// projecting through tanh(proj * h + proj_bias).
struct ToyEncoderParams {
  Mat token_table;    // V x d
  Mat segment_table;  // 2 x d
  Mat proj;           // d x d
  Vec proj_bias;      // d
  std::uint32_t window = 2;

  Eigen::Index dim() const { return proj.rows(); }
  Eigen::Index vocab_size() const { return token_table.rows(); }
};

class Rng;

// token_table and proj ~ Normal(0, 0.02); segment_table and proj_bias zero.
ToyEncoderParams init_encoder_params(std::size_t vocab_size, std::size_t dim,
                                     std::uint32_t window, Rng& rng);

// Deterministic forward pass. Throws if a token id is outside the table.
AnswerEncoding encode(const AnswerCandidate& candidate,
                      const ToyEncoderParams& params);

// Parameter gradients produced by the encoder backward pass.
struct EncoderGradients {
  Mat token_table;
  Mat segment_table;
  Mat proj;
  Vec proj_bias;
};

EncoderGradients zero_encoder_gradients(const ToyEncoderParams& params);

// Accumulates into `out` the gradients of sum_j grad_vectors.col(j) . s_j
// with respect to the encoder parameters, for the given candidate.
void encode_backward(const AnswerCandidate& candidate,
                     const ToyEncoderParams& params,
                     const AnswerEncoding& encoding, const Mat& grad_vectors,
                     EncoderGradients& out);

// Reads a JSON-lines file of precomputed encodings: objects with integer
// `id` and `vectors` (array of equal-length number arrays). The whole span
// is treated as answer tokens. Throws on duplicate ids or mixed dimensions.
std::map<std::uint32_t, AnswerEncoding> import_encodings(
    const std::filesystem::path& path);

}  // namespace sparta
