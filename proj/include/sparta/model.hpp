#pragma once

#include <cstdint>
#include <filesystem>

#include "sparta/encoder.hpp"
#include "sparta/scoring.hpp"
#include "sparta/vocabulary.hpp"

namespace sparta {

// Everything needed to index and search: the vocabulary, the per-term query
// embeddings with their bias, and the answer encoder. Self-contained so
// search never re-reads the corpus.
struct Model {
  Vocabulary vocab;
  QueryTermTable query_table;
  ToyEncoderParams encoder;

  Eigen::Index dim() const { return encoder.dim(); }
};

// Fresh model: encoder from init_encoder_params, query embeddings a copy of
// the token table (frozen unless trainable is set), bias zero.
Model init_model(Vocabulary vocab, std::size_t dim, std::uint32_t window,
                 std::uint64_t seed, bool trainable_embeddings = false);

// Model file, little-endian:
//   magic "SPMD" | version u32 (=1) |
//   term_count u32 | terms (u32 length + UTF-8 bytes each) |
//   d u32 | bias f64 | query embeddings row-major f32 (V*d) |
//   token_table f32 (V*d) | segment_table f32 (2*d) | proj f32 (d*d) |
//   proj_bias f32 (d) | window u32
// Parameters are stored in 32-bit floats; loading yields exactly the stored
// values, so save(load(file)) reproduces the file byte for byte.
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace sparta
