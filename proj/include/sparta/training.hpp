#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sparta/corpus.hpp"
#include "sparta/encoder.hpp"
#include "sparta/eval.hpp"
#include "sparta/model.hpp"
#include "sparta/rng.hpp"

namespace sparta {

// One ranking example: a query, its relevant candidate, and sampled
// irrelevant candidates (ids index the dense corpus).
struct TrainingExample {
  Query query;
  std::uint32_t positive_id = 0;
  std::vector<std::uint32_t> negative_ids;
};

// Half the negatives are uniform over the corpus (positive excluded); the
// other half come from candidates within +/-nearby_window ids of the
// positive inside the same document, padded with extra uniform draws when
// the neighborhood is too small. No duplicates. Deterministic given the rng
// state. `count` must be even and smaller than the corpus.
std::vector<std::uint32_t> sample_negatives(
    const AnswerCandidate& positive, std::span<const AnswerCandidate> corpus,
    std::size_t count, std::uint32_t nearby_window, Rng& rng);

struct LossOptions {
  // On (default): the positive joins the softmax partition, giving the
  // standard cross entropy -log p(positive). Off: the partition holds the
  // negatives only.
  bool include_positive_in_partition = true;
  bool answer_only_max = false;
};

// Gradients for every trainable parameter group. Dense; only rows touched
// by the example are nonzero.
struct ModelGradients {
  double bias = 0.0;
  Mat query_embeddings;
  EncoderGradients encoder;
};

ModelGradients zero_gradients(const Model& model);

// Minimization loss of one example under the chosen partition. Log-sum-exp
// is max-shifted.
double rank_loss(const TrainingExample& example,
                 std::span<const AnswerCandidate> candidates,
                 const Model& model, const LossOptions& options);

// Loss plus exact analytic gradients. Max-pooling routes gradient to the
// first argmax position only; ReLU passes gradient iff y + b > 0.
struct LossAndGradients {
  double loss = 0.0;
  ModelGradients gradients;
};
LossAndGradients rank_loss_with_gradients(
    const TrainingExample& example,
    std::span<const AnswerCandidate> candidates, const Model& model,
    const LossOptions& options);

struct AdamConfig {
  double lr = 3e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::uint64_t step = 0;
  ModelGradients first_moment;
  ModelGradients second_moment;
};

AdamState init_adam_state(const Model& model);

// One Adam update over bias, encoder parameters, and (when the table is
// trainable) the query embeddings. Throws on shape mismatch.
void adam_step(Model& model, const ModelGradients& gradients, AdamState& state,
               const AdamConfig& config);

struct TrainConfig {
  double lr = 3e-5;
  std::size_t epochs = 20;
  std::size_t negatives = 8;
  std::uint32_t nearby_window = 3;
  bool literal_loss = false;
  bool answer_only_max = false;
  std::uint64_t seed = 42;
};

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double val_mrr = 0.0;
};

struct TrainResult {
  Model model;  // snapshot with the best validation MRR
  std::vector<EpochStats> curve;
  std::size_t best_epoch = 0;
};

// Epochs of shuffled (query, positive) pairs with per-example updates;
// negatives are resampled each epoch. Validation MRR (brute-force ranking
// over the whole corpus) is computed per epoch and the best snapshot is
// kept. Deterministic given the seed. Falls back to validating on the
// training pairs when `validation` is empty.
TrainResult train(std::span<const AnswerCandidate> candidates,
                  std::span<const EvalRecord> training_pairs,
                  std::span<const EvalRecord> validation, Model model,
                  const TrainConfig& config);

}  // namespace sparta
