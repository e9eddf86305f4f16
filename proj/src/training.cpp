#include "sparta/training.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace sparta {

std::vector<std::uint32_t> sample_negatives(
    const AnswerCandidate& positive, std::span<const AnswerCandidate> corpus,
    std::size_t count, std::uint32_t nearby_window, Rng& rng) {
  if (count == 0 || count % 2 != 0) {
    throw std::invalid_argument("negative count must be a positive even number");
  }
  if (corpus.size() <= count) {
    throw std::invalid_argument("corpus too small");
  }

  std::vector<std::uint32_t> nearby_pool;
  const std::int64_t pid = positive.id;
  const std::int64_t w = nearby_window;
  for (std::int64_t id = pid - w; id <= pid + w; ++id) {
    if (id < 0 || id >= static_cast<std::int64_t>(corpus.size()) || id == pid) {
      continue;
    }
    if (corpus[static_cast<std::size_t>(id)].doc_id == positive.doc_id) {
      nearby_pool.push_back(static_cast<std::uint32_t>(id));
    }
  }
  rng.shuffle(nearby_pool);

  std::vector<std::uint32_t> chosen;
  chosen.reserve(count);
  std::unordered_set<std::uint32_t> used{positive.id};
  const std::size_t nearby_target = count / 2;
  for (std::size_t i = 0; i < nearby_pool.size() && chosen.size() < nearby_target; ++i) {
    chosen.push_back(nearby_pool[i]);
    used.insert(nearby_pool[i]);
  }
  // Uniform draws fill the random half and pad any nearby shortfall.
  while (chosen.size() < count) {
    const auto id = static_cast<std::uint32_t>(rng.next_below(corpus.size()));
    if (used.insert(id).second) {
      chosen.push_back(id);
    }
  }
  return chosen;
}

ModelGradients zero_gradients(const Model& model) {
  ModelGradients g;
  g.bias = 0.0;
  g.query_embeddings = Mat::Zero(model.query_table.embeddings.rows(),
                                 model.query_table.embeddings.cols());
  g.encoder = zero_encoder_gradients(model.encoder);
  return g;
}

namespace {

void validate_example(const TrainingExample& example,
                      std::span<const AnswerCandidate> candidates) {
  if (example.negative_ids.empty()) {
    throw std::invalid_argument("example has no negatives");
  }
  std::unordered_set<std::uint32_t> seen;
  for (const std::uint32_t id : example.negative_ids) {
    if (id == example.positive_id) {
      throw std::invalid_argument("positive appears among negatives");
    }
    if (!seen.insert(id).second) {
      throw std::invalid_argument("duplicate negative id");
    }
    if (id >= candidates.size()) {
      throw std::out_of_range("negative id out of range");
    }
  }
  if (example.positive_id >= candidates.size()) {
    throw std::out_of_range("positive id out of range");
  }
}

// Forward state for one candidate, kept for the backward pass.
struct CandidateForward {
  AnswerEncoding encoding;
  std::vector<TermMatchResult> matches;  // one per query token
  double score = 0.0;
};

CandidateForward forward_candidate(const Query& query,
                                   const AnswerCandidate& candidate,
                                   const Model& model,
                                   const LossOptions& options) {
  CandidateForward f;
  f.encoding = encode(candidate, model.encoder);
  f.matches.reserve(query.token_ids.size());
  for (const TermId t : query.token_ids) {
    const Vec e =
        model.query_table.embeddings.row(static_cast<Eigen::Index>(t)).transpose();
    const TermMatchResult m =
        term_match(e, f.encoding, options.answer_only_max);
    f.score += std::log1p(sparse_feature(m.y, model.query_table.bias));
    f.matches.push_back(m);
  }
  return f;
}

// d(loss)/d(score) per candidate, positive first.
std::vector<double> score_gradients(std::span<const double> scores,
                                    bool include_positive) {
  const std::size_t n = scores.size();
  std::vector<double> g(n, 0.0);
  if (include_positive) {
    // loss = logsumexp(all) - score[0]; gradient is softmax - onehot.
    double max_score = scores[0];
    for (const double s : scores) max_score = std::max(max_score, s);
    double z = 0.0;
    for (const double s : scores) z += std::exp(s - max_score);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = std::exp(scores[i] - max_score) / z;
    }
    g[0] -= 1.0;
  } else {
    // loss = logsumexp(negatives) - score[0].
    g[0] = -1.0;
    double max_neg = scores[1];
    for (std::size_t i = 1; i < n; ++i) max_neg = std::max(max_neg, scores[i]);
    double z = 0.0;
    for (std::size_t i = 1; i < n; ++i) z += std::exp(scores[i] - max_neg);
    for (std::size_t i = 1; i < n; ++i) {
      g[i] = std::exp(scores[i] - max_neg) / z;
    }
  }
  return g;
}

double loss_from_scores(std::span<const double> scores, bool include_positive) {
  const std::size_t first = include_positive ? 0 : 1;
  double max_score = scores[first];
  for (std::size_t i = first; i < scores.size(); ++i) {
    max_score = std::max(max_score, scores[i]);
  }
  double z = 0.0;
  for (std::size_t i = first; i < scores.size(); ++i) {
    z += std::exp(scores[i] - max_score);
  }
  return max_score + std::log(z) - scores[0];
}

}  // namespace

double rank_loss(const TrainingExample& example,
                 std::span<const AnswerCandidate> candidates,
                 const Model& model, const LossOptions& options) {
  validate_example(example, candidates);
  std::vector<double> scores;
  scores.reserve(1 + example.negative_ids.size());
  scores.push_back(
      forward_candidate(example.query, candidates[example.positive_id], model, options)
          .score);
  for (const std::uint32_t id : example.negative_ids) {
    scores.push_back(
        forward_candidate(example.query, candidates[id], model, options).score);
  }
  return loss_from_scores(scores, options.include_positive_in_partition);
}

LossAndGradients rank_loss_with_gradients(
    const TrainingExample& example,
    std::span<const AnswerCandidate> candidates, const Model& model,
    const LossOptions& options) {
  validate_example(example, candidates);

  std::vector<const AnswerCandidate*> cands;
  cands.push_back(&candidates[example.positive_id]);
  for (const std::uint32_t id : example.negative_ids) {
    cands.push_back(&candidates[id]);
  }

  std::vector<CandidateForward> forward;
  forward.reserve(cands.size());
  std::vector<double> scores;
  scores.reserve(cands.size());
  for (const AnswerCandidate* c : cands) {
    forward.push_back(forward_candidate(example.query, *c, model, options));
    scores.push_back(forward.back().score);
  }

  LossAndGradients out;
  out.loss = loss_from_scores(scores, options.include_positive_in_partition);
  out.gradients = zero_gradients(model);

  const std::vector<double> gscore =
      score_gradients(scores, options.include_positive_in_partition);

  for (std::size_t c = 0; c < cands.size(); ++c) {
    if (gscore[c] == 0.0) continue;
    const CandidateForward& f = forward[c];
    Mat grad_vectors = Mat::Zero(f.encoding.dim(), f.encoding.tokens());
    for (std::size_t i = 0; i < example.query.token_ids.size(); ++i) {
      const TermMatchResult& m = f.matches[i];
      const double pre = m.y + model.query_table.bias;
      if (pre <= 0.0) continue;  // ReLU closed; subgradient 0 at the kink
      const double coeff = gscore[c] / (1.0 + pre);
      out.gradients.bias += coeff;
      const auto row = static_cast<Eigen::Index>(example.query.token_ids[i]);
      grad_vectors.col(m.argmax_position) +=
          coeff * model.query_table.embeddings.row(row).transpose();
      out.gradients.query_embeddings.row(row) +=
          coeff * f.encoding.vectors.col(m.argmax_position).transpose();
    }
    encode_backward(*cands[c], model.encoder, f.encoding, grad_vectors,
                    out.gradients.encoder);
  }
  return out;
}

AdamState init_adam_state(const Model& model) {
  AdamState s;
  s.step = 0;
  s.first_moment = zero_gradients(model);
  s.second_moment = zero_gradients(model);
  return s;
}

namespace {

template <typename M>
void adam_update(M& param, const M& grad, M& m, M& v, const AdamConfig& c,
                 double bias_corr1, double bias_corr2) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols()) {
    throw std::invalid_argument("gradient shape mismatch");
  }
  m = c.beta1 * m + (1.0 - c.beta1) * grad;
  v = c.beta2 * v + (1.0 - c.beta2) * grad.cwiseProduct(grad);
  const M m_hat = m / bias_corr1;
  const M v_hat = v / bias_corr2;
  param.array() -=
      c.lr * m_hat.array() / (v_hat.array().sqrt() + c.epsilon);
}

void adam_update_scalar(double& param, double grad, double& m, double& v,
                        const AdamConfig& c, double bias_corr1,
                        double bias_corr2) {
  m = c.beta1 * m + (1.0 - c.beta1) * grad;
  v = c.beta2 * v + (1.0 - c.beta2) * grad * grad;
  param -= c.lr * (m / bias_corr1) / (std::sqrt(v / bias_corr2) + c.epsilon);
}

}  // namespace

void adam_step(Model& model, const ModelGradients& gradients, AdamState& state,
               const AdamConfig& config) {
  state.step += 1;
  const double bias_corr1 =
      1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bias_corr2 =
      1.0 - std::pow(config.beta2, static_cast<double>(state.step));

  adam_update_scalar(model.query_table.bias, gradients.bias,
                     state.first_moment.bias, state.second_moment.bias, config,
                     bias_corr1, bias_corr2);
  adam_update(model.encoder.token_table, gradients.encoder.token_table,
              state.first_moment.encoder.token_table,
              state.second_moment.encoder.token_table, config, bias_corr1,
              bias_corr2);
  adam_update(model.encoder.segment_table, gradients.encoder.segment_table,
              state.first_moment.encoder.segment_table,
              state.second_moment.encoder.segment_table, config, bias_corr1,
              bias_corr2);
  adam_update(model.encoder.proj, gradients.encoder.proj,
              state.first_moment.encoder.proj,
              state.second_moment.encoder.proj, config, bias_corr1,
              bias_corr2);
  adam_update(model.encoder.proj_bias, gradients.encoder.proj_bias,
              state.first_moment.encoder.proj_bias,
              state.second_moment.encoder.proj_bias, config, bias_corr1,
              bias_corr2);
  if (model.query_table.trainable_embeddings) {
    adam_update(model.query_table.embeddings, gradients.query_embeddings,
                state.first_moment.query_embeddings,
                state.second_moment.query_embeddings, config, bias_corr1,
                bias_corr2);
  }
}

namespace {

double validation_mrr(std::span<const AnswerCandidate> candidates,
                      std::span<const EvalRecord> records, const Model& model,
                      bool answer_only_max) {
  std::vector<AnswerEncoding> encodings;
  encodings.reserve(candidates.size());
  for (const AnswerCandidate& c : candidates) {
    encodings.push_back(encode(c, model.encoder));
  }
  std::vector<std::vector<std::uint32_t>> rankings;
  std::vector<std::uint32_t> gold;
  for (const EvalRecord& r : records) {
    const Query q = make_query(r.question, model.vocab);
    std::vector<std::uint32_t> ids;
    for (const ScoredAnswer& hit : rank_brute_force(
             q, encodings, model.query_table, candidates.size(), answer_only_max)) {
      ids.push_back(hit.answer_id);
    }
    rankings.push_back(std::move(ids));
    gold.push_back(r.answer_id);
  }
  return mrr(rankings, gold);
}

}  // namespace

TrainResult train(std::span<const AnswerCandidate> candidates,
                  std::span<const EvalRecord> training_pairs,
                  std::span<const EvalRecord> validation, Model model,
                  const TrainConfig& config) {
  if (training_pairs.empty()) {
    throw std::invalid_argument("empty training set");
  }
  for (const EvalRecord& r : training_pairs) {
    if (r.answer_id >= candidates.size()) {
      throw std::runtime_error("qid " + std::to_string(r.qid) +
                               ": answer_id " + std::to_string(r.answer_id) +
                               " not in corpus");
    }
  }
  const std::span<const EvalRecord> val =
      validation.empty() ? training_pairs : validation;

  LossOptions loss_options;
  loss_options.include_positive_in_partition = !config.literal_loss;
  loss_options.answer_only_max = config.answer_only_max;

  AdamConfig adam_config;
  adam_config.lr = config.lr;

  Rng rng(config.seed);
  AdamState state = init_adam_state(model);

  TrainResult result;
  result.model = model;
  result.best_epoch = 0;
  double best_mrr = -1.0;

  std::vector<std::size_t> order(training_pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (const std::size_t idx : order) {
      const EvalRecord& pair = training_pairs[idx];
      TrainingExample example;
      example.query = make_query(pair.question, model.vocab);
      example.positive_id = pair.answer_id;
      example.negative_ids =
          sample_negatives(candidates[pair.answer_id], candidates,
                           config.negatives, config.nearby_window, rng);
      LossAndGradients lg =
          rank_loss_with_gradients(example, candidates, model, loss_options);
      loss_sum += lg.loss;
      adam_step(model, lg.gradients, state, adam_config);
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_loss = loss_sum / static_cast<double>(training_pairs.size());
    stats.val_mrr =
        validation_mrr(candidates, val, model, config.answer_only_max);
    result.curve.push_back(stats);
    if (stats.val_mrr > best_mrr) {
      best_mrr = stats.val_mrr;
      result.model = model;
      result.best_epoch = epoch;
    }
  }
  return result;
}

}  // namespace sparta
