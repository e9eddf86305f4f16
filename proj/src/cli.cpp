#include "sparta/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sparta/bm25.hpp"
#include "sparta/corpus.hpp"
#include "sparta/eval.hpp"
#include "sparta/index.hpp"
#include "sparta/model.hpp"
#include "sparta/training.hpp"

namespace sparta::cli {

namespace {

struct Options {
  std::string corpus;
  std::string queries;
  std::string model;
  std::string index;
  std::string out;
  std::size_t top_k = 2000;
  std::size_t k = 10;
  std::size_t dim = 64;
  double lr = 3e-5;
  std::size_t epochs = 20;
  std::size_t negatives = 8;
  std::uint32_t window = 2;
  std::uint64_t seed = 42;
  bool freeze_query_embeddings = true;
  bool literal_loss = false;
  bool answer_only_max = false;
  std::string query_text;
  std::uint32_t answer_id = 0;
};

struct LoadedCorpus {
  std::vector<RawCandidate> raw;
  std::vector<AnswerCandidate> candidates;
};

LoadedCorpus load_corpus(const std::string& path, const Vocabulary& vocab) {
  LoadedCorpus c;
  c.raw = read_corpus_file(path);
  c.candidates = build_candidates(c.raw, vocab, kDefaultMaxCandidateLen);
  return c;
}

std::string sniff_magic(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open: " + path);
  }
  char magic[4] = {};
  in.read(magic, sizeof(magic));
  return std::string(magic, in.gcount());
}

std::vector<AnswerEncoding> encode_all(
    const std::vector<AnswerCandidate>& candidates, const Model& model) {
  std::vector<AnswerEncoding> encodings;
  encodings.reserve(candidates.size());
  for (const AnswerCandidate& c : candidates) {
    encodings.push_back(encode(c, model.encoder));
  }
  return encodings;
}

std::string curve_path(const std::string& model_path) {
  return model_path + ".curve.json";
}

int cmd_train(const Options& opt) {
  const std::vector<RawCandidate> raw = read_corpus_file(opt.corpus);
  if (raw.empty()) {
    throw std::runtime_error("empty corpus: " + opt.corpus);
  }
  const std::vector<std::string> texts = candidate_texts(raw);
  Vocabulary vocab = build_vocabulary(texts, 1);
  const std::vector<AnswerCandidate> candidates =
      build_candidates(raw, vocab, kDefaultMaxCandidateLen);
  const std::vector<EvalRecord> pairs = read_eval_file(opt.queries);
  if (pairs.empty()) {
    throw std::runtime_error("no training queries in " + opt.queries);
  }

  Model model = init_model(std::move(vocab), opt.dim, opt.window, opt.seed,
                           !opt.freeze_query_embeddings);

  // Deterministic 90/10 train/validation split of the query file.
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng split_rng(opt.seed);
  split_rng.shuffle(order);
  const std::size_t val_size = pairs.size() >= 10 ? pairs.size() / 10 : 0;
  std::vector<EvalRecord> train_pairs;
  std::vector<EvalRecord> val_pairs;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < pairs.size() - val_size ? train_pairs : val_pairs)
        .push_back(pairs[order[i]]);
  }

  TrainConfig config;
  config.lr = opt.lr;
  config.epochs = opt.epochs;
  config.negatives = opt.negatives;
  config.literal_loss = opt.literal_loss;
  config.answer_only_max = opt.answer_only_max;
  config.seed = opt.seed;

  const TrainResult result =
      train(candidates, train_pairs, val_pairs, std::move(model), config);
  save_model(result.model, opt.out);

  nlohmann::ordered_json curve;
  curve["best_epoch"] = result.best_epoch;
  curve["epochs"] = nlohmann::ordered_json::array();
  for (const EpochStats& s : result.curve) {
    curve["epochs"].push_back({{"epoch", s.epoch},
                               {"mean_loss", s.mean_loss},
                               {"val_mrr", s.val_mrr}});
  }
  std::ofstream curve_out(curve_path(opt.out), std::ios::trunc);
  curve_out << curve.dump(2) << "\n";
  if (!curve_out) {
    throw std::runtime_error("write failed: " + curve_path(opt.out));
  }

  std::cout << "model written to " << opt.out << " ("
            << result.curve.size() << " epochs, best epoch "
            << result.best_epoch << ")\n";
  return 0;
}

int cmd_index(const Options& opt) {
  const Model model = load_model(opt.model);
  const LoadedCorpus corpus = load_corpus(opt.corpus, model.vocab);
  const std::vector<AnswerEncoding> encodings =
      encode_all(corpus.candidates, model);
  const InvertedIndex index =
      build_index(encodings, model.query_table, model.vocab.fingerprint(),
                  opt.top_k, opt.answer_only_max);
  save_index(index, opt.out);
  std::size_t postings = 0;
  for (const auto& [term, list] : index.postings) postings += list.size();
  std::cout << "index written to " << opt.out << " (" << index.num_answers
            << " answers, " << index.postings.size() << " terms, " << postings
            << " postings)\n";
  return 0;
}

int cmd_search(const Options& opt) {
  const Model model = load_model(opt.model);
  const InvertedIndex index = load_index(opt.index);
  std::vector<RawCandidate> raw;
  if (!opt.corpus.empty()) {
    raw = read_corpus_file(opt.corpus);
  }
  const Query query = make_query(opt.query_text, model.vocab);
  const std::vector<ScoredAnswer> hits =
      query_index(index, query, model.vocab.fingerprint(), opt.k);
  for (const ScoredAnswer& hit : hits) {
    std::printf("%u\t%.6f", hit.answer_id, hit.score);
    if (hit.answer_id < raw.size()) {
      std::printf("\t%s", raw[hit.answer_id].answer.c_str());
    }
    std::printf("\n");
  }
  return 0;
}

RankerFn make_eval_ranker(const Options& opt, std::size_t& num_answers_out) {
  const std::string magic = sniff_magic(opt.index);
  if (magic == "SPIX") {
    if (opt.model.empty()) {
      throw std::runtime_error("--model is required to evaluate this index");
    }
    auto model = std::make_shared<Model>(load_model(opt.model));
    auto index = std::make_shared<InvertedIndex>(load_index(opt.index));
    num_answers_out = index->num_answers;
    const std::size_t depth = index->num_answers;
    return [model, index, depth](const std::string& question) {
      const Query q = make_query(question, model->vocab);
      return query_index(*index, q, model->vocab.fingerprint(),
                         std::max<std::size_t>(depth, 1));
    };
  }
  if (magic == "SPBM") {
    auto loaded = std::make_shared<std::pair<Bm25Index, Vocabulary>>(
        load_bm25(opt.index));
    num_answers_out = loaded->first.num_docs;
    const std::size_t depth = loaded->first.num_docs;
    return [loaded, depth](const std::string& question) {
      const Query q = make_query(question, loaded->second);
      return bm25_rank(loaded->first, q, loaded->second.fingerprint(),
                       std::max<std::size_t>(depth, 1));
    };
  }
  throw std::runtime_error(opt.index + ": bad magic at offset 0");
}

int cmd_eval(const Options& opt) {
  std::size_t num_answers = 0;
  const RankerFn ranker = make_eval_ranker(opt, num_answers);
  const std::vector<EvalRecord> records = read_eval_file(opt.queries);
  const std::vector<std::size_t> k_list = {1, 5, 10};
  const EvalReport report = evaluate(ranker, num_answers, records, k_list);
  const std::string json = report.to_json();
  if (!opt.out.empty()) {
    std::ofstream out(opt.out, std::ios::trunc);
    out << json << "\n";
    if (!out) {
      throw std::runtime_error("write failed: " + opt.out);
    }
  }
  std::cout << json << "\n";
  return 0;
}

int cmd_inspect(const Options& opt) {
  const Model model = load_model(opt.model);
  const InvertedIndex index = load_index(opt.index);
  if (index.vocab_fingerprint != model.vocab.fingerprint()) {
    throw std::runtime_error("index/vocabulary mismatch");
  }
  const auto terms = top_k_terms(index, model.vocab, opt.answer_id, opt.k);
  for (const auto& [term, score] : terms) {
    std::printf("%s\t%.6f\n", term.c_str(), static_cast<double>(score));
  }
  return 0;
}

int cmd_bm25_index(const Options& opt) {
  const std::vector<RawCandidate> raw = read_corpus_file(opt.corpus);
  if (raw.empty()) {
    throw std::runtime_error("empty corpus: " + opt.corpus);
  }
  const std::vector<std::string> texts = candidate_texts(raw);
  const Vocabulary vocab = build_vocabulary(texts, 1);
  const std::vector<AnswerCandidate> candidates =
      build_candidates(raw, vocab, kDefaultMaxCandidateLen);
  const Bm25Index index = bm25_build(candidates, vocab.fingerprint());
  save_bm25(index, vocab, opt.out);
  std::cout << "bm25 index written to " << opt.out << " (" << index.num_docs
            << " answers, " << index.postings.size() << " terms)\n";
  return 0;
}

int cmd_bm25_search(const Options& opt) {
  const auto [index, vocab] = load_bm25(opt.index);
  std::vector<RawCandidate> raw;
  if (!opt.corpus.empty()) {
    raw = read_corpus_file(opt.corpus);
  }
  const Query query = make_query(opt.query_text, vocab);
  const std::vector<ScoredAnswer> hits =
      bm25_rank(index, query, vocab.fingerprint(), opt.k);
  for (const ScoredAnswer& hit : hits) {
    std::printf("%u\t%.6f", hit.answer_id, hit.score);
    if (hit.answer_id < raw.size()) {
      std::printf("\t%s", raw[hit.answer_id].answer.c_str());
    }
    std::printf("\n");
  }
  return 0;
}

}  // namespace

int run(std::vector<std::string> args) {
  CLI::App app{"sparta: learned sparse retrieval with a BM25 baseline"};
  app.require_subcommand(1);

  Options opt;

  const auto add_common = [&opt](CLI::App* cmd) {
    cmd->add_option("--seed", opt.seed, "random seed");
  };

  CLI::App* train_cmd =
      app.add_subcommand("train", "train a model from corpus + query pairs");
  train_cmd->add_option("--corpus", opt.corpus, "corpus JSONL")->required();
  train_cmd->add_option("--queries", opt.queries, "training queries JSONL")
      ->required();
  train_cmd->add_option("--out", opt.out, "output model path")->required();
  train_cmd->add_option("--d", opt.dim, "embedding dimension")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--window", opt.window, "encoder context window");
  train_cmd->add_option("--lr", opt.lr, "Adam learning rate")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--epochs", opt.epochs, "training epochs");
  train_cmd->add_option("--negatives", opt.negatives,
                        "negative samples per example (even)");
  train_cmd->add_option("--freeze-query-embeddings",
                        opt.freeze_query_embeddings,
                        "keep query embeddings fixed (default true)");
  train_cmd->add_option("--literal-loss", opt.literal_loss,
                        "exclude the positive from the softmax partition");
  train_cmd->add_option("--answer-only-max", opt.answer_only_max,
                        "max-pool over answer tokens only");
  add_common(train_cmd);

  CLI::App* index_cmd =
      app.add_subcommand("index", "precompute sparse vectors into an index");
  index_cmd->add_option("--corpus", opt.corpus, "corpus JSONL")->required();
  index_cmd->add_option("--model", opt.model, "model file")->required();
  index_cmd->add_option("--out", opt.out, "output index path")->required();
  index_cmd->add_option("--top-k", opt.top_k,
                        "terms kept per answer (0 = no truncation)");
  index_cmd->add_option("--answer-only-max", opt.answer_only_max,
                        "max-pool over answer tokens only");
  add_common(index_cmd);

  CLI::App* search_cmd = app.add_subcommand("search", "query an index");
  search_cmd->add_option("--index", opt.index, "index file")->required();
  search_cmd->add_option("--model", opt.model, "model file")->required();
  search_cmd->add_option("--corpus", opt.corpus,
                         "corpus JSONL (to print answer text)");
  search_cmd->add_option("--k", opt.k, "results to return")
      ->check(CLI::PositiveNumber);
  search_cmd->add_option("query", opt.query_text, "query text")->required();

  CLI::App* eval_cmd =
      app.add_subcommand("eval", "run MRR / recall over an eval file");
  eval_cmd->add_option("--index", opt.index, "index file (sparta or bm25)")
      ->required();
  eval_cmd->add_option("--model", opt.model, "model file (for sparta indexes)");
  eval_cmd->add_option("--queries", opt.queries, "eval queries JSONL")
      ->required();
  eval_cmd->add_option("--out", opt.out, "also write the JSON report here");

  CLI::App* inspect_cmd =
      app.add_subcommand("inspect", "show the top terms of an answer");
  inspect_cmd->add_option("--index", opt.index, "index file")->required();
  inspect_cmd->add_option("--model", opt.model, "model file")->required();
  inspect_cmd->add_option("--k", opt.k, "terms to show")
      ->check(CLI::PositiveNumber);
  inspect_cmd->add_option("answer_id", opt.answer_id, "answer id")->required();

  CLI::App* bm25_index_cmd =
      app.add_subcommand("bm25-index", "build the lexical baseline index");
  bm25_index_cmd->add_option("--corpus", opt.corpus, "corpus JSONL")
      ->required();
  bm25_index_cmd->add_option("--out", opt.out, "output index path")
      ->required();

  CLI::App* bm25_search_cmd =
      app.add_subcommand("bm25-search", "query the baseline index");
  bm25_search_cmd->add_option("--index", opt.index, "bm25 index file")
      ->required();
  bm25_search_cmd->add_option("--corpus", opt.corpus,
                              "corpus JSONL (to print answer text)");
  bm25_search_cmd->add_option("--k", opt.k, "results to return")
      ->check(CLI::PositiveNumber);
  bm25_search_cmd->add_option("query", opt.query_text, "query text")
      ->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(opt);
    if (index_cmd->parsed()) return cmd_index(opt);
    if (search_cmd->parsed()) return cmd_search(opt);
    if (eval_cmd->parsed()) return cmd_eval(opt);
    if (inspect_cmd->parsed()) return cmd_inspect(opt);
    if (bm25_index_cmd->parsed()) return cmd_bm25_index(opt);
    if (bm25_search_cmd->parsed()) return cmd_bm25_search(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace sparta::cli
