#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sparta/scoring.hpp"

namespace sparta {

// One evaluation query with its single relevant candidate.
struct EvalRecord {
  std::int64_t qid = 0;
  std::string question;
  std::uint32_t answer_id = 0;
};

// JSON-lines: objects with integer `qid`, string `question`, integer
// `answer_id`.
std::vector<EvalRecord> read_eval_file(const std::filesystem::path& path);

// Mean over queries of 1/rank of the gold id (1-based); a query whose gold
// id is absent from its ranking contributes 0. Throws on an empty query set.
double mrr(std::span<const std::vector<std::uint32_t>> rankings,
           std::span<const std::uint32_t> gold);

// Fraction of queries whose gold id appears in the first k entries.
double recall_at_k(std::span<const std::vector<std::uint32_t>> rankings,
                   std::span<const std::uint32_t> gold, std::size_t k);

// Maps a raw question to a ranked answer list; any ranker (index lookup,
// brute force, baseline) fits behind this.
using RankerFn =
    std::function<std::vector<ScoredAnswer>(const std::string& question)>;

struct EvalReport {
  double mrr = 0.0;
  std::map<std::size_t, double> recall;          // k -> recall@k
  std::vector<std::pair<std::int64_t, std::size_t>> per_query;  // qid, rank (0 = missed)

  std::string to_json() const;
};

// Runs every record through the ranker and aggregates. Throws when a record
// references an answer id outside 0..num_answers-1, naming the qid.
EvalReport evaluate(const RankerFn& ranker, std::size_t num_answers,
                    std::span<const EvalRecord> records,
                    std::span<const std::size_t> k_list);

}  // namespace sparta
