#include "sparta/eval.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace sparta {

std::vector<EvalRecord> read_eval_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open: " + path.string());
  }
  std::vector<EvalRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": " + e.what());
    }
    EvalRecord r;
    r.qid = j.at("qid").get<std::int64_t>();
    r.question = j.at("question").get<std::string>();
    r.answer_id = j.at("answer_id").get<std::uint32_t>();
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

// 1-based rank of gold within the ranking, 0 when absent.
std::size_t rank_of(const std::vector<std::uint32_t>& ranking,
                    std::uint32_t gold) {
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (ranking[i] == gold) return i + 1;
  }
  return 0;
}

}  // namespace

double mrr(std::span<const std::vector<std::uint32_t>> rankings,
           std::span<const std::uint32_t> gold) {
  if (rankings.empty()) {
    throw std::invalid_argument("empty query set");
  }
  if (rankings.size() != gold.size()) {
    throw std::invalid_argument("rankings/gold size mismatch");
  }
  double sum = 0.0;
  for (std::size_t q = 0; q < rankings.size(); ++q) {
    const std::size_t rank = rank_of(rankings[q], gold[q]);
    if (rank > 0) sum += 1.0 / static_cast<double>(rank);
  }
  return sum / static_cast<double>(rankings.size());
}

double recall_at_k(std::span<const std::vector<std::uint32_t>> rankings,
                   std::span<const std::uint32_t> gold, std::size_t k) {
  if (rankings.empty()) {
    throw std::invalid_argument("empty query set");
  }
  if (rankings.size() != gold.size()) {
    throw std::invalid_argument("rankings/gold size mismatch");
  }
  if (k < 1) {
    throw std::invalid_argument("k must be >= 1");
  }
  std::size_t found = 0;
  for (std::size_t q = 0; q < rankings.size(); ++q) {
    const std::size_t rank = rank_of(rankings[q], gold[q]);
    if (rank >= 1 && rank <= k) ++found;
  }
  return static_cast<double>(found) / static_cast<double>(rankings.size());
}

EvalReport evaluate(const RankerFn& ranker, std::size_t num_answers,
                    std::span<const EvalRecord> records,
                    std::span<const std::size_t> k_list) {
  if (records.empty()) {
    throw std::invalid_argument("empty query set");
  }
  std::vector<std::vector<std::uint32_t>> rankings;
  std::vector<std::uint32_t> gold;
  rankings.reserve(records.size());
  gold.reserve(records.size());
  EvalReport report;
  for (const EvalRecord& r : records) {
    if (r.answer_id >= num_answers) {
      throw std::runtime_error("qid " + std::to_string(r.qid) +
                               ": answer_id " + std::to_string(r.answer_id) +
                               " not in corpus");
    }
    std::vector<std::uint32_t> ids;
    for (const ScoredAnswer& hit : ranker(r.question)) {
      ids.push_back(hit.answer_id);
    }
    report.per_query.emplace_back(r.qid, rank_of(ids, r.answer_id));
    rankings.push_back(std::move(ids));
    gold.push_back(r.answer_id);
  }
  report.mrr = mrr(rankings, gold);
  for (const std::size_t k : k_list) {
    report.recall[k] = recall_at_k(rankings, gold, k);
  }
  return report;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["mrr"] = mrr;
  nlohmann::ordered_json rec = nlohmann::ordered_json::object();
  for (const auto& [k, value] : recall) {
    rec[std::to_string(k)] = value;
  }
  j["recall"] = rec;
  nlohmann::ordered_json per = nlohmann::ordered_json::array();
  for (const auto& [qid, rank] : per_query) {
    per.push_back({{"qid", qid}, {"rank", rank}});
  }
  j["per_query"] = per;
  return j.dump(2);
}

}  // namespace sparta
