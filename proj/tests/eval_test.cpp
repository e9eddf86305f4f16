#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sparta/eval.hpp"
#include "sparta/index.hpp"
#include "support/synthetic.hpp"

using namespace sparta;

namespace {

std::vector<std::vector<std::uint32_t>> rankings_from(
    std::initializer_list<std::vector<std::uint32_t>> lists) {
  return {lists};
}

}  // namespace

TEST_CASE("mrr over hand-checked ranks") {
  const std::vector<std::uint32_t> gold{0, 0, 0};
  CHECK(mrr(rankings_from({{0, 1}, {0, 2}, {0, 3}}), gold) == doctest::Approx(1.0));
  CHECK(mrr(rankings_from({{1, 0}, {2, 0}, {3, 0}}), gold) == doctest::Approx(0.5));
  // ranks 1, 2, 4
  CHECK(mrr(rankings_from({{0}, {9, 0}, {7, 8, 9, 0}}), gold) ==
        doctest::Approx((1.0 + 0.5 + 0.25) / 3.0));
}

TEST_CASE("a gold id missing from the ranking scores zero") {
  const std::vector<std::uint32_t> gold{5};
  CHECK(mrr(rankings_from({{1, 2, 3}}), gold) == doctest::Approx(0.0));
  CHECK(mrr(rankings_from({{}}), gold) == doctest::Approx(0.0));
}

TEST_CASE("metrics reject an empty query set") {
  const std::vector<std::vector<std::uint32_t>> none;
  const std::vector<std::uint32_t> gold;
  CHECK_THROWS_WITH_AS(mrr(none, gold), "empty query set", std::invalid_argument);
  CHECK_THROWS_WITH_AS(recall_at_k(none, gold, 1), "empty query set",
                       std::invalid_argument);
}

TEST_CASE("recall over hand-checked ranks") {
  const std::vector<std::uint32_t> gold{0, 0, 0};
  // gold at ranks 1, 5, 2
  const auto rankings =
      rankings_from({{0}, {4, 3, 2, 1, 0}, {9, 0}});
  CHECK(recall_at_k(rankings, gold, 2) == doctest::Approx(2.0 / 3.0));
  CHECK(recall_at_k(rankings, gold, 5) == doctest::Approx(1.0));
  CHECK(recall_at_k(rankings, gold, 1) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("recall is non-decreasing in k") {
  Rng rng(99);
  std::vector<std::vector<std::uint32_t>> rankings;
  std::vector<std::uint32_t> gold;
  for (int q = 0; q < 30; ++q) {
    std::vector<std::uint32_t> ids(10);
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::uint32_t>(i);
    rng.shuffle(ids);
    ids.resize(1 + rng.next_below(10));
    rankings.push_back(ids);
    gold.push_back(static_cast<std::uint32_t>(rng.next_below(10)));
  }
  double previous = 0.0;
  for (std::size_t k = 1; k <= 12; ++k) {
    const double r = recall_at_k(rankings, gold, k);
    CHECK(r >= previous);
    previous = r;
  }
}

TEST_CASE("evaluate aggregates a perfect and an empty ranker") {
  std::vector<EvalRecord> records;
  for (int i = 0; i < 5; ++i) {
    records.push_back({i, "q" + std::to_string(i), static_cast<std::uint32_t>(i)});
  }
  const std::vector<std::size_t> ks{1, 5};

  const RankerFn perfect = [](const std::string& question) {
    const auto id = static_cast<std::uint32_t>(question[1] - '0');
    return std::vector<ScoredAnswer>{{id, 1.0}};
  };
  const EvalReport good = evaluate(perfect, 5, records, ks);
  CHECK(good.mrr == doctest::Approx(1.0));
  CHECK(good.recall.at(1) == doctest::Approx(1.0));
  CHECK(good.recall.at(5) == doctest::Approx(1.0));

  const RankerFn empty = [](const std::string&) {
    return std::vector<ScoredAnswer>{};
  };
  const EvalReport bad = evaluate(empty, 5, records, ks);
  CHECK(bad.mrr == doctest::Approx(0.0));
  for (const auto& [qid, rank] : bad.per_query) CHECK(rank == 0);
}

TEST_CASE("evaluate names the offending qid for unknown answers") {
  std::vector<EvalRecord> records{{77, "question", 9}};
  const RankerFn ranker = [](const std::string&) {
    return std::vector<ScoredAnswer>{};
  };
  const std::vector<std::size_t> ks{1};
  CHECK_THROWS_WITH_AS(evaluate(ranker, 5, records, ks),
                       doctest::Contains("qid 77"), std::runtime_error);
}

TEST_CASE("report invariants hold on random rankers") {
  Rng rng(404);
  std::vector<EvalRecord> records;
  for (int i = 0; i < 20; ++i) {
    records.push_back({i, std::to_string(i), static_cast<std::uint32_t>(i % 7)});
  }
  const std::vector<std::size_t> ks{1, 3, 7};
  for (int trial = 0; trial < 10; ++trial) {
    const RankerFn ranker = [&rng](const std::string&) {
      std::vector<ScoredAnswer> hits;
      std::vector<std::uint32_t> ids{0, 1, 2, 3, 4, 5, 6};
      rng.shuffle(ids);
      const std::size_t n = rng.next_below(8);
      for (std::size_t i = 0; i < n; ++i) {
        hits.push_back({ids[i], 1.0 / static_cast<double>(i + 1)});
      }
      return hits;
    };
    const EvalReport report = evaluate(ranker, 7, records, ks);
    CHECK(report.mrr >= report.recall.at(1));
    CHECK(report.mrr <= report.recall.at(7) + 1e-12);
    CHECK(report.recall.at(1) <= report.recall.at(3));
    CHECK(report.recall.at(3) <= report.recall.at(7));
  }
}

TEST_CASE("lookup and brute-force rankers produce identical reports") {
  const Model model = test::random_scored_model(20, 8, 1, 73);
  Rng rng(73);
  const auto candidates = test::random_candidates(40, 20, 2, 6, rng);
  std::vector<AnswerEncoding> encodings;
  for (const auto& c : candidates) encodings.push_back(encode(c, model.encoder));
  const auto fp = model.vocab.fingerprint();
  const InvertedIndex index = build_index(encodings, model.query_table, fp, 0);

  std::vector<EvalRecord> records;
  for (int i = 0; i < 15; ++i) {
    records.push_back({i, "w" + std::to_string(i), static_cast<std::uint32_t>(i)});
  }
  const std::vector<std::size_t> ks{1, 5, 10};

  const RankerFn via_index = [&](const std::string& question) {
    return query_index(index, make_query(question, model.vocab), fp,
                       candidates.size());
  };
  const RankerFn via_brute = [&](const std::string& question) {
    auto hits = rank_brute_force(make_query(question, model.vocab), encodings,
                                 model.query_table, candidates.size());
    // drop zero-score tail: lookup inference never surfaces untouched answers
    while (!hits.empty() && hits.back().score == 0.0) hits.pop_back();
    return hits;
  };

  const EvalReport a = evaluate(via_index, candidates.size(), records, ks);
  const EvalReport b = evaluate(via_brute, candidates.size(), records, ks);
  CHECK(a.mrr == doctest::Approx(b.mrr).epsilon(1e-12));
  for (const std::size_t k : ks) {
    CHECK(a.recall.at(k) == doctest::Approx(b.recall.at(k)).epsilon(1e-12));
  }
  REQUIRE(a.per_query.size() == b.per_query.size());
  for (std::size_t i = 0; i < a.per_query.size(); ++i) {
    CHECK(a.per_query[i] == b.per_query[i]);
  }
}

TEST_CASE("eval files parse and reports serialize") {
  const auto path = std::filesystem::temp_directory_path() / "sparta_eval.jsonl";
  {
    std::ofstream out(path, std::ios::trunc);
    out << R"({"qid": 1, "question": "who", "answer_id": 3})" << "\n";
    out << R"({"qid": 2, "question": "what", "answer_id": 0})" << "\n";
  }
  const auto records = read_eval_file(path);
  REQUIRE(records.size() == 2);
  CHECK(records[0].question == "who");
  CHECK(records[1].answer_id == 0);

  EvalReport report;
  report.mrr = 0.75;
  report.recall[1] = 0.5;
  report.per_query = {{1, 2}, {2, 1}};
  const auto j = nlohmann::json::parse(report.to_json());
  CHECK(j["mrr"] == doctest::Approx(0.75));
  CHECK(j["recall"]["1"] == doctest::Approx(0.5));
  CHECK(j["per_query"][0]["qid"] == 1);
  CHECK(j["per_query"][0]["rank"] == 2);
}
