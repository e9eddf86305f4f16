#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "sparta/index.hpp"
#include "support/synthetic.hpp"

using namespace sparta;

namespace {

struct Fixture {
  Model model;
  std::vector<AnswerCandidate> candidates;
  std::vector<AnswerEncoding> encodings;

  Fixture(std::size_t answers, std::size_t vocab, std::uint64_t seed)
      : model(test::random_scored_model(vocab, 8, 1, seed)) {
    Rng rng(seed + 1);
    candidates = test::random_candidates(answers, vocab, 2, 6, rng);
    for (const auto& c : candidates) {
      encodings.push_back(encode(c, model.encoder));
    }
  }
};

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("a hostile bias empties the sparse vector") {
  Fixture f(3, 10, 1);
  Model model = f.model;
  model.query_table.bias = -1e9;
  const SparseTermVector v =
      build_answer_vector(f.encodings[0], model.query_table, 0);
  CHECK(v.entries.empty());
}

TEST_CASE("top_k of zero and top_k of V build identical vectors") {
  Fixture f(3, 10, 2);
  const auto untruncated =
      build_answer_vector(f.encodings[1], f.model.query_table, 0);
  const auto full_k =
      build_answer_vector(f.encodings[1], f.model.query_table, 10);
  CHECK(untruncated == full_k);
}

TEST_CASE("sparse vector entries match per-term scoring") {
  Fixture f(4, 12, 3);
  for (const auto& enc : f.encodings) {
    const SparseTermVector v = build_answer_vector(enc, f.model.query_table, 0);
    // every entry matches the scoring path, term by term
    std::size_t nonzero = 0;
    for (TermId t = 0; t < 12; ++t) {
      const Vec e =
          f.model.query_table.embeddings.row(static_cast<Eigen::Index>(t)).transpose();
      const double y = term_match(e, enc).y;
      const double expected =
          std::log1p(sparse_feature(y, f.model.query_table.bias));
      const auto it =
          std::find_if(v.entries.begin(), v.entries.end(),
                       [t](const SparseEntry& s) { return s.term_id == t; });
      if (static_cast<float>(expected) > 0.0f) {
        ++nonzero;
        REQUIRE(it != v.entries.end());
        CHECK(it->cached_score == static_cast<float>(expected));
      } else {
        CHECK(it == v.entries.end());
      }
    }
    CHECK(v.entries.size() == nonzero);
    // entries strictly increasing by term id, all positive
    for (std::size_t i = 0; i < v.entries.size(); ++i) {
      CHECK(v.entries[i].cached_score > 0.0f);
      if (i > 0) CHECK(v.entries[i].term_id > v.entries[i - 1].term_id);
    }
  }
}

TEST_CASE("truncation keeps the largest entries with id tie-break") {
  Fixture f(1, 20, 4);
  const auto full = build_answer_vector(f.encodings[0], f.model.query_table, 0);
  if (full.entries.size() < 3) return;  // degenerate draw; other seeds cover it
  const std::size_t k = full.entries.size() / 2;
  const auto truncated =
      build_answer_vector(f.encodings[0], f.model.query_table, k);
  REQUIRE(truncated.entries.size() == k);
  // the kept set is exactly the k best under (score desc, id asc)
  auto sorted = full.entries;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.cached_score != b.cached_score) return a.cached_score > b.cached_score;
    return a.term_id < b.term_id;
  });
  std::vector<TermId> expect;
  for (std::size_t i = 0; i < k; ++i) expect.push_back(sorted[i].term_id);
  std::sort(expect.begin(), expect.end());
  std::vector<TermId> got;
  for (const auto& e : truncated.entries) got.push_back(e.term_id);
  CHECK(got == expect);
}

TEST_CASE("an empty corpus builds an empty index") {
  const Model model = test::random_scored_model(5, 8, 1, 5);
  const InvertedIndex index =
      build_index({}, model.query_table, model.vocab.fingerprint(), 0);
  CHECK(index.num_answers == 0);
  CHECK(index.postings.empty());
}

TEST_CASE("a singleton vector transposes into one posting list") {
  // hand-build an encoding whose only activation is term 3
  Model model = test::random_scored_model(5, 4, 0, 6);
  model.query_table.embeddings.setZero();
  model.query_table.embeddings(3, 0) = 1.0;
  model.query_table.bias = 0.0;
  AnswerCandidate c;
  c.id = 0;
  c.answer_tokens = {1};
  const AnswerEncoding enc = encode(c, model.encoder);
  const double y = enc.vectors(0, 0);
  if (y <= 0.0) {
    model.query_table.embeddings(3, 0) = -1.0;
  }
  const std::vector<AnswerEncoding> encodings{enc};
  const InvertedIndex index =
      build_index(encodings, model.query_table, 99, 0);
  REQUIRE(index.postings.size() == 1);
  REQUIRE(index.postings.count(3) == 1);
  REQUIRE(index.postings.at(3).size() == 1);
  CHECK(index.postings.at(3)[0].answer_id == 0);
  CHECK(index.num_answers == 1);
}

TEST_CASE("postings transpose back into the per-answer vectors") {
  Fixture f(12, 15, 7);
  const InvertedIndex index = build_index(
      f.encodings, f.model.query_table, f.model.vocab.fingerprint(), 0);
  for (const auto& enc : f.encodings) {
    const SparseTermVector direct =
        build_answer_vector(enc, f.model.query_table, 0);
    CHECK(reconstruct_answer_vector(index, enc.answer_id) == direct);
  }
}

TEST_CASE("build_index rejects duplicate answer ids") {
  Fixture f(3, 10, 8);
  auto encodings = f.encodings;
  encodings[2].answer_id = 0;
  CHECK_THROWS(build_index(encodings, f.model.query_table, 1, 0));
}

TEST_CASE("index build is independent of thread count") {
  Fixture f(37, 20, 9);
  const auto fp = f.model.vocab.fingerprint();
  const InvertedIndex one = build_index(f.encodings, f.model.query_table, fp, 5,
                                        false, 1);
  const InvertedIndex four = build_index(f.encodings, f.model.query_table, fp, 5,
                                         false, 4);
  CHECK(one == four);
}

TEST_CASE("lookup ranking equals brute force on an untruncated index") {
  Fixture f(50, 25, 10);
  const auto fp = f.model.vocab.fingerprint();
  const InvertedIndex index = build_index(f.encodings, f.model.query_table, fp, 0);
  Rng rng(1001);
  for (int trial = 0; trial < 25; ++trial) {
    const Query q = test::random_query(25, 1 + rng.next_below(6), rng);
    const auto brute =
        rank_brute_force(q, f.encodings, f.model.query_table, f.encodings.size());
    const auto looked = query_index(index, q, fp, f.encodings.size());
    // the lookup list is the positive-score prefix of the brute ranking
    REQUIRE(looked.size() <= brute.size());
    for (std::size_t i = 0; i < looked.size(); ++i) {
      CHECK(looked[i].answer_id == brute[i].answer_id);
      CHECK(std::abs(looked[i].score - brute[i].score) < 1e-6);
    }
    for (std::size_t i = looked.size(); i < brute.size(); ++i) {
      CHECK(brute[i].score == 0.0);
    }
  }
}

TEST_CASE("query multiplicity counts postings twice") {
  Fixture f(6, 10, 11);
  const auto fp = f.model.vocab.fingerprint();
  const InvertedIndex index = build_index(f.encodings, f.model.query_table, fp, 0);
  Query once;
  once.token_ids = {2};
  Query twice;
  twice.token_ids = {2, 2};
  const auto r1 = query_index(index, once, fp, 6);
  const auto r2 = query_index(index, twice, fp, 6);
  REQUIRE(r1.size() == r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i) {
    CHECK(r2[i].score == doctest::Approx(2.0 * r1[i].score).epsilon(1e-12));
  }
}

TEST_CASE("queries with no postings give no results") {
  Fixture f(4, 10, 12);
  const auto fp = f.model.vocab.fingerprint();
  Model hostile = f.model;
  hostile.query_table.bias = -1e9;
  const InvertedIndex index = build_index(f.encodings, hostile.query_table, fp, 0);
  Query q;
  q.token_ids = {0, 1, 2};
  CHECK(query_index(index, q, fp, 4).empty());
  Query empty;  // everything OOV was already dropped upstream
  CHECK(query_index(index, empty, fp, 4).empty());
}

TEST_CASE("fingerprint mismatch is rejected") {
  Fixture f(4, 10, 13);
  const auto fp = f.model.vocab.fingerprint();
  const InvertedIndex index = build_index(f.encodings, f.model.query_table, fp, 0);
  Query q;
  q.token_ids = {0};
  CHECK_THROWS_WITH_AS(query_index(index, q, fp + 1, 4),
                       "index/vocabulary mismatch", std::runtime_error);
}

TEST_CASE("truncated scores never exceed untruncated ones") {
  Fixture f(30, 20, 14);
  const auto fp = f.model.vocab.fingerprint();
  const InvertedIndex full = build_index(f.encodings, f.model.query_table, fp, 0);
  Rng rng(2002);
  for (const std::size_t k : {std::size_t{1}, std::size_t{3}, std::size_t{8}}) {
    const InvertedIndex truncated =
        build_index(f.encodings, f.model.query_table, fp, k);
    for (int trial = 0; trial < 10; ++trial) {
      const Query q = test::random_query(20, 1 + rng.next_below(5), rng);
      const auto full_hits = query_index(full, q, fp, f.encodings.size());
      const auto trunc_hits = query_index(truncated, q, fp, f.encodings.size());
      std::map<std::uint32_t, double> full_scores;
      for (const auto& h : full_hits) full_scores[h.answer_id] = h.score;
      for (const auto& h : trunc_hits) {
        CHECK(h.score <= full_scores[h.answer_id] + 1e-12);
      }
    }
  }
}

TEST_CASE("top terms come back sorted and decoded") {
  Fixture f(5, 12, 15);
  const auto fp = f.model.vocab.fingerprint();
  const InvertedIndex index = build_index(f.encodings, f.model.query_table, fp, 0);

  CHECK(top_k_terms(index, f.model.vocab, 0, 0).empty());
  CHECK_THROWS(top_k_terms(index, f.model.vocab, 99, 5));

  const SparseTermVector direct =
      build_answer_vector(f.encodings[2], f.model.query_table, 0);
  const auto all = top_k_terms(index, f.model.vocab, 2, 1000);
  REQUIRE(all.size() == direct.entries.size());
  for (std::size_t i = 1; i < all.size(); ++i) {
    CHECK(all[i - 1].second >= all[i].second);
  }
  // matches a full sort of the direct vector
  auto sorted = direct.entries;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.cached_score != b.cached_score) return a.cached_score > b.cached_score;
    return a.term_id < b.term_id;
  });
  for (std::size_t i = 0; i < all.size(); ++i) {
    CHECK(all[i].first == f.model.vocab.term(sorted[i].term_id));
    CHECK(all[i].second == sorted[i].cached_score);
  }
}

TEST_CASE("index files round-trip exactly") {
  Fixture f(20, 15, 16);
  const auto fp = f.model.vocab.fingerprint();
  const InvertedIndex index = build_index(f.encodings, f.model.query_table, fp, 7);
  const auto path = temp_file("sparta_index_rt.spix");
  save_index(index, path);
  const InvertedIndex loaded = load_index(path);
  CHECK(loaded == index);

  save_index(loaded, path);
  const InvertedIndex again = load_index(path);
  CHECK(again == loaded);
}

TEST_CASE("an empty index file is exactly the header") {
  const InvertedIndex empty{.postings = {}, .num_answers = 0,
                            .vocab_fingerprint = 42, .top_k = 0};
  const auto path = temp_file("sparta_index_empty.spix");
  save_index(empty, path);
  // magic(4) + version(4) + fingerprint(8) + answers(4) + top_k(4) + terms(4)
  CHECK(std::filesystem::file_size(path) == 28);
  CHECK(load_index(path) == empty);
}

TEST_CASE("corrupted or truncated index files are rejected with context") {
  Fixture f(5, 10, 17);
  const InvertedIndex index =
      build_index(f.encodings, f.model.query_table, 1, 0);
  const auto path = temp_file("sparta_index_bad.spix");
  save_index(index, path);

  SUBCASE("bad magic") {
    std::fstream file(path, std::ios::in | std::ios::out | std::ios::binary);
    file.seekp(0);
    file.put('X');
    file.close();
    CHECK_THROWS_WITH_AS(load_index(path), doctest::Contains("bad magic"),
                         std::runtime_error);
  }
  SUBCASE("truncated body") {
    const auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size - 3);
    CHECK_THROWS_WITH_AS(load_index(path), doctest::Contains("truncated at offset"),
                         std::runtime_error);
  }
  SUBCASE("trailing bytes") {
    std::ofstream file(path, std::ios::app | std::ios::binary);
    file << "xx";
    file.close();
    CHECK_THROWS_WITH_AS(load_index(path), doctest::Contains("trailing bytes"),
                         std::runtime_error);
  }
}
