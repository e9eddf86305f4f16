#include "sparta/index.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "sparta/binary_io.hpp"

namespace sparta {

SparseTermVector build_answer_vector(const AnswerEncoding& encoding,
                                     const QueryTermTable& table,
                                     std::size_t top_k, bool answer_only) {
  const Eigen::Index begin = answer_only ? encoding.answer_begin : 0;
  const Eigen::Index end = answer_only ? encoding.answer_end : encoding.tokens();
  if (end <= begin) {
    throw std::invalid_argument("empty answer");
  }
  // One V x L product gives every term's dot against every token; the
  // rowwise max is the per-term match value.
  const Mat dots = table.embeddings *
                   encoding.vectors.middleCols(begin, end - begin);
  const Vec match = dots.rowwise().maxCoeff();

  SparseTermVector out;
  out.answer_id = encoding.answer_id;
  for (Eigen::Index t = 0; t < match.size(); ++t) {
    const double cached = std::log1p(sparse_feature(match(t), table.bias));
    const auto as_f32 = static_cast<float>(cached);
    if (as_f32 > 0.0f) {
      out.entries.push_back({static_cast<TermId>(t), as_f32});
    }
  }
  if (top_k > 0 && out.entries.size() > top_k) {
    std::nth_element(out.entries.begin(),
                     out.entries.begin() + static_cast<std::ptrdiff_t>(top_k),
                     out.entries.end(),
                     [](const SparseEntry& a, const SparseEntry& b) {
                       if (a.cached_score != b.cached_score)
                         return a.cached_score > b.cached_score;
                       return a.term_id < b.term_id;
                     });
    out.entries.resize(top_k);
    std::sort(out.entries.begin(), out.entries.end(),
              [](const SparseEntry& a, const SparseEntry& b) {
                return a.term_id < b.term_id;
              });
  }
  return out;
}

InvertedIndex build_index(std::span<const AnswerEncoding> encodings,
                          const QueryTermTable& table,
                          std::uint64_t vocab_fingerprint, std::size_t top_k,
                          bool answer_only, unsigned threads) {
  std::vector<SparseTermVector> vectors(encodings.size());
  const auto score_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      vectors[i] = build_answer_vector(encodings[i], table, top_k, answer_only);
    }
  };
  if (threads <= 1 || encodings.size() < 2) {
    score_range(0, encodings.size());
  } else {
    const unsigned n = std::min<unsigned>(threads, encodings.size());
    std::vector<std::thread> pool;
    pool.reserve(n);
    const std::size_t chunk = (encodings.size() + n - 1) / n;
    for (unsigned t = 0; t < n; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(begin + chunk, encodings.size());
      if (begin < end) pool.emplace_back(score_range, begin, end);
    }
    for (std::thread& th : pool) th.join();
  }

  InvertedIndex index;
  index.num_answers = static_cast<std::uint32_t>(encodings.size());
  index.vocab_fingerprint = vocab_fingerprint;
  index.top_k = static_cast<std::uint32_t>(top_k);

  std::vector<bool> seen(encodings.size(), false);
  for (const SparseTermVector& v : vectors) {
    if (v.answer_id >= encodings.size() || seen[v.answer_id]) {
      throw std::invalid_argument("answer ids must be dense and unique (id " +
                                  std::to_string(v.answer_id) + ")");
    }
    seen[v.answer_id] = true;
  }
  // Transpose in ascending answer-id order so posting lists come out sorted
  // and the result is independent of both input order and thread count.
  std::vector<const SparseTermVector*> by_id(encodings.size());
  for (const SparseTermVector& v : vectors) by_id[v.answer_id] = &v;
  for (const SparseTermVector* v : by_id) {
    for (const SparseEntry& e : v->entries) {
      index.postings[e.term_id].push_back({v->answer_id, e.cached_score});
    }
  }
  return index;
}

std::vector<ScoredAnswer> query_index(const InvertedIndex& index,
                                      const Query& query,
                                      std::uint64_t vocab_fingerprint,
                                      std::size_t k) {
  if (vocab_fingerprint != index.vocab_fingerprint) {
    throw std::runtime_error("index/vocabulary mismatch");
  }
  if (k < 1) {
    throw std::invalid_argument("k must be >= 1");
  }
  std::unordered_map<std::uint32_t, double> accum;
  for (const TermId t : query.token_ids) {
    const auto it = index.postings.find(t);
    if (it == index.postings.end()) continue;
    for (const Posting& p : it->second) {
      accum[p.answer_id] += static_cast<double>(p.cached_score);
    }
  }
  std::vector<ScoredAnswer> hits;
  hits.reserve(accum.size());
  for (const auto& [answer_id, score] : accum) {
    hits.push_back({answer_id, score});
  }
  sort_ranked(hits);
  if (hits.size() > k) hits.resize(k);
  return hits;
}

SparseTermVector reconstruct_answer_vector(const InvertedIndex& index,
                                           std::uint32_t answer_id) {
  if (answer_id >= index.num_answers) {
    throw std::out_of_range("unknown answer id " + std::to_string(answer_id));
  }
  SparseTermVector out;
  out.answer_id = answer_id;
  for (const auto& [term_id, postings] : index.postings) {
    const auto it = std::lower_bound(
        postings.begin(), postings.end(), answer_id,
        [](const Posting& p, std::uint32_t id) { return p.answer_id < id; });
    if (it != postings.end() && it->answer_id == answer_id) {
      out.entries.push_back({term_id, it->cached_score});
    }
  }
  return out;
}

std::vector<std::pair<std::string, float>> top_k_terms(
    const InvertedIndex& index, const Vocabulary& vocab,
    std::uint32_t answer_id, std::size_t k) {
  SparseTermVector v = reconstruct_answer_vector(index, answer_id);
  std::sort(v.entries.begin(), v.entries.end(),
            [](const SparseEntry& a, const SparseEntry& b) {
              if (a.cached_score != b.cached_score)
                return a.cached_score > b.cached_score;
              return a.term_id < b.term_id;
            });
  if (v.entries.size() > k) v.entries.resize(k);
  std::vector<std::pair<std::string, float>> out;
  out.reserve(v.entries.size());
  for (const SparseEntry& e : v.entries) {
    out.emplace_back(vocab.term(e.term_id), e.cached_score);
  }
  return out;
}

namespace {
constexpr char kIndexMagic[4] = {'S', 'P', 'I', 'X'};
constexpr std::uint32_t kIndexVersion = 1;
}  // namespace

void save_index(const InvertedIndex& index, const std::filesystem::path& path) {
  BinaryWriter w;
  w.write_bytes(kIndexMagic, sizeof(kIndexMagic));
  w.write_u32(kIndexVersion);
  w.write_u64(index.vocab_fingerprint);
  w.write_u32(index.num_answers);
  w.write_u32(index.top_k);
  w.write_u32(static_cast<std::uint32_t>(index.postings.size()));
  for (const auto& [term_id, postings] : index.postings) {
    w.write_u32(term_id);
    w.write_u32(static_cast<std::uint32_t>(postings.size()));
    for (const Posting& p : postings) {
      w.write_u32(p.answer_id);
      w.write_f32(p.cached_score);
    }
  }
  w.save(path);
}

InvertedIndex load_index(const std::filesystem::path& path) {
  BinaryReader r = BinaryReader::from_file(path);
  char magic[4];
  r.read_bytes(magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kIndexMagic, sizeof(magic)) != 0) {
    throw std::runtime_error(path.string() + ": bad magic at offset 0");
  }
  const std::uint32_t version = r.read_u32("version");
  if (version != kIndexVersion) {
    throw std::runtime_error(path.string() + ": unsupported version " +
                             std::to_string(version) + " at offset 4");
  }
  InvertedIndex index;
  index.vocab_fingerprint = r.read_u64("vocab_fingerprint");
  index.num_answers = r.read_u32("num_answers");
  index.top_k = r.read_u32("top_k");
  const std::uint32_t num_terms = r.read_u32("num_terms_with_postings");
  for (std::uint32_t i = 0; i < num_terms; ++i) {
    const TermId term_id = r.read_u32("term_id");
    const std::uint32_t count = r.read_u32("posting_count");
    std::vector<Posting>& list = index.postings[term_id];
    list.reserve(count);
    for (std::uint32_t p = 0; p < count; ++p) {
      Posting posting;
      posting.answer_id = r.read_u32("posting answer_id");
      posting.cached_score = r.read_f32("posting score");
      list.push_back(posting);
    }
  }
  if (r.remaining() != 0) {
    throw std::runtime_error(path.string() + ": trailing bytes at offset " +
                             std::to_string(r.offset()));
  }
  return index;
}

}  // namespace sparta
