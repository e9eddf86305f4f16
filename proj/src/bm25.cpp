#include "sparta/bm25.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <unordered_map>

#include "sparta/binary_io.hpp"

namespace sparta {

Bm25Index bm25_build(std::span<const AnswerCandidate> candidates,
                     std::uint64_t vocab_fingerprint, double k1, double b) {
  if (candidates.empty()) {
    throw std::invalid_argument("empty corpus");
  }
  Bm25Index index;
  index.vocab_fingerprint = vocab_fingerprint;
  index.k1 = k1;
  index.b = b;
  index.num_docs = static_cast<std::uint32_t>(candidates.size());
  index.doc_lengths.assign(candidates.size(), 0);

  std::vector<bool> seen(candidates.size(), false);
  std::uint64_t total_len = 0;
  // Two passes keep the posting lists sorted by answer id without a sort.
  std::vector<std::pair<std::uint32_t, std::vector<TermId>>> tokenized;
  tokenized.reserve(candidates.size());
  for (const AnswerCandidate& c : candidates) {
    if (c.id >= candidates.size() || seen[c.id]) {
      throw std::invalid_argument("answer ids must be dense and unique (id " +
                                  std::to_string(c.id) + ")");
    }
    seen[c.id] = true;
    std::vector<TermId> tokens = c.full_tokens();
    index.doc_lengths[c.id] = static_cast<std::uint32_t>(tokens.size());
    total_len += tokens.size();
    tokenized.emplace_back(c.id, std::move(tokens));
  }
  index.avg_doc_length =
      static_cast<double>(total_len) / static_cast<double>(candidates.size());

  std::sort(tokenized.begin(), tokenized.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [id, tokens] : tokenized) {
    std::unordered_map<TermId, std::uint32_t> tf;
    for (const TermId t : tokens) ++tf[t];
    for (const auto& [term, count] : tf) {
      index.postings[term].push_back({id, count});
    }
  }
  for (auto& [term, list] : index.postings) {
    std::sort(list.begin(), list.end(),
              [](const Bm25Posting& a, const Bm25Posting& b) {
                return a.answer_id < b.answer_id;
              });
  }
  return index;
}

double bm25_idf(std::size_t num_docs, std::size_t doc_freq) {
  const double n = static_cast<double>(num_docs);
  const double df = static_cast<double>(doc_freq);
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

std::vector<ScoredAnswer> bm25_rank(const Bm25Index& index, const Query& query,
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
    const double idf = bm25_idf(index.num_docs, it->second.size());
    for (const Bm25Posting& p : it->second) {
      const double tf = static_cast<double>(p.term_frequency);
      const double len = static_cast<double>(index.doc_lengths[p.answer_id]);
      const double norm =
          1.0 - index.b + index.b * len / index.avg_doc_length;
      accum[p.answer_id] +=
          idf * tf * (index.k1 + 1.0) / (tf + index.k1 * norm);
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

namespace {
constexpr char kBm25Magic[4] = {'S', 'P', 'B', 'M'};
constexpr std::uint32_t kBm25Version = 1;
}  // namespace

void save_bm25(const Bm25Index& index, const Vocabulary& vocab,
               const std::filesystem::path& path) {
  BinaryWriter w;
  w.write_bytes(kBm25Magic, sizeof(kBm25Magic));
  w.write_u32(kBm25Version);
  w.write_u64(index.vocab_fingerprint);
  w.write_u32(static_cast<std::uint32_t>(vocab.size()));
  for (const std::string& t : vocab.terms()) w.write_string(t);
  w.write_u32(index.num_docs);
  for (const std::uint32_t len : index.doc_lengths) w.write_u32(len);
  w.write_f64(index.k1);
  w.write_f64(index.b);
  w.write_u32(static_cast<std::uint32_t>(index.postings.size()));
  for (const auto& [term_id, list] : index.postings) {
    w.write_u32(term_id);
    w.write_u32(static_cast<std::uint32_t>(list.size()));
    for (const Bm25Posting& p : list) {
      w.write_u32(p.answer_id);
      w.write_u32(p.term_frequency);
    }
  }
  w.save(path);
}

std::pair<Bm25Index, Vocabulary> load_bm25(const std::filesystem::path& path) {
  BinaryReader r = BinaryReader::from_file(path);
  char magic[4];
  r.read_bytes(magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kBm25Magic, sizeof(magic)) != 0) {
    throw std::runtime_error(path.string() + ": bad magic at offset 0");
  }
  const std::uint32_t version = r.read_u32("version");
  if (version != kBm25Version) {
    throw std::runtime_error(path.string() + ": unsupported version " +
                             std::to_string(version) + " at offset 4");
  }
  Bm25Index index;
  index.vocab_fingerprint = r.read_u64("vocab_fingerprint");
  const std::uint32_t term_count = r.read_u32("term_count");
  std::vector<std::string> terms;
  terms.reserve(term_count);
  for (std::uint32_t i = 0; i < term_count; ++i) {
    terms.push_back(r.read_string("term"));
  }
  Vocabulary vocab = Vocabulary::from_terms(std::move(terms));
  index.num_docs = r.read_u32("num_docs");
  index.doc_lengths.resize(index.num_docs);
  std::uint64_t total = 0;
  for (std::uint32_t i = 0; i < index.num_docs; ++i) {
    index.doc_lengths[i] = r.read_u32("doc_length");
    total += index.doc_lengths[i];
  }
  index.avg_doc_length =
      index.num_docs == 0
          ? 0.0
          : static_cast<double>(total) / static_cast<double>(index.num_docs);
  index.k1 = r.read_f64("k1");
  index.b = r.read_f64("b");
  const std::uint32_t num_terms = r.read_u32("num_terms_with_postings");
  for (std::uint32_t i = 0; i < num_terms; ++i) {
    const TermId term_id = r.read_u32("term_id");
    const std::uint32_t count = r.read_u32("posting_count");
    std::vector<Bm25Posting>& list = index.postings[term_id];
    list.reserve(count);
    for (std::uint32_t p = 0; p < count; ++p) {
      Bm25Posting posting;
      posting.answer_id = r.read_u32("posting answer_id");
      posting.term_frequency = r.read_u32("posting tf");
      list.push_back(posting);
    }
  }
  if (r.remaining() != 0) {
    throw std::runtime_error(path.string() + ": trailing bytes at offset " +
                             std::to_string(r.offset()));
  }
  return {std::move(index), std::move(vocab)};
}

}  // namespace sparta
