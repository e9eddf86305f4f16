#include "sparta/corpus.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "sparta/tokenizer.hpp"

namespace sparta {

std::vector<TermId> AnswerCandidate::full_tokens() const {
  std::vector<TermId> out;
  out.reserve(length());
  out.insert(out.end(), context_left_tokens.begin(), context_left_tokens.end());
  out.insert(out.end(), answer_tokens.begin(), answer_tokens.end());
  out.insert(out.end(), context_right_tokens.begin(), context_right_tokens.end());
  return out;
}

std::vector<std::uint8_t> AnswerCandidate::segment_labels() const {
  std::vector<std::uint8_t> labels(length(), 0);
  const std::size_t begin = context_left_tokens.size();
  for (std::size_t i = 0; i < answer_tokens.size(); ++i) {
    labels[begin + i] = 1;
  }
  return labels;
}

AnswerCandidate truncate_to_window(const AnswerCandidate& candidate,
                                   std::size_t max_len) {
  const std::size_t answer_len = candidate.answer_tokens.size();
  if (max_len < answer_len) {
    throw std::invalid_argument("answer longer than window");
  }
  if (candidate.length() <= max_len) {
    return candidate;
  }
  const std::size_t budget = (max_len - answer_len) / 2;
  const std::size_t left_len = candidate.context_left_tokens.size();
  const std::size_t right_len = candidate.context_right_tokens.size();
  const std::size_t left_surplus = budget > left_len ? budget - left_len : 0;
  const std::size_t right_surplus = budget > right_len ? budget - right_len : 0;
  const std::size_t keep_left = std::min(left_len, budget + right_surplus);
  const std::size_t keep_right = std::min(right_len, budget + left_surplus);

  AnswerCandidate out;
  out.id = candidate.id;
  out.doc_id = candidate.doc_id;
  out.answer_tokens = candidate.answer_tokens;
  // Left context keeps its tail, right context its head: the tokens nearest
  // the answer.
  out.context_left_tokens.assign(
      candidate.context_left_tokens.end() - static_cast<std::ptrdiff_t>(keep_left),
      candidate.context_left_tokens.end());
  out.context_right_tokens.assign(
      candidate.context_right_tokens.begin(),
      candidate.context_right_tokens.begin() + static_cast<std::ptrdiff_t>(keep_right));
  return out;
}

Query make_query(std::string_view text, const Vocabulary& vocab) {
  Query q;
  q.raw_text = std::string(text);
  for (const std::string& tok : tokenize(text)) {
    if (const auto id = vocab.id_of(tok)) {
      q.token_ids.push_back(*id);
    } else {
      ++q.dropped_oov_count;
    }
  }
  return q;
}

namespace {

nlohmann::json parse_line(const std::string& line,
                          const std::filesystem::path& path,
                          std::size_t line_no) {
  try {
    return nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                             ": " + e.what());
  }
}

}  // namespace

std::vector<RawCandidate> read_corpus_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open: " + path.string());
  }
  std::vector<RawCandidate> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const nlohmann::json j = parse_line(line, path, line_no);
    RawCandidate c;
    c.id = j.at("id").get<std::uint32_t>();
    c.doc_id = j.value("doc_id", 0u);
    c.answer = j.at("answer").get<std::string>();
    c.context_left = j.value("context_left", std::string());
    c.context_right = j.value("context_right", std::string());
    if (c.id != out.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": answer ids must be dense 0..N-1 in file order"
                               " (got id " + std::to_string(c.id) +
                               ", expected " + std::to_string(out.size()) + ")");
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<std::string> candidate_texts(std::span<const RawCandidate> raw) {
  std::vector<std::string> texts;
  texts.reserve(raw.size());
  for (const RawCandidate& c : raw) {
    texts.push_back(c.answer + " " + c.context_left + " " + c.context_right);
  }
  return texts;
}

std::vector<AnswerCandidate> build_candidates(std::span<const RawCandidate> raw,
                                              const Vocabulary& vocab,
                                              std::size_t max_len) {
  const auto to_ids = [&vocab](const std::string& text) {
    std::vector<TermId> ids;
    for (const std::string& tok : tokenize(text)) {
      if (const auto id = vocab.id_of(tok)) ids.push_back(*id);
    }
    return ids;
  };
  std::vector<AnswerCandidate> out;
  out.reserve(raw.size());
  for (const RawCandidate& r : raw) {
    AnswerCandidate c;
    c.id = r.id;
    c.doc_id = r.doc_id;
    c.answer_tokens = to_ids(r.answer);
    c.context_left_tokens = to_ids(r.context_left);
    c.context_right_tokens = to_ids(r.context_right);
    if (c.answer_tokens.empty()) {
      throw std::runtime_error("answer " + std::to_string(r.id) +
                               " has no in-vocabulary tokens");
    }
    out.push_back(truncate_to_window(c, max_len));
  }
  return out;
}

}  // namespace sparta
