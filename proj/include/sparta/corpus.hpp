#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sparta/vocabulary.hpp"

namespace sparta {

// One candidate answer: the answer sentence plus its surrounding context,
// all as vocabulary term ids. The full token sequence is
// context_left ++ answer ++ context_right; segment labels mark the answer
// span with 1 and context with 0.
struct AnswerCandidate {
  std::uint32_t id = 0;
  std::uint32_t doc_id = 0;  // source-document grouping for nearby sampling
  std::vector<TermId> answer_tokens;
  std::vector<TermId> context_left_tokens;
  std::vector<TermId> context_right_tokens;

  std::size_t length() const {
    return context_left_tokens.size() + answer_tokens.size() +
           context_right_tokens.size();
  }
  std::vector<TermId> full_tokens() const;
  std::vector<std::uint8_t> segment_labels() const;
};

// Trims context to equal budgets around the answer, keeping the tokens
// nearest to it; a side shorter than its budget donates the surplus to the
// other side. The answer itself is never trimmed. Throws
// "answer longer than window" when it cannot fit.
AnswerCandidate truncate_to_window(const AnswerCandidate& candidate,
                                   std::size_t max_len);

// Query tokens mapped through a vocabulary; out-of-vocabulary tokens are
// dropped (they have no index entry to look up) and counted.
struct Query {
  std::string raw_text;
  std::vector<TermId> token_ids;
  std::size_t dropped_oov_count = 0;
};

Query make_query(std::string_view text, const Vocabulary& vocab);

// One line of the corpus file, still as text.
struct RawCandidate {
  std::uint32_t id = 0;
  std::uint32_t doc_id = 0;
  std::string answer;
  std::string context_left;
  std::string context_right;
};

// Reads a JSON-lines corpus file: one object per line with integer `id`,
// strings `answer`, `context_left`, `context_right`, and an optional
// integer `doc_id` (defaults to 0, i.e. one shared document). Ids must be
// dense 0..N-1 in file order.
std::vector<RawCandidate> read_corpus_file(const std::filesystem::path& path);

// answer + context_left + context_right per candidate, for vocabulary
// building.
std::vector<std::string> candidate_texts(std::span<const RawCandidate> raw);

// Tokenizes raw candidates against the vocabulary (OOV tokens dropped) and
// truncates each to max_len. Throws if an answer ends up with no tokens.
std::vector<AnswerCandidate> build_candidates(std::span<const RawCandidate> raw,
                                              const Vocabulary& vocab,
                                              std::size_t max_len);

constexpr std::size_t kDefaultMaxCandidateLen = 512;

}  // namespace sparta
