#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sparta {

// Lowercases and splits on whitespace and punctuation; punctuation is
// discarded. Bytes outside ASCII are kept as token characters so UTF-8
// words survive intact. Deterministic; empty input gives an empty list.
//
// Any tokenizer with this signature can be swapped in at the ingestion
// call sites; nothing downstream depends on the split rule.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace sparta
