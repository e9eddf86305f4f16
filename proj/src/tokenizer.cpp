#include "sparta/tokenizer.hpp"

#include <cctype>

namespace sparta {

namespace {

bool is_token_char(unsigned char c) {
  if (c >= 0x80) return true;  // UTF-8 continuation/lead bytes
  return std::isalnum(c) != 0;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_token_char(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) {
    tokens.push_back(std::move(current));
  }
  return tokens;
}

}  // namespace sparta
