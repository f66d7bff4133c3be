#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ecotext {

using TokenSeq = std::vector<std::string>;

// Lowercases, splits on whitespace and punctuation, maps URLs to `url`,
// @mentions to `user` and #tags to `hashtag_<tag>`. Apostrophes survive only
// between word characters. Pure and idempotent over its own joined output.
TokenSeq tokenize(std::string_view text);

// Contiguous n-grams for n in [n_min, n_max], grouped by n and in document
// order within each group, joined by single spaces.
std::vector<std::string> ngrams(const TokenSeq& tokens, std::size_t n_min, std::size_t n_max);

// Lowercases with the same folding rules tokenize() applies.
std::string lowercase(std::string_view text);

// Number of UTF-8 code points; invalid bytes count as one each.
std::size_t utf8_length(std::string_view text);

}  // namespace ecotext
