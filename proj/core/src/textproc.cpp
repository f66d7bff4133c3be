#include "ecotext/textproc.hpp"

#include <array>

#include "ecotext/error.hpp"

namespace ecotext {
namespace {

constexpr char32_t kInvalid = 0xFFFD;

// Decodes one code point starting at `pos`, advancing it. Malformed bytes
// decode as U+FFFD and consume a single byte.
char32_t decode(std::string_view s, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++pos;
    return kInvalid;
  }
  if (pos + len > s.size()) {
    ++pos;
    return kInvalid;
  }
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) {
      ++pos;
      return kInvalid;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  pos += len;
  return cp;
}

void encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_space(char32_t c) {
  switch (c) {
    case U' ': case U'\t': case U'\n': case U'\v': case U'\f': case U'\r':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000: case 0xFEFF:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200B;
  }
}

bool is_apostrophe(char32_t c) { return c == U'\'' || c == 0x2019 || c == 0x2018 || c == 0x02BC; }

// Letters, digits and underscore. Non-ASCII is a word character unless it
// falls in a known punctuation, symbol or emoji block.
bool is_word(char32_t c) {
  if (c < 0x80) {
    return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') || (c >= U'0' && c <= U'9') ||
           c == U'_';
  }
  if (c == kInvalid || is_space(c) || is_apostrophe(c)) return false;
  if (c >= 0x80 && c <= 0xBF) return c == 0xAA || c == 0xB5 || c == 0xBA;
  if (c == 0xD7 || c == 0xF7) return false;
  if (c >= 0x2010 && c <= 0x2BFF) return false;   // general punctuation .. misc symbols
  if (c >= 0x3001 && c <= 0x303F) return false;   // CJK punctuation
  if (c >= 0xFE10 && c <= 0xFE6F) return false;   // vertical / small forms
  if (c >= 0xFF01 && c <= 0xFF0F) return false;   // fullwidth punctuation
  if (c >= 0xFF1A && c <= 0xFF20) return false;
  if (c >= 0xFF3B && c <= 0xFF40) return false;
  if (c >= 0xFF5B && c <= 0xFF65) return false;
  if (c >= 0x1F000 && c <= 0x1FAFF) return false; // emoji and pictographs
  if (c >= 0xE000 && c <= 0xF8FF) return false;   // private use
  if (c >= 0xFE00 && c <= 0xFE0F) return false;   // variation selectors
  return true;
}

// Simple case folding for Latin-1, Latin Extended-A, Greek and Cyrillic.
char32_t to_lower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c < 0xC0) return c;
  if (c <= 0xDE) return c == 0xD7 ? c : c + 32;
  if (c >= 0x100 && c <= 0x17F) {
    if (c == 0x130) return U'i';
    if (c == 0x178) return 0xFF;
    if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E)) return (c % 2 == 1) ? c + 1 : c;
    if (c == 0x138 || c == 0x149 || c == 0x17F) return c;
    return (c % 2 == 0) ? c + 1 : c;
  }
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 32;
  if (c >= 0x410 && c <= 0x42F) return c + 32;
  if (c >= 0x400 && c <= 0x40F) return c + 80;
  return c;
}

bool starts_with_ci(const std::u32string& cps, std::size_t at, std::u32string_view prefix) {
  if (at + prefix.size() > cps.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (to_lower(cps[at + i]) != prefix[i]) return false;
  }
  return true;
}

std::string lower_utf8(const std::u32string& cps, std::size_t begin, std::size_t end) {
  std::string out;
  out.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    encode(is_apostrophe(cps[i]) ? U'\'' : to_lower(cps[i]), out);
  }
  return out;
}

void tokenize_chunk(const std::u32string& cps, TokenSeq& out) {
  const std::size_t n = cps.size();
  std::size_t i = 0;
  auto boundary = [&](std::size_t at) { return at == 0 || !is_word(cps[at - 1]); };
  auto word_end = [&](std::size_t from) {
    std::size_t j = from;
    while (j < n && is_word(cps[j])) ++j;
    return j;
  };

  while (i < n) {
    const char32_t c = cps[i];
    if (boundary(i) && (starts_with_ci(cps, i, U"http://") || starts_with_ci(cps, i, U"https://") ||
                        starts_with_ci(cps, i, U"www."))) {
      out.emplace_back("url");
      return;  // a URL runs to the end of its whitespace chunk
    }
    if ((c == U'@' || c == U'#') && i + 1 < n && is_word(cps[i + 1]) && boundary(i)) {
      const std::size_t end = word_end(i + 1);
      if (c == U'@') {
        out.emplace_back("user");
      } else {
        out.push_back("hashtag_" + lower_utf8(cps, i + 1, end));
      }
      i = end;
      continue;
    }
    if (is_word(c)) {
      std::size_t j = i;
      while (j < n) {
        if (is_word(cps[j])) {
          ++j;
        } else if (is_apostrophe(cps[j]) && j + 1 < n && is_word(cps[j + 1])) {
          ++j;
        } else {
          break;
        }
      }
      out.push_back(lower_utf8(cps, i, j));
      i = j;
      continue;
    }
    ++i;
  }
}

}  // namespace

TokenSeq tokenize(std::string_view text) {
  TokenSeq out;
  std::u32string chunk;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = decode(text, pos);
    if (is_space(cp)) {
      if (!chunk.empty()) {
        tokenize_chunk(chunk, out);
        chunk.clear();
      }
    } else {
      chunk.push_back(cp);
    }
  }
  if (!chunk.empty()) tokenize_chunk(chunk, out);
  return out;
}

std::vector<std::string> ngrams(const TokenSeq& tokens, std::size_t n_min, std::size_t n_max) {
  if (n_min < 1) throw ValidationError("ngrams: n_min must be >= 1");
  if (n_min > n_max) throw ValidationError("ngrams: n_min > n_max");
  std::vector<std::string> out;
  for (std::size_t n = n_min; n <= n_max; ++n) {
    if (tokens.size() < n) break;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string term = tokens[i];
      for (std::size_t j = 1; j < n; ++j) {
        term.push_back(' ');
        term += tokens[i + j];
      }
      out.push_back(std::move(term));
    }
  }
  return out;
}

std::string lowercase(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) encode(to_lower(decode(text, pos)), out);
  return out;
}

std::size_t utf8_length(std::string_view text) {
  std::size_t count = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    decode(text, pos);
    ++count;
  }
  return count;
}

}  // namespace ecotext
