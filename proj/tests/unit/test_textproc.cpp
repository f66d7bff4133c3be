#include <random>

#include <gtest/gtest.h>

#include "ecotext/error.hpp"
#include "ecotext/textproc.hpp"

using namespace ecotext;

TEST(Tokenize, ContractionStaysOneToken) {
  EXPECT_EQ(tokenize("I can't sleep."), (TokenSeq{"i", "can't", "sleep"}));
}

TEST(Tokenize, UrlAndHashtagNormalization) {
  EXPECT_EQ(tokenize("see https://x.co #sad"), (TokenSeq{"see", "url", "hashtag_sad"}));
  EXPECT_EQ(tokenize("ping @someone now"), (TokenSeq{"ping", "user", "now"}));
  EXPECT_EQ(tokenize("www.example.com/path?q=1"), (TokenSeq{"url"}));
}

TEST(Tokenize, EmptyAndWhitespace) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize("   \t\n").empty());
  EXPECT_TRUE(tokenize("!!! ... ???").empty());
}

TEST(Tokenize, UnicodeLettersAndCaseFolding) {
  EXPECT_EQ(tokenize("¿Qué PASÓ, Ñandú?"), (TokenSeq{"qué", "pasó", "ñandú"}));
  EXPECT_EQ(tokenize("I’m ÉTÉ"), (TokenSeq{"i'm", "été"}));
}

TEST(Tokenize, IdempotentOnJoinedTokens) {
  std::mt19937_64 rng(1);
  const std::vector<std::string> pieces{"Hello", "can't", "#Sad", "@bob", "http://a.b/c", "¡ÁRBOL!", "x_y", "it's",
                                        "...", "42", "Ñ", "rock'n'roll", "'quoted'", "ümlaut"};
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  std::uniform_int_distribution<int> len(0, 12);
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    for (int i = len(rng); i > 0; --i) text += pieces[pick(rng)] + " ";
    const auto once = tokenize(text);
    std::string joined;
    for (const auto& t : once) joined += t + " ";
    EXPECT_EQ(tokenize(joined), once) << text;
  }
}

TEST(Ngrams, EnumeratesByOrder) {
  EXPECT_EQ(ngrams({"a", "b", "c"}, 1, 2), (std::vector<std::string>{"a", "b", "c", "a b", "b c"}));
  EXPECT_TRUE(ngrams({"a"}, 2, 3).empty());
  EXPECT_EQ(ngrams({"a", "b", "c", "d", "e"}, 1, 3).size(), 12u);
}

TEST(Ngrams, CountFormulaProperty) {
  for (std::size_t len = 0; len < 12; ++len) {
    TokenSeq t(len, "w");
    for (std::size_t n = 1; n <= 4; ++n) {
      EXPECT_EQ(ngrams(t, n, n).size(), len >= n ? len - n + 1 : 0u);
    }
  }
}

TEST(Ngrams, RejectsBadRange) {
  EXPECT_THROW(ngrams({"a"}, 0, 1), ValidationError);
  EXPECT_THROW(ngrams({"a"}, 3, 2), ValidationError);
}

TEST(Text, Utf8LengthCountsCodePoints) {
  EXPECT_EQ(utf8_length("ñandú"), 5u);
  EXPECT_EQ(utf8_length(""), 0u);
  EXPECT_EQ(lowercase("ÁRBOL Straße"), "árbol straße");
}
