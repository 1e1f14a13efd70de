#include <doctest.h>

#include <random>

#include "bytespan/bpe.hpp"
#include "bytespan/error.hpp"
#include "bytespan/tokenizer.hpp"

#include "support/textgen.hpp"

using namespace bytespan;

namespace {

// Position-scan reference: tries every vocabulary symbol at each step and
// keeps the longest admissible one. Shares nothing with the trie path.
std::vector<TokenId> tokenize_reference(const Vocabulary& vocab, std::string_view bytes) {
  // Longest symbol of `marker` whose effective bytes prefix `text`.
  auto scan = [&vocab](Marker marker, std::string_view text) {
    std::int64_t best = -1;
    std::size_t best_len = 0;
    for (std::size_t id = 0; id < vocab.size(); ++id) {
      const Symbol& s = vocab.symbol(static_cast<TokenId>(id));
      if (s.marker != marker) continue;
      const std::string eff = effective_bytes(s);
      if (text.size() < eff.size() || text.substr(0, eff.size()) != eff) continue;
      if (eff.size() > best_len) {
        best = static_cast<std::int64_t>(id);
        best_len = eff.size();
      }
    }
    return std::pair<std::int64_t, std::size_t>(best, best_len);
  };

  std::vector<TokenId> out;
  const BoundaryList bounds = pretokenize(bytes);
  for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
    const std::string_view pretoken = bytes.substr(bounds[b], bounds[b + 1] - bounds[b]);
    std::size_t pos = 0;
    // First token: word_initial symbols when the pre-token leads with a
    // space, otherwise (or when none matches) plain symbols.
    std::pair<std::int64_t, std::size_t> hit{-1, 0};
    if (pretoken[0] == ' ') hit = scan(Marker::word_initial, pretoken);
    if (hit.first < 0) hit = scan(Marker::plain, pretoken);
    REQUIRE(hit.first >= 0);
    out.push_back(static_cast<TokenId>(hit.first));
    pos = hit.second;
    while (pos < pretoken.size()) {
      hit = scan(Marker::continuation, pretoken.substr(pos));
      REQUIRE(hit.first >= 0);
      out.push_back(static_cast<TokenId>(hit.first));
      pos += hit.second;
    }
  }
  return out;
}

std::string random_bytes(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len,
                         std::string_view alphabet) {
  const std::size_t n = min_len + rng() % (max_len - min_len + 1);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += alphabet[rng() % alphabet.size()];
  return s;
}

Vocabulary random_vocab(std::mt19937_64& rng, std::string_view alphabet) {
  Vocabulary v = Vocabulary::base(BaseKind::wordpiece);
  const std::size_t extras = rng() % 40;
  for (std::size_t i = 0; i < extras; ++i) {
    const Marker m = static_cast<Marker>(rng() % 3);
    Symbol s{m, random_bytes(rng, 2, 6, alphabet)};
    if (!v.contains(s)) v.add(std::move(s));
  }
  return v;
}

}  // namespace

TEST_CASE("longest-prefix picks the longest word-initial match") {
  Vocabulary v = Vocabulary::base(BaseKind::wordpiece);
  const TokenId carbon = v.add({Marker::word_initial, "carbon"});
  const TokenId ization = v.add({Marker::continuation, "ization"});
  v.add({Marker::continuation, "bonization"});
  const Tokenizer tok(v);
  const auto ids = tok.tokenize(" carbonization");
  REQUIRE(ids.size() == 2);
  CHECK(ids[0] == carbon);
  CHECK(ids[1] == ization);
  CHECK(tok.detokenize(ids) == " carbonization");
}

TEST_CASE("a pre-token equal to a vocabulary symbol is one token") {
  Vocabulary v = Vocabulary::base(BaseKind::wordpiece);
  const TokenId whole = v.add({Marker::word_initial, "molecules"});
  const Tokenizer tok(v);
  const auto ids = tok.tokenize(" molecules");
  REQUIRE(ids.size() == 1);
  CHECK(ids[0] == whole);
}

TEST_CASE("base symbols give per-byte fallback") {
  const Tokenizer tok(Vocabulary::base(BaseKind::wordpiece));
  const auto ids = tok.tokenize("ab cd");
  // plain a, ##b, word-initial c (absorbing the space), ##d
  REQUIRE(ids.size() == 4);
  CHECK(tok.vocab().symbol(ids[0]) == Symbol{Marker::plain, "a"});
  CHECK(tok.vocab().symbol(ids[1]) == Symbol{Marker::continuation, "b"});
  CHECK(tok.vocab().symbol(ids[2]) == Symbol{Marker::word_initial, "c"});
  CHECK(tok.vocab().symbol(ids[3]) == Symbol{Marker::continuation, "d"});
  CHECK(tok.detokenize(ids) == "ab cd");
}

TEST_CASE("detokenize rejects unknown ids, handles empty input") {
  const Tokenizer tok(Vocabulary::base(BaseKind::wordpiece));
  CHECK(tok.detokenize({}) == "");
  CHECK(tok.tokenize("").empty());
  const std::vector<TokenId> bad{99999};
  CHECK_THROWS_AS(tok.detokenize(bad), data_error);
}

TEST_CASE("round trip on arbitrary bytes") {
  std::mt19937_64 rng(5150);
  const Tokenizer base_tok(Vocabulary::base(BaseKind::wordpiece));
  for (int iter = 0; iter < 1000; ++iter) {
    std::string doc(rng() % 80, '\0');
    for (char& c : doc) c = static_cast<char>(rng() & 0xff);
    const auto ids = base_tok.tokenize(doc);
    CHECK(base_tok.detokenize(ids) == doc);
  }
}

TEST_CASE("token count per pre-token never exceeds its byte length") {
  std::mt19937_64 rng(81);
  const Tokenizer tok(Vocabulary::base(BaseKind::wordpiece));
  for (int iter = 0; iter < 200; ++iter) {
    std::string pretoken = random_bytes(rng, 1, 12, " abcdef");
    if (pretokenize(pretoken).size() > 2) continue;  // only single pre-tokens
    CHECK(tok.tokenize_pretoken(pretoken, TokenizeMode::longest_prefix).size() <=
          pretoken.size());
  }
}

TEST_CASE("greedy longest-prefix equals the position-scan reference") {
  std::mt19937_64 rng(777);
  const std::string_view alphabet = "abc x";
  for (int iter = 0; iter < 1500; ++iter) {
    const Vocabulary v = random_vocab(rng, alphabet);
    const Tokenizer tok(v);
    const std::string doc = random_bytes(rng, 0, 40, alphabet);
    const auto got = tok.tokenize(doc);
    const auto want = tokenize_reference(v, doc);
    REQUIRE(got == want);
    CHECK(tok.detokenize(got) == doc);
  }
}

TEST_CASE("longest-prefix requires continuation symbols") {
  const Tokenizer tok(Vocabulary::base(BaseKind::bpe));
  CHECK_THROWS_AS(tok.tokenize("ab", TokenizeMode::longest_prefix), data_error);
}

TEST_CASE("bpe mode requires merges") {
  const Tokenizer tok(Vocabulary::base(BaseKind::wordpiece));
  CHECK_THROWS_AS(tok.tokenize("ab", TokenizeMode::bpe_merges), data_error);
}

TEST_CASE("bpe merge replay and longest-prefix inference can disagree") {
  // A BPE vocabulary replayed through its merges and a BPE-learned
  // vocabulary applied with longest-prefix matching segment some inputs
  // differently, while both reproduce the bytes exactly.
  const auto docs = testgen::english_corpus(1001, 60000, 1500);
  const Vocabulary base512 = Vocabulary::base(BaseKind::bpe);
  const Tokenizer bpe(train_bpe(build_bpe_sequences(docs, base512), 1400, base512));
  const Vocabulary base768 = Vocabulary::base(BaseKind::wordpiece);
  const Tokenizer bpe_wp(train_bpe(build_bpe_sequences(docs, base768), 1400, base768));

  auto spans_of = [](const Tokenizer& tok, const std::vector<TokenId>& ids) {
    std::vector<std::string> spans;
    for (TokenId id : ids) spans.push_back(effective_bytes(tok.vocab().symbol(id)));
    return spans;
  };

  const auto probe = testgen::english_corpus(1002, 4000, 1000);
  std::size_t disagreements = 0;
  for (const Document& d : probe) {
    const BoundaryList bounds = pretokenize(d.bytes);
    for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
      const std::string pretoken = d.bytes.substr(bounds[b], bounds[b + 1] - bounds[b]);
      const auto ids_bpe = bpe.tokenize_pretoken(pretoken, TokenizeMode::bpe_merges);
      const auto ids_wp = bpe_wp.tokenize_pretoken(pretoken, TokenizeMode::longest_prefix);
      REQUIRE(bpe.detokenize(ids_bpe) == pretoken);
      REQUIRE(bpe_wp.detokenize(ids_wp) == pretoken);
      if (spans_of(bpe, ids_bpe) != spans_of(bpe_wp, ids_wp)) ++disagreements;
    }
  }
  CHECK(disagreements > 0);
}
