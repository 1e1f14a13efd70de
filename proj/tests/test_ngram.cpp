#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "bytespan/error.hpp"
#include "bytespan/ngram.hpp"

#include "support/textgen.hpp"

using namespace bytespan;

namespace {

std::vector<Document> docs_of(std::initializer_list<const char*> texts) {
  std::vector<Document> out;
  int i = 0;
  for (const char* t : texts) out.push_back({"d" + std::to_string(i++), t, std::nullopt});
  return out;
}

}  // namespace

TEST_CASE("hand-computed absolute-discount unigram") {
  // corpus "ab", order 1: events a, b, EOD once each; N = 3, T = 3, d = 0.75.
  // p(seen) = (1 - 0.75)/3 + 0.75/257; p(unseen) = 0.75/257.
  const NGramByteModel m = train_ngram(docs_of({"ab"}), 1, 0.75);
  const double p_seen = 1.0 / 12.0 + 3.0 / 1028.0;
  const double p_unseen = 3.0 / 1028.0;
  CHECK(m.probability("", 'a') == doctest::Approx(p_seen).epsilon(1e-12));
  CHECK(m.probability("", 'b') == doctest::Approx(p_seen).epsilon(1e-12));
  CHECK(m.probability("", NGramByteModel::kEndOfDoc) == doctest::Approx(p_seen).epsilon(1e-12));
  CHECK(m.probability("", 'z') == doctest::Approx(p_unseen).epsilon(1e-12));
}

TEST_CASE("order-1 scores are context independent") {
  const NGramByteModel m = train_ngram(docs_of({"abcabx"}), 1, 0.75);
  CHECK(m.probability("zzz", 'a') == m.probability("", 'a'));
  const SignalTrack t = m.score({"d", "aca", std::nullopt});
  CHECK(t.surprisal[0] == t.surprisal[2]);  // both 'a'
  CHECK(t.entropy[0] == t.entropy[1]);
  CHECK(t.entropy[1] == t.entropy[2]);
}

TEST_CASE("an untrained model is uniform over 257 outcomes") {
  const NGramByteModel m(5, 0.75);
  const double expected = std::log2(257.0);
  const SignalTrack t = m.score({"d", "hello world", std::nullopt});
  for (double s : t.surprisal) CHECK(s == doctest::Approx(expected).epsilon(1e-12));
  for (double h : t.entropy) CHECK(h == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("a near-deterministic continuation has tiny surprisal") {
  const std::string aaaa(1000, 'a');
  const NGramByteModel m = train_ngram(docs_of({aaaa.c_str()}), 2, 0.75);
  const SignalTrack t = m.score({"d", aaaa, std::nullopt});
  for (std::size_t i = 1; i < t.surprisal.size(); ++i) CHECK(t.surprisal[i] < 0.1);
}

TEST_CASE("surprisal and entropy are nonnegative and finite everywhere") {
  const auto docs = testgen::english_corpus(51, 8000, 800);
  const NGramByteModel m = train_ngram(docs, 3, 0.75);
  std::mt19937_64 rng(13);
  for (int iter = 0; iter < 30; ++iter) {
    std::string bytes(1 + rng() % 40, '\0');
    for (char& c : bytes) c = static_cast<char>(rng() & 0xff);
    const SignalTrack t = m.score({"r", bytes, std::nullopt});
    t.validate();  // checks lengths, finiteness and nonnegativity
  }
}

TEST_CASE("every context distribution sums to one with full support") {
  const auto docs = testgen::english_corpus(53, 6000, 700);
  const NGramByteModel m = train_ngram(docs, 4, 0.75);
  const std::string probes[] = {"", "t", "th", "the", " th", "zq\x01", "\xff\xfe"};
  for (const std::string& ctx : probes) {
    const std::vector<double> p = m.distribution(ctx);
    REQUIRE(p.size() == 257);
    double sum = 0.0, min = 1.0;
    for (double v : p) {
      sum += v;
      min = std::min(min, v);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(min > 0.0);
  }
}

TEST_CASE("expected surprisal under the model equals its entropy") {
  const auto docs = testgen::english_corpus(57, 5000, 600);
  const NGramByteModel m = train_ngram(docs, 3, 0.75);
  const Document probe{"p", "the theory", std::nullopt};
  const SignalTrack t = m.score(probe);
  for (std::size_t i = 0; i < probe.bytes.size(); ++i) {
    const std::size_t k = std::min<std::size_t>(i, 2);
    const std::string ctx = probe.bytes.substr(i - k, k);
    double expected = 0.0;
    for (unsigned outcome = 0; outcome < NGramByteModel::kAlphabet; ++outcome) {
      const double p = m.probability(ctx, outcome);
      expected += p * -std::log2(p);
    }
    CHECK(expected == doctest::Approx(t.entropy[i]).epsilon(1e-9));
  }
}

TEST_CASE("more exposure never raises continuation surprisal") {
  double prev = std::numeric_limits<double>::infinity();
  for (int copies : {1, 2, 5, 10, 30}) {
    std::vector<Document> docs = docs_of({"qxyq zz"});
    for (int i = 0; i < copies; ++i)
      docs.push_back({"x" + std::to_string(i), "xyz", std::nullopt});
    const NGramByteModel m = train_ngram(docs, 3, 0.75);
    const double s = -std::log2(m.probability("xy", 'z'));
    CHECK(s <= prev + 1e-12);
    prev = s;
  }
}

TEST_CASE("training is deterministic and worker independent") {
  const auto docs = testgen::english_corpus(59, 12000, 600);
  const NGramByteModel a = train_ngram(docs, 4, 0.75, 1);
  const NGramByteModel b = train_ngram(docs, 4, 0.75, 4);
  CHECK(a == b);
  const auto t1 = a.score_corpus(docs, 1);
  const auto t4 = a.score_corpus(docs, 4);
  REQUIRE(t1.size() == t4.size());
  for (std::size_t i = 0; i < t1.size(); ++i) {
    CHECK(t1[i].surprisal == t4[i].surprisal);
    CHECK(t1[i].entropy == t4[i].entropy);
  }
}

TEST_CASE("model save/load scores identically") {
  const auto docs = testgen::english_corpus(61, 4000, 500);
  const NGramByteModel m = train_ngram(docs, 3, 0.6);
  const auto path = (std::filesystem::temp_directory_path() / "bytespan_ngram.json").string();
  m.save(path);
  const NGramByteModel back = NGramByteModel::load(path);
  CHECK(back == m);
  const Document probe{"p", "probe text 123", std::nullopt};
  const SignalTrack a = m.score(probe);
  const SignalTrack b = back.score(probe);
  CHECK(a.surprisal == b.surprisal);
  CHECK(a.entropy == b.entropy);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(train_ngram({}, 5, 0.75), data_error);
  const auto docs = docs_of({"ab"});
  CHECK_THROWS_AS(train_ngram(docs, 0, 0.75), data_error);
  CHECK_THROWS_AS(train_ngram(docs, 8, 0.75), data_error);
  CHECK_THROWS_AS(train_ngram(docs, 3, 0.0), data_error);
  CHECK_THROWS_AS(train_ngram(docs, 3, 1.0), data_error);
  const NGramByteModel m = train_ngram(docs, 2, 0.75);
  CHECK_THROWS_AS(m.probability("", 300), data_error);
}
