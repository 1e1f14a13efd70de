#include "support/textgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace bytespan::testgen {

namespace {

const std::vector<std::string> kFunctionWords = {
    "the", "a", "of", "to", "and", "in", "that", "it", "is", "was", "for",
    "on", "are", "with", "as", "they", "be", "at", "one", "have", "this",
    "from", "or", "had", "by", "not", "but", "what", "all", "were", "when",
    "we", "there", "can", "an", "which", "their", "said", "if", "will"};

const std::vector<std::string> kRealStems = {
    "train",  "bright", "dark",   "form",   "port",   "act",    "move",
    "read",   "write",  "play",   "work",   "help",   "call",   "turn",
    "start",  "open",   "close",  "count",  "press",  "paint",  "build",
    "clean",  "clear",  "cover",  "cross",  "dream",  "dress",  "drink",
    "drive",  "earn",   "farm",   "fill",   "fix",    "fold",   "follow",
    "hand",   "host",   "hunt",   "join",   "jump",   "kind",   "land",
    "last",   "learn",  "lift",   "light",  "link",   "list",   "load",
    "lock",   "long",   "look",   "mark",   "match",  "mind",   "mix",
    "near",   "note",   "order",  "pack",   "part",   "pass",   "pick",
    "plan",   "plant",  "point",  "pull",   "push",   "rain",   "reach",
    "rest",   "ring",   "roll",   "rush",   "sail",   "salt",   "save",
    "search", "seat",   "shape",  "share",  "ship",   "shop",   "show",
    "sign",   "sleep",  "slow",   "smart",  "smooth", "sort",   "sound",
    "speak",  "spell",  "spend",  "stand",  "step",   "stick",  "store",
    "storm",  "talk",   "teach",  "test",   "thank",  "think",  "touch",
    "trade",  "trust",  "walk",   "want",   "warm",   "wash",   "watch",
    "water",  "wind",   "wish",   "wonder", "sun",    "moon",   "snow",
    "stone",  "wood",   "field",  "house",  "road",   "river",  "cloud"};

const std::vector<std::string> kSuffixes = {
    "s",    "ed",   "ing",  "ly",    "er",   "est",  "tion", "ness",
    "ment", "able", "ist",  "ism",   "ize",  "ful",  "less", "ous",
    "ive",  "al",   "ic",   "ity",   "ance", "ship", "hood", "ward"};

// Extra pseudo-stems widen the form space so full word forms outnumber any
// desk-scale vocabulary; built once, deterministically.
std::vector<std::string> pseudo_stems() {
  static const std::vector<std::string> stems = [] {
    const std::array<const char*, 20> onsets = {"b",  "br", "c",  "cr", "d",  "dr", "f",
                                                "fl", "g",  "gr", "m",  "n",  "p",  "pr",
                                                "s",  "st", "t",  "tr", "v",  "w"};
    const std::array<const char*, 6> nuclei = {"a", "e", "i", "o", "u", "ea"};
    const std::array<const char*, 12> codas = {"b", "ck", "d",  "g",  "l",  "m",
                                               "n", "nd", "nt", "p",  "rd", "st"};
    std::vector<std::string> out;
    std::mt19937_64 rng(0x5eed);
    while (out.size() < 320) {
      std::string s = onsets[rng() % onsets.size()];
      s += nuclei[rng() % nuclei.size()];
      s += codas[rng() % codas.size()];
      if (rng() % 3 == 0) {
        s += nuclei[rng() % nuclei.size()];
        s += codas[rng() % codas.size()];
      }
      if (std::find(out.begin(), out.end(), s) == out.end() &&
          std::find(kRealStems.begin(), kRealStems.end(), s) == kRealStems.end())
        out.push_back(s);
    }
    return out;
  }();
  return stems;
}

std::vector<std::string> all_stems() {
  std::vector<std::string> stems = kRealStems;
  const std::vector<std::string> extra = pseudo_stems();
  stems.insert(stems.end(), extra.begin(), extra.end());
  return stems;
}

// Zipf-ish sampler over [0, n): weight 1 / (rank + 2)^s.
class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double s) {
    cumulative_.reserve(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += 1.0 / std::pow(static_cast<double>(i + 2), s);
      cumulative_.push_back(acc);
    }
  }
  std::size_t operator()(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> dist(0.0, cumulative_.back());
    const double u = dist(rng);
    return std::lower_bound(cumulative_.begin(), cumulative_.end(), u) - cumulative_.begin();
  }

 private:
  std::vector<double> cumulative_;
};

struct EnglishGen {
  std::vector<std::string> stems = all_stems();
  ZipfSampler stem_sampler{stems.size(), 1.05};
  ZipfSampler suffix_sampler{kSuffixes.size(), 0.9};
  ZipfSampler function_sampler{kFunctionWords.size(), 1.0};

  std::string word(std::mt19937_64& rng) {
    const unsigned roll = rng() % 100;
    if (roll < 42) return kFunctionWords[function_sampler(rng)];
    if (roll < 44) return std::to_string(1800 + rng() % 300);  // a year-like number
    std::string w = stems[stem_sampler(rng)];
    if (roll < 50) {  // compound
      w += stems[stem_sampler(rng)];
      if (rng() % 3 == 0) w += kSuffixes[suffix_sampler(rng)];
      return w;
    }
    const unsigned n_suffix = roll < 72 ? 1 : (roll < 80 ? 2 : 0);
    for (unsigned i = 0; i < n_suffix; ++i) w += kSuffixes[suffix_sampler(rng)];
    return w;
  }

  std::string sentence(std::mt19937_64& rng) {
    const std::size_t n = 6 + rng() % 14;
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
      std::string w = word(rng);
      if (i == 0 && rng() % 10 < 7 && w[0] >= 'a' && w[0] <= 'z')
        w[0] = static_cast<char>(w[0] - 'a' + 'A');
      if (i > 0) out += ' ';
      out += w;
      if (i + 1 < n && rng() % 12 == 0) out += ',';
    }
    out += rng() % 10 == 0 ? '?' : '.';
    return out;
  }

  std::string document(std::mt19937_64& rng, std::size_t target_bytes) {
    std::string out;
    while (out.size() < target_bytes) {
      if (!out.empty()) out += rng() % 6 == 0 ? "\n" : " ";
      out += sentence(rng);
    }
    return out;
  }
};

}  // namespace

std::vector<Document> english_corpus(std::uint64_t seed, std::size_t total_bytes,
                                     std::size_t doc_bytes, const std::string& id_prefix,
                                     const std::string& language) {
  EnglishGen gen;
  std::mt19937_64 rng(seed);
  std::vector<Document> docs;
  std::size_t written = 0;
  while (written < total_bytes) {
    Document d;
    d.doc_id = id_prefix + "-" + std::to_string(docs.size());
    d.language = language;
    d.bytes = gen.document(rng, std::min(doc_bytes, total_bytes - written));
    written += d.bytes.size();
    docs.push_back(std::move(d));
  }
  return docs;
}

std::vector<GoldSegmentation> english_gold() {
  EnglishGen gen;
  std::mt19937_64 rng(0x601d);
  std::vector<GoldSegmentation> out;
  auto push = [&out](std::string resource, std::vector<std::string> segments) {
    GoldSegmentation g;
    g.resource = std::move(resource);
    for (const std::string& s : segments) g.word += s;
    g.segments = std::move(segments);
    out.push_back(std::move(g));
  };
  // Stems sampled uniformly so the fixture covers the frequency tail, where
  // full word forms are not memorised outright.
  for (std::size_t i = 0; i < 60; ++i) {
    const std::string& stem = gen.stems[rng() % gen.stems.size()];
    const std::string& suffix = kSuffixes[gen.suffix_sampler(rng)];
    if (rng() % 4 == 0) {
      const std::string& second = kSuffixes[gen.suffix_sampler(rng)];
      push("derivation", {stem, suffix, second});
    } else {
      push("derivation", {stem, suffix});
    }
  }
  for (std::size_t i = 0; i < 30; ++i) {
    const std::string& a = gen.stems[rng() % gen.stems.size()];
    const std::string& b = gen.stems[rng() % gen.stems.size()];
    push("compounds", {a, b});
  }
  return out;
}

namespace {

// Latin-script second language with its own stems and endings.
struct RomanceGen {
  std::vector<std::string> stems;
  ZipfSampler stem_sampler;
  const std::vector<std::string> endings = {"o", "os", "a", "as", "ar", "ando",
                                            "ado", "ente", "cion", "dad"};
  ZipfSampler ending_sampler{endings.size(), 0.9};
  const std::vector<std::string> function_words = {"el", "la", "de", "que", "y",
                                                   "en", "un", "por", "con", "una"};
  ZipfSampler function_sampler{function_words.size(), 1.0};

  RomanceGen() : stems(make_stems()), stem_sampler(stems.size(), 1.05) {}

  static std::vector<std::string> make_stems() {
    const std::array<const char*, 12> onsets = {"b", "c", "d", "f", "g", "l",
                                                "m", "n", "p", "r", "s", "t"};
    const std::array<const char*, 5> nuclei = {"a", "e", "i", "o", "u"};
    std::vector<std::string> out;
    std::mt19937_64 rng(0xca5a);
    while (out.size() < 150) {
      std::string s = onsets[rng() % onsets.size()];
      s += nuclei[rng() % nuclei.size()];
      s += onsets[rng() % onsets.size()];
      if (rng() % 2 == 0) {
        s += nuclei[rng() % nuclei.size()];
        s += onsets[rng() % onsets.size()];
      }
      if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
    return out;
  }

  std::string word(std::mt19937_64& rng) {
    if (rng() % 100 < 40) return function_words[function_sampler(rng)];
    return stems[stem_sampler(rng)] + endings[ending_sampler(rng)];
  }
};

// Language with a distinct orthography: every letter is a two-byte UTF-8
// Cyrillic character, so its spans share no bytes with the Latin languages.
struct CyrillicGen {
  std::vector<std::string> stems;
  ZipfSampler stem_sampler;
  std::vector<std::string> endings;
  ZipfSampler ending_sampler;

  CyrillicGen()
      : stems(make_stems()),
        stem_sampler(stems.size(), 1.05),
        endings(make_endings()),
        ending_sampler(endings.size(), 0.9) {}

  static std::vector<std::string> syllable_pool() {
    // onset consonants x vowels, all two-byte UTF-8
    const std::array<const char*, 12> consonants = {
        "\xd0\xb1", "\xd0\xb2", "\xd0\xb3", "\xd0\xb4", "\xd0\xba", "\xd0\xbb",
        "\xd0\xbc", "\xd0\xbd", "\xd1\x80", "\xd1\x81", "\xd1\x82", "\xd0\xbf"};
    const std::array<const char*, 5> vowels = {"\xd0\xb0", "\xd0\xb5", "\xd0\xb8",
                                               "\xd0\xbe", "\xd1\x83"};
    std::vector<std::string> out;
    for (const char* c : consonants)
      for (const char* v : vowels) out.push_back(std::string(c) + v);
    return out;
  }

  static std::vector<std::string> make_stems() {
    const std::vector<std::string> syllables = syllable_pool();
    std::vector<std::string> out;
    std::mt19937_64 rng(0xc0de);
    while (out.size() < 300) {
      std::string s = syllables[rng() % syllables.size()];
      s += syllables[rng() % syllables.size()];
      if (rng() % 2 == 0) s += syllables[rng() % syllables.size()];
      if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
    return out;
  }

  static std::vector<std::string> make_endings() {
    return {"\xd0\xbe\xd0\xb2",                  // ov
            "\xd0\xb0\xd1\x82\xd1\x8c",          // at'
            "\xd0\xbd\xd1\x8b\xd0\xb9",          // nyj
            "\xd0\xb5\xd0\xbd",                  // en
            "\xd0\xb8",                          // i
            "\xd0\xb0\xd0\xbc\xd0\xb8",          // ami
            "\xd0\xb5\xd0\xbd\xd0\xb8\xd0\xb5",  // enie
            "\xd1\x83"};                         // u
  }

  std::string word(std::mt19937_64& rng) {
    std::string w = stems[stem_sampler(rng)];
    if (rng() % 100 < 70) w += endings[ending_sampler(rng)];
    return w;
  }
};

template <typename Gen>
std::string make_doc(Gen& gen, std::mt19937_64& rng, std::size_t target_bytes) {
  std::string out;
  std::size_t in_sentence = 0;
  while (out.size() < target_bytes) {
    if (!out.empty()) out += ' ';
    out += gen.word(rng);
    if (++in_sentence >= 8 + rng() % 8) {
      out += '.';
      in_sentence = 0;
    }
  }
  return out;
}

}  // namespace

std::vector<Document> multilingual_corpus(std::uint64_t seed, std::size_t total_bytes,
                                          double rare_share, std::size_t doc_bytes) {
  EnglishGen en;
  RomanceGen es;
  CyrillicGen ru;
  std::mt19937_64 rng(seed);
  std::vector<Document> docs;
  const std::size_t rare_bytes = static_cast<std::size_t>(total_bytes * rare_share);
  const std::size_t latin_bytes = (total_bytes - rare_bytes) / 2;

  std::size_t written = 0;
  while (written < latin_bytes) {
    Document d;
    d.doc_id = "en-" + std::to_string(docs.size());
    d.language = "en";
    d.bytes = en.document(rng, std::min(doc_bytes, latin_bytes - written));
    written += d.bytes.size();
    docs.push_back(std::move(d));
  }
  written = 0;
  while (written < latin_bytes) {
    Document d;
    d.doc_id = "es-" + std::to_string(docs.size());
    d.language = "es";
    d.bytes = make_doc(es, rng, std::min(doc_bytes, latin_bytes - written));
    written += d.bytes.size();
    docs.push_back(std::move(d));
  }
  written = 0;
  while (written < rare_bytes) {
    Document d;
    d.doc_id = "ru-" + std::to_string(docs.size());
    d.language = "ru";
    d.bytes = make_doc(ru, rng, std::min(doc_bytes, rare_bytes - written));
    written += d.bytes.size();
    docs.push_back(std::move(d));
  }
  return docs;
}

}  // namespace bytespan::testgen
