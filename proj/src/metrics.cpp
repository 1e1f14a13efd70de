#include "bytespan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "bytespan/error.hpp"

namespace bytespan {

namespace {

bool whitespace_only(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return is_whitespace_byte(static_cast<unsigned char>(c)); });
}

// Tokenisation cache keyed by pre-token content; corpora repeat words heavily.
class PretokenCache {
 public:
  PretokenCache(const Tokenizer& tok, TokenizeMode mode) : tok_(tok), mode_(mode) {}

  const std::vector<TokenId>& get(std::string_view pretoken) {
    auto it = cache_.find(pretoken);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(std::string(pretoken), tok_.tokenize_pretoken(pretoken, mode_))
        .first->second;
  }

 private:
  struct SvHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };
  struct SvEq {
    using is_transparent = void;
    bool operator()(std::string_view a, std::string_view b) const { return a == b; }
  };
  const Tokenizer& tok_;
  TokenizeMode mode_;
  std::unordered_map<std::string, std::vector<TokenId>, SvHash, SvEq> cache_;
};

}  // namespace

FertilityResult fertility(const Tokenizer& tok, std::span<const Document> docs,
                          TokenizeMode mode) {
  FertilityResult r;
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> lang_acc;  // tokens, words
  PretokenCache cache(tok, mode);
  for (const Document& doc : docs) {
    const BoundaryList bounds = pretokenize(doc.bytes);
    std::uint64_t doc_tokens = 0, doc_words = 0;
    for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
      const std::string_view pretoken =
          std::string_view(doc.bytes).substr(bounds[b], bounds[b + 1] - bounds[b]);
      if (whitespace_only(pretoken)) continue;
      doc_tokens += cache.get(pretoken).size();
      ++doc_words;
    }
    r.tokens += doc_tokens;
    r.words += doc_words;
    if (doc.language) {
      auto& acc = lang_acc[*doc.language];
      acc.first += doc_tokens;
      acc.second += doc_words;
    }
  }
  if (r.words == 0) throw data_error("fertility is undefined: corpus contains no words");
  r.overall = static_cast<double>(r.tokens) / static_cast<double>(r.words);
  for (const auto& [lang, acc] : lang_acc)
    if (acc.second > 0)
      r.per_language[lang] = static_cast<double>(acc.first) / static_cast<double>(acc.second);
  return r;
}

TokenCountResult count_tokens(const Tokenizer& tok, std::span<const Document> docs,
                              TokenizeMode mode) {
  TokenCountResult r;
  r.counts.assign(tok.vocab().size(), 0);
  PretokenCache cache(tok, mode);
  for (const Document& doc : docs) {
    std::vector<std::uint64_t>* lang = nullptr;
    if (doc.language) {
      auto& v = r.per_language[*doc.language];
      if (v.empty()) v.assign(tok.vocab().size(), 0);
      lang = &v;
    }
    const BoundaryList bounds = pretokenize(doc.bytes);
    for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
      const std::string_view pretoken =
          std::string_view(doc.bytes).substr(bounds[b], bounds[b + 1] - bounds[b]);
      for (TokenId id : cache.get(pretoken)) {
        ++r.counts[id];
        if (lang) ++(*lang)[id];
      }
    }
  }
  return r;
}

namespace {

double normalised(double entropy_bits, std::size_t vocab_size) {
  return entropy_bits / std::log2(static_cast<double>(vocab_size));
}

std::uint64_t total_of(std::span<const std::uint64_t> counts) {
  std::uint64_t total = 0;
  for (std::uint64_t c : counts) total += c;
  return total;
}

}  // namespace

double renyi_efficiency(std::span<const std::uint64_t> counts, double alpha,
                        std::size_t vocab_size) {
  if (vocab_size < 2) throw data_error("renyi efficiency needs a vocabulary of at least 2");
  if (alpha == 1.0)
    throw data_error("alpha = 1 is the Shannon limit; use shannon_efficiency");
  const std::uint64_t total = total_of(counts);
  if (total == 0) throw data_error("renyi efficiency is undefined for empty counts");
  double sum = 0.0;
  for (std::uint64_t c : counts) {
    if (c == 0) continue;
    sum += std::pow(static_cast<double>(c) / static_cast<double>(total), alpha);
  }
  const double h_alpha = std::log2(sum) / (1.0 - alpha);
  return normalised(h_alpha, vocab_size);
}

double shannon_efficiency(std::span<const std::uint64_t> counts, std::size_t vocab_size) {
  if (vocab_size < 2) throw data_error("shannon efficiency needs a vocabulary of at least 2");
  const std::uint64_t total = total_of(counts);
  if (total == 0) throw data_error("shannon efficiency is undefined for empty counts");
  double h = 0.0;
  for (std::uint64_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return normalised(h, vocab_size);
}

namespace {

using json = nlohmann::json;

json parse_jsonl_line(const std::string& line, const std::string& path, std::size_t lineno) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw data_error(path + ":" + std::to_string(lineno) + ": malformed record: " + e.what());
  }
}

}  // namespace

std::vector<GoldSegmentation> load_gold_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open gold segmentation file: " + path);
  std::vector<GoldSegmentation> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json rec = parse_jsonl_line(line, path, lineno);
    GoldSegmentation g;
    g.word = rec.at("word").get<std::string>();
    g.segments = rec.at("segments").get<std::vector<std::string>>();
    g.resource = rec.at("resource").get<std::string>();
    std::string joined;
    for (const std::string& s : g.segments) {
      if (s.empty())
        throw data_error(path + ":" + std::to_string(lineno) + ": empty gold segment");
      joined += s;
    }
    if (joined != g.word)
      throw data_error(path + ":" + std::to_string(lineno) +
                       ": segments do not concatenate to the word");
    out.push_back(std::move(g));
  }
  return out;
}

namespace {

// Cut positions a token sequence induces inside `word` when tokenised in
// word-initial position (input " " + word).
std::set<std::size_t> predicted_boundaries(const Tokenizer& tok, const std::string& word,
                                           TokenizeMode mode) {
  const std::vector<TokenId> ids = tok.tokenize(" " + word, mode);
  std::set<std::size_t> cuts;
  std::size_t offset = 0;  // effective bytes consumed, including the leading space
  for (TokenId id : ids) {
    offset += effective_bytes(tok.vocab().symbol(id)).size();
    const std::size_t pos = offset - 1;  // position within the word
    if (pos > 0 && pos < word.size()) cuts.insert(pos);
  }
  return cuts;
}

double boundary_f1(const std::set<std::size_t>& pred, const std::set<std::size_t>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  std::size_t hits = 0;
  for (std::size_t p : pred)
    if (gold.count(p)) ++hits;
  if (hits == 0) return 0.0;
  const double precision = static_cast<double>(hits) / static_cast<double>(pred.size());
  const double recall = static_cast<double>(hits) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

bool segment_in_vocab(const Vocabulary& vocab, const std::string& segment) {
  return vocab.contains({Marker::plain, segment}) ||
         vocab.contains({Marker::continuation, segment}) ||
         vocab.contains({Marker::word_initial, segment});
}

}  // namespace

MorphResult morph_alignment(const Tokenizer& tok, std::span<const GoldSegmentation> gold,
                            TokenizeMode mode) {
  if (gold.empty()) throw data_error("morphological alignment needs at least one resource");
  struct ResourceAcc {
    double f1_sum = 0.0;
    std::uint64_t retained = 0;
    std::uint64_t total = 0;
  };
  std::map<std::string, ResourceAcc> acc;

  for (const GoldSegmentation& g : gold) {
    ResourceAcc& a = acc[g.resource];
    ++a.total;
    const bool covered = std::all_of(
        g.segments.begin(), g.segments.end(),
        [&](const std::string& s) { return segment_in_vocab(tok.vocab(), s); });
    if (!covered) continue;
    std::set<std::size_t> gold_cuts;
    std::size_t off = 0;
    for (std::size_t i = 0; i + 1 < g.segments.size(); ++i) {
      off += g.segments[i].size();
      gold_cuts.insert(off);
    }
    a.f1_sum += boundary_f1(predicted_boundaries(tok, g.word, mode), gold_cuts);
    ++a.retained;
  }

  MorphResult r;
  std::uint64_t retained_total = 0, word_total = 0;
  double macro_sum = 0.0;
  std::size_t macro_n = 0;
  for (const auto& [resource, a] : acc) {
    retained_total += a.retained;
    word_total += a.total;
    r.per_resource_coverage[resource] =
        static_cast<double>(a.retained) / static_cast<double>(a.total);
    if (a.retained == 0) {
      r.warnings.push_back("resource '" + resource +
                           "' has no covered words; excluded from the macro average");
      continue;
    }
    const double f1 = a.f1_sum / static_cast<double>(a.retained);
    r.per_resource_f1[resource] = f1;
    macro_sum += f1;
    ++macro_n;
  }
  if (macro_n == 0)
    throw data_error("morphological alignment is undefined: no resource has covered words");
  r.macro_f1 = macro_sum / static_cast<double>(macro_n);
  r.coverage = static_cast<double>(retained_total) / static_cast<double>(word_total);
  return r;
}

std::vector<LexicalDecisionRecord> load_lexdec_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open lexical decision file: " + path);
  std::vector<LexicalDecisionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json rec = parse_jsonl_line(line, path, lineno);
    LexicalDecisionRecord r;
    r.item = rec.at("item").get<std::string>();
    r.is_word = rec.at("is_word").get<bool>();
    r.rt_ms = rec.at("rt_ms").get<double>();
    r.accuracy = rec.at("accuracy").get<double>();
    if (!std::isfinite(r.rt_ms) || !std::isfinite(r.accuracy) || r.accuracy < 0.0 ||
        r.accuracy > 1.0)
      throw data_error(path + ":" + std::to_string(lineno) + ": bad rt_ms/accuracy values");
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

// Pearson r; returns false when either side has zero variance.
bool pearson(std::span<const double> x, std::span<const double> y, double& out) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return false;
  out = sxy / std::sqrt(sxx * syy);
  return true;
}

}  // namespace

CognitiveResult cognitive_plausibility(const Tokenizer& tok,
                                       std::span<const LexicalDecisionRecord> records,
                                       TokenizeMode mode) {
  std::vector<double> word_counts, word_rt, word_acc;
  std::vector<double> nonword_counts, nonword_rt, nonword_acc;
  for (const LexicalDecisionRecord& r : records) {
    const double n_tokens =
        static_cast<double>(tok.tokenize(" " + r.item, mode).size());
    if (r.is_word) {
      word_counts.push_back(n_tokens);
      word_rt.push_back(r.rt_ms);
      word_acc.push_back(r.accuracy);
    } else {
      nonword_counts.push_back(n_tokens);
      nonword_rt.push_back(r.rt_ms);
      nonword_acc.push_back(r.accuracy);
    }
  }
  if (word_counts.size() < 3 || nonword_counts.size() < 3)
    throw data_error("cognitive plausibility needs at least 3 words and 3 nonwords");

  CognitiveResult res;
  double sum = 0.0;
  std::size_t kept = 0;
  auto condition = [&](const char* name, std::span<const double> x, std::span<const double> y,
                       double sign) {
    double r = 0.0;
    if (!pearson(x, y, r)) {
      res.warnings.push_back(std::string("condition '") + name +
                             "' dropped: zero variance");
      return;
    }
    res.per_condition[name] = r;
    sum += sign * r;
    ++kept;
  };
  // Word conditions are expected to correlate negatively with token count,
  // nonword conditions positively; flip signs so agreement scores high.
  condition("words_rt", word_counts, word_rt, -1.0);
  condition("words_accuracy", word_counts, word_acc, -1.0);
  condition("nonwords_rt", nonword_counts, nonword_rt, +1.0);
  condition("nonwords_accuracy", nonword_counts, nonword_acc, +1.0);
  if (kept == 0)
    throw data_error("cognitive plausibility is undefined: all conditions degenerate");
  res.score = sum / static_cast<double>(kept);
  return res;
}

std::map<std::size_t, std::uint64_t> token_length_distribution(const Vocabulary& vocab) {
  std::map<std::size_t, std::uint64_t> hist;
  for (const Symbol& s : vocab.symbols()) ++hist[s.bytes.size()];
  return hist;
}

double vocab_overlap(const Vocabulary& v1, const Vocabulary& v2) {
  const Vocabulary& small = v1.size() <= v2.size() ? v1 : v2;
  const Vocabulary& large = v1.size() <= v2.size() ? v2 : v1;
  std::size_t shared = 0;
  for (const Symbol& s : small.symbols())
    if (large.contains(s)) ++shared;
  const std::size_t denom = std::min(v1.size(), v2.size());
  if (denom == 0) return 0.0;
  return static_cast<double>(shared) / static_cast<double>(denom);
}

std::string MetricReport::to_json_string() const {
  nlohmann::ordered_json j;
  j["metrics"] = values;
  nlohmann::ordered_json breakdown_json = nlohmann::ordered_json::object();
  for (const auto& [name, rows] : breakdowns) breakdown_json[name] = rows;
  j["breakdowns"] = std::move(breakdown_json);
  j["config"] = config;
  j["vocab_fingerprint"] = vocab_fingerprint;
  j["warnings"] = warnings;
  return j.dump(2) + "\n";
}

void write_length_histogram_tsv(const std::map<std::size_t, std::uint64_t>& hist,
                                const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot open tsv for writing: " + path);
  out << "length\tcount\n";
  for (const auto& [len, count] : hist) out << len << '\t' << count << '\n';
  if (!out) throw data_error("failed writing tsv: " + path);
}

void write_breakdown_tsv(const std::string& key_name, const std::string& value_name,
                         const std::map<std::string, double>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot open tsv for writing: " + path);
  out << key_name << '\t' << value_name << '\n';
  char buf[64];
  for (const auto& [key, value] : rows) {
    std::snprintf(buf, sizeof buf, "%.6f", value);
    out << key << '\t' << buf << '\n';
  }
  if (!out) throw data_error("failed writing tsv: " + path);
}

}  // namespace bytespan
