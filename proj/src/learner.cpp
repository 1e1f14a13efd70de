#include "bytespan/learner.hpp"

#include <algorithm>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "bytespan/bpe.hpp"
#include "bytespan/error.hpp"
#include "bytespan/tokenizer.hpp"

namespace bytespan {

void SpanCountTable::merge(SpanCountTable&& other) {
  for (auto& [sym, count] : other.counts) counts[sym] += count;
  for (auto& [lang, sub] : other.per_language) {
    SpanCounts& mine = per_language[lang];
    for (auto& [sym, count] : sub) mine[sym] += count;
  }
}

Symbol span_symbol(std::string_view doc_bytes, const Span& span, bool starts_pretoken) {
  std::string bytes(doc_bytes.substr(span.start, span.length));
  if (!starts_pretoken) return {Marker::continuation, std::move(bytes)};
  const unsigned char first = static_cast<unsigned char>(bytes.front());
  const bool doc_start = span.start == 0;
  if (!doc_start && !is_whitespace_byte(first))
    return {Marker::plain, std::move(bytes)};  // glued to the previous pre-token
  if (first == ' ' && bytes.size() >= 2)
    return {Marker::word_initial, bytes.substr(1)};
  if (is_whitespace_byte(first)) return {Marker::plain, std::move(bytes)};
  return {Marker::word_initial, std::move(bytes)};  // document-initial word
}

namespace {

void count_track(const SignalTrack& track, const ConstraintConfig& cfg, SpanCountTable& table) {
  const std::vector<Span> spans = segment(track, cfg);
  SpanCounts* lang_counts =
      track.language ? &table.per_language[*track.language] : nullptr;
  std::size_t bi = 0;  // boundary cursor; boundaries are sorted and start at 0
  for (const Span& span : spans) {
    while (bi < track.boundaries.size() && track.boundaries[bi] < span.start) ++bi;
    const bool starts_pretoken =
        bi < track.boundaries.size() && track.boundaries[bi] == span.start;
    Symbol sym = span_symbol(track.bytes, span, starts_pretoken);
    if (lang_counts) ++(*lang_counts)[sym];
    ++table.counts[std::move(sym)];
  }
}

}  // namespace

SpanCountTable count_spans(std::span<const SignalTrack> tracks, const ConstraintConfig& cfg,
                           unsigned workers) {
  cfg.validate();
  SpanCountTable table;
  const bool needs_global =
      cfg.kind == ConstraintKind::global || cfg.kind == ConstraintKind::combined;
  table.constraint = to_string(cfg.kind);
  table.signal = to_string(cfg.signal);
  if (needs_global) table.theta_g = cfg.theta_g;
  table.theta_m = cfg.theta_m;
  table.fingerprint = tracks_fingerprint(tracks);

  if (workers <= 1 || tracks.size() < 2) {
    for (const SignalTrack& t : tracks) count_track(t, cfg, table);
    return table;
  }

  const unsigned n = std::min<unsigned>(workers, static_cast<unsigned>(tracks.size()));
  std::vector<SpanCountTable> parts(n);
  std::vector<std::thread> threads;
  threads.reserve(n);
  for (unsigned w = 0; w < n; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = w; i < tracks.size(); i += n) count_track(tracks[i], cfg, parts[w]);
    });
  }
  for (auto& t : threads) t.join();
  for (auto& part : parts) table.merge(std::move(part));  // fixed order: deterministic
  return table;
}

namespace {

struct Candidate {
  Symbol symbol;
  std::uint64_t count;
};

// count desc, shorter bytes first, lexicographic bytes, marker.
bool candidate_before(const Candidate& a, const Candidate& b) {
  if (a.count != b.count) return a.count > b.count;
  if (a.symbol.bytes.size() != b.symbol.bytes.size())
    return a.symbol.bytes.size() < b.symbol.bytes.size();
  if (a.symbol.bytes != b.symbol.bytes) return a.symbol.bytes < b.symbol.bytes;
  return a.symbol.marker < b.symbol.marker;
}

std::vector<Candidate> sorted_candidates(const SpanCounts& counts, const Vocabulary& base,
                                         std::uint64_t theta_f) {
  std::vector<Candidate> out;
  out.reserve(counts.size());
  for (const auto& [sym, count] : counts) {
    if (count < theta_f) continue;
    if (base.contains(sym)) continue;  // single-byte spans live in the base
    out.push_back({sym, count});
  }
  std::sort(out.begin(), out.end(), candidate_before);
  return out;
}

void stamp(VocabMetadata& meta, const SpanCountTable& table) {
  meta.constraint = table.constraint;
  meta.signal = table.signal;
  meta.theta_g = table.theta_g;
  meta.theta_m = table.theta_m;
  meta.corpus_fingerprint = table.fingerprint;
}

}  // namespace

Vocabulary learn_frequency(const SpanCountTable& table, std::size_t target,
                           std::uint64_t theta_f) {
  if (target < 768) throw data_error("target vocabulary size must be at least 768");
  Vocabulary v = Vocabulary::base(BaseKind::wordpiece);
  const std::vector<Candidate> cands = sorted_candidates(table.counts, v, theta_f);
  const std::size_t want = target - v.size();
  for (std::size_t i = 0; i < cands.size() && i < want; ++i) v.add(cands[i].symbol);
  if (v.size() < target)
    v.metadata().warnings.push_back(
        "only " + std::to_string(v.size()) + " of " + std::to_string(target) +
        " symbols: not enough spans meet the frequency threshold");
  stamp(v.metadata(), table);
  v.metadata().method = "frequency";
  v.metadata().theta_f = theta_f;
  return v;
}

Vocabulary learn_incremental(std::span<const SignalTrack> tracks, ConstraintConfig cfg,
                             std::size_t target, std::uint64_t theta_f,
                             std::span<const double> schedule, unsigned workers) {
  if (cfg.kind != ConstraintKind::global)
    throw data_error("incremental learning requires the global constraint");
  if (target < 768) throw data_error("target vocabulary size must be at least 768");
  if (schedule.empty()) throw data_error("incremental schedule is empty");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (!(schedule[i] > schedule[i - 1]))
      throw data_error("incremental schedule must be strictly increasing");

  const std::size_t want = target - 768;
  const Vocabulary base = Vocabulary::base(BaseKind::wordpiece);

  std::optional<SpanCountTable> chosen;
  double chosen_theta = schedule.front();
  bool reached = false;
  std::size_t best_eligible = 0;

  for (double theta : schedule) {
    cfg.theta_g = theta;
    SpanCountTable table = count_spans(tracks, cfg, workers);
    const std::size_t eligible = sorted_candidates(table.counts, base, theta_f).size();
    if (eligible >= want) {  // first threshold that can fill the vocabulary
      chosen = std::move(table);
      chosen_theta = theta;
      reached = true;
      break;
    }
    if (!chosen || eligible > best_eligible) {
      chosen = std::move(table);
      chosen_theta = theta;
      best_eligible = eligible;
    }
  }

  Vocabulary v = learn_frequency(*chosen, target, theta_f);
  if (!reached)
    v.metadata().warnings.push_back(
        "incremental schedule exhausted before reaching the target size");
  v.metadata().method = "incremental";
  v.metadata().schedule.assign(schedule.begin(), schedule.end());
  v.metadata().theta_g = chosen_theta;
  return v;
}

namespace {

std::vector<BpeSequence> seed_tokenised_sequences(std::span<const SignalTrack> tracks,
                                                  const Tokenizer& seed) {
  std::vector<BpeSequence> seqs;
  std::unordered_map<std::string, std::size_t> index;
  for (const SignalTrack& t : tracks) {
    for (std::size_t b = 0; b + 1 < t.boundaries.size(); ++b) {
      std::string pretoken =
          t.bytes.substr(t.boundaries[b], t.boundaries[b + 1] - t.boundaries[b]);
      auto [it, inserted] = index.emplace(std::move(pretoken), seqs.size());
      if (inserted) {
        seqs.push_back({seed.tokenize_pretoken(it->first, TokenizeMode::longest_prefix), 1});
      } else {
        ++seqs[it->second].weight;
      }
    }
  }
  return seqs;
}

}  // namespace

Vocabulary learn_seeded(std::span<const SignalTrack> tracks, const ConstraintConfig& cfg,
                        std::size_t target, double seed_fraction, std::uint64_t theta_f,
                        unsigned workers) {
  if (!(seed_fraction >= 0.0 && seed_fraction <= 1.0))
    throw data_error("seed fraction must lie in [0, 1]");
  if (target < 768) throw data_error("target vocabulary size must be at least 768");

  const std::size_t seed_target =
      768 + static_cast<std::size_t>(seed_fraction * static_cast<double>(target - 768));
  const SpanCountTable table = count_spans(tracks, cfg, workers);
  Vocabulary seed = learn_frequency(table, seed_target, theta_f);
  std::vector<std::string> warnings = seed.metadata().warnings;

  Vocabulary v = std::move(seed);
  if (v.size() < target) {
    Tokenizer seed_tok(v);
    v = train_bpe(seed_tokenised_sequences(tracks, seed_tok), target, seed_tok.vocab());
    for (const std::string& w : v.metadata().warnings)
      warnings.push_back(w);
  }
  stamp(v.metadata(), table);
  v.metadata().method = "seed-bpe";
  v.metadata().theta_f = theta_f;
  v.metadata().seed_fraction = seed_fraction;
  v.metadata().warnings = std::move(warnings);
  return v;
}

Vocabulary learn_balanced(const SpanCountTable& table, std::size_t target,
                          std::uint64_t theta_f) {
  if (table.per_language.empty())
    throw data_error("balanced learning needs per-language counts (language tags)");
  if (target < 768) throw data_error("target vocabulary size must be at least 768");

  Vocabulary v = Vocabulary::base(BaseKind::wordpiece);
  std::vector<std::vector<Candidate>> lists;
  lists.reserve(table.per_language.size());
  for (const auto& [lang, counts] : table.per_language)  // std::map: stable language order
    lists.push_back(sorted_candidates(counts, v, theta_f));

  std::vector<std::size_t> cursor(lists.size(), 0);
  bool any_left = true;
  while (v.size() < target && any_left) {
    any_left = false;
    for (std::size_t li = 0; li < lists.size() && v.size() < target; ++li) {
      std::size_t& cur = cursor[li];
      while (cur < lists[li].size() && v.contains(lists[li][cur].symbol)) ++cur;
      if (cur >= lists[li].size()) continue;
      v.add(lists[li][cur].symbol);
      ++cur;
      any_left = true;
    }
  }
  if (v.size() < target)
    v.metadata().warnings.push_back(
        "per-language tables exhausted before reaching the target size");
  stamp(v.metadata(), table);
  v.metadata().method = "balanced";
  v.metadata().theta_f = theta_f;
  return v;
}

void write_frequency_table(const SpanCountTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot open frequency table for writing: " + path);
  auto write_counts = [&out](const SpanCounts& counts, const std::string* language) {
    std::vector<Candidate> rows;
    rows.reserve(counts.size());
    for (const auto& [sym, count] : counts) rows.push_back({sym, count});
    std::sort(rows.begin(), rows.end(), candidate_before);
    for (const Candidate& c : rows) {
      nlohmann::ordered_json rec;
      rec["marker"] = to_string(c.symbol.marker);
      rec["bytes_hex"] = to_hex(c.symbol.bytes);
      rec["count"] = c.count;
      if (language)
        rec["language"] = *language;
      else
        rec["language"] = nullptr;
      out << rec.dump() << '\n';
    }
  };
  write_counts(table.counts, nullptr);
  for (const auto& [lang, counts] : table.per_language) write_counts(counts, &lang);
  if (!out) throw data_error("failed writing frequency table: " + path);
}

}  // namespace bytespan
