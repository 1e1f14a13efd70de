#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bytespan/corpus.hpp"
#include "bytespan/segment.hpp"
#include "bytespan/vocabulary.hpp"

namespace bytespan {

using SpanCounts = std::unordered_map<Symbol, std::uint64_t, SymbolHash>;

/// Marker-qualified span frequencies, with per-language sub-tables when the
/// tracks carry language tags. Also remembers how it was produced so the
/// learners can stamp vocabulary metadata.
struct SpanCountTable {
  SpanCounts counts;
  std::map<std::string, SpanCounts> per_language;
  std::string constraint;
  std::string signal;
  std::optional<double> theta_g;
  std::optional<double> theta_m;
  std::string fingerprint;

  void merge(SpanCountTable&& other);
};

/// The marker-qualified symbol a span contributes. `starts_pretoken` must be
/// true iff the span begins at a pre-token boundary of its document.
Symbol span_symbol(std::string_view doc_bytes, const Span& span, bool starts_pretoken);

SpanCountTable count_spans(std::span<const SignalTrack> tracks, const ConstraintConfig& cfg,
                           unsigned workers = 1);

/// Base symbols plus the highest-count spans meeting theta_f, up to `target`.
/// Ties break on shorter bytes, then lexicographic bytes, then marker.
Vocabulary learn_frequency(const SpanCountTable& table, std::size_t target,
                           std::uint64_t theta_f = 1);

/// Re-segments with each threshold of the strictly increasing schedule until
/// enough spans pass theta_f, then selects by count at that threshold.
Vocabulary learn_incremental(std::span<const SignalTrack> tracks, ConstraintConfig cfg,
                             std::size_t target, std::uint64_t theta_f,
                             std::span<const double> schedule, unsigned workers = 1);

/// Frequency-learns a seed of 768 + floor(p * (target - 768)) symbols, then
/// continues with pair merges over the seed-tokenised corpus until `target`.
Vocabulary learn_seeded(std::span<const SignalTrack> tracks, const ConstraintConfig& cfg,
                        std::size_t target, double seed_fraction, std::uint64_t theta_f = 1,
                        unsigned workers = 1);

/// Round-robin selection across the table's per-language sub-tables; a span
/// already claimed by another language is skipped without consuming the turn.
Vocabulary learn_balanced(const SpanCountTable& table, std::size_t target,
                          std::uint64_t theta_f = 1);

/// Audit dump: line-delimited {"marker", "bytes_hex", "count", "language"}.
void write_frequency_table(const SpanCountTable& table, const std::string& path);

}  // namespace bytespan
