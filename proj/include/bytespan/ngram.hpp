#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bytespan/corpus.hpp"

namespace bytespan {

/// Byte-level n-gram model with absolute discounting, interpolated down to
/// a uniform floor over 257 outcomes (256 byte values + end-of-document).
/// Every probability is strictly positive and each context distribution
/// sums to one. A freshly constructed model scores uniformly.
class NGramByteModel {
 public:
  static constexpr unsigned kAlphabet = 257;
  static constexpr unsigned kEndOfDoc = 256;
  static constexpr unsigned kMaxOrder = 7;  // context packing limit

  explicit NGramByteModel(unsigned order = 5, double discount = 0.75);

  unsigned order() const { return order_; }
  double discount() const { return discount_; }

  /// P(outcome | last min(order-1, |context|) bytes of context).
  double probability(std::string_view context, unsigned outcome) const;

  /// Full 257-outcome predictive distribution for a context.
  std::vector<double> distribution(std::string_view context) const;

  /// Per-byte surprisal and entropy (bits) for one document.
  SignalTrack score(const Document& doc) const;
  std::vector<SignalTrack> score_corpus(std::span<const Document> docs,
                                        unsigned workers = 1) const;

  void save(const std::string& path) const;
  static NGramByteModel load(const std::string& path);

  bool operator==(const NGramByteModel& other) const;

 private:
  friend NGramByteModel train_ngram(std::span<const Document> corpus, unsigned order,
                                    double discount, unsigned workers);

  struct ContextInfo {
    std::uint64_t ctx;
    std::uint32_t begin;   // first entry in keys/counts
    std::uint32_t length;  // distinct continuations (T)
    std::uint64_t total;   // event count (N)
  };
  struct Level {
    std::vector<std::uint64_t> keys;  // (context << 9) | outcome, sorted
    std::vector<std::uint64_t> counts;
    std::vector<ContextInfo> contexts;

    void build_context_index();
    const ContextInfo* find_context(std::uint64_t ctx) const;
    std::uint64_t outcome_count(const ContextInfo& info, unsigned outcome) const;
  };

  double entropy_of(std::string_view context) const;

  unsigned order_;
  double discount_;
  std::vector<Level> levels_;  // levels_[k]: contexts of length k
};

/// Counts n-grams of every order up to `order` over the corpus.
NGramByteModel train_ngram(std::span<const Document> corpus, unsigned order,
                           double discount = 0.75, unsigned workers = 1);

}  // namespace bytespan
