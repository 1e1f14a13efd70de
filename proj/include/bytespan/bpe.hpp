#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "bytespan/corpus.hpp"
#include "bytespan/vocabulary.hpp"

namespace bytespan {

/// One pre-token as a symbol-id sequence, with the number of times it
/// occurs in the corpus. Merges never cross sequences, so pre-token
/// boundaries are respected by construction.
struct BpeSequence {
  std::vector<TokenId> ids;
  std::uint64_t weight = 1;
};

/// Canonical base-symbol decomposition of one pre-token: a leading 0x20 is
/// absorbed into a word_initial first symbol when the pre-token has one;
/// later bytes become continuation symbols (wordpiece base) or plain
/// symbols (bpe base).
std::vector<TokenId> decompose_pretoken(std::string_view pretoken, const Vocabulary& vocab);

/// Decomposes every pre-token of every document, deduplicated with weights.
std::vector<BpeSequence> build_bpe_sequences(std::span<const Document> docs,
                                             const Vocabulary& base);

/// Greedy pair-merge training starting from `base` (which may already hold
/// learned symbols, as in the seeding method). Merges the most frequent
/// adjacent pair (ties: smaller left id, then smaller right id) until the
/// vocabulary reaches `target_size` or no pair occurs at least twice.
Vocabulary train_bpe(std::vector<BpeSequence> sequences, std::size_t target_size,
                     Vocabulary base);

/// Rank lookup for merge replay.
class MergeIndex {
 public:
  MergeIndex() = default;
  explicit MergeIndex(const Vocabulary& vocab);
  bool empty() const { return map_.empty(); }

  struct Entry {
    std::uint32_t rank;
    TokenId result;
  };
  const Entry* find(TokenId left, TokenId right) const;
  std::pair<TokenId, TokenId> pair_at(std::uint32_t rank) const { return by_rank_[rank]; }

 private:
  std::unordered_map<std::uint64_t, Entry> map_;
  std::vector<std::pair<TokenId, TokenId>> by_rank_;
};

/// Applies merges rank-by-rank until none applies, reproducing the
/// trainer's greedy segmentation.
std::vector<TokenId> apply_merges(const MergeIndex& merges, std::span<const TokenId> seq);
std::vector<TokenId> apply_merges(const Vocabulary& vocab, std::span<const TokenId> seq);

}  // namespace bytespan
