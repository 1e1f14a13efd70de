#include "bytespan/bpe.hpp"

#include <queue>
#include <set>

#include "bytespan/error.hpp"

namespace bytespan {

namespace {

std::uint64_t pair_key(TokenId left, TokenId right) {
  return (static_cast<std::uint64_t>(left) << 32) | right;
}

}  // namespace

std::vector<TokenId> decompose_pretoken(std::string_view pretoken, const Vocabulary& vocab) {
  std::vector<TokenId> out;
  if (pretoken.empty()) return out;
  const Marker rest_marker =
      vocab.base_kind() == BaseKind::wordpiece ? Marker::continuation : Marker::plain;
  std::size_t pos = 0;
  if (pretoken[0] == ' ' && pretoken.size() >= 2) {
    out.push_back(vocab.base_id(Marker::word_initial, static_cast<unsigned char>(pretoken[1])));
    pos = 2;
  } else {
    out.push_back(vocab.base_id(Marker::plain, static_cast<unsigned char>(pretoken[0])));
    pos = 1;
  }
  for (; pos < pretoken.size(); ++pos)
    out.push_back(vocab.base_id(rest_marker, static_cast<unsigned char>(pretoken[pos])));
  return out;
}

std::vector<BpeSequence> build_bpe_sequences(std::span<const Document> docs,
                                             const Vocabulary& base) {
  std::vector<BpeSequence> seqs;
  std::unordered_map<std::string, std::size_t> index;
  for (const Document& doc : docs) {
    const BoundaryList bounds = pretokenize(doc.bytes);
    for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
      std::string pretoken(doc.bytes.substr(bounds[b], bounds[b + 1] - bounds[b]));
      auto [it, inserted] = index.emplace(std::move(pretoken), seqs.size());
      if (inserted) {
        seqs.push_back({decompose_pretoken(it->first, base), 1});
      } else {
        ++seqs[it->second].weight;
      }
    }
  }
  return seqs;
}

namespace {

struct PairCand {
  std::uint64_t count;
  TokenId left;
  TokenId right;
};

// Highest count wins; ties go to the earlier-created left, then right symbol.
struct CandWorse {
  bool operator()(const PairCand& a, const PairCand& b) const {
    if (a.count != b.count) return a.count < b.count;
    if (a.left != b.left) return a.left > b.left;
    return a.right > b.right;
  }
};

}  // namespace

Vocabulary train_bpe(std::vector<BpeSequence> sequences, std::size_t target_size,
                     Vocabulary base) {
  if (target_size < base.size())
    throw data_error("bpe target size " + std::to_string(target_size) +
                     " is below the starting vocabulary size " + std::to_string(base.size()));

  std::unordered_map<std::uint64_t, std::uint64_t> counts;
  std::unordered_map<std::uint64_t, std::set<std::uint32_t>> postings;
  std::priority_queue<PairCand, std::vector<PairCand>, CandWorse> heap;

  for (std::uint32_t si = 0; si < sequences.size(); ++si) {
    const BpeSequence& s = sequences[si];
    for (std::size_t i = 0; i + 1 < s.ids.size(); ++i) {
      const std::uint64_t key = pair_key(s.ids[i], s.ids[i + 1]);
      counts[key] += s.weight;
      postings[key].insert(si);
    }
  }
  for (const auto& [key, count] : counts)
    heap.push({count, static_cast<TokenId>(key >> 32), static_cast<TokenId>(key & 0xffffffff)});

  while (base.size() < target_size) {
    // Pop until an entry matches the live count for its pair.
    PairCand best{};
    bool found = false;
    while (!heap.empty()) {
      best = heap.top();
      auto it = counts.find(pair_key(best.left, best.right));
      if (it != counts.end() && it->second == best.count && best.count > 0) {
        found = true;
        break;
      }
      heap.pop();
    }
    if (!found || best.count < 2) break;
    heap.pop();

    const Symbol& l = base.symbol(best.left);
    const Symbol& r = base.symbol(best.right);
    const TokenId result = base.add({l.marker, l.bytes + r.bytes});
    base.add_merge({static_cast<std::uint32_t>(base.merges().size()), best.left, best.right, result});

    const std::uint64_t merged_key = pair_key(best.left, best.right);
    std::set<std::uint32_t> touched = std::move(postings[merged_key]);
    std::set<std::uint64_t> dirty;
    for (std::uint32_t si : touched) {
      BpeSequence& s = sequences[si];
      bool contains = false;
      for (std::size_t i = 0; i + 1 < s.ids.size(); ++i)
        if (s.ids[i] == best.left && s.ids[i + 1] == best.right) {
          contains = true;
          break;
        }
      if (!contains) continue;  // stale posting
      // Sequences are pre-token sized; recount the whole thing.
      for (std::size_t i = 0; i + 1 < s.ids.size(); ++i) {
        const std::uint64_t key = pair_key(s.ids[i], s.ids[i + 1]);
        counts[key] -= s.weight;
        dirty.insert(key);
      }
      std::vector<TokenId> rewritten;
      rewritten.reserve(s.ids.size());
      for (std::size_t i = 0; i < s.ids.size();) {
        if (i + 1 < s.ids.size() && s.ids[i] == best.left && s.ids[i + 1] == best.right) {
          rewritten.push_back(result);
          i += 2;
        } else {
          rewritten.push_back(s.ids[i]);
          ++i;
        }
      }
      s.ids = std::move(rewritten);
      for (std::size_t i = 0; i + 1 < s.ids.size(); ++i) {
        const std::uint64_t key = pair_key(s.ids[i], s.ids[i + 1]);
        counts[key] += s.weight;
        postings[key].insert(si);
        dirty.insert(key);
      }
    }
    counts.erase(merged_key);
    postings.erase(merged_key);
    dirty.erase(merged_key);
    for (std::uint64_t key : dirty) {
      auto it = counts.find(key);
      if (it == counts.end()) continue;
      if (it->second == 0) {
        counts.erase(it);
        postings.erase(key);
        continue;
      }
      heap.push({it->second, static_cast<TokenId>(key >> 32),
                 static_cast<TokenId>(key & 0xffffffff)});
    }
  }

  if (base.size() < target_size)
    base.metadata().warnings.push_back(
        "bpe stopped early at " + std::to_string(base.size()) +
        " symbols: no adjacent pair occurs at least twice");
  return base;
}

MergeIndex::MergeIndex(const Vocabulary& vocab) {
  by_rank_.reserve(vocab.merges().size());
  for (const MergeRule& r : vocab.merges()) {
    map_.emplace(pair_key(r.left, r.right), Entry{r.rank, r.result});
    by_rank_.emplace_back(r.left, r.right);
  }
}

const MergeIndex::Entry* MergeIndex::find(TokenId left, TokenId right) const {
  auto it = map_.find(pair_key(left, right));
  return it == map_.end() ? nullptr : &it->second;
}

std::vector<TokenId> apply_merges(const MergeIndex& merges, std::span<const TokenId> seq) {
  std::vector<TokenId> ids(seq.begin(), seq.end());
  if (merges.empty()) return ids;
  while (ids.size() >= 2) {
    // Find the lowest-ranked pair present, then replace its occurrences
    // left to right; identical to replaying ranks in order.
    const MergeIndex::Entry* best = nullptr;
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
      const MergeIndex::Entry* e = merges.find(ids[i], ids[i + 1]);
      if (e && (!best || e->rank < best->rank)) best = e;
    }
    if (!best) break;
    const auto [left, right] = merges.pair_at(best->rank);
    std::vector<TokenId> next;
    next.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size();) {
      if (i + 1 < ids.size() && ids[i] == left && ids[i + 1] == right) {
        next.push_back(best->result);
        i += 2;
      } else {
        next.push_back(ids[i]);
        ++i;
      }
    }
    ids = std::move(next);
  }
  return ids;
}

std::vector<TokenId> apply_merges(const Vocabulary& vocab, std::span<const TokenId> seq) {
  return apply_merges(MergeIndex(vocab), seq);
}

}  // namespace bytespan
