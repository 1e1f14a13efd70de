#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bytespan/bpe.hpp"
#include "bytespan/vocabulary.hpp"

namespace bytespan {

enum class TokenizeMode { longest_prefix, bpe_merges };

TokenizeMode tokenize_mode_from_string(const std::string& s);

/// Immutable inference engine over a learned Vocabulary. Thread-safe once
/// constructed.
class Tokenizer {
 public:
  explicit Tokenizer(Vocabulary vocab);

  const Vocabulary& vocab() const { return vocab_; }

  /// Pre-tokenises internally; concatenated effective token bytes always
  /// reproduce the input exactly.
  std::vector<TokenId> tokenize(std::string_view bytes,
                                TokenizeMode mode = TokenizeMode::longest_prefix) const;

  std::vector<TokenId> tokenize_pretoken(std::string_view pretoken, TokenizeMode mode) const;

  std::string detokenize(std::span<const TokenId> ids) const;

 private:
  struct Trie {
    struct Node {
      std::int32_t token = -1;
      std::vector<std::pair<unsigned char, std::uint32_t>> children;  // sorted
    };
    std::vector<Node> nodes;

    Trie() { nodes.emplace_back(); }
    void insert(std::string_view key, TokenId id);
    // Longest key that prefixes `text`; returns length, -1 token if none.
    std::pair<std::int32_t, std::size_t> longest(std::string_view text) const;
  };

  void tokenize_pretoken_into(std::string_view pretoken, TokenizeMode mode,
                              std::vector<TokenId>& out) const;

  Vocabulary vocab_;
  Trie plain_;
  Trie continuation_;
  Trie word_initial_;
  MergeIndex merges_;
};

}  // namespace bytespan
