#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bytespan {

/// plain: matches at the start of a pre-token with no absorbed whitespace.
/// continuation: matches only inside a pre-token (WordPiece "##").
/// word_initial: absorbs a single leading 0x20; a symbol with bytes B stands
/// for the byte string ' ' + B wherever it is matched or emitted.
enum class Marker : std::uint8_t { plain = 0, continuation = 1, word_initial = 2 };

std::string to_string(Marker m);
Marker marker_from_string(const std::string& s);

using TokenId = std::uint32_t;

struct Symbol {
  Marker marker = Marker::plain;
  std::string bytes;

  auto operator<=>(const Symbol&) const = default;
};

struct SymbolHash {
  std::size_t operator()(const Symbol& s) const noexcept;
};

/// The concrete byte string a symbol stands for once its marker is realised.
std::string effective_bytes(const Symbol& s);

struct MergeRule {
  std::uint32_t rank = 0;
  TokenId left = 0;
  TokenId right = 0;
  TokenId result = 0;
  bool operator==(const MergeRule&) const = default;
};

/// bpe: 512 base symbols (plain + word_initial variants of every byte).
/// wordpiece: 768 base symbols (plain + continuation + word_initial).
enum class BaseKind { bpe, wordpiece };

struct VocabMetadata {
  std::string method;                 // frequency | incremental | seed-bpe | bpe | bpe-wp | balanced
  std::string constraint;             // global | monotonic | combined | ""
  std::string signal;                 // surprisal | entropy | ""
  std::optional<std::uint64_t> theta_f;
  std::optional<double> theta_g;
  std::optional<double> theta_m;
  std::optional<double> seed_fraction;
  std::vector<double> schedule;       // resolved incremental thresholds
  std::string corpus_fingerprint;
  std::vector<std::string> warnings;

  bool operator==(const VocabMetadata&) const = default;
};

/// An id <-> Symbol bijection. Ids are dense and assigned in insertion
/// order; the base symbols always occupy the leading ids.
class Vocabulary {
 public:
  Vocabulary() = default;

  static Vocabulary base(BaseKind kind);

  /// Adds a new symbol; throws data_error if (marker, bytes) already exists
  /// or bytes is empty.
  TokenId add(Symbol s);

  std::optional<TokenId> find(const Symbol& s) const;
  bool contains(const Symbol& s) const { return find(s).has_value(); }

  /// Throws data_error on an out-of-range id.
  const Symbol& symbol(TokenId id) const;

  std::size_t size() const { return symbols_.size(); }
  std::span<const Symbol> symbols() const { return symbols_; }

  BaseKind base_kind() const { return base_kind_; }
  std::size_t base_size() const;

  /// Id of a base symbol; throws data_error if the marker is not part of
  /// this vocabulary's base set.
  TokenId base_id(Marker m, unsigned char byte) const;

  std::span<const MergeRule> merges() const { return merges_; }
  void add_merge(MergeRule rule);

  VocabMetadata& metadata() { return meta_; }
  const VocabMetadata& metadata() const { return meta_; }

  bool same_symbols(const Vocabulary& other) const;

 private:
  std::vector<Symbol> symbols_;
  std::map<Symbol, TokenId> index_;
  std::vector<MergeRule> merges_;
  VocabMetadata meta_;
  BaseKind base_kind_ = BaseKind::wordpiece;
};

void save_vocab(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocab(const std::string& path);

}  // namespace bytespan
