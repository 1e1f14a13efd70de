#include "bytespan/tokenizer.hpp"

#include <algorithm>

#include "bytespan/error.hpp"

namespace bytespan {

TokenizeMode tokenize_mode_from_string(const std::string& s) {
  if (s == "longest-prefix" || s == "longest_prefix") return TokenizeMode::longest_prefix;
  if (s == "bpe" || s == "bpe_merges") return TokenizeMode::bpe_merges;
  throw data_error("unknown tokenize mode: " + s);
}

void Tokenizer::Trie::insert(std::string_view key, TokenId id) {
  std::uint32_t node = 0;
  for (unsigned char c : key) {
    auto& children = nodes[node].children;
    auto it = std::lower_bound(children.begin(), children.end(), c,
                               [](const auto& e, unsigned char b) { return e.first < b; });
    if (it == children.end() || it->first != c) {
      const std::uint32_t fresh = static_cast<std::uint32_t>(nodes.size());
      it = children.insert(it, {c, fresh});
      nodes.emplace_back();
    }
    node = it->second;
  }
  nodes[node].token = static_cast<std::int32_t>(id);
}

std::pair<std::int32_t, std::size_t> Tokenizer::Trie::longest(std::string_view text) const {
  std::int32_t best = -1;
  std::size_t best_len = 0;
  std::uint32_t node = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto& children = nodes[node].children;
    const unsigned char c = static_cast<unsigned char>(text[i]);
    auto it = std::lower_bound(children.begin(), children.end(), c,
                               [](const auto& e, unsigned char b) { return e.first < b; });
    if (it == children.end() || it->first != c) return {best, best_len};
    node = it->second;
    if (nodes[node].token >= 0) {
      best = nodes[node].token;
      best_len = i + 1;
    }
  }
  return {best, best_len};
}

Tokenizer::Tokenizer(Vocabulary vocab) : vocab_(std::move(vocab)), merges_(vocab_) {
  for (std::size_t id = 0; id < vocab_.size(); ++id) {
    const Symbol& s = vocab_.symbol(static_cast<TokenId>(id));
    switch (s.marker) {
      case Marker::plain: plain_.insert(s.bytes, static_cast<TokenId>(id)); break;
      case Marker::continuation: continuation_.insert(s.bytes, static_cast<TokenId>(id)); break;
      case Marker::word_initial: word_initial_.insert(s.bytes, static_cast<TokenId>(id)); break;
    }
  }
}

std::vector<TokenId> Tokenizer::tokenize(std::string_view bytes, TokenizeMode mode) const {
  std::vector<TokenId> out;
  const BoundaryList bounds = pretokenize(bytes);
  for (std::size_t b = 0; b + 1 < bounds.size(); ++b)
    tokenize_pretoken_into(bytes.substr(bounds[b], bounds[b + 1] - bounds[b]), mode, out);
  return out;
}

std::vector<TokenId> Tokenizer::tokenize_pretoken(std::string_view pretoken,
                                                  TokenizeMode mode) const {
  std::vector<TokenId> out;
  tokenize_pretoken_into(pretoken, mode, out);
  return out;
}

void Tokenizer::tokenize_pretoken_into(std::string_view pretoken, TokenizeMode mode,
                                       std::vector<TokenId>& out) const {
  if (pretoken.empty()) return;
  if (mode == TokenizeMode::bpe_merges) {
    if (merges_.empty())
      throw data_error("vocabulary has no merge rules; bpe mode unavailable");
    const std::vector<TokenId> ids = apply_merges(merges_, decompose_pretoken(pretoken, vocab_));
    out.insert(out.end(), ids.begin(), ids.end());
    return;
  }

  if (vocab_.base_kind() != BaseKind::wordpiece)
    throw data_error("longest-prefix inference needs a vocabulary with continuation symbols");

  std::size_t pos = 0;
  // First token: a word_initial symbol absorbs the leading space when one
  // is present; otherwise the longest plain symbol.
  if (pretoken[0] == ' ' && pretoken.size() >= 2) {
    auto [tok, len] = word_initial_.longest(pretoken.substr(1));
    if (tok >= 0) {
      out.push_back(static_cast<TokenId>(tok));
      pos = 1 + len;
    }
  }
  if (pos == 0) {
    auto [tok, len] = plain_.longest(pretoken);
    if (tok < 0)
      throw data_error("no plain symbol matches input; vocabulary lacks base symbols");
    out.push_back(static_cast<TokenId>(tok));
    pos = len;
  }
  while (pos < pretoken.size()) {
    auto [tok, len] = continuation_.longest(pretoken.substr(pos));
    if (tok < 0)
      throw data_error("no continuation symbol matches input; vocabulary lacks base symbols");
    out.push_back(static_cast<TokenId>(tok));
    pos += len;
  }
}

std::string Tokenizer::detokenize(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) {
    const Symbol& s = vocab_.symbol(id);  // throws on unknown id
    if (s.marker == Marker::word_initial) out.push_back(' ');
    out.append(s.bytes);
  }
  return out;
}

}  // namespace bytespan
