#include "bytespan/vocabulary.hpp"

#include <fstream>
#include <functional>

#include <json.hpp>

#include "bytespan/corpus.hpp"
#include "bytespan/error.hpp"

namespace bytespan {

std::string to_string(Marker m) {
  switch (m) {
    case Marker::plain: return "plain";
    case Marker::continuation: return "continuation";
    case Marker::word_initial: return "word_initial";
  }
  return "?";
}

Marker marker_from_string(const std::string& s) {
  if (s == "plain") return Marker::plain;
  if (s == "continuation") return Marker::continuation;
  if (s == "word_initial") return Marker::word_initial;
  throw data_error("unknown marker: " + s);
}

std::size_t SymbolHash::operator()(const Symbol& s) const noexcept {
  std::size_t h = std::hash<std::string>{}(s.bytes);
  return h * 3 + static_cast<std::size_t>(s.marker);
}

std::string effective_bytes(const Symbol& s) {
  if (s.marker == Marker::word_initial) return " " + s.bytes;
  return s.bytes;
}

Vocabulary Vocabulary::base(BaseKind kind) {
  Vocabulary v;
  v.base_kind_ = kind;
  auto add_block = [&v](Marker m) {
    for (unsigned b = 0; b < 256; ++b)
      v.add({m, std::string(1, static_cast<char>(b))});
  };
  add_block(Marker::plain);
  if (kind == BaseKind::wordpiece) add_block(Marker::continuation);
  add_block(Marker::word_initial);
  return v;
}

std::size_t Vocabulary::base_size() const {
  return base_kind_ == BaseKind::bpe ? 512 : 768;
}

TokenId Vocabulary::base_id(Marker m, unsigned char byte) const {
  switch (m) {
    case Marker::plain: return byte;
    case Marker::continuation:
      if (base_kind_ != BaseKind::wordpiece)
        throw data_error("vocabulary base has no continuation symbols");
      return 256 + byte;
    case Marker::word_initial:
      return (base_kind_ == BaseKind::wordpiece ? 512 : 256) + byte;
  }
  throw data_error("bad marker");
}

TokenId Vocabulary::add(Symbol s) {
  if (s.bytes.empty()) throw data_error("symbol bytes must be non-empty");
  const TokenId id = static_cast<TokenId>(symbols_.size());
  auto [it, inserted] = index_.emplace(s, id);
  if (!inserted)
    throw data_error("duplicate symbol: " + to_string(s.marker) + " " + to_hex(s.bytes));
  symbols_.push_back(std::move(s));
  return id;
}

std::optional<TokenId> Vocabulary::find(const Symbol& s) const {
  auto it = index_.find(s);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Symbol& Vocabulary::symbol(TokenId id) const {
  if (id >= symbols_.size())
    throw data_error("unknown token id: " + std::to_string(id));
  return symbols_[id];
}

void Vocabulary::add_merge(MergeRule rule) {
  if (rule.rank != merges_.size())
    throw data_error("merge ranks must be dense: expected " +
                     std::to_string(merges_.size()) + ", got " + std::to_string(rule.rank));
  const Symbol& l = symbol(rule.left);
  const Symbol& r = symbol(rule.right);
  const Symbol& res = symbol(rule.result);
  if (res.bytes != l.bytes + r.bytes)
    throw data_error("merge result bytes must be the concatenation of its parts");
  if (res.marker != l.marker)
    throw data_error("merge result must keep the left symbol's marker");
  merges_.push_back(rule);
}

bool Vocabulary::same_symbols(const Vocabulary& other) const {
  return symbols_ == other.symbols_;
}

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr int kVocabVersion = 1;

ordered_json metadata_to_json(const VocabMetadata& m) {
  ordered_json j;
  j["method"] = m.method;
  j["constraint"] = m.constraint;
  j["signal"] = m.signal;
  if (m.theta_f) j["theta_f"] = *m.theta_f;
  if (m.theta_g) j["theta_g"] = *m.theta_g;
  if (m.theta_m) j["theta_m"] = *m.theta_m;
  if (m.seed_fraction) j["seed_fraction"] = *m.seed_fraction;
  if (!m.schedule.empty()) j["schedule"] = m.schedule;
  j["corpus_fingerprint"] = m.corpus_fingerprint;
  j["warnings"] = m.warnings;
  return j;
}

VocabMetadata metadata_from_json(const json& j) {
  VocabMetadata m;
  m.method = j.value("method", "");
  m.constraint = j.value("constraint", "");
  m.signal = j.value("signal", "");
  if (j.contains("theta_f")) m.theta_f = j["theta_f"].get<std::uint64_t>();
  if (j.contains("theta_g")) m.theta_g = j["theta_g"].get<double>();
  if (j.contains("theta_m")) m.theta_m = j["theta_m"].get<double>();
  if (j.contains("seed_fraction")) m.seed_fraction = j["seed_fraction"].get<double>();
  if (j.contains("schedule")) m.schedule = j["schedule"].get<std::vector<double>>();
  m.corpus_fingerprint = j.value("corpus_fingerprint", "");
  if (j.contains("warnings")) m.warnings = j["warnings"].get<std::vector<std::string>>();
  return m;
}

}  // namespace

void save_vocab(const Vocabulary& vocab, const std::string& path) {
  ordered_json j;
  j["format"] = "bytespan-vocab";
  j["version"] = kVocabVersion;
  j["base"] = vocab.base_kind() == BaseKind::bpe ? 512 : 768;
  j["metadata"] = metadata_to_json(vocab.metadata());
  ordered_json symbols = ordered_json::array();
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    const Symbol& s = vocab.symbol(static_cast<TokenId>(id));
    ordered_json e;
    e["id"] = id;
    e["marker"] = to_string(s.marker);
    e["bytes_hex"] = to_hex(s.bytes);
    symbols.push_back(std::move(e));
  }
  j["symbols"] = std::move(symbols);
  ordered_json merges = ordered_json::array();
  for (const MergeRule& r : vocab.merges()) {
    ordered_json e;
    e["rank"] = r.rank;
    e["left"] = r.left;
    e["right"] = r.right;
    e["result"] = r.result;
    merges.push_back(std::move(e));
  }
  j["merges"] = std::move(merges);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot open vocabulary file for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw data_error("failed writing vocabulary file: " + path);
}

Vocabulary load_vocab(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open vocabulary file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw data_error("corrupt vocabulary file " + path + ": " + e.what());
  }
  if (j.value("format", "") != "bytespan-vocab")
    throw data_error("not a vocabulary file: " + path);
  if (j.value("version", -1) != kVocabVersion)
    throw data_error("unsupported vocabulary version in " + path + ": " +
                     std::to_string(j.value("version", -1)));
  const int base = j.value("base", 768);
  if (base != 512 && base != 768)
    throw data_error("bad base size in " + path);

  Vocabulary v = Vocabulary::base(base == 512 ? BaseKind::bpe : BaseKind::wordpiece);
  v.metadata() = metadata_from_json(j.value("metadata", json::object()));

  const json& symbols = j.at("symbols");
  for (std::size_t id = 0; id < symbols.size(); ++id) {
    const json& e = symbols[id];
    if (e.at("id").get<std::size_t>() != id)
      throw data_error("vocabulary ids must be dense and ascending in " + path);
    Symbol s{marker_from_string(e.at("marker").get<std::string>()),
             from_hex(e.at("bytes_hex").get<std::string>())};
    if (id < v.base_size()) {
      if (s != v.symbol(static_cast<TokenId>(id)))
        throw data_error("vocabulary file base symbols are inconsistent: " + path);
    } else {
      v.add(std::move(s));  // throws on duplicates
    }
  }
  if (symbols.size() < v.base_size())
    throw data_error("vocabulary file is missing base symbols: " + path);
  for (const json& e : j.value("merges", json::array())) {
    v.add_merge({e.at("rank").get<std::uint32_t>(), e.at("left").get<TokenId>(),
                 e.at("right").get<TokenId>(), e.at("result").get<TokenId>()});
  }
  return v;
}

}  // namespace bytespan
