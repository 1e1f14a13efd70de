#include "bytespan/corpus.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "bytespan/error.hpp"

namespace bytespan {

namespace {

enum class ByteClass : std::uint8_t { letter, digit, whitespace, other };

ByteClass classify(unsigned char b) {
  if (b >= 0x80) return ByteClass::letter;
  if (b == ' ' || b == '\t' || b == '\n' || b == '\r' || b == '\v' || b == '\f')
    return ByteClass::whitespace;
  if (b >= '0' && b <= '9') return ByteClass::digit;
  if ((b >= 'a' && b <= 'z') || (b >= 'A' && b <= 'Z')) return ByteClass::letter;
  return ByteClass::other;
}

}  // namespace

bool is_whitespace_byte(unsigned char b) {
  return classify(b) == ByteClass::whitespace;
}

BoundaryList pretokenize(std::string_view bytes) {
  BoundaryList out;
  out.push_back(0);
  for (std::size_t i = 1; i < bytes.size(); ++i) {
    const ByteClass prev = classify(static_cast<unsigned char>(bytes[i - 1]));
    const ByteClass cur = classify(static_cast<unsigned char>(bytes[i]));
    bool boundary;
    if (cur == ByteClass::whitespace) {
      boundary = prev != ByteClass::whitespace;  // start of a whitespace run
    } else if (prev == ByteClass::whitespace) {
      boundary = false;  // run attaches to this pre-token
    } else {
      boundary = cur != prev;
    }
    if (boundary) out.push_back(i);
  }
  if (!bytes.empty()) out.push_back(bytes.size());
  return out;
}

void SignalTrack::validate() const {
  if (surprisal.size() != bytes.size() || entropy.size() != bytes.size()) {
    throw data_error("signal track '" + doc_id + "': array lengths (" +
                     std::to_string(surprisal.size()) + " surprisal, " +
                     std::to_string(entropy.size()) + " entropy) do not match " +
                     std::to_string(bytes.size()) + " bytes");
  }
  auto check = [&](const std::vector<double>& v, const char* name) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v[i]))
        throw data_error("signal track '" + doc_id + "': non-finite " + name +
                         " at position " + std::to_string(i));
      if (v[i] < 0.0)
        throw data_error("signal track '" + doc_id + "': negative " + name +
                         " at position " + std::to_string(i));
    }
  };
  check(surprisal, "surprisal");
  check(entropy, "entropy");
  if (boundaries != pretokenize(bytes))
    throw data_error("signal track '" + doc_id + "': stale pre-token boundaries");
}

std::string to_hex(std::string_view bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

std::string from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw data_error("hex string has odd length");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw data_error(std::string("invalid hex digit '") + c + "'");
  };
  std::string out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2)
    out.push_back(static_cast<char>(nibble(hex[i]) << 4 | nibble(hex[i + 1])));
  return out;
}

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::vector<double> parse_signal_array(const json& arr, const std::string& doc_id,
                                       const char* name) {
  if (!arr.is_array())
    throw data_error("signal record '" + doc_id + "': " + name + " is not an array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& v = arr[i];
    if (!v.is_number())
      throw data_error("signal record '" + doc_id + "': non-finite " + name +
                       " at position " + std::to_string(i));
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

std::vector<SignalTrack> read_signal_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open signal file: " + path);
  std::vector<SignalTrack> tracks;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw data_error("malformed signal record at line " + std::to_string(lineno) +
                       ": " + e.what());
    }
    if (!rec.is_object() || !rec.contains("doc_id") || !rec["doc_id"].is_string())
      throw data_error("malformed signal record at line " + std::to_string(lineno) +
                       ": missing doc_id");
    SignalTrack t;
    t.doc_id = rec["doc_id"].get<std::string>();
    if (rec.contains("language") && !rec["language"].is_null())
      t.language = rec["language"].get<std::string>();
    if (!rec.contains("bytes_hex") || !rec["bytes_hex"].is_string())
      throw data_error("signal record '" + t.doc_id + "': missing bytes_hex");
    t.bytes = from_hex(rec["bytes_hex"].get<std::string>());
    t.surprisal = parse_signal_array(rec.value("surprisal", json::array()), t.doc_id, "surprisal");
    t.entropy = parse_signal_array(rec.value("entropy", json::array()), t.doc_id, "entropy");
    t.boundaries = pretokenize(t.bytes);
    t.validate();
    tracks.push_back(std::move(t));
  }
  return tracks;
}

void write_signal_file(std::span<const SignalTrack> tracks, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot open signal file for writing: " + path);
  for (const SignalTrack& t : tracks) {
    t.validate();
    ordered_json rec;
    rec["doc_id"] = t.doc_id;
    if (t.language)
      rec["language"] = *t.language;
    else
      rec["language"] = nullptr;
    rec["bytes_hex"] = to_hex(t.bytes);
    rec["surprisal"] = t.surprisal;
    rec["entropy"] = t.entropy;
    out << rec.dump() << '\n';
  }
  if (!out) throw data_error("failed writing signal file: " + path);
}

std::vector<Document> read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open manifest: " + path);
  const auto base = std::filesystem::path(path).parent_path();
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw data_error("malformed manifest record at line " + std::to_string(lineno) +
                       ": " + e.what());
    }
    Document d;
    d.doc_id = rec.at("doc_id").get<std::string>();
    if (!seen.insert(d.doc_id).second)
      throw data_error("duplicate doc_id in manifest: " + d.doc_id);
    if (rec.contains("language") && !rec["language"].is_null())
      d.language = rec["language"].get<std::string>();
    const auto rel = std::filesystem::path(rec.at("path").get<std::string>());
    const auto full = rel.is_absolute() ? rel : base / rel;
    std::ifstream doc_in(full, std::ios::binary);
    if (!doc_in) throw data_error("manifest doc '" + d.doc_id + "': cannot open " + full.string());
    std::ostringstream buf;
    buf << doc_in.rdbuf();
    d.bytes = buf.str();
    if (d.bytes.empty())
      throw data_error("manifest doc '" + d.doc_id + "' is empty");
    docs.push_back(std::move(d));
  }
  return docs;
}

namespace {

void fnv_mix(std::uint64_t& h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  h ^= 0xff;  // separator
  h *= 0x100000001b3ull;
}

std::string fnv_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::string corpus_fingerprint(std::span<const Document> docs) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const Document& d : docs) {
    fnv_mix(h, d.doc_id);
    fnv_mix(h, d.bytes);
  }
  return fnv_hex(h);
}

std::string tracks_fingerprint(std::span<const SignalTrack> tracks) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const SignalTrack& t : tracks) {
    fnv_mix(h, t.doc_id);
    fnv_mix(h, t.bytes);
  }
  return fnv_hex(h);
}

}  // namespace bytespan
