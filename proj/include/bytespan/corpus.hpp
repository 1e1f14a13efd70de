#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bytespan {

/// One input document. `bytes` is raw content; no encoding is assumed.
struct Document {
  std::string doc_id;
  std::string bytes;
  std::optional<std::string> language;
};

/// Byte offsets at which pre-tokens start. Always contains 0 and the
/// document length, sorted and deduplicated.
using BoundaryList = std::vector<std::size_t>;

/// Splits a byte sequence into pre-tokens: a boundary is placed at every
/// transition between the classes {letter, digit, other} and at the start
/// of each whitespace run; the run itself attaches to the following
/// pre-token. Bytes >= 0x80 count as letters, so valid UTF-8 code points
/// are never split and unspaced scripts yield phrase-length pre-tokens.
BoundaryList pretokenize(std::string_view bytes);

bool is_whitespace_byte(unsigned char b);

/// Per-byte language-model signals aligned with a document's bytes, in bits.
/// Boundaries are recomputed from the bytes on load, never stored.
struct SignalTrack {
  std::string doc_id;
  std::optional<std::string> language;
  std::string bytes;
  std::vector<double> surprisal;
  std::vector<double> entropy;
  BoundaryList boundaries;

  // Throws data_error on length mismatch or non-finite / negative values.
  void validate() const;
};

std::vector<SignalTrack> read_signal_file(const std::string& path);
void write_signal_file(std::span<const SignalTrack> tracks, const std::string& path);

/// Loads a line-delimited manifest of {"doc_id", "path", "language"} records.
/// Paths are resolved relative to the manifest's directory.
std::vector<Document> read_manifest(const std::string& path);

std::string to_hex(std::string_view bytes);
std::string from_hex(std::string_view hex);

/// Order-sensitive FNV-1a fingerprint over (doc_id, bytes) pairs, as hex.
std::string corpus_fingerprint(std::span<const Document> docs);
std::string tracks_fingerprint(std::span<const SignalTrack> tracks);

}  // namespace bytespan
