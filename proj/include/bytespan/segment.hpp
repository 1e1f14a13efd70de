#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "bytespan/corpus.hpp"

namespace bytespan {

enum class ConstraintKind { global, monotonic, combined };
enum class SignalKind { surprisal, entropy };

/// Parameters of the span-grouping constraint. A byte continues the current
/// span when its information passes the constraint's test; otherwise a new
/// span starts. theta_g is required for the global and combined kinds;
/// theta_m > 0 gives the approximate-monotonic variant.
struct ConstraintConfig {
  ConstraintKind kind = ConstraintKind::monotonic;
  SignalKind signal = SignalKind::surprisal;
  double theta_g = 0.0;
  double theta_m = 0.0;

  void validate() const;  // throws data_error
};

std::string to_string(ConstraintKind kind);
std::string to_string(SignalKind signal);
ConstraintKind constraint_kind_from_string(const std::string& s);
SignalKind signal_kind_from_string(const std::string& s);

/// A contiguous byte span of one document; never crosses a pre-token
/// boundary of the track it was produced from.
struct Span {
  std::size_t start = 0;
  std::size_t length = 0;
  bool operator==(const Span&) const = default;
};

/// Partitions the track's bytes into spans in one left-to-right pass.
/// A span boundary is placed before byte t iff t starts a pre-token or the
/// byte fails the continuation test of `cfg`.
std::vector<Span> segment(const SignalTrack& track, const ConstraintConfig& cfg);

}  // namespace bytespan
