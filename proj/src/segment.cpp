#include "bytespan/segment.hpp"

#include <cmath>

#include "bytespan/error.hpp"

namespace bytespan {

void ConstraintConfig::validate() const {
  const bool needs_global = kind == ConstraintKind::global || kind == ConstraintKind::combined;
  // +-inf is meaningful (degenerate all/nothing thresholds); NaN is not.
  if (needs_global && std::isnan(theta_g))
    throw data_error("constraint '" + to_string(kind) + "' requires a theta_g value");
  if (!(theta_m >= 0.0))
    throw data_error("theta_m must be >= 0");
}

std::string to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::global: return "global";
    case ConstraintKind::monotonic: return "monotonic";
    case ConstraintKind::combined: return "combined";
  }
  return "?";
}

std::string to_string(SignalKind signal) {
  return signal == SignalKind::surprisal ? "surprisal" : "entropy";
}

ConstraintKind constraint_kind_from_string(const std::string& s) {
  if (s == "global") return ConstraintKind::global;
  if (s == "monotonic") return ConstraintKind::monotonic;
  if (s == "combined") return ConstraintKind::combined;
  throw data_error("unknown constraint kind: " + s);
}

SignalKind signal_kind_from_string(const std::string& s) {
  if (s == "surprisal") return SignalKind::surprisal;
  if (s == "entropy") return SignalKind::entropy;
  throw data_error("unknown signal kind: " + s);
}

std::vector<Span> segment(const SignalTrack& track, const ConstraintConfig& cfg) {
  cfg.validate();
  const std::vector<double>& info =
      cfg.signal == SignalKind::surprisal ? track.surprisal : track.entropy;
  const std::size_t n = track.bytes.size();
  if (info.size() != n)
    throw data_error("signal track '" + track.doc_id + "': array length mismatch");

  std::vector<Span> spans;
  if (n == 0) return spans;

  auto continues = [&](std::size_t t) {
    const bool global_ok = info[t] < cfg.theta_g;
    const bool monotonic_ok = info[t] - info[t - 1] < cfg.theta_m;
    switch (cfg.kind) {
      case ConstraintKind::global: return global_ok;
      case ConstraintKind::monotonic: return monotonic_ok;
      case ConstraintKind::combined: return global_ok || monotonic_ok;
    }
    return false;
  };

  // boundaries is sorted and starts with 0; walk it alongside the bytes.
  std::size_t next_boundary = 0;
  std::size_t span_start = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const bool starts_pretoken =
        next_boundary < track.boundaries.size() && track.boundaries[next_boundary] == t;
    if (starts_pretoken) ++next_boundary;
    if (t == 0) continue;
    if (starts_pretoken || !continues(t)) {
      spans.push_back({span_start, t - span_start});
      span_start = t;
    }
  }
  spans.push_back({span_start, n - span_start});
  return spans;
}

}  // namespace bytespan
