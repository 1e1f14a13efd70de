#include "bytespan/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "bytespan/error.hpp"

namespace bytespan {

namespace {

constexpr unsigned kOutcomeBits = 9;

std::uint64_t pack_context(std::string_view bytes) {
  std::uint64_t ctx = 0;
  for (unsigned char b : bytes) ctx = (ctx << 8) | b;
  return ctx;
}

void check_params(unsigned order, double discount) {
  if (order < 1 || order > NGramByteModel::kMaxOrder)
    throw data_error("ngram order must be in [1, " +
                     std::to_string(NGramByteModel::kMaxOrder) + "]");
  if (!(discount > 0.0 && discount < 1.0))
    throw data_error("ngram discount must lie in (0, 1)");
}

}  // namespace

NGramByteModel::NGramByteModel(unsigned order, double discount)
    : order_(order), discount_(discount), levels_(order) {
  check_params(order, discount);
}

void NGramByteModel::Level::build_context_index() {
  contexts.clear();
  std::size_t i = 0;
  while (i < keys.size()) {
    const std::uint64_t ctx = keys[i] >> kOutcomeBits;
    ContextInfo info{ctx, static_cast<std::uint32_t>(i), 0, 0};
    while (i < keys.size() && (keys[i] >> kOutcomeBits) == ctx) {
      info.total += counts[i];
      ++info.length;
      ++i;
    }
    contexts.push_back(info);
  }
}

const NGramByteModel::ContextInfo* NGramByteModel::Level::find_context(
    std::uint64_t ctx) const {
  auto it = std::lower_bound(contexts.begin(), contexts.end(), ctx,
                             [](const ContextInfo& c, std::uint64_t v) { return c.ctx < v; });
  if (it == contexts.end() || it->ctx != ctx) return nullptr;
  return &*it;
}

std::uint64_t NGramByteModel::Level::outcome_count(const ContextInfo& info,
                                                   unsigned outcome) const {
  const std::uint64_t key = (info.ctx << kOutcomeBits) | outcome;
  const auto begin = keys.begin() + info.begin;
  const auto end = begin + info.length;
  auto it = std::lower_bound(begin, end, key);
  if (it == end || *it != key) return 0;
  return counts[static_cast<std::size_t>(it - keys.begin())];
}

double NGramByteModel::probability(std::string_view context, unsigned outcome) const {
  if (outcome >= kAlphabet) throw data_error("ngram outcome out of range");
  const unsigned k0 = std::min<std::size_t>(context.size(), order_ - 1);
  double p = 0.0;
  double weight = 1.0;
  for (unsigned k = k0 + 1; k-- > 0;) {
    const std::uint64_t ctx = pack_context(context.substr(context.size() - k));
    const ContextInfo* info = levels_[k].find_context(ctx);
    if (!info || info->total == 0) continue;  // unseen context: fall straight through
    const double n = static_cast<double>(info->total);
    const std::uint64_t c = levels_[k].outcome_count(*info, outcome);
    if (c > 0) p += weight * (static_cast<double>(c) - discount_) / n;
    weight *= discount_ * static_cast<double>(info->length) / n;
  }
  return p + weight / kAlphabet;
}

std::vector<double> NGramByteModel::distribution(std::string_view context) const {
  std::vector<double> p(kAlphabet, 0.0);
  const unsigned k0 = std::min<std::size_t>(context.size(), order_ - 1);
  double weight = 1.0;
  for (unsigned k = k0 + 1; k-- > 0;) {
    const std::uint64_t ctx = pack_context(context.substr(context.size() - k));
    const ContextInfo* info = levels_[k].find_context(ctx);
    if (!info || info->total == 0) continue;
    const double n = static_cast<double>(info->total);
    for (std::uint32_t i = 0; i < info->length; ++i) {
      const std::size_t at = info->begin + i;
      const unsigned outcome = static_cast<unsigned>(levels_[k].keys[at] & 0x1ff);
      p[outcome] += weight * (static_cast<double>(levels_[k].counts[at]) - discount_) / n;
    }
    weight *= discount_ * static_cast<double>(info->length) / n;
  }
  const double floor = weight / kAlphabet;
  for (double& v : p) v += floor;
  return p;
}

double NGramByteModel::entropy_of(std::string_view context) const {
  const std::vector<double> p = distribution(context);
  double h = 0.0;
  for (double v : p) h -= v * std::log2(v);
  return h;
}

SignalTrack NGramByteModel::score(const Document& doc) const {
  std::unordered_map<std::uint64_t, double> memo;
  SignalTrack t;
  t.doc_id = doc.doc_id;
  t.language = doc.language;
  t.bytes = doc.bytes;
  const std::size_t n = doc.bytes.size();
  t.surprisal.reserve(n);
  t.entropy.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned k0 = std::min<std::size_t>(i, order_ - 1);
    const std::string_view ctx(doc.bytes.data() + i - k0, k0);
    t.surprisal.push_back(-std::log2(probability(ctx, static_cast<unsigned char>(doc.bytes[i]))));
    const std::uint64_t memo_key = pack_context(ctx) | (static_cast<std::uint64_t>(k0) << 56);
    auto it = memo.find(memo_key);
    if (it == memo.end()) it = memo.emplace(memo_key, entropy_of(ctx)).first;
    t.entropy.push_back(it->second);
  }
  // Clamp tiny negative rounding noise from p ~ 1.
  for (double& v : t.surprisal) v = std::max(v, 0.0);
  t.boundaries = pretokenize(t.bytes);
  t.validate();
  return t;
}

std::vector<SignalTrack> NGramByteModel::score_corpus(std::span<const Document> docs,
                                                      unsigned workers) const {
  std::vector<SignalTrack> tracks(docs.size());
  if (workers <= 1 || docs.size() < 2) {
    for (std::size_t i = 0; i < docs.size(); ++i) tracks[i] = score(docs[i]);
    return tracks;
  }
  const unsigned n = std::min<unsigned>(workers, static_cast<unsigned>(docs.size()));
  std::vector<std::thread> threads;
  threads.reserve(n);
  for (unsigned w = 0; w < n; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = w; i < docs.size(); i += n) tracks[i] = score(docs[i]);
    });
  }
  for (auto& t : threads) t.join();
  return tracks;
}

NGramByteModel train_ngram(std::span<const Document> corpus, unsigned order, double discount,
                           unsigned workers) {
  check_params(order, discount);
  if (corpus.empty()) throw data_error("cannot train an ngram model on an empty corpus");

  NGramByteModel model(order, discount);

  // Collect (context, outcome) keys per level, then sort and run-length
  // encode. Sorting makes the result independent of worker count.
  std::vector<std::vector<std::uint64_t>> raw(order);
  auto count_doc = [order](const Document& doc, std::vector<std::vector<std::uint64_t>>& out) {
    const std::size_t n = doc.bytes.size();
    for (std::size_t i = 0; i <= n; ++i) {
      const unsigned outcome =
          i < n ? static_cast<unsigned char>(doc.bytes[i]) : NGramByteModel::kEndOfDoc;
      const unsigned kmax = std::min<std::size_t>(i, order - 1);
      std::uint64_t ctx = 0;
      out[0].push_back(outcome);
      for (unsigned k = 1; k <= kmax; ++k) {
        ctx |= static_cast<std::uint64_t>(static_cast<unsigned char>(doc.bytes[i - k]))
               << (8 * (k - 1));
        out[k].push_back((ctx << kOutcomeBits) | outcome);
      }
    }
  };

  if (workers <= 1 || corpus.size() < 2) {
    for (const Document& doc : corpus) count_doc(doc, raw);
  } else {
    const unsigned n = std::min<unsigned>(workers, static_cast<unsigned>(corpus.size()));
    std::vector<std::vector<std::vector<std::uint64_t>>> parts(
        n, std::vector<std::vector<std::uint64_t>>(order));
    std::vector<std::thread> threads;
    threads.reserve(n);
    for (unsigned w = 0; w < n; ++w) {
      threads.emplace_back([&, w] {
        for (std::size_t i = w; i < corpus.size(); i += n) count_doc(corpus[i], parts[w]);
      });
    }
    for (auto& t : threads) t.join();
    for (auto& part : parts)
      for (unsigned k = 0; k < order; ++k)
        raw[k].insert(raw[k].end(), part[k].begin(), part[k].end());
  }

  for (unsigned k = 0; k < order; ++k) {
    std::vector<std::uint64_t>& keys = raw[k];
    std::sort(keys.begin(), keys.end());
    NGramByteModel::Level& level = model.levels_[k];
    std::size_t i = 0;
    while (i < keys.size()) {
      std::size_t j = i;
      while (j < keys.size() && keys[j] == keys[i]) ++j;
      level.keys.push_back(keys[i]);
      level.counts.push_back(j - i);
      i = j;
    }
    keys.clear();
    keys.shrink_to_fit();
    level.build_context_index();
  }
  return model;
}

namespace {
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;
constexpr int kModelVersion = 1;
}  // namespace

void NGramByteModel::save(const std::string& path) const {
  ordered_json j;
  j["format"] = "bytespan-ngram";
  j["version"] = kModelVersion;
  j["order"] = order_;
  j["discount"] = discount_;
  ordered_json levels = ordered_json::array();
  for (const Level& level : levels_) {
    ordered_json e;
    e["keys"] = level.keys;
    e["counts"] = level.counts;
    levels.push_back(std::move(e));
  }
  j["levels"] = std::move(levels);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot open model file for writing: " + path);
  out << j.dump() << '\n';
  if (!out) throw data_error("failed writing model file: " + path);
}

NGramByteModel NGramByteModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw data_error("corrupt model file " + path + ": " + e.what());
  }
  if (j.value("format", "") != "bytespan-ngram")
    throw data_error("not an ngram model file: " + path);
  if (j.value("version", -1) != kModelVersion)
    throw data_error("unsupported model version in " + path);
  NGramByteModel model(j.at("order").get<unsigned>(), j.at("discount").get<double>());
  const json& levels = j.at("levels");
  if (levels.size() != model.order_)
    throw data_error("model file has wrong level count: " + path);
  for (unsigned k = 0; k < model.order_; ++k) {
    Level& level = model.levels_[k];
    level.keys = levels[k].at("keys").get<std::vector<std::uint64_t>>();
    level.counts = levels[k].at("counts").get<std::vector<std::uint64_t>>();
    if (level.keys.size() != level.counts.size() ||
        !std::is_sorted(level.keys.begin(), level.keys.end()))
      throw data_error("model file level " + std::to_string(k) + " is corrupt: " + path);
    level.build_context_index();
  }
  return model;
}

bool NGramByteModel::operator==(const NGramByteModel& other) const {
  if (order_ != other.order_ || discount_ != other.discount_) return false;
  for (unsigned k = 0; k < order_; ++k)
    if (levels_[k].keys != other.levels_[k].keys ||
        levels_[k].counts != other.levels_[k].counts)
      return false;
  return true;
}

}  // namespace bytespan
