#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bytespan/bpe.hpp"
#include "bytespan/corpus.hpp"
#include "bytespan/error.hpp"
#include "bytespan/learner.hpp"
#include "bytespan/metrics.hpp"
#include "bytespan/ngram.hpp"
#include "bytespan/segment.hpp"
#include "bytespan/tokenizer.hpp"
#include "bytespan/vocabulary.hpp"

namespace py = pybind11;
using namespace bytespan;

namespace {

Document make_document(const std::string& doc_id, const py::bytes& data,
                       const std::optional<std::string>& language) {
  return {doc_id, static_cast<std::string>(data), language};
}

std::vector<Document> documents_from(const py::iterable& docs) {
  std::vector<Document> out;
  for (py::handle h : docs) out.push_back(h.cast<Document>());
  return out;
}

}  // namespace

PYBIND11_MODULE(bytespan, m) {
  m.doc() = "Information-driven subword tokenisation toolkit";

  py::register_exception<data_error>(m, "DataError");

  py::class_<Document>(m, "Document")
      .def(py::init(&make_document), py::arg("doc_id"), py::arg("bytes"),
           py::arg("language") = std::nullopt)
      .def_readwrite("doc_id", &Document::doc_id)
      .def_property_readonly("bytes", [](const Document& d) { return py::bytes(d.bytes); })
      .def_readwrite("language", &Document::language);

  m.def(
      "pretokenize",
      [](const py::bytes& data) { return pretokenize(static_cast<std::string>(data)); },
      "Pre-token start offsets, endpoints included");

  py::class_<SignalTrack>(m, "SignalTrack")
      .def_readonly("doc_id", &SignalTrack::doc_id)
      .def_readonly("language", &SignalTrack::language)
      .def_property_readonly("bytes",
                             [](const SignalTrack& t) { return py::bytes(t.bytes); })
      .def_readonly("surprisal", &SignalTrack::surprisal)
      .def_readonly("entropy", &SignalTrack::entropy)
      .def_readonly("boundaries", &SignalTrack::boundaries);

  m.def("read_signal_file", &read_signal_file);
  m.def("write_signal_file", [](const std::vector<SignalTrack>& tracks, const std::string& p) {
    write_signal_file(tracks, p);
  });

  py::class_<NGramByteModel>(m, "NGramByteModel")
      .def(py::init<unsigned, double>(), py::arg("order") = 5, py::arg("discount") = 0.75)
      .def_property_readonly("order", &NGramByteModel::order)
      .def_property_readonly("discount", &NGramByteModel::discount)
      .def("probability",
           [](const NGramByteModel& m, const py::bytes& ctx, unsigned outcome) {
             return m.probability(static_cast<std::string>(ctx), outcome);
           })
      .def("score", &NGramByteModel::score)
      .def("score_corpus",
           [](const NGramByteModel& m, const py::iterable& docs, unsigned workers) {
             return m.score_corpus(documents_from(docs), workers);
           },
           py::arg("docs"), py::arg("workers") = 1)
      .def("save", &NGramByteModel::save)
      .def_static("load", &NGramByteModel::load);

  m.def(
      "train_ngram",
      [](const py::iterable& docs, unsigned order, double discount, unsigned workers) {
        return train_ngram(documents_from(docs), order, discount, workers);
      },
      py::arg("docs"), py::arg("order") = 5, py::arg("discount") = 0.75,
      py::arg("workers") = 1);

  py::enum_<ConstraintKind>(m, "ConstraintKind")
      .value("GLOBAL", ConstraintKind::global)
      .value("MONOTONIC", ConstraintKind::monotonic)
      .value("COMBINED", ConstraintKind::combined);
  py::enum_<SignalKind>(m, "SignalKind")
      .value("SURPRISAL", SignalKind::surprisal)
      .value("ENTROPY", SignalKind::entropy);

  py::class_<ConstraintConfig>(m, "ConstraintConfig")
      .def(py::init([](ConstraintKind kind, SignalKind signal, double theta_g, double theta_m) {
             return ConstraintConfig{kind, signal, theta_g, theta_m};
           }),
           py::arg("kind") = ConstraintKind::monotonic,
           py::arg("signal") = SignalKind::surprisal, py::arg("theta_g") = 0.0,
           py::arg("theta_m") = 0.0)
      .def_readwrite("kind", &ConstraintConfig::kind)
      .def_readwrite("signal", &ConstraintConfig::signal)
      .def_readwrite("theta_g", &ConstraintConfig::theta_g)
      .def_readwrite("theta_m", &ConstraintConfig::theta_m);

  py::class_<Span>(m, "Span")
      .def_readonly("start", &Span::start)
      .def_readonly("length", &Span::length);

  m.def("segment", &segment, py::arg("track"), py::arg("config"));

  py::enum_<Marker>(m, "Marker")
      .value("PLAIN", Marker::plain)
      .value("CONTINUATION", Marker::continuation)
      .value("WORD_INITIAL", Marker::word_initial);

  py::class_<Symbol>(m, "Symbol")
      .def(py::init([](Marker marker, const py::bytes& b) {
             return Symbol{marker, static_cast<std::string>(b)};
           }),
           py::arg("marker"), py::arg("bytes"))
      .def_readonly("marker", &Symbol::marker)
      .def_property_readonly("bytes", [](const Symbol& s) { return py::bytes(s.bytes); })
      .def("__repr__", [](const Symbol& s) {
        return "Symbol(" + to_string(s.marker) + ", " + to_hex(s.bytes) + ")";
      });

  py::enum_<BaseKind>(m, "BaseKind")
      .value("BPE", BaseKind::bpe)
      .value("WORDPIECE", BaseKind::wordpiece);

  py::class_<Vocabulary>(m, "Vocabulary")
      .def_static("base", &Vocabulary::base, py::arg("kind") = BaseKind::wordpiece)
      .def("__len__", &Vocabulary::size)
      .def("symbol", &Vocabulary::symbol)
      .def("find", &Vocabulary::find)
      .def("contains", &Vocabulary::contains)
      .def_property_readonly("method",
                             [](const Vocabulary& v) { return v.metadata().method; })
      .def_property_readonly("warnings",
                             [](const Vocabulary& v) { return v.metadata().warnings; })
      .def("same_symbols", &Vocabulary::same_symbols);

  m.def("save_vocab", &save_vocab);
  m.def("load_vocab", &load_vocab);

  py::class_<SpanCountTable>(m, "SpanCountTable")
      .def("__len__", [](const SpanCountTable& t) { return t.counts.size(); })
      .def("count", [](const SpanCountTable& t, const Symbol& s) {
        auto it = t.counts.find(s);
        return it == t.counts.end() ? std::uint64_t{0} : it->second;
      });

  m.def("count_spans",
        [](const std::vector<SignalTrack>& tracks, const ConstraintConfig& cfg,
           unsigned workers) { return count_spans(tracks, cfg, workers); },
        py::arg("tracks"), py::arg("config"), py::arg("workers") = 1);
  m.def("learn_frequency", &learn_frequency, py::arg("table"), py::arg("target"),
        py::arg("theta_f") = 1);
  m.def("learn_incremental",
        [](const std::vector<SignalTrack>& tracks, const ConstraintConfig& cfg,
           std::size_t target, std::uint64_t theta_f, const std::vector<double>& schedule,
           unsigned workers) {
          return learn_incremental(tracks, cfg, target, theta_f, schedule, workers);
        },
        py::arg("tracks"), py::arg("config"), py::arg("target"), py::arg("theta_f"),
        py::arg("schedule"), py::arg("workers") = 1);
  m.def("learn_seeded",
        [](const std::vector<SignalTrack>& tracks, const ConstraintConfig& cfg,
           std::size_t target, double seed_fraction, std::uint64_t theta_f, unsigned workers) {
          return learn_seeded(tracks, cfg, target, seed_fraction, theta_f, workers);
        },
        py::arg("tracks"), py::arg("config"), py::arg("target"), py::arg("seed_fraction"),
        py::arg("theta_f") = 1, py::arg("workers") = 1);
  m.def("learn_balanced", &learn_balanced, py::arg("table"), py::arg("target"),
        py::arg("theta_f") = 1);

  m.def("train_bpe",
        [](const py::iterable& docs, std::size_t target, BaseKind kind) {
          const Vocabulary base = Vocabulary::base(kind);
          return train_bpe(build_bpe_sequences(documents_from(docs), base), target, base);
        },
        py::arg("docs"), py::arg("target"), py::arg("base") = BaseKind::wordpiece);

  py::enum_<TokenizeMode>(m, "TokenizeMode")
      .value("LONGEST_PREFIX", TokenizeMode::longest_prefix)
      .value("BPE_MERGES", TokenizeMode::bpe_merges);

  py::class_<Tokenizer>(m, "Tokenizer")
      .def(py::init<Vocabulary>())
      .def_property_readonly("vocab", &Tokenizer::vocab)
      .def("tokenize",
           [](const Tokenizer& t, const py::bytes& data, TokenizeMode mode) {
             return t.tokenize(static_cast<std::string>(data), mode);
           },
           py::arg("bytes"), py::arg("mode") = TokenizeMode::longest_prefix)
      .def("detokenize", [](const Tokenizer& t, const std::vector<TokenId>& ids) {
        return py::bytes(t.detokenize(ids));
      });

  m.def("fertility",
        [](const Tokenizer& tok, const py::iterable& docs, TokenizeMode mode) {
          const FertilityResult r = fertility(tok, documents_from(docs), mode);
          py::dict out;
          out["overall"] = r.overall;
          out["per_language"] = r.per_language;
          return out;
        },
        py::arg("tokenizer"), py::arg("docs"),
        py::arg("mode") = TokenizeMode::longest_prefix);
  m.def("renyi_efficiency",
        [](const std::vector<std::uint64_t>& counts, double alpha, std::size_t vocab_size) {
          return renyi_efficiency(counts, alpha, vocab_size);
        });
  m.def("token_length_distribution", &token_length_distribution);
  m.def("vocab_overlap", &vocab_overlap);

  py::class_<GoldSegmentation>(m, "GoldSegmentation")
      .def(py::init([](const std::string& word, const std::vector<std::string>& segments,
                       const std::string& resource) {
             return GoldSegmentation{word, segments, resource};
           }),
           py::arg("word"), py::arg("segments"), py::arg("resource"))
      .def_readonly("word", &GoldSegmentation::word)
      .def_readonly("segments", &GoldSegmentation::segments)
      .def_readonly("resource", &GoldSegmentation::resource);
  m.def("load_gold_file", &load_gold_file);
  m.def("morph_alignment",
        [](const Tokenizer& tok, const std::vector<GoldSegmentation>& gold,
           TokenizeMode mode) {
          const MorphResult r = morph_alignment(tok, gold, mode);
          py::dict out;
          out["macro_f1"] = r.macro_f1;
          out["coverage"] = r.coverage;
          out["per_resource_f1"] = r.per_resource_f1;
          out["per_resource_coverage"] = r.per_resource_coverage;
          out["warnings"] = r.warnings;
          return out;
        },
        py::arg("tokenizer"), py::arg("gold"),
        py::arg("mode") = TokenizeMode::longest_prefix);

  py::class_<LexicalDecisionRecord>(m, "LexicalDecisionRecord")
      .def(py::init([](const std::string& item, bool is_word, double rt_ms, double accuracy) {
             return LexicalDecisionRecord{item, is_word, rt_ms, accuracy};
           }),
           py::arg("item"), py::arg("is_word"), py::arg("rt_ms"), py::arg("accuracy"))
      .def_readonly("item", &LexicalDecisionRecord::item)
      .def_readonly("is_word", &LexicalDecisionRecord::is_word)
      .def_readonly("rt_ms", &LexicalDecisionRecord::rt_ms)
      .def_readonly("accuracy", &LexicalDecisionRecord::accuracy);
  m.def("load_lexdec_file", &load_lexdec_file);
  m.def("cognitive_plausibility",
        [](const Tokenizer& tok, const std::vector<LexicalDecisionRecord>& records,
           TokenizeMode mode) {
          const CognitiveResult r = cognitive_plausibility(tok, records, mode);
          py::dict out;
          out["score"] = r.score;
          out["per_condition"] = r.per_condition;
          out["warnings"] = r.warnings;
          return out;
        },
        py::arg("tokenizer"), py::arg("records"),
        py::arg("mode") = TokenizeMode::longest_prefix);
}
