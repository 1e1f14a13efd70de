#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bytespan/bpe.hpp"
#include "bytespan/corpus.hpp"
#include "bytespan/error.hpp"
#include "bytespan/learner.hpp"
#include "bytespan/metrics.hpp"
#include "bytespan/ngram.hpp"
#include "bytespan/segment.hpp"
#include "bytespan/tokenizer.hpp"
#include "bytespan/vocabulary.hpp"

namespace {

using namespace bytespan;

struct CorpusArgs {
  std::string manifest;
  std::vector<std::string> inputs;
  std::string language;
};

void add_corpus_options(CLI::App* cmd, CorpusArgs& args) {
  auto* manifest = cmd->add_option("--manifest", args.manifest,
                                   "Line-delimited manifest of {doc_id, path, language}");
  auto* input = cmd->add_option("--input", args.inputs, "Raw text file(s), one document each");
  cmd->add_option("--language", args.language, "Language tag applied to --input documents");
  manifest->excludes(input);
}

std::vector<Document> load_corpus(const CorpusArgs& args) {
  if (!args.manifest.empty()) return read_manifest(args.manifest);
  if (args.inputs.empty()) throw data_error("no corpus given: use --manifest or --input");
  std::vector<Document> docs;
  for (const std::string& path : args.inputs) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open input file: " + path);
    Document d;
    d.doc_id = std::filesystem::path(path).filename().string();
    d.bytes.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (d.bytes.empty()) throw data_error("input file is empty: " + path);
    if (!args.language.empty()) d.language = args.language;
    docs.push_back(std::move(d));
  }
  return docs;
}

std::vector<double> collect_signal(std::span<const SignalTrack> tracks, SignalKind kind) {
  std::vector<double> values;
  for (const SignalTrack& t : tracks) {
    const auto& v = kind == SignalKind::surprisal ? t.surprisal : t.entropy;
    values.insert(values.end(), v.begin(), v.end());
  }
  if (values.empty()) throw data_error("signal file has no values");
  return values;
}

double quantile_of(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const std::size_t idx = std::min(
      values.size() - 1, static_cast<std::size_t>(q * static_cast<double>(values.size())));
  return values[idx];
}

std::vector<double> quantile_schedule(std::span<const SignalTrack> tracks, SignalKind kind) {
  std::vector<double> values = collect_signal(tracks, kind);
  std::sort(values.begin(), values.end());
  std::vector<double> schedule;
  for (int pct = 5; pct <= 95; pct += 5) {
    const std::size_t idx =
        std::min(values.size() - 1,
                 static_cast<std::size_t>(pct / 100.0 * static_cast<double>(values.size())));
    const double v = values[idx];
    if (schedule.empty() || v > schedule.back()) schedule.push_back(v);
  }
  return schedule;
}

std::vector<Document> docs_from_tracks(std::span<const SignalTrack> tracks) {
  std::vector<Document> docs;
  docs.reserve(tracks.size());
  for (const SignalTrack& t : tracks) docs.push_back({t.doc_id, t.bytes, t.language});
  return docs;
}

// ---------------------------------------------------------------------------
// signals ngram

struct SignalsArgs {
  CorpusArgs corpus;
  CorpusArgs score_corpus;
  unsigned order = 5;
  double discount = 0.75;
  std::string out;
  std::string model_out;
  std::string model_in;
  unsigned workers = 1;
};

int run_signals_ngram(const SignalsArgs& args) {
  NGramByteModel model(args.order, args.discount);
  std::vector<Document> docs;
  if (!args.model_in.empty()) {
    model = NGramByteModel::load(args.model_in);
  } else {
    docs = load_corpus(args.corpus);
    model = train_ngram(docs, args.order, args.discount, args.workers);
  }
  if (!args.model_out.empty()) model.save(args.model_out);

  std::vector<Document> to_score;
  if (!args.score_corpus.manifest.empty() || !args.score_corpus.inputs.empty())
    to_score = load_corpus(args.score_corpus);
  else if (!docs.empty())
    to_score = std::move(docs);
  else
    throw data_error("nothing to score: give --score-manifest/--score-input or a training corpus");

  const std::vector<SignalTrack> tracks = model.score_corpus(to_score, args.workers);
  write_signal_file(tracks, args.out);
  std::cerr << "wrote " << tracks.size() << " signal tracks to " << args.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string method;
  std::string signals;
  CorpusArgs corpus;
  std::string constraint = "monotonic";
  std::string signal = "surprisal";
  std::size_t vocab_size = 0;
  std::uint64_t theta_f = 0;  // 0: per-method default
  double theta_g = std::numeric_limits<double>::quiet_NaN();
  double theta_g_quantile = 0.30;
  double theta_m = 0.0;
  double seed_fraction = 0.5;
  std::vector<double> schedule;
  std::string dump_table;
  std::string out;
  unsigned workers = 1;
};

int run_train(const TrainArgs& args, bool constraint_set, bool signal_set) {
  const bool is_bytespan = args.method == "frequency" || args.method == "incremental" ||
                           args.method == "seed-bpe" || args.method == "balanced";
  const bool is_bpe = args.method == "bpe" || args.method == "bpe-wp";
  if (!is_bytespan && !is_bpe)
    throw CLI::ValidationError("--method", "unknown method: " + args.method);
  const std::size_t min_size = args.method == "bpe" ? 512 : 768;
  if (args.vocab_size < min_size)
    throw CLI::ValidationError("--vocab-size",
                               args.method + " needs at least " + std::to_string(min_size) +
                                   " symbols (the byte base)");

  if (is_bpe) {
    if (constraint_set || signal_set)
      throw CLI::ValidationError(
          "--method", args.method + " takes no constraint or signal; drop those flags");
    std::vector<Document> docs;
    std::vector<SignalTrack> tracks;
    if (!args.signals.empty()) {
      tracks = read_signal_file(args.signals);
      docs = docs_from_tracks(tracks);
    } else {
      docs = load_corpus(args.corpus);
    }
    const Vocabulary base =
        Vocabulary::base(args.method == "bpe" ? BaseKind::bpe : BaseKind::wordpiece);
    Vocabulary v = train_bpe(build_bpe_sequences(docs, base), args.vocab_size, base);
    v.metadata().method = args.method;
    v.metadata().corpus_fingerprint = corpus_fingerprint(docs);
    save_vocab(v, args.out);
    std::cerr << "wrote " << v.size() << "-symbol vocabulary to " << args.out << "\n";
    return 0;
  }

  if (args.signals.empty())
    throw CLI::ValidationError("--signals", "method " + args.method + " needs a signal file");
  const std::vector<SignalTrack> tracks = read_signal_file(args.signals);

  ConstraintConfig cfg;
  cfg.kind = args.method == "incremental" && !constraint_set
                 ? ConstraintKind::global
                 : constraint_kind_from_string(args.constraint);
  cfg.signal = signal_kind_from_string(args.signal);
  cfg.theta_m = args.theta_m;

  if (args.method == "incremental" && cfg.kind != ConstraintKind::global)
    throw CLI::ValidationError(
        "--constraint",
        "the incremental method pairs only with the global constraint: the monotonic and "
        "combined constraints discover more spans than any useful vocabulary size on the "
        "first pass, so the schedule would stop immediately");

  const std::uint64_t theta_f =
      args.theta_f != 0 ? args.theta_f : (args.method == "incremental" ? 20 : 1);

  const bool needs_theta_g =
      cfg.kind == ConstraintKind::global || cfg.kind == ConstraintKind::combined;
  if (needs_theta_g && args.method != "incremental") {
    cfg.theta_g = std::isnan(args.theta_g)
                      ? quantile_of(collect_signal(tracks, cfg.signal), args.theta_g_quantile)
                      : args.theta_g;
  }

  Vocabulary v;
  if (args.method == "frequency") {
    v = learn_frequency(count_spans(tracks, cfg, args.workers), args.vocab_size, theta_f);
  } else if (args.method == "incremental") {
    const std::vector<double> schedule =
        args.schedule.empty() ? quantile_schedule(tracks, cfg.signal) : args.schedule;
    v = learn_incremental(tracks, cfg, args.vocab_size, theta_f, schedule, args.workers);
  } else if (args.method == "seed-bpe") {
    v = learn_seeded(tracks, cfg, args.vocab_size, args.seed_fraction, theta_f, args.workers);
  } else {  // balanced
    v = learn_balanced(count_spans(tracks, cfg, args.workers), args.vocab_size, theta_f);
  }

  if (!args.dump_table.empty())
    write_frequency_table(count_spans(tracks, cfg, args.workers), args.dump_table);

  save_vocab(v, args.out);
  std::cerr << "wrote " << v.size() << "-symbol vocabulary to " << args.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// tokenize

struct TokenizeArgs {
  std::string vocab;
  std::string mode = "longest-prefix";
  CorpusArgs corpus;
  std::string out;
};

int run_tokenize(const TokenizeArgs& args) {
  const Tokenizer tok(load_vocab(args.vocab));
  const TokenizeMode mode = tokenize_mode_from_string(args.mode);
  const std::vector<Document> docs = load_corpus(args.corpus);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!args.out.empty()) {
    file.open(args.out, std::ios::binary | std::ios::trunc);
    if (!file) throw data_error("cannot open output file: " + args.out);
    out = &file;
  }
  for (const Document& d : docs) {
    const std::vector<TokenId> ids = tok.tokenize(d.bytes, mode);
    nlohmann::json arr = ids;
    (*out) << arr.dump() << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string vocab;
  std::string mode = "longest-prefix";
  CorpusArgs corpus;
  std::vector<std::string> metrics{"all"};
  std::string gold;
  std::string lexdec;
  std::string compare_vocab;
  double alpha = 2.5;
  std::string out;
  std::string tsv_dir;
};

std::vector<GoldSegmentation> load_gold(const std::string& path) {
  std::vector<GoldSegmentation> gold;
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(path))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const auto part = load_gold_file(f.string());
      gold.insert(gold.end(), part.begin(), part.end());
    }
  } else {
    gold = load_gold_file(path);
  }
  return gold;
}

int run_evaluate(const EvaluateArgs& args) {
  const Vocabulary vocab = load_vocab(args.vocab);
  const Tokenizer tok(vocab);
  const TokenizeMode mode = tokenize_mode_from_string(args.mode);

  const bool all = std::find(args.metrics.begin(), args.metrics.end(), "all") !=
                   args.metrics.end();
  auto wants = [&](const char* name) {
    return all ||
           std::find(args.metrics.begin(), args.metrics.end(), name) != args.metrics.end();
  };
  auto requires_input = [&](const char* name, bool have, const char* flag) {
    if (!all && wants(name) && !have)
      throw CLI::ValidationError("--metrics",
                                 std::string(name) + " needs " + flag);
    return have;
  };

  const bool have_corpus = !args.corpus.manifest.empty() || !args.corpus.inputs.empty();
  MetricReport report;
  report.vocab_fingerprint =
      vocab.metadata().method + ":" + vocab.metadata().corpus_fingerprint;
  report.config["vocab"] = args.vocab;
  report.config["mode"] = args.mode;
  report.config["alpha"] = std::to_string(args.alpha);
  if (!args.gold.empty()) report.config["gold"] = args.gold;
  if (!args.lexdec.empty()) report.config["lexdec"] = args.lexdec;
  if (!args.compare_vocab.empty()) report.config["compare_vocab"] = args.compare_vocab;
  if (!args.corpus.manifest.empty()) report.config["manifest"] = args.corpus.manifest;

  if (wants("fertility") && requires_input("fertility", have_corpus, "--manifest/--input")) {
    const std::vector<Document> docs = load_corpus(args.corpus);
    const FertilityResult r = fertility(tok, docs, mode);
    report.values["fertility"] = r.overall;
    if (!r.per_language.empty()) report.breakdowns["fertility_per_language"] = r.per_language;
  }
  if (wants("renyi") && requires_input("renyi", have_corpus, "--manifest/--input")) {
    const std::vector<Document> docs = load_corpus(args.corpus);
    const TokenCountResult counts = count_tokens(tok, docs, mode);
    const double eff =
        args.alpha == 1.0 ? shannon_efficiency(counts.counts, vocab.size())
                          : renyi_efficiency(counts.counts, args.alpha, vocab.size());
    report.values["renyi_efficiency"] = eff;
    report.values["renyi_alpha"] = args.alpha;
    if (!counts.per_language.empty()) {
      std::map<std::string, double> per_lang;
      for (const auto& [lang, c] : counts.per_language)
        per_lang[lang] = args.alpha == 1.0 ? shannon_efficiency(c, vocab.size())
                                           : renyi_efficiency(c, args.alpha, vocab.size());
      report.breakdowns["renyi_per_language"] = per_lang;
    }
  }
  if (wants("morph") && requires_input("morph", !args.gold.empty(), "--gold")) {
    const MorphResult r = morph_alignment(tok, load_gold(args.gold), mode);
    report.values["morph_alignment_f1"] = r.macro_f1;
    report.values["morph_coverage"] = r.coverage;
    report.breakdowns["morph_f1_per_resource"] = r.per_resource_f1;
    report.breakdowns["morph_coverage_per_resource"] = r.per_resource_coverage;
    report.warnings.insert(report.warnings.end(), r.warnings.begin(), r.warnings.end());
  }
  if (wants("cognitive") && requires_input("cognitive", !args.lexdec.empty(), "--lexdec")) {
    const CognitiveResult r =
        cognitive_plausibility(tok, load_lexdec_file(args.lexdec), mode);
    report.values["cognitive_plausibility"] = r.score;
    report.breakdowns["cognitive_per_condition"] = r.per_condition;
    report.warnings.insert(report.warnings.end(), r.warnings.begin(), r.warnings.end());
  }
  if (wants("overlap") &&
      requires_input("overlap", !args.compare_vocab.empty(), "--compare-vocab")) {
    report.values["vocab_overlap"] = vocab_overlap(vocab, load_vocab(args.compare_vocab));
  }
  std::map<std::size_t, std::uint64_t> hist;
  if (wants("lengths")) {
    hist = token_length_distribution(vocab);
    std::map<std::string, double> rows;
    for (const auto& [len, count] : hist)
      rows[std::to_string(len)] = static_cast<double>(count);
    report.breakdowns["token_length_histogram"] = rows;
  }

  if (!args.tsv_dir.empty()) {
    std::filesystem::create_directories(args.tsv_dir);
    const std::filesystem::path dir(args.tsv_dir);
    if (!hist.empty()) write_length_histogram_tsv(hist, (dir / "token_lengths.tsv").string());
    for (const auto& [name, rows] : report.breakdowns) {
      if (name == "token_length_histogram") continue;
      write_breakdown_tsv("key", name, rows, (dir / (name + ".tsv")).string());
    }
  }

  if (args.out.empty()) {
    std::cout << report.to_json_string();
  } else {
    std::ofstream file(args.out, std::ios::binary | std::ios::trunc);
    if (!file) throw data_error("cannot open output file: " + args.out);
    file << report.to_json_string();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bytespan: information-driven subword tokenisation toolkit"};
  app.require_subcommand(1);

  // signals
  auto* signals = app.add_subcommand("signals", "Produce per-byte surprisal/entropy tracks");
  signals->require_subcommand(1);
  SignalsArgs sargs;
  auto* ngram = signals->add_subcommand("ngram", "Score with a smoothed n-gram byte model");
  add_corpus_options(ngram, sargs.corpus);
  ngram->add_option("--order", sargs.order, "Model order")->default_val(5);
  ngram->add_option("--discount", sargs.discount, "Absolute discount in (0,1)")
      ->default_val(0.75);
  ngram->add_option("--out", sargs.out, "Signal file to write")->required();
  ngram->add_option("--model-out", sargs.model_out, "Save the trained model");
  ngram->add_option("--model-in", sargs.model_in, "Score with a previously saved model");
  auto* score_manifest = ngram->add_option("--score-manifest", sargs.score_corpus.manifest,
                                           "Manifest of documents to score (default: corpus)");
  auto* score_input =
      ngram->add_option("--score-input", sargs.score_corpus.inputs, "Files to score");
  score_manifest->excludes(score_input);
  ngram->add_option("--workers", sargs.workers, "Worker threads")->default_val(1);

  // train
  auto* train = app.add_subcommand("train", "Learn a vocabulary");
  TrainArgs targs;
  train->add_option("--method", targs.method,
                    "frequency | incremental | seed-bpe | bpe | bpe-wp | balanced")
      ->required();
  train->add_option("--signals", targs.signals, "Signal file from `signals`");
  add_corpus_options(train, targs.corpus);
  auto* constraint_opt =
      train->add_option("--constraint", targs.constraint, "global | monotonic | combined");
  auto* signal_opt = train->add_option("--signal", targs.signal, "surprisal | entropy");
  train->add_option("--vocab-size", targs.vocab_size, "Target vocabulary size")->required();
  train->add_option("--theta-f", targs.theta_f,
                    "Minimum span frequency (default: 20 incremental, 1 otherwise)");
  train->add_option("--theta-g", targs.theta_g, "Absolute global threshold (bits)");
  train->add_option("--theta-g-quantile", targs.theta_g_quantile,
                    "Quantile of the signal used for theta_g when no absolute value is given")
      ->default_val(0.30);
  train->add_option("--theta-m", targs.theta_m, "Monotonic slack (bits)")->default_val(0.0);
  train->add_option("--seed-fraction", targs.seed_fraction,
                    "Fraction of the non-base vocabulary learned before the merge phase")
      ->default_val(0.5);
  train->add_option("--schedule", targs.schedule,
                    "Explicit increasing theta_g schedule for the incremental method");
  train->add_option("--dump-table", targs.dump_table, "Write the span frequency table here");
  train->add_option("--out", targs.out, "Vocabulary file to write")->required();
  train->add_option("--workers", targs.workers, "Worker threads")->default_val(1);

  // tokenize
  auto* tokenize = app.add_subcommand("tokenize", "Tokenise documents with a vocabulary");
  TokenizeArgs kargs;
  tokenize->add_option("--vocab", kargs.vocab, "Vocabulary file")->required();
  tokenize->add_option("--mode", kargs.mode, "longest-prefix | bpe")
      ->default_val("longest-prefix");
  add_corpus_options(tokenize, kargs.corpus);
  tokenize->add_option("--out", kargs.out, "Write id arrays here (default: stdout)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Intrinsic evaluation of a vocabulary");
  EvaluateArgs eargs;
  evaluate->add_option("--vocab", eargs.vocab, "Vocabulary file")->required();
  evaluate->add_option("--mode", eargs.mode, "longest-prefix | bpe")
      ->default_val("longest-prefix");
  add_corpus_options(evaluate, eargs.corpus);
  evaluate->add_option("--metrics", eargs.metrics,
                       "all or a list of fertility,renyi,morph,cognitive,lengths,overlap")
      ->delimiter(',');
  evaluate->add_option("--gold", eargs.gold, "Gold segmentation file or directory");
  evaluate->add_option("--lexdec", eargs.lexdec, "Lexical decision file");
  evaluate->add_option("--compare-vocab", eargs.compare_vocab,
                       "Second vocabulary for the overlap metric");
  evaluate->add_option("--alpha", eargs.alpha, "Renyi order (1 = Shannon)")->default_val(2.5);
  evaluate->add_option("--out", eargs.out, "Report file (default: stdout)");
  evaluate->add_option("--tsv-dir", eargs.tsv_dir, "Directory for plot-ready TSVs");

  try {
    app.parse(argc, argv);
    if (ngram->parsed()) return run_signals_ngram(sargs);
    if (train->parsed())
      return run_train(targs, constraint_opt->count() > 0, signal_opt->count() > 0);
    if (tokenize->parsed()) return run_tokenize(kargs);
    if (evaluate->parsed()) return run_evaluate(eargs);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
