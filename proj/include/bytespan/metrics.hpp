#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bytespan/corpus.hpp"
#include "bytespan/tokenizer.hpp"
#include "bytespan/vocabulary.hpp"

namespace bytespan {

struct FertilityResult {
  double overall = 0.0;
  std::map<std::string, double> per_language;
  std::uint64_t words = 0;
  std::uint64_t tokens = 0;
};

/// tokens per word, whitespace-only pre-tokens excluded from both counts.
/// Throws data_error when the corpus has no words.
FertilityResult fertility(const Tokenizer& tok, std::span<const Document> docs,
                          TokenizeMode mode = TokenizeMode::longest_prefix);

struct TokenCountResult {
  std::vector<std::uint64_t> counts;  // indexed by token id
  std::map<std::string, std::vector<std::uint64_t>> per_language;
};

TokenCountResult count_tokens(const Tokenizer& tok, std::span<const Document> docs,
                              TokenizeMode mode = TokenizeMode::longest_prefix);

/// Order-alpha Renyi entropy of the empirical token distribution, normalised
/// by log2(vocab_size). Zero counts contribute nothing; alpha must not be 1
/// (use shannon_efficiency for the limit).
double renyi_efficiency(std::span<const std::uint64_t> counts, double alpha,
                        std::size_t vocab_size);
double shannon_efficiency(std::span<const std::uint64_t> counts, std::size_t vocab_size);

struct GoldSegmentation {
  std::string word;
  std::vector<std::string> segments;  // concatenation equals word
  std::string resource;
};

std::vector<GoldSegmentation> load_gold_file(const std::string& path);

struct MorphResult {
  double macro_f1 = 0.0;
  double coverage = 0.0;  // fraction of words whose gold segments all exist
  std::map<std::string, double> per_resource_f1;
  std::map<std::string, double> per_resource_coverage;
  std::vector<std::string> warnings;
};

/// Boundary-set F1 against gold segmentations, tokenising each word in
/// word-initial position. Words whose gold segments are not all in the
/// vocabulary (any marker) are skipped and counted against coverage.
MorphResult morph_alignment(const Tokenizer& tok, std::span<const GoldSegmentation> gold,
                            TokenizeMode mode = TokenizeMode::longest_prefix);

struct LexicalDecisionRecord {
  std::string item;
  bool is_word = false;
  double rt_ms = 0.0;
  double accuracy = 0.0;
};

std::vector<LexicalDecisionRecord> load_lexdec_file(const std::string& path);

struct CognitiveResult {
  double score = 0.0;
  std::map<std::string, double> per_condition;  // raw Pearson correlations
  std::vector<std::string> warnings;
};

/// Pearson correlation of token count with reaction time and accuracy,
/// separately for words and nonwords; word-condition correlations are
/// negated before averaging. Degenerate conditions are dropped.
CognitiveResult cognitive_plausibility(const Tokenizer& tok,
                                       std::span<const LexicalDecisionRecord> records,
                                       TokenizeMode mode = TokenizeMode::longest_prefix);

/// Histogram of symbol byte lengths; markers carry no length.
std::map<std::size_t, std::uint64_t> token_length_distribution(const Vocabulary& vocab);

/// |symbols(v1) ∩ symbols(v2)| / min(|v1|, |v2|), markers included.
double vocab_overlap(const Vocabulary& v1, const Vocabulary& v2);

/// Named metric values plus per-language / per-resource breakdowns.
struct MetricReport {
  std::map<std::string, double> values;
  std::map<std::string, std::map<std::string, double>> breakdowns;
  std::map<std::string, std::string> config;  // invocation settings, for reproducibility
  std::string vocab_fingerprint;
  std::vector<std::string> warnings;

  std::string to_json_string() const;
};

void write_length_histogram_tsv(const std::map<std::size_t, std::uint64_t>& hist,
                                const std::string& path);
void write_breakdown_tsv(const std::string& key_name, const std::string& value_name,
                         const std::map<std::string, double>& rows, const std::string& path);

}  // namespace bytespan
