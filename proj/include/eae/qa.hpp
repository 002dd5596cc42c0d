#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eae/corpus.hpp"
#include "eae/metrics.hpp"
#include "eae/resources.hpp"

namespace eae {

// How a prompt (question or unfilled template) and a trigger-marked
// document are joined into a single model input.
struct InputFormat {
  std::string open_marker{kTriggerOpen};
  std::string close_marker{kTriggerClose};
  std::string separator = "\n";
};

// prompt ++ separator ++ marked document.
std::string assemble_input(std::string_view prompt, const InputFormat& format,
                           std::string_view marked_document);

struct QAConfig {
  std::size_t k = 5;
  std::size_t max_span_tokens = 30;
  InputFormat format;

  void validate() const;
};

// Answer extent of a positive example, in document and input coordinates.
struct QATarget {
  Span document_span;
  std::size_t input_start = 0;
  std::size_t input_end = 0;
};

struct QAExample {
  std::string example_id;
  std::string doc_id;
  std::string event_id;
  std::string role;
  std::string question;
  std::string input_text;
  std::optional<QATarget> target;  // nullopt: the no-answer target (0, 0)
  bool marker_collision = false;
};

struct TrainingExamples {
  std::vector<QAExample> examples;
  std::vector<std::string> warnings;
};

// One example per gold argument, plus one null-target example per role with
// no gold arguments. Arguments without offsets are skipped with a warning.
TrainingExamples build_training_examples(const Corpus& corpus, const Ontology& ontology,
                                         const QAConfig& config);

// One untargeted example per (document, event, role), roles in ontology order.
std::vector<QAExample> build_inference_examples(const Corpus& corpus, const Ontology& ontology,
                                                const QAConfig& config);

nlohmann::json to_json(const QAExample& example);

struct TokenOffset {
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const TokenOffset&) const = default;
};

struct SpanCandidate {
  Span char_span;
  std::string text;
  double confidence = 0.0;
  bool operator==(const SpanCandidate&) const = default;
};

struct DecodedSpans {
  std::vector<SpanCandidate> candidates;  // descending confidence, at most k
  double null_confidence = 0.0;
};

inline constexpr double kProbabilityTolerance = 1e-6;

// Throws Error(kLengthMismatch / kNotNormalized / kInvalidArgument) unless the
// two vectors are equal-length distributions and the offsets are monotone.
void check_span_scores(std::span<const double> start_probs, std::span<const double> end_probs,
                       std::span<const TokenOffset> token_offsets);

// Scores every token span (i, j) with 1 <= i <= j < L and j - i + 1 <=
// max_span_tokens as start[i] * end[j]; token 0 is the no-answer position.
// Offsets index `source_text` in scalar values. Candidates sharing a surface
// string are merged, keeping the highest score (earliest span on ties).
DecodedSpans decode_spans(std::span<const double> start_probs, std::span<const double> end_probs,
                          std::span<const TokenOffset> token_offsets, std::string_view source_text,
                          const QAConfig& config);

// Keeps candidates whose confidence is strictly above max(t_dev, null), at
// most k. Expects candidates sorted by descending confidence.
std::vector<ArgumentMention> select_arguments(std::span<const SpanCandidate> candidates,
                                              double null_confidence, double t_dev, std::size_t k,
                                              std::string_view role = {});

// Decoded candidates for one (document, event, role) inference example.
struct RoleCandidates {
  std::string doc_id;
  std::string event_id;
  std::string role;
  DecodedSpans decoded;
};

PredictionSet select_all(std::span<const RoleCandidates> instances, double t_dev, std::size_t k);

struct CalibrationRow {
  int percentile = 0;
  double threshold = 0.0;
  double f1 = 0.0;
};

struct CalibrationResult {
  double t_dev = 0.0;
  double f1 = 0.0;
  std::vector<CalibrationRow> sweep_table;  // percentiles 5, 10, ..., 95
};

// Nearest-rank percentile of an ascending-sorted, nonempty sample.
double nearest_rank(std::span<const double> sorted, int percentile);

// Sweeps the 19 nearest-rank percentiles of the pooled candidate confidences
// and picks the threshold with the best dev F1 against `gold`, preferring the
// larger threshold on ties. Throws Error(kEmptyPool).
CalibrationResult calibrate_threshold(std::span<const RoleCandidates> dev, const Corpus& gold,
                                      const QAConfig& config);

nlohmann::json to_json(const CalibrationResult& result);
nlohmann::json to_json(const RoleCandidates& rc);
RoleCandidates role_candidates_from_json(const nlohmann::json& j);

}  // namespace eae
