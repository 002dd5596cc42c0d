#include "eae/qa.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <numeric>

#include "eae/error.hpp"
#include "eae/utf8.hpp"

namespace eae {
namespace {

std::string example_id(const Document& doc, const EventInstance& e, const std::string& role) {
  return doc.doc_id + "/" + e.event_id + "/" + role;
}

struct Prepared {
  std::string input_text;
  OffsetMap offsets;
  std::size_t document_origin = 0;  // scalar offset of the marked document in the input
  bool collision = false;
};

Prepared prepare(const Document& doc, const EventInstance& e, const std::string& question,
                 const InputFormat& format) {
  auto marked = mark_trigger(doc, e, format.open_marker, format.close_marker);
  Prepared p;
  p.document_origin = utf8::length(question) + utf8::length(format.separator);
  p.input_text = assemble_input(question, format, marked.text);
  p.offsets = marked.offsets;
  p.collision = marked.marker_collision;
  return p;
}

}  // namespace

std::string assemble_input(std::string_view prompt, const InputFormat& format,
                           std::string_view marked_document) {
  std::string out;
  out.reserve(prompt.size() + format.separator.size() + marked_document.size());
  out.append(prompt);
  out.append(format.separator);
  out.append(marked_document);
  return out;
}

void QAConfig::validate() const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "QAConfig: k must be >= 1");
  if (max_span_tokens < 1) {
    throw Error(ErrorCode::kInvalidArgument, "QAConfig: max_span_tokens must be >= 1");
  }
}

TrainingExamples build_training_examples(const Corpus& corpus, const Ontology& ontology,
                                         const QAConfig& config) {
  config.validate();
  TrainingExamples out;
  for (const auto& doc : corpus.documents) {
    for (const auto& e : doc.events) {
      const auto* et = ontology.find(e.event_type);
      if (et == nullptr) {
        throw Error(ErrorCode::kNotFound, "event type \"" + e.event_type + "\" not in ontology");
      }
      for (const auto& role : et->roles) {
        std::size_t gold = 0;
        std::size_t n = 0;
        std::optional<Prepared> prepared;
        for (const auto& arg : e.arguments) {
          if (arg.role != role.name) continue;
          ++gold;
          if (!arg.span) {
            out.warnings.push_back(example_id(doc, e, role.name) + ": argument \"" + arg.text +
                                   "\" has no offsets; excluded");
            continue;
          }
          if (!prepared) prepared = prepare(doc, e, role.question, config.format);
          QATarget target{*arg.span,
                          prepared->document_origin + prepared->offsets.to_marked(arg.span->start),
                          prepared->document_origin +
                              prepared->offsets.to_marked_end(arg.span->end)};
          out.examples.push_back({example_id(doc, e, role.name) + "/" + std::to_string(n++),
                                  doc.doc_id, e.event_id, role.name, role.question,
                                  prepared->input_text, target, prepared->collision});
        }
        if (gold == 0) {
          auto p = prepare(doc, e, role.question, config.format);
          out.examples.push_back({example_id(doc, e, role.name) + "/null", doc.doc_id, e.event_id,
                                  role.name, role.question, std::move(p.input_text), std::nullopt,
                                  p.collision});
        }
      }
    }
  }
  return out;
}

std::vector<QAExample> build_inference_examples(const Corpus& corpus, const Ontology& ontology,
                                                const QAConfig& config) {
  config.validate();
  std::vector<QAExample> out;
  for (const auto& doc : corpus.documents) {
    for (const auto& e : doc.events) {
      const auto* et = ontology.find(e.event_type);
      if (et == nullptr) {
        throw Error(ErrorCode::kNotFound, "event type \"" + e.event_type + "\" not in ontology");
      }
      for (const auto& role : et->roles) {
        auto p = prepare(doc, e, role.question, config.format);
        out.push_back({example_id(doc, e, role.name), doc.doc_id, e.event_id, role.name,
                       role.question, std::move(p.input_text), std::nullopt, p.collision});
      }
    }
  }
  return out;
}

nlohmann::json to_json(const QAExample& ex) {
  nlohmann::json j{{"example_id", ex.example_id}, {"doc_id", ex.doc_id},
                   {"event_id", ex.event_id},     {"role", ex.role},
                   {"question", ex.question},     {"input_text", ex.input_text},
                   {"target", nullptr}};
  if (ex.target) {
    j["target"] = {{"start", ex.target->document_span.start},
                   {"end", ex.target->document_span.end},
                   {"text", ex.target->document_span.text},
                   {"input_start", ex.target->input_start},
                   {"input_end", ex.target->input_end}};
  }
  if (ex.marker_collision) j["marker_collision"] = true;
  return j;
}

void check_span_scores(std::span<const double> start_probs, std::span<const double> end_probs,
                       std::span<const TokenOffset> token_offsets) {
  if (start_probs.size() != end_probs.size() || start_probs.size() != token_offsets.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "span scores: start/end/offset lengths differ (" +
                    std::to_string(start_probs.size()) + ", " + std::to_string(end_probs.size()) +
                    ", " + std::to_string(token_offsets.size()) + ")");
  }
  if (start_probs.empty()) throw Error(ErrorCode::kLengthMismatch, "span scores: empty vectors");
  for (auto probs : {start_probs, end_probs}) {
    double sum = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0) || p > 1.0 + kProbabilityTolerance) {
        throw Error(ErrorCode::kNotNormalized, "span scores: value outside [0, 1]");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbabilityTolerance) {
      throw Error(ErrorCode::kNotNormalized,
                  "span scores: distribution sums to " + std::to_string(sum));
    }
  }
  for (std::size_t i = 0; i < token_offsets.size(); ++i) {
    if (token_offsets[i].start > token_offsets[i].end ||
        (i > 0 && (token_offsets[i].start < token_offsets[i - 1].start ||
                   token_offsets[i].end < token_offsets[i - 1].end))) {
      throw Error(ErrorCode::kInvalidArgument,
                  "span scores: token offsets not monotone at token " + std::to_string(i));
    }
  }
}

DecodedSpans decode_spans(std::span<const double> start_probs, std::span<const double> end_probs,
                          std::span<const TokenOffset> token_offsets, std::string_view source_text,
                          const QAConfig& config) {
  config.validate();
  check_span_scores(start_probs, end_probs, token_offsets);
  const utf8::Index index(source_text);
  const std::size_t n = start_probs.size();

  struct Best {
    double score;
    std::size_t start;
    std::size_t end;
  };
  std::map<std::string, Best, std::less<>> best;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t last = std::min(n - 1, i + config.max_span_tokens - 1);
    for (std::size_t j = i; j <= last; ++j) {
      const std::size_t a = token_offsets[i].start;
      const std::size_t b = token_offsets[j].end;
      if (a >= b) continue;
      const double score = start_probs[i] * end_probs[j];
      // Pairs without probability mass are not candidates.
      if (score <= 0.0) continue;
      auto text = index.slice(a, b);
      auto it = best.find(text);
      if (it == best.end()) {
        best.emplace(std::string(text), Best{score, a, b});
      } else if (score > it->second.score) {
        it->second = {score, a, b};
      }
    }
  }

  DecodedSpans out;
  out.null_confidence = start_probs[0] * end_probs[0];
  out.candidates.reserve(best.size());
  for (auto& [text, b] : best) {
    out.candidates.push_back({Span{b.start, b.end, text}, text, b.score});
  }
  std::sort(out.candidates.begin(), out.candidates.end(),
            [](const SpanCandidate& x, const SpanCandidate& y) {
              if (x.confidence != y.confidence) return x.confidence > y.confidence;
              if (x.char_span.start != y.char_span.start)
                return x.char_span.start < y.char_span.start;
              return x.char_span.end < y.char_span.end;
            });
  if (out.candidates.size() > config.k) out.candidates.resize(config.k);
  return out;
}

std::vector<ArgumentMention> select_arguments(std::span<const SpanCandidate> candidates,
                                              double null_confidence, double t_dev, std::size_t k,
                                              std::string_view role) {
  const double threshold = std::max(t_dev, null_confidence);
  std::vector<ArgumentMention> out;
  for (const auto& c : candidates) {
    if (out.size() >= k) break;
    if (c.confidence > threshold) {
      out.push_back({std::string(role), c.text, c.char_span});
    }
  }
  return out;
}

PredictionSet select_all(std::span<const RoleCandidates> instances, double t_dev, std::size_t k) {
  PredictionSet pred;
  pred.method = "QA";
  for (const auto& rc : instances) {
    auto& roles = pred.events[EventKey{rc.doc_id, rc.event_id}];
    auto& args = roles[rc.role];
    for (auto& m : select_arguments(rc.decoded.candidates, rc.decoded.null_confidence, t_dev, k,
                                    rc.role)) {
      args.push_back(std::move(m.text));
    }
  }
  return pred;
}

double nearest_rank(std::span<const double> sorted, int percentile) {
  if (sorted.empty()) throw Error(ErrorCode::kEmptyPool, "nearest_rank: empty sample");
  const auto n = static_cast<long long>(sorted.size());
  // ceil(p * n / 100) in integers, clamped to [1, n].
  long long rank = (static_cast<long long>(percentile) * n + 99) / 100;
  rank = std::clamp(rank, 1LL, n);
  return sorted[static_cast<std::size_t>(rank - 1)];
}

CalibrationResult calibrate_threshold(std::span<const RoleCandidates> dev, const Corpus& gold,
                                      const QAConfig& config) {
  config.validate();
  std::vector<double> pool;
  for (const auto& rc : dev) {
    const std::size_t m = std::min(rc.decoded.candidates.size(), config.k);
    for (std::size_t i = 0; i < m; ++i) pool.push_back(rc.decoded.candidates[i].confidence);
  }
  if (pool.empty()) throw Error(ErrorCode::kEmptyPool, "calibrate_threshold: no dev candidates");
  std::sort(pool.begin(), pool.end());

  std::vector<std::future<CalibrationRow>> jobs;
  for (int p = 5; p <= 95; p += 5) {
    const double threshold = nearest_rank(pool, p);
    jobs.push_back(std::async(std::launch::async, [&, p, threshold] {
      const auto report = argument_f1(select_all(dev, threshold, config.k), gold);
      return CalibrationRow{p, threshold, report.f1};
    }));
  }
  CalibrationResult result;
  for (auto& job : jobs) result.sweep_table.push_back(job.get());

  const CalibrationRow* best = &result.sweep_table.front();
  for (const auto& row : result.sweep_table) {
    if (row.f1 > best->f1 || (row.f1 == best->f1 && row.threshold > best->threshold)) best = &row;
  }
  result.t_dev = best->threshold;
  result.f1 = best->f1;
  return result;
}

nlohmann::json to_json(const CalibrationResult& result) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : result.sweep_table) {
    rows.push_back({{"percentile", r.percentile}, {"threshold", r.threshold}, {"f1", r.f1}});
  }
  return {{"t_dev", result.t_dev}, {"f1", result.f1}, {"sweep_table", rows}};
}

nlohmann::json to_json(const RoleCandidates& rc) {
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : rc.decoded.candidates) {
    cands.push_back({{"start", c.char_span.start},
                     {"end", c.char_span.end},
                     {"text", c.text},
                     {"confidence", c.confidence}});
  }
  return {{"doc_id", rc.doc_id},
          {"event_id", rc.event_id},
          {"role", rc.role},
          {"null_confidence", rc.decoded.null_confidence},
          {"candidates", cands}};
}

RoleCandidates role_candidates_from_json(const nlohmann::json& j) {
  RoleCandidates rc;
  rc.doc_id = j.at("doc_id").get<std::string>();
  rc.event_id = j.at("event_id").get<std::string>();
  rc.role = j.at("role").get<std::string>();
  rc.decoded.null_confidence = j.at("null_confidence").get<double>();
  for (const auto& c : j.at("candidates")) {
    const auto text = c.at("text").get<std::string>();
    rc.decoded.candidates.push_back(
        {Span{c.value("start", std::size_t{0}), c.value("end", std::size_t{0}), text}, text,
         c.at("confidence").get<double>()});
  }
  return rc;
}

}  // namespace eae
