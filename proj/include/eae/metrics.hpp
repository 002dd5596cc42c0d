#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "eae/corpus.hpp"
#include "json.hpp"

namespace eae {

struct EventKey {
  std::string doc_id;
  std::string event_id;
  auto operator<=>(const EventKey&) const = default;
};

// Role name -> predicted (or gold) argument strings.
using RoleArguments = std::map<std::string, std::vector<std::string>>;

struct PredictionSet {
  std::string method;  // TI | QA | LLM
  std::string backend_id;
  std::map<EventKey, RoleArguments> events;
  // Per-event decoder flags such as "skeleton_mismatch".
  std::map<EventKey, std::vector<std::string>> diagnostics;
};

struct MatchOptions {
  bool trim = true;
  bool case_sensitive = true;
};

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::map<std::string, double> per_event_type;
  std::map<std::string, std::size_t> diagnostics;  // flag -> count
};

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

// P/R/F1 from counts. No predictions and no gold scores 1.0.
void fill_scores(const Counts& counts, double& precision, double& recall, double& f1);

// Typed exact-match argument F1, micro-averaged over every
// (document, event, role). Events missing from `pred` contribute only false
// negatives. Throws Error(kNotFound) for predictions on unknown events.
EvalReport argument_f1(const PredictionSet& pred, const Corpus& gold,
                       const MatchOptions& options = {});

// Micro F1 within each event type; types with no gold and no predicted
// arguments are omitted.
std::map<std::string, double> per_event_type_f1(const PredictionSet& pred, const Corpus& gold,
                                                const MatchOptions& options = {});

// Gold arguments of a corpus, in prediction-set form.
PredictionSet gold_predictions(const Corpus& gold);

double pearson_rho(std::span<const double> xs, std::span<const double> ys);

struct TransferCorrelation {
  double rho = 0.0;
  std::size_t n_types = 0;
};

// Pearson rho over event types present in both maps.
TransferCorrelation correlate_transfer(const std::map<std::string, double>& in_domain,
                                       const std::map<std::string, double>& zero_shot);

struct AggregateReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<EvalReport> runs;
};

AggregateReport aggregate_runs(std::span<const EvalReport> reports);

nlohmann::json to_json(const EvalReport& report);
EvalReport eval_report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AggregateReport& report);
std::string per_type_csv(const EvalReport& report);

}  // namespace eae
