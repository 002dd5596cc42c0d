#include "eae/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>

#include "eae/error.hpp"

namespace eae {
namespace {

std::string normalize(std::string s, const MatchOptions& options) {
  if (options.trim) {
    const auto first = s.find_first_not_of(" \t\n\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\n\r");
    s = s.substr(first, last - first + 1);
  }
  if (!options.case_sensitive) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  }
  return s;
}

// Adds counts for one role: TP = sum over strings of min(pred, gold).
void count_role(const std::vector<std::string>& pred, const std::vector<std::string>& gold,
                const MatchOptions& options, Counts& counts) {
  std::map<std::string, std::size_t> gold_counts;
  for (const auto& g : gold) ++gold_counts[normalize(g, options)];
  std::map<std::string, std::size_t> pred_counts;
  for (const auto& p : pred) ++pred_counts[normalize(p, options)];
  std::size_t tp = 0;
  for (const auto& [text, n] : pred_counts) {
    auto it = gold_counts.find(text);
    if (it != gold_counts.end()) tp += std::min(n, it->second);
  }
  counts.tp += tp;
  counts.fp += pred.size() - tp;
  counts.fn += gold.size() - tp;
}

RoleArguments gold_roles(const EventInstance& e) {
  RoleArguments roles;
  for (const auto& a : e.arguments) roles[a.role].push_back(a.text);
  return roles;
}

void check_keys(const PredictionSet& pred, const Corpus& gold) {
  for (const auto& [key, roles] : pred.events) {
    const auto* doc = gold.find(key.doc_id);
    if (doc == nullptr || doc->find_event(key.event_id) == nullptr) {
      throw Error(ErrorCode::kNotFound, "prediction for unknown event " + key.doc_id + "/" +
                                            key.event_id + " in corpus " + gold.dataset_id);
    }
  }
}

// Counts per event type, with predicted and gold totals to apply the
// omission rule.
struct TypeCounts {
  Counts counts;
  std::size_t predicted = 0;
  std::size_t gold = 0;
};

std::map<std::string, TypeCounts> count_by_type(const PredictionSet& pred, const Corpus& gold,
                                                const MatchOptions& options) {
  std::map<std::string, TypeCounts> by_type;
  static const RoleArguments kNone;
  for (const auto& doc : gold.documents) {
    for (const auto& e : doc.events) {
      const auto g = gold_roles(e);
      auto it = pred.events.find(EventKey{doc.doc_id, e.event_id});
      const RoleArguments& p = it == pred.events.end() ? kNone : it->second;
      std::set<std::string> roles;
      for (const auto& [r, _] : g) roles.insert(r);
      for (const auto& [r, _] : p) roles.insert(r);
      auto& tc = by_type[e.event_type];
      static const std::vector<std::string> kEmpty;
      for (const auto& role : roles) {
        auto gi = g.find(role);
        auto pi = p.find(role);
        const auto& gv = gi == g.end() ? kEmpty : gi->second;
        const auto& pv = pi == p.end() ? kEmpty : pi->second;
        count_role(pv, gv, options, tc.counts);
        tc.predicted += pv.size();
        tc.gold += gv.size();
      }
    }
  }
  return by_type;
}

}  // namespace

void fill_scores(const Counts& c, double& precision, double& recall, double& f1) {
  const std::size_t predicted = c.tp + c.fp;
  const std::size_t gold = c.tp + c.fn;
  if (predicted == 0 && gold == 0) {
    precision = recall = f1 = 1.0;
    return;
  }
  precision = predicted == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(predicted);
  recall = gold == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(gold);
  f1 = precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

EvalReport argument_f1(const PredictionSet& pred, const Corpus& gold, const MatchOptions& options) {
  check_keys(pred, gold);
  EvalReport report;
  Counts total;
  for (const auto& [type, tc] : count_by_type(pred, gold, options)) {
    total.tp += tc.counts.tp;
    total.fp += tc.counts.fp;
    total.fn += tc.counts.fn;
    if (tc.predicted == 0 && tc.gold == 0) continue;
    double p = 0, r = 0, f = 0;
    fill_scores(tc.counts, p, r, f);
    report.per_event_type[type] = f;
  }
  report.tp = total.tp;
  report.fp = total.fp;
  report.fn = total.fn;
  fill_scores(total, report.precision, report.recall, report.f1);
  for (const auto& [key, flags] : pred.diagnostics)
    for (const auto& flag : flags) ++report.diagnostics[flag];
  return report;
}

std::map<std::string, double> per_event_type_f1(const PredictionSet& pred, const Corpus& gold,
                                                const MatchOptions& options) {
  return argument_f1(pred, gold, options).per_event_type;
}

PredictionSet gold_predictions(const Corpus& gold) {
  PredictionSet out;
  out.method = "gold";
  for (const auto& doc : gold.documents)
    for (const auto& e : doc.events) out.events[{doc.doc_id, e.event_id}] = gold_roles(e);
  return out;
}

double pearson_rho(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorCode::kLengthMismatch, "pearson_rho: series lengths differ (" +
                                                std::to_string(xs.size()) + " vs " +
                                                std::to_string(ys.size()) + ")");
  }
  const std::size_t n = xs.size();
  if (n < 2) throw Error(ErrorCode::kInsufficientData, "pearson_rho: need at least 2 points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorCode::kZeroVariance, "pearson_rho: a series has zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

TransferCorrelation correlate_transfer(const std::map<std::string, double>& in_domain,
                                       const std::map<std::string, double>& zero_shot) {
  std::vector<double> xs, ys;
  for (const auto& [type, f1] : in_domain) {
    auto it = zero_shot.find(type);
    if (it == zero_shot.end()) continue;
    xs.push_back(f1);
    ys.push_back(it->second);
  }
  if (xs.size() < 2) {
    throw Error(ErrorCode::kInsufficientData,
                "correlate_transfer: only " + std::to_string(xs.size()) +
                    " shared event types (need at least 2)");
  }
  return {pearson_rho(xs, ys), xs.size()};
}

AggregateReport aggregate_runs(std::span<const EvalReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::kInsufficientData, "aggregate_runs: no reports");
  AggregateReport out;
  for (const auto& r : reports) {
    out.precision += r.precision;
    out.recall += r.recall;
    out.f1 += r.f1;
  }
  const auto n = static_cast<double>(reports.size());
  out.precision /= n;
  out.recall /= n;
  out.f1 /= n;
  out.runs.assign(reports.begin(), reports.end());
  return out;
}

nlohmann::json to_json(const EvalReport& r) {
  return {{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1},
          {"tp", r.tp},               {"fp", r.fp},         {"fn", r.fn},
          {"per_event_type", r.per_event_type},             {"diagnostics", r.diagnostics}};
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
  EvalReport r;
  r.precision = j.at("precision").get<double>();
  r.recall = j.at("recall").get<double>();
  r.f1 = j.at("f1").get<double>();
  r.tp = j.at("tp").get<std::size_t>();
  r.fp = j.at("fp").get<std::size_t>();
  r.fn = j.at("fn").get<std::size_t>();
  if (j.contains("per_event_type"))
    r.per_event_type = j.at("per_event_type").get<std::map<std::string, double>>();
  if (j.contains("diagnostics"))
    r.diagnostics = j.at("diagnostics").get<std::map<std::string, std::size_t>>();
  return r;
}

nlohmann::json to_json(const AggregateReport& r) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& run : r.runs) runs.push_back(to_json(run));
  return {{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}, {"runs", runs}};
}

std::string per_type_csv(const EvalReport& report) {
  std::string out = "event_type,f1\n";
  char buf[32];
  for (const auto& [type, f1] : report.per_event_type) {
    std::snprintf(buf, sizeof buf, "%.6f", f1);
    // RFC 4180 quoting.
    if (type.find_first_of(",\"") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : type) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      out += quoted + "\"";
    } else {
      out += type;
    }
    out += ',';
    out += buf;
    out += '\n';
  }
  return out;
}

}  // namespace eae
