#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "eae/backends.hpp"
#include "eae/corpus.hpp"
#include "eae/error.hpp"
#include "eae/llm_protocol.hpp"
#include "eae/metrics.hpp"
#include "eae/qa.hpp"
#include "eae/resources.hpp"
#include "eae/runner.hpp"
#include "eae/synthetic.hpp"
#include "eae/ti.hpp"

namespace eae {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Exit statuses.
constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedLine, path.string() + ": " + e.what());
  }
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<json> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kMalformedLine,
                  path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

// Writes to `path`, or to `out` when the path is empty or "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& out) : out_(&out) {
    if (!path.empty() && path != "-") {
      const fs::path p(path);
      if (p.has_parent_path()) fs::create_directories(p.parent_path());
      file_.open(p, std::ios::binary);
      if (!file_) throw Error(ErrorCode::kIo, "cannot write " + path);
      out_ = &file_;
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

Corpus load_split(const std::string& path, const std::string& split) {
  Corpus corpus = load_corpus(path);
  if (split.empty()) return corpus;
  const auto s = parse_split(split);
  if (!s) throw Error(ErrorCode::kUnknownSplit, "unknown split \"" + split + "\"");
  return corpus.filter(*s);
}

std::map<std::string, double> per_type_map(const json& j) {
  if (j.contains("per_event_type")) return j.at("per_event_type").get<std::map<std::string, double>>();
  if (j.contains("runs") && !j.at("runs").empty()) {
    // Mean over runs, restricted to types scored in any run.
    std::map<std::string, std::pair<double, int>> acc;
    for (const auto& run : j.at("runs")) {
      for (const auto& [type, f1] : run.at("per_event_type").items()) {
        acc[type].first += f1.get<double>();
        acc[type].second += 1;
      }
    }
    std::map<std::string, double> out;
    for (const auto& [type, sum] : acc) out[type] = sum.first / sum.second;
    return out;
  }
  return j.get<std::map<std::string, double>>();
}

struct BackendOptions {
  std::string config;
  std::string kind = "gold-oracle";
  std::string endpoint;
  double drop_probability = 0.0;
  std::uint64_t seed = 0;
  std::size_t max_concurrency = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--backend-config", config, "JSON backend descriptor file");
    cmd->add_option("--backend", kind, "gold-oracle | noisy-oracle | remote");
    cmd->add_option("--endpoint", endpoint, "remote backend host:port");
    cmd->add_option("--drop-probability", drop_probability, "noisy oracle drop rate");
    cmd->add_option("--seed", seed, "noisy oracle seed");
    cmd->add_option("--max-concurrency", max_concurrency, "0 means unlimited");
  }

  BackendDescriptor descriptor() const {
    if (!config.empty()) return backend_descriptor_from_json(read_json(config));
    BackendDescriptor d;
    d.kind = parse_backend_kind(kind);
    d.endpoint = endpoint;
    d.drop_probability = drop_probability;
    d.seed = seed;
    d.max_concurrency = max_concurrency;
    d.validate();
    return d;
  }
};

void add_qa_options(CLI::App* cmd, QAConfig& qa) {
  cmd->add_option("--k", qa.k, "candidate spans per question");
  cmd->add_option("--max-span-tokens", qa.max_span_tokens, "longest decodable span");
}

void print_stats_table(std::ostream& out, const std::string& name, const StatsReport& s) {
  out << "Dataset\tDocs\tEvent types\tRole types\tEvents\tArgs\tDoc-level\n"
      << name << '\t' << s.documents << '\t' << s.event_types << '\t' << s.role_types << '\t'
      << s.events << '\t' << s.arguments << '\t' << (s.doc_level ? "yes" : "no") << '\n';
}

json error_json(std::string_view code, std::string_view message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Event argument extraction transfer harness", "eae"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::function<int()> action;

  // ingest
  struct {
    std::string adapter = "canonical", input, output, dataset_id, ontology_id, ontology_out;
    bool synthetic = false;
    SyntheticOptions synth;
  } ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Convert a corpus to the canonical JSONL format");
  c_ingest->add_option("--adapter", ingest.adapter, "input adapter")->capture_default_str();
  c_ingest->add_option("--input", ingest.input, "input corpus path");
  c_ingest->add_option("--output", ingest.output, "canonical JSONL output")->required();
  c_ingest->add_option("--dataset-id", ingest.dataset_id);
  c_ingest->add_option("--ontology-id", ingest.ontology_id);
  c_ingest->add_flag("--synthetic", ingest.synthetic, "generate a synthetic corpus instead");
  c_ingest->add_option("--documents", ingest.synth.documents)->capture_default_str();
  c_ingest->add_option("--seed", ingest.synth.seed)->capture_default_str();
  c_ingest->add_option("--max-args-per-role", ingest.synth.max_args_per_role)->capture_default_str();
  c_ingest->add_option("--ontology-out", ingest.ontology_out, "synthetic ontology output");
  c_ingest->callback([&] {
    action = [&] {
      Corpus corpus;
      if (ingest.synthetic) {
        if (!ingest.dataset_id.empty()) ingest.synth.dataset_id = ingest.dataset_id;
        auto data = generate_synthetic(ingest.synth);
        corpus = std::move(data.corpus);
        if (!ingest.ontology_out.empty()) save_ontology(data.ontology, ingest.ontology_out);
      } else {
        if (ingest.input.empty()) throw Error(ErrorCode::kInvalidArgument, "--input is required");
        corpus = make_adapter(ingest.adapter)->convert(ingest.input);
        if (!ingest.dataset_id.empty()) corpus.dataset_id = ingest.dataset_id;
      }
      if (!ingest.ontology_id.empty()) corpus.ontology_id = ingest.ontology_id;
      save_corpus(corpus, ingest.output);
      out << json{{"documents", corpus.documents.size()},
                  {"arguments", corpus.argument_count()},
                  {"output", ingest.output}}
                 .dump()
          << '\n';
      return kOk;
    };
  });

  // validate
  std::string v_corpus, v_ontology;
  auto* c_validate = app.add_subcommand("validate", "Check a corpus against its ontology");
  c_validate->add_option("corpus", v_corpus)->required();
  c_validate->add_option("--ontology", v_ontology)->required();
  c_validate->callback([&] {
    action = [&] {
      const auto corpus = load_corpus(v_corpus);
      const auto ontology = load_ontology(v_ontology);
      json violations = json::array();
      for (const auto& doc : corpus.documents) {
        for (const auto& v : validate_document(doc, ontology)) violations.push_back(to_json(v));
      }
      out << json{{"documents", corpus.documents.size()}, {"violations", violations}}.dump(2)
          << '\n';
      if (violations.empty()) return kOk;
      err << error_json("validation_failed",
                        std::to_string(violations.size()) + " violation(s)")
                 .dump()
          << '\n';
      return kFailure;
    };
  });

  // stats
  std::string s_corpus;
  bool s_table = false;
  auto* c_stats = app.add_subcommand("stats", "Dataset statistics");
  c_stats->add_option("corpus", s_corpus)->required();
  c_stats->add_flag("--table", s_table, "tab-separated table instead of JSON");
  c_stats->callback([&] {
    action = [&] {
      const auto corpus = load_corpus(s_corpus);
      const auto stats = corpus_stats(corpus);
      if (s_table) {
        print_stats_table(out, corpus.dataset_id, stats);
      } else {
        out << to_json(stats).dump(2) << '\n';
      }
      return kOk;
    };
  });

  // lint-resources
  std::string l_ontology;
  auto* c_lint = app.add_subcommand("lint-resources", "Lint questions and templates");
  c_lint->add_option("ontology", l_ontology)->required();
  c_lint->callback([&] {
    action = [&] {
      const auto ontology = read_ontology(l_ontology);
      const auto findings = lint_ontology(ontology);
      json arr = json::array();
      bool has_error = false;
      for (const auto& f : findings) {
        arr.push_back(to_json(f));
        has_error = has_error || f.severity == Severity::kError;
      }
      out << json{{"findings", arr}}.dump(2) << '\n';
      if (!has_error) return kOk;
      err << error_json("lint_failed", "resource lint reported errors").dump() << '\n';
      return kFailure;
    };
  });

  // build-examples
  struct {
    std::string method = "QA", corpus, ontology, split, paraphrases, output;
    bool inference = false;
    QAConfig qa;
  } be;
  auto* c_build = app.add_subcommand("build-examples", "Build TI or QA model inputs");
  c_build->add_option("--method", be.method, "TI | QA")->capture_default_str();
  c_build->add_option("--corpus", be.corpus)->required();
  c_build->add_option("--ontology", be.ontology)->required();
  c_build->add_option("--split", be.split, "train | dev | test");
  c_build->add_option("--paraphrases", be.paraphrases, "paraphrase sets for augmented training");
  c_build->add_flag("--inference", be.inference, "untargeted inference inputs");
  c_build->add_option("--output", be.output, "JSONL output, '-' for stdout");
  add_qa_options(c_build, be.qa);
  c_build->callback([&] {
    action = [&] {
      const auto method = parse_method(be.method);
      if (method == Method::kLLM) {
        throw Error(ErrorCode::kInvalidArgument, "use emit-prompts for LLM inputs");
      }
      const auto corpus = load_split(be.corpus, be.split);
      const auto ontology = load_ontology(be.ontology);
      if (!be.paraphrases.empty() && be.inference) {
        throw Error(ErrorCode::kInvalidArgument, "inference inputs use the original resources");
      }
      std::optional<AugmentedResources> augmented;
      if (!be.paraphrases.empty()) {
        augmented = build_paraphrase_augmented_resources(
            ontology, paraphrase_sets_from_json(read_json(be.paraphrases)));
      }
      Sink sink(be.output, out);
      std::size_t count = 0;
      std::vector<std::string> warnings;
      if (method == Method::kTI) {
        const auto examples =
            augmented ? build_augmented_ti_examples(corpus, *augmented, be.qa.format)
                      : build_ti_examples(corpus, ontology, be.qa.format, !be.inference);
        for (const auto& ex : examples) sink.stream() << to_json(ex).dump() << '\n';
        count = examples.size();
      } else if (be.inference) {
        const auto examples = build_inference_examples(corpus, ontology, be.qa);
        for (const auto& ex : examples) sink.stream() << to_json(ex).dump() << '\n';
        count = examples.size();
      } else {
        auto built = augmented ? build_augmented_qa_examples(corpus, *augmented, be.qa)
                               : build_training_examples(corpus, ontology, be.qa);
        for (const auto& ex : built.examples) sink.stream() << to_json(ex).dump() << '\n';
        count = built.examples.size();
        warnings = std::move(built.warnings);
      }
      if (!be.output.empty() && be.output != "-") {
        out << json{{"examples", count}, {"warnings", warnings}}.dump() << '\n';
      }
      for (const auto& w : warnings) err << json{{"warning", w}}.dump() << '\n';
      return kOk;
    };
  });

  // calibrate
  struct {
    std::string corpus, ontology, split = "dev", candidates, output;
    QAConfig qa;
    BackendOptions backend;
    std::size_t batch_size = 32;
  } cal;
  auto* c_cal = app.add_subcommand("calibrate", "Select the QA confidence threshold on dev");
  c_cal->add_option("--corpus", cal.corpus)->required();
  c_cal->add_option("--ontology", cal.ontology);
  c_cal->add_option("--split", cal.split, "split to calibrate on ('' for all)")->capture_default_str();
  c_cal->add_option("--candidates", cal.candidates, "decoded candidates JSONL instead of a backend");
  c_cal->add_option("--output", cal.output, "calibration JSON output");
  c_cal->add_option("--batch-size", cal.batch_size)->capture_default_str();
  add_qa_options(c_cal, cal.qa);
  cal.backend.add(c_cal);
  c_cal->callback([&] {
    action = [&] {
      cal.qa.validate();
      const auto corpus = std::make_shared<const Corpus>(load_split(cal.corpus, cal.split));
      std::vector<RoleCandidates> dev;
      if (!cal.candidates.empty()) {
        for (const auto& row : read_jsonl(cal.candidates)) dev.push_back(role_candidates_from_json(row));
      } else {
        if (cal.ontology.empty()) throw Error(ErrorCode::kInvalidArgument, "--ontology is required");
        const auto ontology = std::make_shared<const Ontology>(load_ontology(cal.ontology));
        auto backend = make_backend(cal.backend.descriptor(), corpus, ontology, cal.qa.format);
        dev = score_qa(*corpus, *ontology, *backend, cal.qa, cal.batch_size);
      }
      const auto result = calibrate_threshold(dev, *corpus, cal.qa);
      Sink sink(cal.output, out);
      sink.stream() << to_json(result).dump(2) << '\n';
      return kOk;
    };
  });

  // predict
  std::string p_config, p_output_dir;
  auto* c_predict = app.add_subcommand("predict", "Run one experiment cell");
  c_predict->add_option("--config", p_config, "experiment config JSON")->required();
  c_predict->add_option("--output-dir", p_output_dir, "run directory");
  c_predict->callback([&] {
    action = [&] {
      auto config = experiment_config_from_json(read_json(p_config), fs::path(p_config).parent_path());
      if (!p_output_dir.empty()) config.output_dir = p_output_dir;
      const auto result = run_cell(config);
      out << to_json(result.report).dump(2) << '\n';
      return kOk;
    };
  });

  // evaluate
  struct {
    std::string predictions, corpus, split, run_dir, per_type_csv;
  } ev;
  auto* c_eval = app.add_subcommand("evaluate", "Score predictions against gold arguments");
  c_eval->add_option("--predictions", ev.predictions, "predictions.jsonl");
  c_eval->add_option("--corpus", ev.corpus, "gold corpus");
  c_eval->add_option("--split", ev.split);
  c_eval->add_option("--run-dir", ev.run_dir, "re-score a persisted run directory");
  c_eval->add_option("--per-type-csv", ev.per_type_csv, "per-event-type F1 of the first run");
  c_eval->callback([&] {
    action = [&] {
      AggregateReport report;
      if (!ev.run_dir.empty()) {
        report = rescore_run(ev.run_dir);
      } else {
        if (ev.predictions.empty() || ev.corpus.empty()) {
          throw Error(ErrorCode::kInvalidArgument, "--predictions and --corpus are required");
        }
        const auto gold = load_split(ev.corpus, ev.split);
        std::vector<EvalReport> runs;
        for (const auto& p : read_predictions(ev.predictions)) runs.push_back(argument_f1(p, gold));
        report = aggregate_runs(runs);
      }
      if (!ev.per_type_csv.empty() && !report.runs.empty()) {
        Sink csv(ev.per_type_csv, out);
        csv.stream() << per_type_csv(report.runs.front());
      }
      out << to_json(report).dump(2) << '\n';
      return kOk;
    };
  });

  // matrix
  std::string m_config, m_output_dir;
  bool m_latex = false;
  auto* c_matrix = app.add_subcommand("matrix", "Run a source x target grid");
  c_matrix->add_option("--config", m_config, "grid config JSON")->required();
  c_matrix->add_option("--output-dir", m_output_dir, "overrides the config's output_dir");
  c_matrix->add_flag("--latex", m_latex, "print the LaTeX table");
  c_matrix->callback([&] {
    action = [&] {
      auto grid = grid_config_from_json(read_json(m_config), fs::path(m_config).parent_path());
      if (!m_output_dir.empty()) grid.output_dir = m_output_dir;
      const auto matrix = run_matrix(grid);
      const auto table = format_matrix(matrix);
      out << (m_latex ? table.latex : table.plain);
      bool missing = false;
      for (const auto& row : matrix.rows) {
        for (const auto& cell : row.cells) missing = missing || !cell.present;
      }
      if (missing) {
        err << error_json("missing_cells", "some cells failed; see matrix.json").dump() << '\n';
        return kFailure;
      }
      return kOk;
    };
  });

  // correlate
  std::string c_in, c_zero;
  auto* c_corr = app.add_subcommand("correlate", "Pearson correlation of per-type F1");
  c_corr->add_option("--in-domain", c_in, "report or {type: f1} JSON")->required();
  c_corr->add_option("--zero-shot", c_zero, "report or {type: f1} JSON")->required();
  c_corr->callback([&] {
    action = [&] {
      const auto result = correlate_transfer(per_type_map(read_json(c_in)), per_type_map(read_json(c_zero)));
      out << json{{"rho", result.rho}, {"n_types", result.n_types}}.dump(2) << '\n';
      return kOk;
    };
  });

  // augment
  std::string a_ontology, a_paraphrases, a_output;
  auto* c_aug = app.add_subcommand("augment", "Build paraphrase-augmented training resources");
  c_aug->add_option("--ontology", a_ontology)->required();
  c_aug->add_option("--paraphrases", a_paraphrases)->required();
  c_aug->add_option("--output", a_output, "augmented resources JSON");
  c_aug->callback([&] {
    action = [&] {
      const auto resources = build_paraphrase_augmented_resources(
          load_ontology(a_ontology), paraphrase_sets_from_json(read_json(a_paraphrases)));
      Sink sink(a_output, out);
      sink.stream() << to_json(resources).dump(2) << '\n';
      return kOk;
    };
  });

  // emit-prompts
  struct {
    std::string kind = "extraction", corpus, ontology, split, output;
    int variant = 1;
  } ep;
  auto* c_emit = app.add_subcommand("emit-prompts", "Write LLM prompts as JSONL");
  c_emit->add_option("--kind", ep.kind, "extraction | question | template")->capture_default_str();
  c_emit->add_option("--corpus", ep.corpus, "needed for extraction prompts");
  c_emit->add_option("--ontology", ep.ontology)->required();
  c_emit->add_option("--split", ep.split);
  c_emit->add_option("--variant", ep.variant, "extraction prompt variant 1-3")->capture_default_str();
  c_emit->add_option("--output", ep.output, "JSONL output, '-' for stdout");
  c_emit->callback([&] {
    action = [&] {
      const auto ontology = load_ontology(ep.ontology);
      Sink sink(ep.output, out);
      if (ep.kind == "extraction") {
        if (ep.corpus.empty()) throw Error(ErrorCode::kInvalidArgument, "--corpus is required");
        const auto corpus = load_split(ep.corpus, ep.split);
        const auto variant = prompt_variant(ep.variant);
        for (const auto& doc : corpus.documents) {
          for (const auto& event : doc.events) {
            const auto prompt = build_extraction_prompt(doc, event, ontology, variant);
            sink.stream() << json{{"doc_id", doc.doc_id},
                                  {"event_id", event.event_id},
                                  {"variant", ep.variant},
                                  {"question_order", prompt.question_order},
                                  {"payload", chat_payload(prompt)}}
                                 .dump()
                          << '\n';
          }
        }
        return kOk;
      }
      const auto kind = parse_paraphrase_kind(ep.kind);
      if (!kind) throw Error(ErrorCode::kInvalidArgument, "unknown prompt kind \"" + ep.kind + "\"");
      for (const auto& type : ontology.event_types) {
        if (*kind == ParaphraseKind::kTemplate) {
          sink.stream() << json{{"event_type", type.name},
                                {"prompt", build_paraphrase_prompt(*kind, type.template_source)}}
                               .dump()
                        << '\n';
          continue;
        }
        for (const auto& role : type.roles) {
          sink.stream() << json{{"event_type", type.name},
                                {"role", role.name},
                                {"prompt", build_paraphrase_prompt(*kind, role.question)}}
                               .dump()
                        << '\n';
        }
      }
      return kOk;
    };
  });

  // parse-replies
  struct {
    std::string kind = "answers", replies, corpus, ontology, output, predictions_out;
  } pr;
  auto* c_parse = app.add_subcommand("parse-replies", "Parse LLM replies");
  c_parse->add_option("--kind", pr.kind, "answers | question | template")->capture_default_str();
  c_parse->add_option("--replies", pr.replies, "JSONL with a \"reply\" field per line")->required();
  c_parse->add_option("--corpus", pr.corpus, "needed for answer sheets");
  c_parse->add_option("--ontology", pr.ontology)->required();
  c_parse->add_option("--output", pr.output, "parsed output, '-' for stdout");
  c_parse->add_option("--predictions-out", pr.predictions_out, "predictions.jsonl for evaluate");
  c_parse->callback([&] {
    action = [&] {
      const auto ontology = load_ontology(pr.ontology);
      const auto rows = read_jsonl(pr.replies);
      Sink sink(pr.output, out);
      if (pr.kind == "answers") {
        if (pr.corpus.empty()) throw Error(ErrorCode::kInvalidArgument, "--corpus is required");
        const auto corpus = load_corpus(pr.corpus);
        PredictionSet pred;
        pred.method = "LLM";
        pred.backend_id = "replies";
        for (const auto& row : rows) {
          const auto doc_id = row.at("doc_id").get<std::string>();
          const auto event_id = row.at("event_id").get<std::string>();
          const Document* doc = corpus.find(doc_id);
          if (!doc) throw Error(ErrorCode::kNotFound, "unknown document \"" + doc_id + "\"");
          const EventInstance* event = doc->find_event(event_id);
          if (!event) throw Error(ErrorCode::kNotFound, "unknown event \"" + event_id + "\"");
          const EventTypeDef* type = ontology.find(event->event_type);
          if (!type) {
            throw Error(ErrorCode::kNotFound, "unknown event type \"" + event->event_type + "\"");
          }
          const auto roles = type->role_names();
          const auto sheet = parse_answer_sheet(row.at("reply").get<std::string>(), roles, *doc);
          sink.stream() << json{{"doc_id", doc_id}, {"event_id", event_id}, {"sheet", to_json(sheet)}}
                               .dump()
                        << '\n';
          const EventKey key{doc_id, event_id};
          auto& args = pred.events[key];
          auto& diags = pred.diagnostics[key];
          for (const auto& [role, answers] : sheet.answers) args[role] = answers;
          for (const auto& [role, flags] : sheet.flags) {
            for (const auto& f : flags) diags.push_back(f.code);
          }
          for (const auto& f : sheet.sheet_flags) diags.push_back(f.code);
        }
        if (!pr.predictions_out.empty()) write_predictions(pr.predictions_out, {pred});
        return kOk;
      }
      const auto kind = parse_paraphrase_kind(pr.kind);
      if (!kind) throw Error(ErrorCode::kInvalidArgument, "unknown reply kind \"" + pr.kind + "\"");
      ParaphraseSets sets;
      for (const auto& row : rows) {
        const auto type_name = row.at("event_type").get<std::string>();
        const EventTypeDef* type = ontology.find(type_name);
        if (!type) throw Error(ErrorCode::kNotFound, "unknown event type \"" + type_name + "\"");
        const auto reply = row.at("reply").get<std::string>();
        if (*kind == ParaphraseKind::kTemplate) {
          sets.templates[type_name] = parse_paraphrases(reply, type->template_source, *kind);
          continue;
        }
        const auto role_name = row.at("role").get<std::string>();
        const RoleDef* role = type->find_role(role_name);
        if (!role) throw Error(ErrorCode::kNotFound, "unknown role \"" + role_name + "\"");
        sets.questions[{type_name, role_name}] = parse_paraphrases(reply, role->question, *kind);
      }
      sink.stream() << to_json(sets).dump(2) << '\n';
      return kOk;
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << error_json("usage", e.what()).dump() << '\n';
    const auto selected = app.get_subcommands();
    err << (selected.empty() ? app.help() : selected.back()->help());
    return kUsage;
  }
  if (!action) return kUsage;
  try {
    return action();
  } catch (const Error& e) {
    err << error_json(error_code_name(e.code()), e.what()).dump() << '\n';
  } catch (const std::exception& e) {
    err << error_json("internal", e.what()).dump() << '\n';
  }
  return kFailure;
}

}  // namespace eae
