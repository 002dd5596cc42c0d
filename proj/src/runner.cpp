#include "eae/runner.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "eae/error.hpp"
#include "eae/llm_protocol.hpp"
#include "eae/ti.hpp"

namespace eae {
namespace {

std::size_t worker_count(const Backend& backend, std::size_t chunks) {
  std::size_t limit = backend.descriptor().max_concurrency;
  if (limit == 0) limit = std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(limit, chunks));
}

// Runs `call` over fixed-size chunks of `requests` on a bounded worker pool,
// writing responses positionally.
template <typename Req, typename Resp, typename Call>
std::vector<Resp> run_batched(Backend& backend, std::span<const Req> requests,
                              std::size_t batch_size, Call call) {
  std::vector<Resp> responses(requests.size());
  if (requests.empty()) return responses;
  batch_size = std::max<std::size_t>(1, batch_size);
  const std::size_t chunks = (requests.size() + batch_size - 1) / batch_size;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  const auto work = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) {
      const std::size_t begin = c * batch_size;
      const std::size_t n = std::min(batch_size, requests.size() - begin);
      try {
        auto out = call(requests.subspan(begin, n));
        if (out.size() != n) {
          throw TransportError(begin, backend.descriptor().id() + ": backend returned " +
                                          std::to_string(out.size()) + " responses for " +
                                          std::to_string(n) + " requests");
        }
        std::move(out.begin(), out.end(), responses.begin() + static_cast<std::ptrdiff_t>(begin));
      } catch (const TransportError& e) {
        std::lock_guard lock(failure_mu);
        if (!failure) {
          failure = std::make_exception_ptr(TransportError(begin + e.request_index(), e.what()));
        }
        next = chunks;
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = chunks;
      }
    }
  };
  const std::size_t workers = worker_count(backend, chunks);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return responses;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << content;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.empty() || path.is_absolute() || base.empty()) return path;
  return base / path;
}

}  // namespace

std::string_view method_name(Method method) {
  switch (method) {
    case Method::kTI: return "TI";
    case Method::kQA: return "QA";
    case Method::kLLM: return "LLM";
  }
  return "TI";
}

Method parse_method(std::string_view name) {
  if (name == "TI" || name == "ti") return Method::kTI;
  if (name == "QA" || name == "qa") return Method::kQA;
  if (name == "LLM" || name == "llm") return Method::kLLM;
  throw Error(ErrorCode::kInvalidArgument, "unknown method \"" + std::string(name) + "\"");
}

void ExperimentConfig::validate() const {
  qa.validate();
  if (batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  if (t_dev < 0.0 || t_dev > 1.0) throw Error(ErrorCode::kInvalidArgument, "t_dev outside [0, 1]");
  if (method == Method::kLLM) {
    if (prompt_variants.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "LLM runs need at least one prompt variant");
    }
    for (int v : prompt_variants) prompt_variant(v);
  }
  if (backend.drop_probability < 0.0 || backend.drop_probability > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "drop_probability must lie in [0, 1]");
  }
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"method", method_name(c.method)},
          {"backend", to_json(c.backend)},
          {"model", c.model},
          {"source", c.source_id},
          {"target", c.target_id},
          {"corpus", c.corpus_path.string()},
          {"ontology", c.ontology_path.string()},
          {"split", c.split ? nlohmann::json(split_name(*c.split)) : nlohmann::json(nullptr)},
          {"seeds", c.seeds},
          {"prompt_variants", c.prompt_variants},
          {"qa",
           {{"k", c.qa.k},
            {"max_span_tokens", c.qa.max_span_tokens},
            {"open_marker", c.qa.format.open_marker},
            {"close_marker", c.qa.format.close_marker},
            {"separator", c.qa.format.separator}}},
          {"t_dev", c.t_dev},
          {"batch_size", c.batch_size},
          {"output_dir", c.output_dir.string()}};
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  c.method = parse_method(j.value("method", std::string("TI")));
  if (j.contains("backend")) c.backend = backend_descriptor_from_json(j.at("backend"));
  c.model = j.value("model", c.model);
  c.source_id = j.value("source", std::string());
  c.corpus_path = resolve(base_dir, j.at("corpus").get<std::string>());
  c.ontology_path = resolve(base_dir, j.at("ontology").get<std::string>());
  c.target_id = j.value("target", c.corpus_path.stem().string());
  if (j.contains("split") && !j.at("split").is_null()) {
    const auto name = j.at("split").get<std::string>();
    c.split = parse_split(name);
    if (!c.split) throw Error(ErrorCode::kUnknownSplit, "unknown split \"" + name + "\"");
  }
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("prompt_variants")) c.prompt_variants = j.at("prompt_variants").get<std::vector<int>>();
  if (j.contains("qa")) {
    const auto& q = j.at("qa");
    c.qa.k = q.value("k", c.qa.k);
    c.qa.max_span_tokens = q.value("max_span_tokens", c.qa.max_span_tokens);
    c.qa.format.open_marker = q.value("open_marker", c.qa.format.open_marker);
    c.qa.format.close_marker = q.value("close_marker", c.qa.format.close_marker);
    c.qa.format.separator = q.value("separator", c.qa.format.separator);
  }
  c.t_dev = j.value("t_dev", 0.0);
  if (j.contains("calibration")) {
    const auto path = resolve(base_dir, j.at("calibration").get<std::string>());
    c.t_dev = nlohmann::json::parse(read_file(path)).at("t_dev").get<double>();
  }
  c.batch_size = j.value("batch_size", c.batch_size);
  if (j.contains("output_dir")) c.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
  c.validate();
  return c;
}

std::vector<GenerationResponse> run_generate(Backend& backend,
                                             std::span<const GenerationRequest> requests,
                                             std::size_t batch_size) {
  return run_batched<GenerationRequest, GenerationResponse>(
      backend, requests, batch_size,
      [&](std::span<const GenerationRequest> chunk) { return backend.generate(chunk); });
}

std::vector<SpanScoringResponse> run_score_spans(Backend& backend,
                                                 std::span<const SpanScoringRequest> requests,
                                                 std::size_t batch_size) {
  return run_batched<SpanScoringRequest, SpanScoringResponse>(
      backend, requests, batch_size,
      [&](std::span<const SpanScoringRequest> chunk) { return backend.score_spans(chunk); });
}

PredictionSet predict_ti(const Corpus& corpus, const Ontology& ontology, Backend& backend,
                         const InputFormat& format, std::size_t batch_size) {
  const auto examples = build_ti_examples(corpus, ontology, format, false);
  std::vector<GenerationRequest> requests;
  requests.reserve(examples.size());
  for (const auto& ex : examples) {
    GenerationRequest r;
    r.meta = {"ti", ex.doc_id, ex.event_id, ""};
    r.input_text = ex.input_text;
    requests.push_back(std::move(r));
  }
  const auto responses = run_generate(backend, requests, batch_size);

  std::map<std::string, TemplateAst, std::less<>> asts;
  for (const auto& et : ontology.event_types) asts.emplace(et.name, et.parsed_template());
  PredictionSet pred;
  pred.method = "TI";
  pred.backend_id = backend.descriptor().id();
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const EventKey key{examples[i].doc_id, examples[i].event_id};
    auto& roles = pred.events[key];
    try {
      auto parsed = parse_filled(asts.at(examples[i].event_type), responses[i].output_text);
      for (auto& [role, args] : parsed.fills) {
        if (!args.empty()) roles[role] = std::move(args);
      }
      if (!parsed.multi_arg_roles.empty()) {
        auto& diags = pred.diagnostics[key];
        diags.insert(diags.end(), parsed.multi_arg_roles.size(), "multi_arg_split");
      }
    } catch (const Error& e) {
      // Unparseable generations count as empty predictions.
      pred.diagnostics[key].push_back(std::string(error_code_name(e.code())));
    }
  }
  return pred;
}

std::vector<TokenOffset> to_document_offsets(std::span<const TokenOffset> region_offsets,
                                             const OffsetMap& map) {
  std::vector<TokenOffset> out;
  out.reserve(region_offsets.size());
  for (std::size_t i = 0; i < region_offsets.size(); ++i) {
    if (i == 0) {
      out.push_back(region_offsets[0]);
      continue;
    }
    out.push_back({map.to_original_start(region_offsets[i].start),
                   map.to_original_end(region_offsets[i].end)});
  }
  return out;
}

std::vector<RoleCandidates> score_qa(const Corpus& corpus, const Ontology& ontology,
                                     Backend& backend, const QAConfig& config,
                                     std::size_t batch_size) {
  const auto examples = build_inference_examples(corpus, ontology, config);
  std::vector<SpanScoringRequest> requests;
  requests.reserve(examples.size());
  for (const auto& ex : examples) {
    requests.push_back({{"qa", ex.doc_id, ex.event_id, ex.role}, ex.input_text});
  }
  const auto responses = run_score_spans(backend, requests, batch_size);

  std::vector<RoleCandidates> out;
  out.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    const auto* doc = corpus.find(ex.doc_id);
    const auto* event = doc->find_event(ex.event_id);
    const auto marked = mark_trigger(*doc, *event, config.format.open_marker,
                                     config.format.close_marker);
    const auto& resp = responses[i];
    try {
      validate(resp);
    } catch (const Error& e) {
      throw Error(e.code(), "score_spans response for " + ex.example_id + ": " + e.what());
    }
    const auto offsets = to_document_offsets(resp.token_offsets, marked.offsets);
    out.push_back({ex.doc_id, ex.event_id, ex.role,
                   decode_spans(resp.start_probs, resp.end_probs, offsets, doc->text, config)});
  }
  return out;
}

PredictionSet predict_qa(const Corpus& corpus, const Ontology& ontology, Backend& backend,
                         const QAConfig& config, double t_dev, std::size_t batch_size) {
  const auto candidates = score_qa(corpus, ontology, backend, config, batch_size);
  auto pred = select_all(candidates, t_dev, config.k);
  pred.backend_id = backend.descriptor().id();
  return pred;
}

PredictionSet predict_llm(const Corpus& corpus, const Ontology& ontology, Backend& backend,
                          int variant, std::size_t batch_size) {
  const auto v = prompt_variant(variant);
  const GenerationParams params;
  struct Pending {
    const Document* doc;
    const EventInstance* event;
    std::vector<std::string> roles;
  };
  std::vector<Pending> pending;
  std::vector<GenerationRequest> requests;
  for (const auto& doc : corpus.documents) {
    for (const auto& e : doc.events) {
      auto prompt = build_extraction_prompt(doc, e, ontology, v);
      GenerationRequest r;
      r.meta = {"llm", doc.doc_id, e.event_id, ""};
      r.system_text = std::move(prompt.system);
      r.input_text = std::move(prompt.user);
      r.max_new_tokens = params.max_new_tokens;
      r.temperature = params.temperature;
      r.top_p = params.top_p;
      r.beam_size = 1;
      requests.push_back(std::move(r));
      pending.push_back({&doc, &e, std::move(prompt.question_order)});
    }
  }
  const auto responses = run_generate(backend, requests, batch_size);
  PredictionSet pred;
  pred.method = "LLM";
  pred.backend_id = backend.descriptor().id();
  for (std::size_t i = 0; i < pending.size(); ++i) {
    const EventKey key{pending[i].doc->doc_id, pending[i].event->event_id};
    auto sheet = parse_answer_sheet(responses[i].output_text, pending[i].roles, *pending[i].doc);
    auto& roles = pred.events[key];
    for (auto& [role, answers] : sheet.answers) {
      if (!answers.empty()) roles[role] = std::move(answers);
    }
    for (const auto& f : sheet.sheet_flags) pred.diagnostics[key].push_back(f.code);
    for (const auto& [role, flags] : sheet.flags)
      for (const auto& f : flags) pred.diagnostics[key].push_back(f.code);
  }
  return pred;
}

BackendFactory default_backend_factory() {
  return [](const ExperimentConfig& config, std::optional<std::uint64_t> seed,
            std::shared_ptr<const Corpus> corpus, std::shared_ptr<const Ontology> ontology) {
    BackendDescriptor d = config.backend;
    if (seed) d.seed = seed;
    return make_backend(d, std::move(corpus), std::move(ontology), config.qa.format);
  };
}

void write_predictions(const std::filesystem::path& path, const std::vector<PredictionSet>& runs) {
  std::string out;
  for (std::size_t run = 0; run < runs.size(); ++run) {
    const auto& p = runs[run];
    for (const auto& [key, roles] : p.events) {
      nlohmann::json line{{"run", run},
                          {"method", p.method},
                          {"backend", p.backend_id},
                          {"doc_id", key.doc_id},
                          {"event_id", key.event_id},
                          {"arguments", roles},
                          {"diagnostics", nlohmann::json::array()}};
      auto it = p.diagnostics.find(key);
      if (it != p.diagnostics.end()) line["diagnostics"] = it->second;
      out += line.dump();
      out += '\n';
    }
  }
  write_file(path, out);
}

std::vector<PredictionSet> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read predictions " + path.string());
  std::vector<PredictionSet> runs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::kMalformedLine, path.string() + " line " + std::to_string(line_no));
    }
    const auto run = j.value("run", std::size_t{0});
    if (runs.size() <= run) runs.resize(run + 1);
    auto& p = runs[run];
    p.method = j.value("method", std::string());
    p.backend_id = j.value("backend", std::string());
    const EventKey key{j.at("doc_id").get<std::string>(), j.at("event_id").get<std::string>()};
    p.events[key] = j.at("arguments").get<RoleArguments>();
    auto diags = j.value("diagnostics", std::vector<std::string>{});
    if (!diags.empty()) p.diagnostics[key] = std::move(diags);
  }
  return runs;
}

namespace {

struct LoadedTarget {
  std::shared_ptr<const Corpus> corpus;
  std::shared_ptr<const Ontology> ontology;
};

LoadedTarget load_target(const ExperimentConfig& config) {
  auto ontology = std::make_shared<Ontology>(load_ontology(config.ontology_path));
  Corpus corpus = load_corpus(config.corpus_path, config.target_id, ontology->ontology_id);
  if (config.split) corpus = corpus.filter(*config.split);
  for (const auto& doc : corpus.documents) {
    auto violations = validate_document(doc, *ontology);
    if (!violations.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "target corpus fails validation: " +
                                                   violations.front().doc_id + ": " +
                                                   violations.front().message);
    }
  }
  return {std::make_shared<const Corpus>(std::move(corpus)), std::move(ontology)};
}

nlohmann::json cell_report_json(const ExperimentConfig& config, const AggregateReport& report) {
  auto j = to_json(report);
  j["method"] = method_name(config.method);
  j["model"] = config.model;
  j["source"] = config.source_id;
  j["target"] = config.target_id;
  j["backend"] = config.backend.id();
  return j;
}

}  // namespace

CellResult run_cell(const ExperimentConfig& config, const BackendFactory& factory) {
  config.validate();
  const bool persist = !config.output_dir.empty();
  if (persist) {
    if (std::filesystem::exists(config.output_dir / "report.json")) {
      throw Error(ErrorCode::kRunExists,
                  "run directory " + config.output_dir.string() + " already holds a report");
    }
    std::filesystem::create_directories(config.output_dir);
    write_file(config.output_dir / "config.json", to_json(config).dump(2) + "\n");
  }
  const auto target = load_target(config);

  // Run plan: LLM runs iterate prompt variants; TI/QA runs iterate seeds.
  std::vector<std::pair<std::optional<std::uint64_t>, int>> runs;
  if (config.method == Method::kLLM) {
    for (int v : config.prompt_variants) runs.emplace_back(config.backend.seed, v);
  } else if (config.seeds.empty()) {
    runs.emplace_back(config.backend.seed, 0);
  } else {
    for (auto s : config.seeds) runs.emplace_back(s, 0);
  }

  CellResult result;
  result.run_dir = config.output_dir;
  std::vector<EvalReport> reports;
  try {
    for (const auto& [seed, variant] : runs) {
      auto backend = factory(config, seed, target.corpus, target.ontology);
      PredictionSet pred;
      switch (config.method) {
        case Method::kTI:
          pred = predict_ti(*target.corpus, *target.ontology, *backend, config.qa.format,
                            config.batch_size);
          break;
        case Method::kQA:
          pred = predict_qa(*target.corpus, *target.ontology, *backend, config.qa, config.t_dev,
                            config.batch_size);
          break;
        case Method::kLLM:
          pred = predict_llm(*target.corpus, *target.ontology, *backend, variant,
                             config.batch_size);
          break;
      }
      reports.push_back(argument_f1(pred, *target.corpus));
      result.predictions.push_back(std::move(pred));
    }
  } catch (const std::exception& e) {
    if (persist) {
      write_predictions(config.output_dir / "predictions.jsonl", result.predictions);
      const auto* err = dynamic_cast<const Error*>(&e);
      nlohmann::json failure{
          {"error",
           {{"code", err ? std::string(error_code_name(err->code())) : std::string("internal")},
            {"message", e.what()}}},
          {"completed_runs", result.predictions.size()},
          {"planned_runs", runs.size()}};
      write_file(config.output_dir / "failure.json", failure.dump(2) + "\n");
    }
    throw;
  }
  result.report = aggregate_runs(reports);
  if (persist) {
    write_predictions(config.output_dir / "predictions.jsonl", result.predictions);
    write_file(config.output_dir / "report.json",
               cell_report_json(config, result.report).dump(2) + "\n");
  }
  return result;
}

AggregateReport rescore_run(const std::filesystem::path& run_dir) {
  const auto config_json = nlohmann::json::parse(read_file(run_dir / "config.json"));
  ExperimentConfig config = experiment_config_from_json(config_json);
  const auto target = load_target(config);
  const auto runs = read_predictions(run_dir / "predictions.jsonl");
  std::vector<EvalReport> reports;
  for (const auto& p : runs) reports.push_back(argument_f1(p, *target.corpus));
  return aggregate_runs(reports);
}

}  // namespace eae
