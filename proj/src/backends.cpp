#include "eae/backends.hpp"

#include <cstdlib>

#include "eae/error.hpp"

namespace eae {

void validate(const SpanScoringResponse& response) {
  check_span_scores(response.start_probs, response.end_probs, response.token_offsets);
}

std::string_view backend_kind_name(BackendKind kind) {
  switch (kind) {
    case BackendKind::kGoldOracle: return "gold-oracle";
    case BackendKind::kNoisyOracle: return "noisy-oracle";
    case BackendKind::kRemote: return "remote";
    case BackendKind::kCustom: return "custom";
  }
  return "custom";
}

BackendKind parse_backend_kind(std::string_view name) {
  if (name == "gold-oracle") return BackendKind::kGoldOracle;
  if (name == "noisy-oracle") return BackendKind::kNoisyOracle;
  if (name == "remote") return BackendKind::kRemote;
  if (name == "custom") return BackendKind::kCustom;
  throw Error(ErrorCode::kInvalidArgument, "unknown backend kind \"" + std::string(name) + "\"");
}

std::string BackendDescriptor::id() const {
  std::string out(backend_kind_name(kind));
  if (kind == BackendKind::kNoisyOracle) out += "(p=" + std::to_string(drop_probability) + ")";
  if (kind == BackendKind::kRemote) out += "@" + endpoint;
  if (!name.empty()) out += ":" + name;
  return out;
}

void BackendDescriptor::validate() const {
  if (kind == BackendKind::kRemote && endpoint.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "remote backend requires an endpoint address");
  }
  if (drop_probability < 0.0 || drop_probability > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "drop_probability must lie in [0, 1]");
  }
  if (timeout_ms <= 0 || retries < 0) {
    throw Error(ErrorCode::kInvalidArgument, "timeout_ms must be positive and retries >= 0");
  }
}

nlohmann::json to_json(const BackendDescriptor& d) {
  nlohmann::json j{{"kind", backend_kind_name(d.kind)},
                   {"max_concurrency", d.max_concurrency},
                   {"drop_probability", d.drop_probability},
                   {"endpoint", d.endpoint},
                   {"timeout_ms", d.timeout_ms},
                   {"retries", d.retries},
                   {"seed", nullptr}};
  if (d.seed) j["seed"] = *d.seed;
  if (!d.name.empty()) j["name"] = d.name;
  return j;
}

BackendDescriptor backend_descriptor_from_json(const nlohmann::json& j) {
  BackendDescriptor d;
  d.kind = parse_backend_kind(j.value("kind", std::string("gold-oracle")));
  d.max_concurrency = j.value("max_concurrency", std::size_t{0});
  if (j.contains("seed") && !j.at("seed").is_null()) d.seed = j.at("seed").get<std::uint64_t>();
  d.drop_probability = j.value("drop_probability", 0.0);
  d.endpoint = j.value("endpoint", std::string());
  d.timeout_ms = j.value("timeout_ms", 30000);
  d.retries = j.value("retries", 2);
  d.name = j.value("name", std::string());
  return d;
}

FunctionBackend::FunctionBackend(BackendDescriptor descriptor, GenerateFn generate, ScoreFn score)
    : descriptor_(std::move(descriptor)), generate_(std::move(generate)), score_(std::move(score)) {}

std::vector<GenerationResponse> FunctionBackend::generate(std::span<const GenerationRequest> batch) {
  if (!generate_) throw Error(ErrorCode::kInvalidArgument, descriptor_.id() + ": no generate");
  std::vector<GenerationResponse> out;
  out.reserve(batch.size());
  for (const auto& r : batch) out.push_back(generate_(r));
  return out;
}

std::vector<SpanScoringResponse> FunctionBackend::score_spans(
    std::span<const SpanScoringRequest> batch) {
  if (!score_) throw Error(ErrorCode::kInvalidArgument, descriptor_.id() + ": no score_spans");
  std::vector<SpanScoringResponse> out;
  out.reserve(batch.size());
  for (const auto& r : batch) out.push_back(score_(r));
  return out;
}

namespace wire {
namespace {

nlohmann::json meta_json(const RequestMeta& m) {
  return {{"task", m.task}, {"doc_id", m.doc_id}, {"event_id", m.event_id}, {"role", m.role}};
}

RequestMeta meta_from(const nlohmann::json& j) {
  if (!j.contains("meta")) return {};
  const auto& m = j.at("meta");
  return {m.value("task", std::string()), m.value("doc_id", std::string()),
          m.value("event_id", std::string()), m.value("role", std::string())};
}

}  // namespace

nlohmann::json to_json(const GenerationRequest& r) {
  return {{"meta", meta_json(r.meta)},          {"input_text", r.input_text},
          {"system_text", r.system_text},       {"max_new_tokens", r.max_new_tokens},
          {"beam_size", r.beam_size},           {"temperature", r.temperature},
          {"top_p", r.top_p}};
}

nlohmann::json to_json(const GenerationResponse& r) { return {{"output_text", r.output_text}}; }

nlohmann::json to_json(const SpanScoringRequest& r) {
  return {{"meta", meta_json(r.meta)}, {"input_text", r.input_text}};
}

nlohmann::json to_json(const SpanScoringResponse& r) {
  nlohmann::json offsets = nlohmann::json::array();
  for (const auto& t : r.token_offsets) offsets.push_back({t.start, t.end});
  return {{"start_probs", r.start_probs}, {"end_probs", r.end_probs}, {"token_offsets", offsets}};
}

GenerationRequest generation_request(const nlohmann::json& j) {
  GenerationRequest r;
  r.meta = meta_from(j);
  r.input_text = j.at("input_text").get<std::string>();
  r.system_text = j.value("system_text", std::string());
  r.max_new_tokens = j.value("max_new_tokens", 512);
  r.beam_size = j.value("beam_size", 5);
  r.temperature = j.value("temperature", 0.0);
  r.top_p = j.value("top_p", 1.0);
  if (r.beam_size < 1) throw Error(ErrorCode::kInvalidArgument, "beam_size must be >= 1");
  return r;
}

GenerationResponse generation_response(const nlohmann::json& j) {
  return {j.at("output_text").get<std::string>()};
}

SpanScoringRequest span_scoring_request(const nlohmann::json& j) {
  return {meta_from(j), j.at("input_text").get<std::string>()};
}

SpanScoringResponse span_scoring_response(const nlohmann::json& j) {
  SpanScoringResponse r;
  r.start_probs = j.at("start_probs").get<std::vector<double>>();
  r.end_probs = j.at("end_probs").get<std::vector<double>>();
  for (const auto& t : j.at("token_offsets")) {
    r.token_offsets.push_back({t.at(0).get<std::size_t>(), t.at(1).get<std::size_t>()});
  }
  return r;
}

nlohmann::json generate_body(std::span<const GenerationRequest> batch) {
  nlohmann::json reqs = nlohmann::json::array();
  for (const auto& r : batch) reqs.push_back(to_json(r));
  return {{"op", "generate"}, {"requests", reqs}};
}

nlohmann::json score_spans_body(std::span<const SpanScoringRequest> batch) {
  nlohmann::json reqs = nlohmann::json::array();
  for (const auto& r : batch) reqs.push_back(to_json(r));
  return {{"op", "score_spans"}, {"requests", reqs}};
}

nlohmann::json dispatch(Backend& backend, const nlohmann::json& body) {
  const auto error_body = [](std::string code, std::string message, std::size_t index) {
    return nlohmann::json{{"responses", nlohmann::json::array()},
                          {"error", {{"code", code}, {"message", message}, {"index", index}}}};
  };
  try {
    const auto op = body.at("op").get<std::string>();
    nlohmann::json responses = nlohmann::json::array();
    if (op == "generate") {
      std::vector<GenerationRequest> reqs;
      for (const auto& r : body.at("requests")) reqs.push_back(generation_request(r));
      for (const auto& r : backend.generate(reqs)) responses.push_back(to_json(r));
    } else if (op == "score_spans") {
      std::vector<SpanScoringRequest> reqs;
      for (const auto& r : body.at("requests")) reqs.push_back(span_scoring_request(r));
      for (const auto& r : backend.score_spans(reqs)) responses.push_back(to_json(r));
    } else {
      return error_body("invalid_argument", "unknown op \"" + op + "\"", 0);
    }
    return {{"responses", responses}, {"error", nullptr}};
  } catch (const RequestError& e) {
    return error_body(std::string(error_code_name(e.code())), e.what(), e.request_index());
  } catch (const Error& e) {
    return error_body(std::string(error_code_name(e.code())), e.what(), 0);
  } catch (const std::exception& e) {
    return error_body("malformed_request", e.what(), 0);
  }
}

}  // namespace wire

std::unique_ptr<Backend> make_backend(const BackendDescriptor& descriptor,
                                      std::shared_ptr<const Corpus> corpus,
                                      std::shared_ptr<const Ontology> ontology,
                                      const InputFormat& format) {
  BackendDescriptor d = descriptor;
  if (d.kind == BackendKind::kRemote && d.endpoint.empty()) {
    if (const char* env = std::getenv(kBackendAddressEnv)) d.endpoint = env;
  }
  d.validate();
  OracleOptions options;
  options.format = format;
  options.seed = d.seed.value_or(0);
  options.drop_probability = d.drop_probability;
  switch (d.kind) {
    case BackendKind::kGoldOracle: return make_gold_oracle(corpus, ontology, options);
    case BackendKind::kNoisyOracle: return make_noisy_oracle(corpus, ontology, options);
    case BackendKind::kRemote: return make_remote_backend(d);
    case BackendKind::kCustom: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "custom backends must be supplied by the caller");
}

}  // namespace eae
