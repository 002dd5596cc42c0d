#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eae/corpus.hpp"
#include "eae/qa.hpp"
#include "eae/resources.hpp"
#include "json.hpp"

namespace eae {

// Identifies the corpus entity a request was built from. Oracles resolve
// requests through it; remote services may ignore it.
struct RequestMeta {
  std::string task;  // "ti" | "qa" | "llm"
  std::string doc_id;
  std::string event_id;
  std::string role;  // qa only
  bool operator==(const RequestMeta&) const = default;
};

struct GenerationRequest {
  RequestMeta meta;
  std::string input_text;
  std::string system_text;  // llm prompts
  int max_new_tokens = 512;
  int beam_size = 5;
  double temperature = 0.0;
  double top_p = 1.0;
  bool operator==(const GenerationRequest&) const = default;
};

struct GenerationResponse {
  std::string output_text;
  bool operator==(const GenerationResponse&) const = default;
};

struct SpanScoringRequest {
  RequestMeta meta;
  std::string input_text;
  bool operator==(const SpanScoringRequest&) const = default;
};

// Token offsets index the document region of the input text, that is, the
// trigger-marked document that follows the question and separator.
struct SpanScoringResponse {
  std::vector<double> start_probs;
  std::vector<double> end_probs;
  std::vector<TokenOffset> token_offsets;
  bool operator==(const SpanScoringResponse&) const = default;
};

void validate(const SpanScoringResponse& response);

enum class BackendKind { kGoldOracle, kNoisyOracle, kRemote, kCustom };

std::string_view backend_kind_name(BackendKind kind);
BackendKind parse_backend_kind(std::string_view name);

struct BackendDescriptor {
  BackendKind kind = BackendKind::kGoldOracle;
  std::size_t max_concurrency = 0;  // 0: unlimited
  std::optional<std::uint64_t> seed;
  double drop_probability = 0.0;  // noisy oracle
  std::string endpoint;           // remote: "host:port" or "http://host:port"
  int timeout_ms = 30000;
  int retries = 2;
  std::string name;  // free-form label for custom backends

  std::string id() const;
  void validate() const;
};

nlohmann::json to_json(const BackendDescriptor& d);
BackendDescriptor backend_descriptor_from_json(const nlohmann::json& j);

// Implementations must tolerate concurrent calls up to
// descriptor().max_concurrency; callers must not exceed it.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual const BackendDescriptor& descriptor() const = 0;
  // Responses are positionally aligned with requests.
  virtual std::vector<GenerationResponse> generate(std::span<const GenerationRequest> batch) = 0;
  virtual std::vector<SpanScoringResponse> score_spans(
      std::span<const SpanScoringRequest> batch) = 0;
};

struct OracleOptions {
  InputFormat format;  // must match how inference inputs were assembled
  double drop_probability = 0.0;
  std::uint64_t seed = 0;
  // Mass placed on the gold start and end tokens.
  double gold_mass = 0.99;
};

// Answers from gold annotations: TI requests get the gold-filled template, QA
// requests get gold_mass on the gold span (the first one, when a role has
// several) and the rest on token 0, LLM requests get the gold answer sheet.
// The noisy variant drops each gold argument independently with
// drop_probability, deterministically in (seed, request entity).
std::unique_ptr<Backend> make_gold_oracle(std::shared_ptr<const Corpus> corpus,
                                          std::shared_ptr<const Ontology> ontology,
                                          OracleOptions options = {});
std::unique_ptr<Backend> make_noisy_oracle(std::shared_ptr<const Corpus> corpus,
                                           std::shared_ptr<const Ontology> ontology,
                                           OracleOptions options);

// Whitespace tokenization of a marked document region. Token 0 is the
// no-answer position (0, 0); `forced` extents become single tokens.
std::vector<TokenOffset> oracle_tokenize(std::string_view region,
                                         std::span<const TokenOffset> forced = {});

// Adapts callbacks into a backend (canned replies, test doubles).
class FunctionBackend final : public Backend {
 public:
  using GenerateFn = std::function<GenerationResponse(const GenerationRequest&)>;
  using ScoreFn = std::function<SpanScoringResponse(const SpanScoringRequest&)>;

  FunctionBackend(BackendDescriptor descriptor, GenerateFn generate, ScoreFn score = {});

  const BackendDescriptor& descriptor() const override { return descriptor_; }
  std::vector<GenerationResponse> generate(std::span<const GenerationRequest> batch) override;
  std::vector<SpanScoringResponse> score_spans(std::span<const SpanScoringRequest> batch) override;

 private:
  BackendDescriptor descriptor_;
  GenerateFn generate_;
  ScoreFn score_;
};

// Wire protocol: {"op": "generate"|"score_spans", "requests": [...]}
//            ->  {"responses": [...], "error": null | {"code", "message", "index"}}
namespace wire {

nlohmann::json to_json(const GenerationRequest& r);
nlohmann::json to_json(const GenerationResponse& r);
nlohmann::json to_json(const SpanScoringRequest& r);
nlohmann::json to_json(const SpanScoringResponse& r);
GenerationRequest generation_request(const nlohmann::json& j);
GenerationResponse generation_response(const nlohmann::json& j);
SpanScoringRequest span_scoring_request(const nlohmann::json& j);
SpanScoringResponse span_scoring_response(const nlohmann::json& j);

nlohmann::json generate_body(std::span<const GenerationRequest> batch);
nlohmann::json score_spans_body(std::span<const SpanScoringRequest> batch);

// Runs one request body against a backend; errors become an error body.
nlohmann::json dispatch(Backend& backend, const nlohmann::json& body);

inline constexpr const char* kPath = "/v1/batch";

}  // namespace wire

// Client for the wire protocol over HTTP POST. Retries transport failures.
std::unique_ptr<Backend> make_remote_backend(BackendDescriptor descriptor);

// Serves any backend over the wire protocol (in-process service, contract
// tests). Listens on a background thread until stop() or destruction.
class BackendServer {
 public:
  explicit BackendServer(Backend& backend, std::string host = "127.0.0.1", int port = 0);
  ~BackendServer();
  BackendServer(const BackendServer&) = delete;
  BackendServer& operator=(const BackendServer&) = delete;

  int port() const noexcept { return port_; }
  std::string endpoint() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

// Environment variable consulted when a remote descriptor has no endpoint.
inline constexpr const char* kBackendAddressEnv = "EAE_BACKEND_ADDRESS";

// Builds the backend a descriptor names. Oracles answer from `corpus`.
std::unique_ptr<Backend> make_backend(const BackendDescriptor& descriptor,
                                      std::shared_ptr<const Corpus> corpus,
                                      std::shared_ptr<const Ontology> ontology,
                                      const InputFormat& format = {});

}  // namespace eae
