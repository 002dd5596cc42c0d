#include <cstdlib>
#include <future>

#include "doctest.h"
#include "eae/backends.hpp"
#include "eae/error.hpp"
#include "eae/synthetic.hpp"
#include "eae/ti.hpp"
#include "fixtures.hpp"
#include "httplib.h"

using namespace eae;

namespace {

struct Setup {
  std::shared_ptr<const Corpus> corpus = std::make_shared<const Corpus>(test::attack_corpus());
  std::shared_ptr<const Ontology> ontology = std::make_shared<const Ontology>(test::attack_ontology());
};

GenerationRequest ti_request(const std::string& event) {
  GenerationRequest r;
  r.meta = {"ti", "doc1", event, ""};
  return r;
}

SpanScoringRequest qa_request(const Setup& s, const std::string& role) {
  const auto& doc = s.corpus->documents[0];
  SpanScoringRequest r;
  r.meta = {"qa", "doc1", "e1", role};
  r.input_text = "Question?\n" + mark_trigger(doc, doc.events[0]).text;
  return r;
}

}  // namespace

TEST_CASE("gold oracle TI answers with the gold filled template") {
  Setup s;
  auto oracle = make_gold_oracle(s.corpus, s.ontology);
  const std::vector<GenerationRequest> batch{ti_request("e1"), ti_request("e2")};
  const auto out = oracle->generate(batch);
  REQUIRE(out.size() == 2);
  CHECK(out[0].output_text == "John attacked the base");
  CHECK(out[1].output_text == "Officials met at Kabul");

  const std::vector<GenerationRequest> unknown{ti_request("nope")};
  CHECK_THROWS_AS(oracle->generate(unknown), Error);
}

TEST_CASE("noisy oracle limits and determinism") {
  Setup s;
  OracleOptions all;
  all.drop_probability = 1.0;
  auto drop_all = make_noisy_oracle(s.corpus, s.ontology, all);
  const std::vector<GenerationRequest> batch{ti_request("e1")};
  CHECK(drop_all->generate(batch)[0].output_text == "Attacker attacked Target");

  const auto data = generate_synthetic({.documents = 40, .seed = 9});
  auto corpus = std::make_shared<const Corpus>(data.corpus);
  auto ontology = std::make_shared<const Ontology>(data.ontology);
  OracleOptions half;
  half.drop_probability = 0.5;
  half.seed = 42;
  std::vector<GenerationRequest> requests;
  for (const auto& doc : corpus->documents) {
    for (const auto& e : doc.events) {
      GenerationRequest r;
      r.meta = {"ti", doc.doc_id, e.event_id, ""};
      requests.push_back(r);
    }
  }
  const auto a = make_noisy_oracle(corpus, ontology, half)->generate(requests);
  const auto b = make_noisy_oracle(corpus, ontology, half)->generate(requests);
  CHECK(a == b);
  half.seed = 43;
  CHECK(make_noisy_oracle(corpus, ontology, half)->generate(requests) != a);
}

TEST_CASE("gold oracle QA mass placement") {
  Setup s;
  auto oracle = make_gold_oracle(s.corpus, s.ontology);
  const std::vector<SpanScoringRequest> batch{qa_request(s, "Target")};
  const auto resp = oracle->score_spans(batch)[0];
  CHECK_NOTHROW(validate(resp));
  const auto marked = mark_trigger(s.corpus->documents[0], s.corpus->documents[0].events[0]);
  const auto decoded = decode_spans(resp.start_probs, resp.end_probs, resp.token_offsets, marked.text, QAConfig{});
  REQUIRE_FALSE(decoded.candidates.empty());
  CHECK(decoded.candidates[0].text == "the base");
  CHECK(decoded.candidates[0].confidence == doctest::Approx(0.9801));
  CHECK(select_arguments(decoded.candidates, decoded.null_confidence, 0.0, 5).size() == 1);

  // A role without gold arguments puts all mass on the null position.
  Setup empty;
  auto c = test::attack_corpus();
  c.documents[0].events[0].arguments.pop_back();
  empty.corpus = std::make_shared<const Corpus>(c);
  auto o2 = make_gold_oracle(empty.corpus, empty.ontology);
  const auto none = o2->score_spans(std::vector<SpanScoringRequest>{qa_request(empty, "Target")})[0];
  CHECK(none.start_probs[0] == 1.0);
  const auto d2 = decode_spans(none.start_probs, none.end_probs, none.token_offsets, marked.text, QAConfig{});
  CHECK(select_arguments(d2.candidates, d2.null_confidence, 0.0, 5).empty());
}

TEST_CASE("response validation rejects unnormalised vectors") {
  SpanScoringResponse r{{0.5, 0.6}, {0.5, 0.5}, {{0, 0}, {0, 1}}};
  CHECK_THROWS_AS(validate(r), Error);
  r.start_probs = {0.5, 0.5};
  CHECK_NOTHROW(validate(r));
  r.token_offsets = {{0, 0}};
  CHECK_THROWS_AS(validate(r), Error);
}

TEST_CASE("wire schema round trips losslessly") {
  GenerationRequest g;
  g.meta = {"ti", "dø", "e", ""};
  g.input_text = "Zoë\n\"quoted\"";
  g.system_text = "sys";
  g.beam_size = 3;
  g.temperature = 0.7;
  CHECK(wire::generation_request(wire::to_json(g)) == g);
  GenerationResponse gr{"out"};
  CHECK(wire::generation_response(wire::to_json(gr)) == gr);
  SpanScoringRequest sr{{"qa", "d", "e", "Place of Arrest"}, "text"};
  CHECK(wire::span_scoring_request(wire::to_json(sr)) == sr);
  SpanScoringResponse ss{{0.25, 0.75}, {0.5, 0.5}, {{0, 0}, {3, 7}}};
  CHECK(wire::span_scoring_response(wire::to_json(ss)) == ss);

  const std::vector<GenerationRequest> batch{g};
  const auto body = wire::generate_body(batch);
  CHECK(body["op"] == "generate");
  CHECK(wire::generation_request(body["requests"][0]) == g);
}

TEST_CASE("dispatch reports protocol errors in the body") {
  Setup s;
  auto oracle = make_gold_oracle(s.corpus, s.ontology);
  const auto bad_op = wire::dispatch(*oracle, {{"op", "train"}, {"requests", nlohmann::json::array()}});
  CHECK_FALSE(bad_op["error"].is_null());
  const auto unknown = wire::dispatch(*oracle, wire::generate_body(std::vector<GenerationRequest>{ti_request("x")}));
  CHECK_FALSE(unknown["error"].is_null());
  const auto ok = wire::dispatch(*oracle, wire::generate_body(std::vector<GenerationRequest>{ti_request("e1")}));
  CHECK(ok["error"].is_null());
  CHECK(ok["responses"][0]["output_text"] == "John attacked the base");
}

TEST_CASE("remote client against an in-process server") {
  Setup s;
  auto oracle = make_gold_oracle(s.corpus, s.ontology);
  BackendServer server(*oracle);
  BackendDescriptor d;
  d.kind = BackendKind::kRemote;
  d.endpoint = server.endpoint();
  auto remote = make_remote_backend(d);

  const std::vector<GenerationRequest> gen{ti_request("e1"), ti_request("e2")};
  CHECK(remote->generate(gen) == oracle->generate(gen));
  const std::vector<SpanScoringRequest> qa{qa_request(s, "Attacker")};
  CHECK(remote->score_spans(qa) == oracle->score_spans(qa));

  // Backend-side failures surface as transport errors with a request index.
  const std::vector<GenerationRequest> bad{ti_request("e1"), ti_request("zzz")};
  try {
    remote->generate(bad);
    FAIL("expected a transport error");
  } catch (const TransportError& e) {
    CHECK(e.request_index() == 1);
  }

  // Malformed bodies get a protocol-level error.
  httplib::Client raw("http://" + server.endpoint());
  auto res = raw.Post(wire::kPath, "{not json", "application/json");
  REQUIRE(res);
  const auto reply = nlohmann::json::parse(res->body);
  CHECK_FALSE(reply["error"].is_null());
}

TEST_CASE("32 concurrent requests against the server") {
  const auto data = generate_synthetic({.documents = 32, .seed = 4});
  auto corpus = std::make_shared<const Corpus>(data.corpus);
  auto ontology = std::make_shared<const Ontology>(data.ontology);
  auto oracle = make_gold_oracle(corpus, ontology);
  BackendServer server(*oracle);
  BackendDescriptor d;
  d.kind = BackendKind::kRemote;
  d.endpoint = server.endpoint();

  QAConfig config;
  const auto examples = build_inference_examples(*corpus, *ontology, config);
  std::vector<std::future<bool>> calls;
  for (int i = 0; i < 32; ++i) {
    calls.push_back(std::async(std::launch::async, [&, i] {
      auto client = make_remote_backend(d);
      const auto& ex = examples[i % examples.size()];
      const std::vector<SpanScoringRequest> batch{{{"qa", ex.doc_id, ex.event_id, ex.role}, ex.input_text}};
      const auto resp = client->score_spans(batch);
      validate(resp[0]);
      return resp == oracle->score_spans(batch);
    }));
  }
  for (auto& c : calls) CHECK(c.get());
}

TEST_CASE("unreachable remote backends fail with a transport error") {
  BackendDescriptor d;
  d.kind = BackendKind::kRemote;
  d.endpoint = "127.0.0.1:1";
  d.timeout_ms = 200;
  d.retries = 1;
  auto remote = make_remote_backend(d);
  CHECK_THROWS_AS(remote->generate(std::vector<GenerationRequest>{ti_request("e1")}), TransportError);
}

TEST_CASE("descriptor validation and environment resolution") {
  BackendDescriptor d;
  d.kind = BackendKind::kRemote;
  CHECK_THROWS_AS(d.validate(), Error);
  d.endpoint = "localhost:9";
  CHECK_NOTHROW(d.validate());
  CHECK(backend_descriptor_from_json(to_json(d)).endpoint == d.endpoint);
  CHECK_THROWS_AS(parse_backend_kind("gpu"), Error);

  Setup s;
  BackendDescriptor from_env;
  from_env.kind = BackendKind::kRemote;
  ::setenv(kBackendAddressEnv, "127.0.0.1:5", 1);
  CHECK(make_backend(from_env, s.corpus, s.ontology)->descriptor().endpoint == "127.0.0.1:5");
  ::unsetenv(kBackendAddressEnv);
  CHECK_THROWS_AS(make_backend(from_env, s.corpus, s.ontology), Error);
}

TEST_CASE("oracle tokenizer forces the gold extent into one token") {
  const std::vector<TokenOffset> forced{{2, 9}};
  const auto t = oracle_tokenize("a bcd efg h", forced);
  CHECK(t == std::vector<TokenOffset>{{0, 0}, {0, 1}, {2, 9}, {10, 11}});
  CHECK(oracle_tokenize("", {}) == std::vector<TokenOffset>{{0, 0}});
}
