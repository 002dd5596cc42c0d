#include <thread>

#include "eae/backends.hpp"
#include "eae/error.hpp"
#include "httplib.h"

namespace eae {
namespace {

std::string base_url(std::string endpoint) {
  if (endpoint.rfind("http://", 0) != 0 && endpoint.rfind("https://", 0) != 0) {
    endpoint = "http://" + endpoint;
  }
  while (!endpoint.empty() && endpoint.back() == '/') endpoint.pop_back();
  return endpoint;
}

class RemoteBackend final : public Backend {
 public:
  explicit RemoteBackend(BackendDescriptor descriptor) : descriptor_(std::move(descriptor)) {
    descriptor_.validate();
  }

  const BackendDescriptor& descriptor() const override { return descriptor_; }

  std::vector<GenerationResponse> generate(std::span<const GenerationRequest> batch) override {
    const auto responses = call(wire::generate_body(batch), batch.size());
    std::vector<GenerationResponse> out;
    for (const auto& r : responses) out.push_back(wire::generation_response(r));
    return out;
  }

  std::vector<SpanScoringResponse> score_spans(std::span<const SpanScoringRequest> batch) override {
    const auto responses = call(wire::score_spans_body(batch), batch.size());
    std::vector<SpanScoringResponse> out;
    for (std::size_t i = 0; i < responses.size(); ++i) {
      auto r = wire::span_scoring_response(responses[i]);
      try {
        validate(r);
      } catch (const Error& e) {
        throw Error(e.code(), "remote response " + std::to_string(i) + ": " + e.what());
      }
      out.push_back(std::move(r));
    }
    return out;
  }

 private:
  nlohmann::json call(const nlohmann::json& body, std::size_t expected) const {
    // One client per call keeps concurrent callers independent.
    httplib::Client client(base_url(descriptor_.endpoint));
    const auto sec = descriptor_.timeout_ms / 1000;
    const auto usec = (descriptor_.timeout_ms % 1000) * 1000;
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);
    const std::string payload = body.dump();
    std::string last_error;
    for (int attempt = 0; attempt <= descriptor_.retries; ++attempt) {
      auto res = client.Post(wire::kPath, payload, "application/json");
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        last_error = "HTTP status " + std::to_string(res->status);
        continue;
      }
      auto reply = nlohmann::json::parse(res->body, nullptr, false);
      if (reply.is_discarded() || !reply.is_object()) {
        throw TransportError(0, descriptor_.id() + ": malformed reply body");
      }
      if (reply.contains("error") && !reply.at("error").is_null()) {
        const auto& err = reply.at("error");
        throw TransportError(err.value("index", std::size_t{0}),
                             descriptor_.id() + ": " + err.value("code", std::string("error")) +
                                 ": " + err.value("message", std::string()));
      }
      const auto& responses = reply.at("responses");
      if (responses.size() != expected) {
        throw TransportError(0, descriptor_.id() + ": expected " + std::to_string(expected) +
                                    " responses, got " + std::to_string(responses.size()));
      }
      return responses;
    }
    throw TransportError(0, descriptor_.id() + ": transport failed after " +
                                std::to_string(descriptor_.retries + 1) +
                                " attempts: " + last_error);
  }

  BackendDescriptor descriptor_;
};

}  // namespace

std::unique_ptr<Backend> make_remote_backend(BackendDescriptor descriptor) {
  descriptor.kind = BackendKind::kRemote;
  return std::make_unique<RemoteBackend>(std::move(descriptor));
}

struct BackendServer::Impl {
  httplib::Server server;
  std::thread thread;
  std::string host;
};

BackendServer::BackendServer(Backend& backend, std::string host, int port)
    : impl_(std::make_unique<Impl>()) {
  impl_->host = host;
  impl_->server.Post(wire::kPath, [&backend](const httplib::Request& req, httplib::Response& res) {
    auto body = nlohmann::json::parse(req.body, nullptr, false);
    nlohmann::json reply;
    if (body.is_discarded()) {
      reply = {{"responses", nlohmann::json::array()},
               {"error", {{"code", "malformed_request"}, {"message", "body is not JSON"}, {"index", 0}}}};
    } else {
      reply = wire::dispatch(backend, body);
    }
    res.set_content(reply.dump(), "application/json");
  });
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port(host);
  } else if (impl_->server.bind_to_port(host, port)) {
    port_ = port;
  } else {
    port_ = -1;
  }
  if (port_ < 0) throw Error(ErrorCode::kIo, "cannot bind backend server on " + host);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

BackendServer::~BackendServer() { stop(); }

std::string BackendServer::endpoint() const {
  return impl_->host + ":" + std::to_string(port_);
}

void BackendServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace eae
