#include <map>

#include "eae/backends.hpp"
#include "eae/error.hpp"
#include "eae/llm_protocol.hpp"
#include "eae/metrics.hpp"
#include "eae/utf8.hpp"

namespace eae {
namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t h) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool is_space(char32_t c) { return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r'; }

class OracleBackend final : public Backend {
 public:
  OracleBackend(std::shared_ptr<const Corpus> corpus, std::shared_ptr<const Ontology> ontology,
                OracleOptions options, BackendDescriptor descriptor)
      : corpus_(std::move(corpus)),
        ontology_(std::move(ontology)),
        options_(std::move(options)),
        descriptor_(std::move(descriptor)) {
    for (const auto& doc : corpus_->documents)
      for (const auto& e : doc.events) events_[EventKey{doc.doc_id, e.event_id}] = {&doc, &e};
    for (const auto& et : ontology_->event_types) asts_.emplace(et.name, et.parsed_template());
  }

  const BackendDescriptor& descriptor() const override { return descriptor_; }

  std::vector<GenerationResponse> generate(std::span<const GenerationRequest> batch) override {
    std::vector<GenerationResponse> out;
    out.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto& meta = batch[i].meta;
      const auto [doc, event] = resolve(meta, i);
      const auto kept = kept_arguments(*doc, *event);
      if (meta.task == "llm") {
        out.push_back({answer_sheet(*event, kept)});
      } else {
        const auto& ast = asts_.at(event->event_type);
        RoleFills fills;
        for (const auto& role : ast.slot_roles()) fills[role];
        for (const auto* arg : kept) fills[arg->role].push_back(arg->text);
        out.push_back({render_filled(ast, fills)});
      }
    }
    return out;
  }

  std::vector<SpanScoringResponse> score_spans(std::span<const SpanScoringRequest> batch) override {
    std::vector<SpanScoringResponse> out;
    out.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      out.push_back(score_one(batch[i], i));
    }
    return out;
  }

 private:
  std::pair<const Document*, const EventInstance*> resolve(const RequestMeta& meta,
                                                           std::size_t index) const {
    auto it = events_.find(EventKey{meta.doc_id, meta.event_id});
    if (it == events_.end()) {
      throw RequestError(ErrorCode::kNotFound, index,
                         "oracle: request " + std::to_string(index) + " names unknown event " +
                             meta.doc_id + "/" + meta.event_id);
    }
    if (ontology_->find(it->second.second->event_type) == nullptr) {
      throw RequestError(ErrorCode::kNotFound, index,
                         "oracle: event type " + it->second.second->event_type + " not in ontology");
    }
    return it->second;
  }

  bool dropped(const Document& doc, const EventInstance& e, std::size_t arg_index) const {
    if (options_.drop_probability <= 0.0) return false;
    std::uint64_t h = fnv1a(doc.doc_id, 0xcbf29ce484222325ULL ^ options_.seed);
    h = fnv1a("\x1f", h);
    h = fnv1a(e.event_id, h);
    const std::uint64_t x = splitmix64(h ^ splitmix64(arg_index + options_.seed));
    const double u = static_cast<double>(x >> 11) * 0x1.0p-53;
    return u < options_.drop_probability;
  }

  std::vector<const ArgumentMention*> kept_arguments(const Document& doc,
                                                     const EventInstance& e) const {
    std::vector<const ArgumentMention*> kept;
    for (std::size_t a = 0; a < e.arguments.size(); ++a) {
      if (!dropped(doc, e, a)) kept.push_back(&e.arguments[a]);
    }
    return kept;
  }

  std::string answer_sheet(const EventInstance& e,
                           const std::vector<const ArgumentMention*>& kept) const {
    const auto roles = ontology_->find(e.event_type)->role_names();
    AnswerSheet sheet;
    for (const auto& r : roles) sheet.answers[r];
    for (const auto* arg : kept) {
      auto it = sheet.answers.find(arg->role);
      if (it != sheet.answers.end()) it->second.push_back(arg->text);
    }
    return serialize_answer_sheet(sheet, roles);
  }

  SpanScoringResponse score_one(const SpanScoringRequest& req, std::size_t index) const {
    const auto [doc, event] = resolve(req.meta, index);
    const auto marked = mark_trigger(*doc, *event, options_.format.open_marker,
                                     options_.format.close_marker);
    if (req.input_text.size() < marked.text.size() ||
        req.input_text.compare(req.input_text.size() - marked.text.size(), std::string::npos,
                               marked.text) != 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "oracle: request " + std::to_string(index) +
                      " input does not end with the marked document");
    }
    const ArgumentMention* gold = nullptr;
    for (const auto* arg : kept_arguments(*doc, *event)) {
      if (arg->role == req.meta.role && arg->span) {
        gold = arg;
        break;
      }
    }
    SpanScoringResponse resp;
    std::vector<TokenOffset> forced;
    if (gold != nullptr) {
      forced.push_back({marked.offsets.to_marked(gold->span->start),
                        marked.offsets.to_marked_end(gold->span->end)});
    }
    resp.token_offsets = oracle_tokenize(marked.text, forced);
    resp.start_probs.assign(resp.token_offsets.size(), 0.0);
    resp.end_probs.assign(resp.token_offsets.size(), 0.0);
    if (gold == nullptr) {
      resp.start_probs[0] = resp.end_probs[0] = 1.0;
      return resp;
    }
    std::size_t g = 0;
    for (std::size_t t = 1; t < resp.token_offsets.size(); ++t) {
      if (resp.token_offsets[t] == forced.front()) g = t;
    }
    resp.start_probs[0] = resp.end_probs[0] = 1.0 - options_.gold_mass;
    resp.start_probs[g] += options_.gold_mass;
    resp.end_probs[g] += options_.gold_mass;
    return resp;
  }

  std::shared_ptr<const Corpus> corpus_;
  std::shared_ptr<const Ontology> ontology_;
  OracleOptions options_;
  BackendDescriptor descriptor_;
  std::map<EventKey, std::pair<const Document*, const EventInstance*>> events_;
  std::map<std::string, TemplateAst, std::less<>> asts_;
};

}  // namespace

std::vector<TokenOffset> oracle_tokenize(std::string_view region,
                                         std::span<const TokenOffset> forced) {
  const auto cps = utf8::decode(region);
  std::vector<TokenOffset> tokens{{0, 0}};
  std::size_t f = 0;
  std::size_t i = 0;
  while (i < cps.size()) {
    while (f < forced.size() && forced[f].end <= i) ++f;
    if (f < forced.size() && forced[f].start <= i) {
      tokens.push_back(forced[f]);
      i = forced[f].end;
      ++f;
      continue;
    }
    if (is_space(cps[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    const std::size_t limit = f < forced.size() ? forced[f].start : cps.size();
    while (j < limit && !is_space(cps[j])) ++j;
    tokens.push_back({i, j});
    i = j;
  }
  return tokens;
}

std::unique_ptr<Backend> make_gold_oracle(std::shared_ptr<const Corpus> corpus,
                                          std::shared_ptr<const Ontology> ontology,
                                          OracleOptions options) {
  options.drop_probability = 0.0;
  BackendDescriptor d;
  d.kind = BackendKind::kGoldOracle;
  d.seed = options.seed;
  return std::make_unique<OracleBackend>(std::move(corpus), std::move(ontology),
                                         std::move(options), std::move(d));
}

std::unique_ptr<Backend> make_noisy_oracle(std::shared_ptr<const Corpus> corpus,
                                           std::shared_ptr<const Ontology> ontology,
                                           OracleOptions options) {
  if (options.drop_probability < 0.0 || options.drop_probability > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "drop_probability must lie in [0, 1]");
  }
  BackendDescriptor d;
  d.kind = BackendKind::kNoisyOracle;
  d.seed = options.seed;
  d.drop_probability = options.drop_probability;
  return std::make_unique<OracleBackend>(std::move(corpus), std::move(ontology),
                                         std::move(options), std::move(d));
}

}  // namespace eae
