#include <algorithm>

#include "eae/error.hpp"
#include "eae/llm_protocol.hpp"
#include "eae/runner.hpp"

namespace eae {
namespace {

std::vector<std::string> sorted_slots(const TemplateAst& ast) {
  auto roles = ast.slot_roles();
  std::sort(roles.begin(), roles.end());
  return roles;
}

void check_count(const std::vector<std::string>& items, const std::string& resource) {
  if (items.size() != kParaphraseCount) {
    throw Error(ErrorCode::kCountMismatch, resource + ": expected " +
                                               std::to_string(kParaphraseCount) +
                                               " paraphrases, got " +
                                               std::to_string(items.size()));
  }
}

}  // namespace

ParaphraseSets paraphrase_sets_from_json(const nlohmann::json& j) {
  ParaphraseSets sets;
  if (j.contains("questions")) {
    for (const auto& [type, roles] : j.at("questions").items()) {
      for (const auto& [role, list] : roles.items()) {
        sets.questions[{type, role}] = list.get<std::vector<std::string>>();
      }
    }
  }
  if (j.contains("templates")) {
    for (const auto& [type, list] : j.at("templates").items()) {
      sets.templates[type] = list.get<std::vector<std::string>>();
    }
  }
  return sets;
}

nlohmann::json to_json(const ParaphraseSets& sets) {
  nlohmann::json questions = nlohmann::json::object();
  for (const auto& [key, list] : sets.questions) questions[key.first][key.second] = list;
  nlohmann::json templates = nlohmann::json::object();
  for (const auto& [type, list] : sets.templates) templates[type] = list;
  return {{"questions", questions}, {"templates", templates}};
}

std::size_t AugmentedResources::question_variant_count() const {
  std::size_t n = 0;
  for (const auto& variant : variants) {
    for (const auto& type : variant.event_types) n += type.roles.size();
  }
  return n;
}

std::size_t AugmentedResources::template_variant_count() const {
  std::size_t n = 0;
  for (const auto& variant : variants) n += variant.event_types.size();
  return n;
}

AugmentedResources build_paraphrase_augmented_resources(const Ontology& ontology,
                                                        const ParaphraseSets& paraphrases) {
  AugmentedResources out;
  out.original = ontology;
  out.variants.assign(kVariantsPerResource, ontology);

  for (std::size_t t = 0; t < ontology.event_types.size(); ++t) {
    const auto& type = ontology.event_types[t];
    const auto tpl = paraphrases.templates.find(type.name);
    if (tpl == paraphrases.templates.end()) {
      throw Error(ErrorCode::kMissingResource, "no template paraphrases for " + type.name);
    }
    const std::string tpl_resource = "template of " + type.name;
    check_count(tpl->second, tpl_resource);
    const auto expected = sorted_slots(type.parsed_template());
    for (std::size_t v = 0; v < kParaphraseCount; ++v) {
      const std::string& source = tpl->second[v];
      TemplateAst ast;
      try {
        ast = parse_template(source);
      } catch (const Error& e) {
        throw Error(e.code(), tpl_resource + ", paraphrase " + std::to_string(v + 1) + ": " +
                                  e.what());
      }
      if (sorted_slots(ast) != expected) {
        throw Error(ErrorCode::kSlotMismatch, tpl_resource + ", paraphrase " +
                                                  std::to_string(v + 1) +
                                                  ": slots differ from the original");
      }
      out.variants[v + 1].event_types[t].template_source = source;
    }

    for (std::size_t r = 0; r < type.roles.size(); ++r) {
      const auto& role = type.roles[r];
      const auto qs = paraphrases.questions.find({type.name, role.name});
      if (qs == paraphrases.questions.end()) {
        throw Error(ErrorCode::kMissingResource,
                    "no question paraphrases for " + type.name + "/" + role.name);
      }
      const std::string q_resource = "question of " + type.name + "/" + role.name;
      check_count(qs->second, q_resource);
      for (std::size_t v = 0; v < kParaphraseCount; ++v) {
        const std::string& q = qs->second[v];
        if (q.empty() || q.back() != '?') {
          throw Error(ErrorCode::kInvalidQuestion, q_resource + ", paraphrase " +
                                                       std::to_string(v + 1) +
                                                       " does not end with '?'");
        }
        out.variants[v + 1].event_types[t].roles[r].question = q;
      }
    }
  }
  for (std::size_t v = 1; v < out.variants.size(); ++v) {
    out.variants[v].ontology_id = ontology.ontology_id + "#p" + std::to_string(v);
  }
  return out;
}

nlohmann::json to_json(const AugmentedResources& resources) {
  nlohmann::json variants = nlohmann::json::array();
  for (const auto& v : resources.variants) variants.push_back(to_json(v));
  return {{"original", to_json(resources.original)},
          {"variants", variants},
          {"question_variants", resources.question_variant_count()},
          {"template_variants", resources.template_variant_count()}};
}

TrainingExamples build_augmented_qa_examples(const Corpus& corpus,
                                             const AugmentedResources& resources,
                                             const QAConfig& config) {
  TrainingExamples out;
  for (std::size_t v = 0; v < resources.variants.size(); ++v) {
    auto part = build_training_examples(corpus, resources.variants[v], config);
    for (auto& ex : part.examples) {
      if (v > 0) ex.example_id = "p" + std::to_string(v) + ":" + ex.example_id;
      out.examples.push_back(std::move(ex));
    }
    if (v == 0) out.warnings = std::move(part.warnings);
  }
  return out;
}

std::vector<TIExample> build_augmented_ti_examples(const Corpus& corpus,
                                                   const AugmentedResources& resources,
                                                   const InputFormat& format) {
  std::vector<TIExample> out;
  for (std::size_t v = 0; v < resources.variants.size(); ++v) {
    auto part = build_ti_examples(corpus, resources.variants[v], format, true);
    for (auto& ex : part) {
      if (v > 0) ex.example_id = "p" + std::to_string(v) + ":" + ex.example_id;
      out.push_back(std::move(ex));
    }
  }
  return out;
}

}  // namespace eae
