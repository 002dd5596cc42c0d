#pragma once

#include <string>
#include <vector>

#include "eae/corpus.hpp"
#include "eae/qa.hpp"
#include "eae/resources.hpp"
#include "eae/template.hpp"

namespace eae {

// Input is the unfilled template joined to the trigger-marked document;
// target is the gold-filled template.
struct TIExample {
  std::string example_id;
  std::string doc_id;
  std::string event_id;
  std::string event_type;
  std::string input_text;
  std::string target_text;  // empty for inference examples
  bool marker_collision = false;
};

// Gold fills of an event: every slot role present, arguments in annotation order.
RoleFills gold_fills(const EventInstance& event, const TemplateAst& ast);

std::vector<TIExample> build_ti_examples(const Corpus& corpus, const Ontology& ontology,
                                         const InputFormat& format, bool with_targets);

nlohmann::json to_json(const TIExample& example);

}  // namespace eae
