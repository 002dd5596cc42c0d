#include "eae/ti.hpp"

#include <map>

#include "eae/error.hpp"

namespace eae {

RoleFills gold_fills(const EventInstance& event, const TemplateAst& ast) {
  RoleFills fills;
  for (const auto& role : ast.slot_roles()) fills[role];
  for (const auto& arg : event.arguments) {
    auto it = fills.find(arg.role);
    if (it != fills.end()) it->second.push_back(arg.text);
  }
  return fills;
}

std::vector<TIExample> build_ti_examples(const Corpus& corpus, const Ontology& ontology,
                                         const InputFormat& format, bool with_targets) {
  std::map<std::string, TemplateAst, std::less<>> asts;
  for (const auto& et : ontology.event_types) asts.emplace(et.name, et.parsed_template());
  std::vector<TIExample> out;
  for (const auto& doc : corpus.documents) {
    for (const auto& e : doc.events) {
      auto it = asts.find(e.event_type);
      if (it == asts.end()) {
        throw Error(ErrorCode::kNotFound, "event type \"" + e.event_type + "\" not in ontology");
      }
      const auto marked = mark_trigger(doc, e, format.open_marker, format.close_marker);
      TIExample ex;
      ex.example_id = doc.doc_id + "/" + e.event_id;
      ex.doc_id = doc.doc_id;
      ex.event_id = e.event_id;
      ex.event_type = e.event_type;
      ex.input_text = assemble_input(render_unfilled(it->second), format, marked.text);
      if (with_targets) ex.target_text = render_filled(it->second, gold_fills(e, it->second));
      ex.marker_collision = marked.marker_collision;
      out.push_back(std::move(ex));
    }
  }
  return out;
}

nlohmann::json to_json(const TIExample& ex) {
  nlohmann::json j{{"example_id", ex.example_id}, {"doc_id", ex.doc_id},
                   {"event_id", ex.event_id},     {"event_type", ex.event_type},
                   {"input_text", ex.input_text}};
  if (!ex.target_text.empty()) j["target_text"] = ex.target_text;
  if (ex.marker_collision) j["marker_collision"] = true;
  return j;
}

}  // namespace eae
