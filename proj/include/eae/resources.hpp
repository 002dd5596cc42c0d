#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "eae/template.hpp"
#include "json.hpp"

namespace eae {

struct RoleDef {
  std::string name;
  std::string question;
  bool operator==(const RoleDef&) const = default;
};

struct EventTypeDef {
  std::string name;  // dot-separated for multi-level ontologies
  std::string template_source;
  std::vector<RoleDef> roles;  // file order is authoritative

  TemplateAst parsed_template() const { return parse_template(template_source); }
  std::vector<std::string> role_names() const;
  const RoleDef* find_role(std::string_view role) const;
  bool operator==(const EventTypeDef&) const = default;
};

struct Ontology {
  std::string ontology_id;
  std::vector<EventTypeDef> event_types;

  const EventTypeDef* find(std::string_view event_type) const;
  bool operator==(const Ontology&) const = default;
};

// Throws Error on the first structural violation: duplicate event types or
// roles, malformed questions, template parse errors, slot/role mismatch.
void check_ontology(const Ontology& ontology);

Ontology ontology_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Ontology& ontology);

// Parses without structural checks, for linting.
Ontology read_ontology(const std::filesystem::path& path);
// Reads JSON, or YAML when the extension is .yaml/.yml, and checks it.
Ontology load_ontology(const std::filesystem::path& path);
void save_ontology(const Ontology& ontology, const std::filesystem::path& path);

enum class Severity { kError, kWarning };

struct LintFinding {
  Severity severity;
  std::string code;
  std::string event_type;
  std::string role;  // empty for event-level findings
  std::string message;
};

// Errors: template/role bijection violations, adjacent slots, malformed
// questions. Warnings: a question that contains its own role name as a
// whole word (case-insensitive).
std::vector<LintFinding> lint_ontology(const Ontology& ontology);

nlohmann::json to_json(const LintFinding& finding);

// Case-insensitive whole-word search (ASCII folding).
bool contains_whole_word(std::string_view haystack, std::string_view needle);

}  // namespace eae
