#include "eae/resources.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>

#include <yaml-cpp/yaml.h>

#include "eae/error.hpp"

namespace eae {
namespace {

nlohmann::json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Sequence: {
      auto arr = nlohmann::json::array();
      for (const auto& item : node) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      auto obj = nlohmann::json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return obj;
    }
    case YAML::NodeType::Scalar:
      return node.as<std::string>();
    default:
      return nullptr;
  }
}

std::string get_string(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_string()) {
    throw Error(ErrorCode::kMalformedLine,
                where + ": missing or non-string field \"" + key + "\"");
  }
  return j.at(key).get<std::string>();
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' ||
         (static_cast<unsigned char>(c) & 0x80) != 0;
}

char fold(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

// Findings shared by check_ontology (first one thrown) and lint_ontology.
std::vector<std::pair<ErrorCode, LintFinding>> structural_findings(const EventTypeDef& et) {
  std::vector<std::pair<ErrorCode, LintFinding>> out;
  const auto add = [&](ErrorCode code, std::string role, std::string message) {
    out.push_back({code, LintFinding{Severity::kError, std::string(error_code_name(code)),
                                     et.name, std::move(role), std::move(message)}});
  };
  std::set<std::string> roles;
  for (const auto& role : et.roles) {
    if (role.name.empty()) add(ErrorCode::kInvalidArgument, "", "role with empty name");
    if (!roles.insert(role.name).second) {
      add(ErrorCode::kDuplicateRole, role.name, "role \"" + role.name + "\" declared twice");
    }
    if (role.question.empty() || role.question.back() != '?') {
      add(ErrorCode::kInvalidQuestion, role.name,
          "question for role \"" + role.name + "\" must be nonempty and end with '?'");
    }
  }
  TemplateAst ast;
  try {
    ast = parse_template(et.template_source);
  } catch (const Error& e) {
    add(e.code(), "", e.what());
    return out;
  }
  for (const auto& slot : ast.slot_roles()) {
    if (!roles.contains(slot)) {
      add(ErrorCode::kTemplateRoleMismatch, slot,
          "template slot {" + slot + "} does not name a role of " + et.name);
    }
  }
  for (const auto& role : et.roles) {
    if (!ast.has_slot(role.name)) {
      add(ErrorCode::kTemplateRoleMismatch, role.name,
          "template of " + et.name + " has no slot for role \"" + role.name + "\"");
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> EventTypeDef::role_names() const {
  std::vector<std::string> names;
  names.reserve(roles.size());
  for (const auto& r : roles) names.push_back(r.name);
  return names;
}

const RoleDef* EventTypeDef::find_role(std::string_view role) const {
  auto it = std::find_if(roles.begin(), roles.end(),
                         [&](const RoleDef& r) { return r.name == role; });
  return it == roles.end() ? nullptr : &*it;
}

const EventTypeDef* Ontology::find(std::string_view event_type) const {
  auto it = std::find_if(event_types.begin(), event_types.end(),
                         [&](const EventTypeDef& e) { return e.name == event_type; });
  return it == event_types.end() ? nullptr : &*it;
}

void check_ontology(const Ontology& ontology) {
  std::set<std::string> names;
  for (const auto& et : ontology.event_types) {
    if (!names.insert(et.name).second) {
      throw Error(ErrorCode::kDuplicateEventType, "duplicate event type \"" + et.name + "\"");
    }
    auto findings = structural_findings(et);
    if (!findings.empty()) {
      throw Error(findings.front().first,
                  "event type " + et.name + ": " + findings.front().second.message);
    }
  }
}

Ontology ontology_from_json(const nlohmann::json& j) {
  Ontology ontology;
  ontology.ontology_id = get_string(j, "ontology_id", "ontology");
  if (!j.contains("event_types") || !j.at("event_types").is_array()) {
    throw Error(ErrorCode::kMalformedLine, "ontology: \"event_types\" must be a list");
  }
  for (const auto& ej : j.at("event_types")) {
    EventTypeDef et;
    et.name = get_string(ej, "name", "event type");
    et.template_source = get_string(ej, "template", "event type " + et.name);
    if (ej.contains("roles")) {
      for (const auto& rj : ej.at("roles")) {
        et.roles.push_back({get_string(rj, "name", "role of " + et.name),
                            get_string(rj, "question", "role of " + et.name)});
      }
    }
    ontology.event_types.push_back(std::move(et));
  }
  return ontology;
}

nlohmann::json to_json(const Ontology& ontology) {
  nlohmann::json j;
  j["ontology_id"] = ontology.ontology_id;
  j["event_types"] = nlohmann::json::array();
  for (const auto& et : ontology.event_types) {
    nlohmann::json ej;
    ej["name"] = et.name;
    ej["template"] = et.template_source;
    ej["roles"] = nlohmann::json::array();
    for (const auto& r : et.roles) ej["roles"].push_back({{"name", r.name}, {"question", r.question}});
    j["event_types"].push_back(std::move(ej));
  }
  return j;
}

Ontology read_ontology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open ontology file " + path.string());
  nlohmann::json j;
  const auto ext = path.extension().string();
  try {
    if (ext == ".yaml" || ext == ".yml") {
      j = yaml_to_json(YAML::Load(in));
    } else {
      j = nlohmann::json::parse(in);
    }
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kUnparseable, path.string() + ": " + e.what());
  }
  return ontology_from_json(j);
}

Ontology load_ontology(const std::filesystem::path& path) {
  Ontology ontology = read_ontology(path);
  check_ontology(ontology);
  return ontology;
}

void save_ontology(const Ontology& ontology, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write ontology file " + path.string());
  out << to_json(ontology).dump(2) << '\n';
}

bool contains_whole_word(std::string_view haystack, std::string_view needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < needle.size() && match; ++k) {
      match = fold(haystack[i + k]) == fold(needle[k]);
    }
    if (!match) continue;
    const bool left_ok = i == 0 || !is_word_char(haystack[i - 1]);
    const std::size_t end = i + needle.size();
    const bool right_ok = end == haystack.size() || !is_word_char(haystack[end]);
    if (left_ok && right_ok) return true;
  }
  return false;
}

std::vector<LintFinding> lint_ontology(const Ontology& ontology) {
  std::vector<LintFinding> findings;
  std::set<std::string> names;
  for (const auto& et : ontology.event_types) {
    if (!names.insert(et.name).second) {
      findings.push_back({Severity::kError, "duplicate_event_type", et.name, "",
                          "duplicate event type \"" + et.name + "\""});
    }
    for (auto& [code, finding] : structural_findings(et)) findings.push_back(std::move(finding));
    for (const auto& role : et.roles) {
      if (contains_whole_word(role.question, role.name)) {
        findings.push_back({Severity::kWarning, "role_name_in_question", et.name, role.name,
                            "question \"" + role.question + "\" mentions its role name \"" +
                                role.name + "\""});
      }
    }
  }
  return findings;
}

nlohmann::json to_json(const LintFinding& finding) {
  return {{"severity", finding.severity == Severity::kError ? "error" : "warning"},
          {"code", finding.code},
          {"event_type", finding.event_type},
          {"role", finding.role},
          {"message", finding.message}};
}

}  // namespace eae
