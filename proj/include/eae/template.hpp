#pragma once

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

// Template DSL: "{Role Name}" marks a slot, "{{" and "}}" are literal braces,
// everything else is literal text. Two slots must be separated by a nonempty
// literal and a role may own at most one slot.
namespace eae {

struct Literal {
  std::string text;
  bool operator==(const Literal&) const = default;
};

struct Slot {
  std::string role;
  bool operator==(const Slot&) const = default;
};

using TemplatePart = std::variant<Literal, Slot>;

struct TemplateAst {
  std::vector<TemplatePart> parts;

  // Slot roles in template order.
  std::vector<std::string> slot_roles() const;
  bool has_slot(std::string_view role) const;
  bool operator==(const TemplateAst&) const = default;
};

// Role name -> ordered argument strings. An empty list means an empty slot.
using RoleFills = std::map<std::string, std::vector<std::string>>;

TemplateAst parse_template(std::string_view source);

// Inverse of parse_template: escapes braces in literals.
std::string to_source(const TemplateAst& ast);

// Prompt form: every slot shows its bare role name.
std::string render_unfilled(const TemplateAst& ast);

// Gold target form. Multiple arguments are coordinated with " and "; an empty
// or absent slot renders as its role name. Throws on keys that are not slots.
std::string render_filled(const TemplateAst& ast, const RoleFills& fills);

inline constexpr std::string_view kArgumentJoiner = " and ";

struct FilledParse {
  RoleFills fills;  // one key per slot role
  // Slots whose text was split on " and "; such splits may be false
  // ("Bonnie and Clyde"), so callers can surface them.
  std::vector<std::string> multi_arg_roles;
};

// Recovers role fills from generated text by locating the template literals.
// A leading literal must be a prefix and a trailing literal a suffix; inner
// literals match at their first occurrence after the previous match.
// Throws Error(kSkeletonMismatch) or Error(kTrailingText).
FilledParse parse_filled(const TemplateAst& ast, std::string_view generated);

// "{Role}" <-> "[Role]" conversion used by the paraphrase prompts.
std::string to_bracket_form(const TemplateAst& ast);
std::string from_bracket_form(std::string_view bracketed);
std::vector<std::string> bracket_slots(std::string_view bracketed);

}  // namespace eae
