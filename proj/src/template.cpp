#include "eae/template.hpp"

#include <algorithm>
#include <set>

#include "eae/error.hpp"

namespace eae {
namespace {

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
  });
}

void append_literal(std::vector<TemplatePart>& parts, std::string text) {
  if (text.empty()) return;
  if (!parts.empty()) {
    if (auto* lit = std::get_if<Literal>(&parts.back())) {
      lit->text += text;
      return;
    }
  }
  parts.emplace_back(Literal{std::move(text)});
}

std::string escape_braces(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    out.push_back(c);
    if (c == '{' || c == '}') out.push_back(c);
  }
  return out;
}

}  // namespace

std::vector<std::string> TemplateAst::slot_roles() const {
  std::vector<std::string> roles;
  for (const auto& part : parts) {
    if (const auto* slot = std::get_if<Slot>(&part)) roles.push_back(slot->role);
  }
  return roles;
}

bool TemplateAst::has_slot(std::string_view role) const {
  return std::any_of(parts.begin(), parts.end(), [&](const TemplatePart& p) {
    const auto* slot = std::get_if<Slot>(&p);
    return slot != nullptr && slot->role == role;
  });
}

TemplateAst parse_template(std::string_view source) {
  TemplateAst ast;
  std::set<std::string, std::less<>> seen;
  std::string literal;
  for (std::size_t i = 0; i < source.size();) {
    const char c = source[i];
    if (c == '{' && i + 1 < source.size() && source[i + 1] == '{') {
      literal.push_back('{');
      i += 2;
      continue;
    }
    if (c == '}') {
      if (i + 1 < source.size() && source[i + 1] == '}') {
        literal.push_back('}');
        i += 2;
        continue;
      }
      throw Error(ErrorCode::kUnbalancedBrace,
                  "unmatched '}' at offset " + std::to_string(i) + " in template \"" +
                      std::string(source) + "\"");
    }
    if (c != '{') {
      literal.push_back(c);
      ++i;
      continue;
    }
    const std::size_t close = source.find_first_of("{}", i + 1);
    if (close == std::string_view::npos || source[close] != '}') {
      throw Error(ErrorCode::kUnbalancedBrace,
                  "unterminated slot at offset " + std::to_string(i) + " in template \"" +
                      std::string(source) + "\"");
    }
    std::string role(source.substr(i + 1, close - i - 1));
    if (is_blank(role)) {
      throw Error(ErrorCode::kEmptySlotName,
                  "empty slot name at offset " + std::to_string(i) + " in template \"" +
                      std::string(source) + "\"");
    }
    append_literal(ast.parts, std::move(literal));
    literal.clear();
    if (!ast.parts.empty() && std::holds_alternative<Slot>(ast.parts.back())) {
      throw Error(ErrorCode::kAdjacentSlots,
                  "slots {" + std::get<Slot>(ast.parts.back()).role + "} and {" + role +
                      "} are not separated by literal text");
    }
    if (!seen.insert(role).second) {
      throw Error(ErrorCode::kDuplicateSlot, "role {" + role + "} has more than one slot");
    }
    ast.parts.emplace_back(Slot{std::move(role)});
    i = close + 1;
  }
  append_literal(ast.parts, std::move(literal));
  return ast;
}

std::string to_source(const TemplateAst& ast) {
  std::string out;
  for (const auto& part : ast.parts) {
    if (const auto* lit = std::get_if<Literal>(&part)) {
      out += escape_braces(lit->text);
    } else {
      out += '{' + std::get<Slot>(part).role + '}';
    }
  }
  return out;
}

std::string render_unfilled(const TemplateAst& ast) {
  std::string out;
  for (const auto& part : ast.parts) {
    if (const auto* lit = std::get_if<Literal>(&part)) {
      out += lit->text;
    } else {
      out += std::get<Slot>(part).role;
    }
  }
  return out;
}

std::string render_filled(const TemplateAst& ast, const RoleFills& fills) {
  for (const auto& [role, args] : fills) {
    if (!ast.has_slot(role)) {
      throw Error(ErrorCode::kInvalidArgument, "fills name role {" + role +
                                                   "} which has no slot in template \"" +
                                                   to_source(ast) + "\"");
    }
  }
  std::string out;
  for (const auto& part : ast.parts) {
    if (const auto* lit = std::get_if<Literal>(&part)) {
      out += lit->text;
      continue;
    }
    const auto& role = std::get<Slot>(part).role;
    auto it = fills.find(role);
    if (it == fills.end() || it->second.empty()) {
      out += role;
      continue;
    }
    for (std::size_t k = 0; k < it->second.size(); ++k) {
      if (k > 0) out += kArgumentJoiner;
      out += it->second[k];
    }
  }
  return out;
}

FilledParse parse_filled(const TemplateAst& ast, std::string_view generated) {
  FilledParse result;
  const auto assign = [&](const std::string& role, std::string_view text) {
    auto& args = result.fills[role];
    if (text == role || text.empty()) return;
    std::size_t from = 0;
    while (true) {
      const std::size_t at = text.find(kArgumentJoiner, from);
      if (at == std::string_view::npos) {
        args.emplace_back(text.substr(from));
        break;
      }
      args.emplace_back(text.substr(from, at - from));
      from = at + kArgumentJoiner.size();
    }
    std::erase_if(args, [](const std::string& a) { return a.empty(); });
    if (args.size() > 1) result.multi_arg_roles.push_back(role);
  };

  std::size_t pos = 0;
  const std::string* pending_slot = nullptr;
  for (std::size_t p = 0; p < ast.parts.size(); ++p) {
    if (const auto* slot = std::get_if<Slot>(&ast.parts[p])) {
      pending_slot = &slot->role;
      continue;
    }
    const std::string& lit = std::get<Literal>(ast.parts[p]).text;
    const bool last = p + 1 == ast.parts.size();
    std::size_t at = std::string_view::npos;
    if (pending_slot == nullptr) {
      if (generated.substr(pos, lit.size()) == lit) at = pos;
    } else if (last) {
      if (generated.size() >= pos + lit.size() &&
          generated.substr(generated.size() - lit.size()) == lit) {
        at = generated.size() - lit.size();
      }
    } else {
      at = generated.find(lit, pos);
    }
    if (at == std::string_view::npos) {
      if (last && generated.find(lit, pos) != std::string_view::npos) {
        throw Error(ErrorCode::kTrailingText,
                    "generated text has trailing content after final literal \"" + lit + "\"");
      }
      throw Error(ErrorCode::kSkeletonMismatch,
                  "template literal \"" + lit + "\" not found in generated text");
    }
    if (pending_slot != nullptr) {
      assign(*pending_slot, generated.substr(pos, at - pos));
      pending_slot = nullptr;
    }
    pos = at + lit.size();
  }
  if (pending_slot != nullptr) {
    assign(*pending_slot, generated.substr(pos));
  } else if (pos != generated.size()) {
    throw Error(ErrorCode::kTrailingText, "generated text has trailing content after template");
  }
  return result;
}

std::string to_bracket_form(const TemplateAst& ast) {
  std::string out;
  for (const auto& part : ast.parts) {
    if (const auto* lit = std::get_if<Literal>(&part)) {
      out += lit->text;
    } else {
      out += '[' + std::get<Slot>(part).role + ']';
    }
  }
  return out;
}

std::string from_bracket_form(std::string_view bracketed) {
  std::string out;
  for (std::size_t i = 0; i < bracketed.size();) {
    if (bracketed[i] == '[') {
      const std::size_t close = bracketed.find_first_of("[]", i + 1);
      if (close != std::string_view::npos && bracketed[close] == ']' && close > i + 1) {
        out += '{';
        out += bracketed.substr(i + 1, close - i - 1);
        out += '}';
        i = close + 1;
        continue;
      }
    }
    const char c = bracketed[i++];
    out.push_back(c);
    if (c == '{' || c == '}') out.push_back(c);
  }
  return out;
}

std::vector<std::string> bracket_slots(std::string_view bracketed) {
  std::vector<std::string> slots;
  for (std::size_t i = 0; i < bracketed.size(); ++i) {
    if (bracketed[i] != '[') continue;
    const std::size_t close = bracketed.find_first_of("[]", i + 1);
    if (close != std::string_view::npos && bracketed[close] == ']' && close > i + 1) {
      slots.emplace_back(bracketed.substr(i + 1, close - i - 1));
      i = close;
    }
  }
  return slots;
}

}  // namespace eae
