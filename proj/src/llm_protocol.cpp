#include "eae/llm_protocol.hpp"

#include <algorithm>

#include "eae/error.hpp"

namespace eae {
namespace {

constexpr std::string_view kSystemPrompts[] = {
    "You are the world champion of extractive question answering.",
    "You are an expert at question answering from text.",
    "You are the best in the world at reading comprehension.",
};

constexpr std::string_view kInstructions[] = {
    "I will give you an input passage containing an event trigger demarcated with "
    "“<trigger></trigger>” HTML tags. I will also give you a set of questions about "
    "the event denoted by that trigger. Your task is to answer each question with a list of "
    "contiguous spans extracted from the input passage. Answers may contain zero, one, or "
    "multiple spans. The list should be empty if no answer can be found.",
    "I will show you a document that contains an event trigger that is highlighted with "
    "“<trigger></trigger>” HTML tags. After the document, I will list out a set of "
    "questions about the event referred to by the highlighted trigger. Please answer each "
    "question with a list of zero or more contiguous spans extracted from the input passage. "
    "Spans MUST appear in the document. Some questions may not have answers, in which case "
    "the answer should be an empty list.",
    "I will give you a passage of text featuring a phrase that refers to some event and that "
    "is highlighted with '<trigger></trigger>' HTML tags. I will additionally provide you with "
    "a list of questions about the event referred to by the highlighted phrase. You must "
    "answer each question with a list of zero, one, or multiple contiguous spans that appear "
    "in the input passage. Some questions do not have any answer in the input passage. For "
    "these cases, your answer should be an empty list.",
};

constexpr std::string_view kAnswerFormat =
    "You must give your answers as JSON in the following format:\n"
    "{\n"
    "  \"q1\": [ ... ],\n"
    "  ...,\n"
    "  \"qN\": [ ... ]\n"
    "}\n";

constexpr std::string_view kTemplateParaphraseInstructions =
    "Instructions: Please generate five paraphrases of the following template, but you "
    "ABSOLUTELY CANNOT change any words that are in between brackets ([]). Your paraphrases "
    "MUST be formatted as a JSON list of strings.";

constexpr std::string_view kQuestionParaphraseInstructions =
    "Instructions: Please generate five paraphrases of the following question. Your answer "
    "MUST be formatted as a JSON list of strings.";

// End of the balanced JSON value starting at `begin`, string-aware.
std::size_t balanced_end(std::string_view text, std::size_t begin) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = begin; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{' || c == '[') ++depth;
    else if (c == '}' || c == ']') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

PromptVariant prompt_variant(int index) {
  if (index < 1 || index > 3) {
    throw Error(ErrorCode::kUnknownVariant,
                "prompt variant " + std::to_string(index) + " not in {1, 2, 3}");
  }
  return {index, kSystemPrompts[index - 1], kInstructions[index - 1]};
}

ExtractionPrompt build_extraction_prompt(const Document& doc, const EventInstance& event,
                                         const Ontology& ontology, const PromptVariant& variant) {
  const auto checked = prompt_variant(variant.index);
  const auto* et = ontology.find(event.event_type);
  if (et == nullptr) {
    throw Error(ErrorCode::kNotFound, "event type \"" + event.event_type + "\" not in ontology");
  }
  ExtractionPrompt prompt;
  prompt.system = std::string(checked.system_text);
  std::string& u = prompt.user;
  u += "Instructions: ";
  u += checked.instruction_text;
  u += '\n';
  u += kAnswerFormat;
  u += '\n';
  for (std::size_t i = 0; i < et->roles.size(); ++i) {
    u += std::to_string(i + 1) + ". " + et->roles[i].question + '\n';
    prompt.question_order.push_back(et->roles[i].name);
  }
  u += "\nInput Passage: ";
  u += mark_trigger(doc, event).text;
  u += "\n\nAnswers:";
  return prompt;
}

nlohmann::json chat_payload(const ExtractionPrompt& prompt, const GenerationParams& params) {
  return {{"messages",
           nlohmann::json::array({{{"role", "system"}, {"content", prompt.system}},
                                  {{"role", "user"}, {"content", prompt.user}}})},
          {"top_p", params.top_p},
          {"temperature", params.temperature},
          {"max_new_tokens", params.max_new_tokens}};
}

bool AnswerSheet::has_flag(std::string_view code) const {
  const auto match = [&](const AnswerFlag& f) { return f.code == code; };
  if (std::any_of(sheet_flags.begin(), sheet_flags.end(), match)) return true;
  return std::any_of(flags.begin(), flags.end(), [&](const auto& kv) {
    return std::any_of(kv.second.begin(), kv.second.end(), match);
  });
}

std::optional<nlohmann::json> extract_first_json(std::string_view raw, char opener) {
  for (std::size_t pos = raw.find(opener); pos != std::string_view::npos;
       pos = raw.find(opener, pos + 1)) {
    const std::size_t end = balanced_end(raw, pos);
    if (end == std::string_view::npos) continue;
    auto parsed = nlohmann::json::parse(raw.substr(pos, end - pos), nullptr, false);
    if (parsed.is_discarded()) continue;
    if ((opener == '{' && parsed.is_object()) || (opener == '[' && parsed.is_array())) {
      return parsed;
    }
  }
  return std::nullopt;
}

AnswerSheet parse_answer_sheet(std::string_view raw, std::span<const std::string> roles,
                               const Document& doc) {
  AnswerSheet sheet;
  for (const auto& role : roles) sheet.answers[role];
  const auto obj = extract_first_json(raw, '{');
  if (!obj) {
    sheet.sheet_flags.push_back({"parse-fallback", "no JSON object in reply"});
    return sheet;
  }
  for (std::size_t i = 0; i < roles.size(); ++i) {
    const std::string key = "q" + std::to_string(i + 1);
    const auto& role = roles[i];
    auto it = obj->find(key);
    if (it == obj->end()) {
      sheet.flags[role].push_back({"missing-key", key});
      continue;
    }
    nlohmann::json values = *it;
    if (values.is_string()) {
      sheet.flags[role].push_back({"non-list-value", key});
      values = nlohmann::json::array({values});
    } else if (values.is_null()) {
      values = nlohmann::json::array();
    } else if (!values.is_array()) {
      sheet.flags[role].push_back({"non-list-value", key});
      continue;
    }
    for (const auto& v : values) {
      if (!v.is_string()) {
        sheet.flags[role].push_back({"non-string-answer", v.dump()});
        continue;
      }
      auto answer = v.get<std::string>();
      if (doc.text.find(answer) == std::string::npos) {
        sheet.flags[role].push_back({"not-in-document", answer});
      }
      sheet.answers[role].push_back(std::move(answer));
    }
  }
  for (auto it = obj->begin(); it != obj->end(); ++it) {
    const auto& key = it.key();
    bool known = false;
    if (key.size() > 1 && key.size() < 12 && key[0] == 'q' &&
        key.find_first_not_of("0123456789", 1) == std::string::npos) {
      const auto n = std::stoull(key.substr(1));
      known = n >= 1 && n <= roles.size() && key == "q" + std::to_string(n);
    }
    if (!known) sheet.sheet_flags.push_back({"extra-key", key});
  }
  return sheet;
}

std::string serialize_answer_sheet(const AnswerSheet& sheet, std::span<const std::string> roles) {
  // Keys in question order, not lexicographic ("q10" after "q9").
  std::string out = "{";
  for (std::size_t i = 0; i < roles.size(); ++i) {
    if (i > 0) out += ", ";
    auto it = sheet.answers.find(roles[i]);
    const auto values = it == sheet.answers.end() ? nlohmann::json::array()
                                                  : nlohmann::json(it->second);
    out += "\"q" + std::to_string(i + 1) + "\": " + values.dump();
  }
  out += "}";
  return out;
}

nlohmann::json to_json(const AnswerSheet& sheet) {
  nlohmann::json flags = nlohmann::json::object();
  for (const auto& [role, fs] : sheet.flags) {
    for (const auto& f : fs) flags[role].push_back({{"code", f.code}, {"detail", f.detail}});
  }
  nlohmann::json sheet_flags = nlohmann::json::array();
  for (const auto& f : sheet.sheet_flags) {
    sheet_flags.push_back({{"code", f.code}, {"detail", f.detail}});
  }
  return {{"answers", sheet.answers}, {"flags", flags}, {"sheet_flags", sheet_flags}};
}

std::optional<ParaphraseKind> parse_paraphrase_kind(std::string_view name) {
  if (name == "question") return ParaphraseKind::kQuestion;
  if (name == "template") return ParaphraseKind::kTemplate;
  return std::nullopt;
}

std::string build_paraphrase_prompt(ParaphraseKind kind, std::string_view source) {
  std::string out;
  if (kind == ParaphraseKind::kTemplate) {
    const auto ast = parse_template(source);
    out += kTemplateParaphraseInstructions;
    out += "\n\nTemplate: ";
    out += to_bracket_form(ast);
  } else {
    out += kQuestionParaphraseInstructions;
    out += "\n\nQuestion: ";
    out += source;
  }
  out += "\n\nParaphrases:";
  return out;
}

std::vector<std::string> parse_paraphrases(std::string_view raw, std::string_view original,
                                           ParaphraseKind kind) {
  const auto list = extract_first_json(raw, '[');
  if (!list) throw Error(ErrorCode::kUnparseable, "no JSON list in paraphrase reply");
  std::vector<std::string> out;
  for (const auto& item : *list) {
    if (!item.is_string()) {
      throw Error(ErrorCode::kUnparseable, "paraphrase list holds a non-string: " + item.dump());
    }
    out.push_back(item.get<std::string>());
  }
  if (out.size() != kParaphraseCount) {
    throw Error(ErrorCode::kCountMismatch, "expected " + std::to_string(kParaphraseCount) +
                                               " paraphrases, got " + std::to_string(out.size()));
  }
  if (kind == ParaphraseKind::kQuestion) return out;

  const auto expected = sorted(parse_template(original).slot_roles());
  for (auto& p : out) {
    const auto got = sorted(bracket_slots(p));
    if (got != expected) {
      std::string missing;
      for (const auto& slot : expected) {
        if (std::count(got.begin(), got.end(), slot) != std::count(expected.begin(), expected.end(), slot)) {
          missing = slot;
          break;
        }
      }
      if (missing.empty()) {
        for (const auto& slot : got) {
          if (std::count(expected.begin(), expected.end(), slot) == 0) {
            missing = slot;
            break;
          }
        }
      }
      throw Error(ErrorCode::kSlotMismatch,
                  "paraphrase \"" + p + "\" changes slot [" + missing + "]");
    }
    p = from_bracket_form(p);
    parse_template(p);
  }
  return out;
}

}  // namespace eae
