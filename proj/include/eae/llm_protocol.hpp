#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eae/corpus.hpp"
#include "eae/resources.hpp"
#include "json.hpp"

namespace eae {

// System prompt i is always paired with instruction set i.
struct PromptVariant {
  int index = 1;
  std::string_view system_text;
  std::string_view instruction_text;
};

// Throws Error(kUnknownVariant) outside {1, 2, 3}.
PromptVariant prompt_variant(int index);

struct ExtractionPrompt {
  std::string system;
  std::string user;
  std::vector<std::string> question_order;  // role names; q1 is the first
};

// Layout of the user message:
//
//   Instructions: <instruction set>
//   You must give your answers as JSON in the following format:
//   <answer-format block>
//
//   1. <question of role 1>
//   ...
//   N. <question of role N>
//
//   Input Passage: <document with <trigger></trigger> around the trigger>
//
//   Answers:
ExtractionPrompt build_extraction_prompt(const Document& doc, const EventInstance& event,
                                         const Ontology& ontology, const PromptVariant& variant);

struct GenerationParams {
  double top_p = 1.0;
  double temperature = 0.7;
  int max_new_tokens = 512;
};

// {"messages": [system, user], "top_p": ..., "temperature": ..., "max_new_tokens": ...}
nlohmann::json chat_payload(const ExtractionPrompt& prompt, const GenerationParams& params = {});

struct AnswerFlag {
  std::string code;  // not-in-document | missing-key | non-list-value | non-string-answer
  std::string detail;
  bool operator==(const AnswerFlag&) const = default;
};

struct AnswerSheet {
  std::map<std::string, std::vector<std::string>> answers;  // one key per prompted role
  std::map<std::string, std::vector<AnswerFlag>> flags;
  std::vector<AnswerFlag> sheet_flags;  // parse-fallback | extra-key

  bool has_flag(std::string_view code) const;
};

// First well-formed JSON value of the requested kind ('{' or '[') embedded in
// free text, e.g. inside prose or a fenced code block.
std::optional<nlohmann::json> extract_first_json(std::string_view raw, char opener = '{');

// Never throws on model output: unrecoverable replies give an all-empty sheet
// flagged parse-fallback.
AnswerSheet parse_answer_sheet(std::string_view raw, std::span<const std::string> roles,
                               const Document& doc);

std::string serialize_answer_sheet(const AnswerSheet& sheet, std::span<const std::string> roles);
nlohmann::json to_json(const AnswerSheet& sheet);

enum class ParaphraseKind { kQuestion, kTemplate };

std::optional<ParaphraseKind> parse_paraphrase_kind(std::string_view name);

// Template sources are shown in bracket form ("[Role]").
std::string build_paraphrase_prompt(ParaphraseKind kind, std::string_view source);

inline constexpr std::size_t kParaphraseCount = 5;

// Exactly five paraphrases; template paraphrases must keep the original
// bracketed slot multiset and come back as DSL templates. Throws
// Error(kUnparseable / kCountMismatch / kSlotMismatch).
std::vector<std::string> parse_paraphrases(std::string_view raw, std::string_view original,
                                           ParaphraseKind kind);

}  // namespace eae
