#include "eae/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "eae/error.hpp"
#include "eae/utf8.hpp"

namespace eae {
namespace {

using nlohmann::json;

std::string span_label(const Span& s) {
  return "[" + std::to_string(s.start) + ", " + std::to_string(s.end) + ")";
}

std::size_t read_offset(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number_integer() ||
      j.at(key).get<long long>() < 0) {
    throw Error(ErrorCode::kMalformedLine,
                where + ": field \"" + key + "\" must be a nonnegative integer");
  }
  return j.at(key).get<std::size_t>();
}

std::string read_string(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_string()) {
    throw Error(ErrorCode::kMalformedLine, where + ": missing or non-string field \"" + key + "\"");
  }
  return j.at(key).get<std::string>();
}

// Appends a violation when `span` is out of bounds or disagrees with the text.
void check_span(const Span& span, const utf8::Index& index, const std::string& doc_id,
                const std::string& event_id, const std::string& what,
                std::vector<Violation>& out) {
  if (span.start >= span.end || span.end > index.size()) {
    out.push_back({"span_out_of_bounds", doc_id, event_id,
                   what + " span " + span_label(span) + " outside document of length " +
                       std::to_string(index.size())});
    return;
  }
  if (index.slice(span.start, span.end) != span.text) {
    out.push_back({"span_text_mismatch", doc_id, event_id,
                   what + " span " + span_label(span) + " text \"" + span.text +
                       "\" differs from document slice \"" +
                       std::string(index.slice(span.start, span.end)) + "\""});
  }
}

bool is_sentence_break(std::string_view text, std::size_t byte) {
  const char c = text[byte];
  return (c == '.' || c == '!' || c == '?') && byte + 1 < text.size() &&
         (text[byte + 1] == ' ' || text[byte + 1] == '\n' || text[byte + 1] == '\t');
}

}  // namespace

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "train";
}

std::optional<Split> parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  return std::nullopt;
}

const EventInstance* Document::find_event(std::string_view event_id) const {
  auto it = std::find_if(events.begin(), events.end(),
                         [&](const EventInstance& e) { return e.event_id == event_id; });
  return it == events.end() ? nullptr : &*it;
}

const Document* Corpus::find(std::string_view doc_id) const {
  auto it = std::find_if(documents.begin(), documents.end(),
                         [&](const Document& d) { return d.doc_id == doc_id; });
  return it == documents.end() ? nullptr : &*it;
}

Corpus Corpus::filter(Split split) const {
  Corpus out{dataset_id, ontology_id, {}};
  std::copy_if(documents.begin(), documents.end(), std::back_inserter(out.documents),
               [&](const Document& d) { return d.split == split; });
  return out;
}

std::size_t Corpus::argument_count() const {
  std::size_t n = 0;
  for (const auto& d : documents)
    for (const auto& e : d.events) n += e.arguments.size();
  return n;
}

json to_json(const Document& doc) {
  json events = json::array();
  for (const auto& e : doc.events) {
    json args = json::array();
    for (const auto& a : e.arguments) {
      json aj{{"role", a.role}, {"text", a.text}};
      if (a.span) {
        aj["start"] = a.span->start;
        aj["end"] = a.span->end;
      }
      args.push_back(std::move(aj));
    }
    events.push_back({{"event_id", e.event_id},
                      {"event_type", e.event_type},
                      {"trigger",
                       {{"start", e.trigger.start}, {"end", e.trigger.end}, {"text", e.trigger.text}}},
                      {"arguments", std::move(args)}});
  }
  return {{"doc_id", doc.doc_id},
          {"text", doc.text},
          {"split", split_name(doc.split)},
          {"events", std::move(events)}};
}

Document document_from_json(const json& j) {
  Document doc;
  doc.doc_id = read_string(j, "doc_id", "document");
  const std::string where = "document " + doc.doc_id;
  doc.text = read_string(j, "text", where);
  const std::string split = read_string(j, "split", where);
  auto parsed = parse_split(split);
  if (!parsed) throw Error(ErrorCode::kUnknownSplit, where + ": unknown split \"" + split + "\"");
  doc.split = *parsed;
  if (j.contains("events")) {
    if (!j.at("events").is_array()) {
      throw Error(ErrorCode::kMalformedLine, where + ": \"events\" must be a list");
    }
    for (const auto& ej : j.at("events")) {
      EventInstance e;
      e.event_id = read_string(ej, "event_id", where);
      const std::string ewhere = where + " event " + e.event_id;
      e.event_type = read_string(ej, "event_type", ewhere);
      if (!ej.contains("trigger")) {
        throw Error(ErrorCode::kMalformedLine, ewhere + ": missing trigger");
      }
      const auto& tj = ej.at("trigger");
      e.trigger = {read_offset(tj, "start", ewhere), read_offset(tj, "end", ewhere),
                   read_string(tj, "text", ewhere)};
      if (ej.contains("arguments")) {
        for (const auto& aj : ej.at("arguments")) {
          ArgumentMention arg{read_string(aj, "role", ewhere), read_string(aj, "text", ewhere),
                              std::nullopt};
          const bool has_start = aj.contains("start") && !aj.at("start").is_null();
          const bool has_end = aj.contains("end") && !aj.at("end").is_null();
          if (has_start != has_end) {
            throw Error(ErrorCode::kMalformedLine,
                        ewhere + ": argument offsets need both start and end");
          }
          if (has_start) {
            arg.span = Span{read_offset(aj, "start", ewhere), read_offset(aj, "end", ewhere),
                            arg.text};
          }
          e.arguments.push_back(std::move(arg));
        }
      }
      doc.events.push_back(std::move(e));
    }
  }
  auto violations = validate_spans(doc);
  if (!violations.empty()) {
    const auto& v = violations.front();
    const auto code = v.code == "span_out_of_bounds"   ? ErrorCode::kSpanOutOfBounds
                      : v.code == "span_text_mismatch" ? ErrorCode::kSpanTextMismatch
                      : v.code == "duplicate_id"       ? ErrorCode::kDuplicateId
                                                       : ErrorCode::kMalformedLine;
    throw Error(code, "document " + v.doc_id +
                          (v.event_id.empty() ? "" : " event " + v.event_id) + ": " + v.message);
  }
  return doc;
}

Corpus read_corpus(std::istream& in, std::string dataset_id, std::string ontology_id) {
  Corpus corpus{std::move(dataset_id), std::move(ontology_id), {}};
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kMalformedLine,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
    Document doc;
    try {
      doc = document_from_json(j);
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedLine, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!ids.insert(doc.doc_id).second) {
      throw Error(ErrorCode::kDuplicateId, "line " + std::to_string(line_no) +
                                               ": duplicate doc_id \"" + doc.doc_id + "\"");
    }
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, std::string dataset_id,
                   std::string ontology_id) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open corpus file " + path.string());
  if (dataset_id.empty()) dataset_id = path.stem().string();
  return read_corpus(in, std::move(dataset_id), std::move(ontology_id));
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& doc : corpus.documents) out << to_json(doc).dump() << '\n';
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write corpus file " + path.string());
  write_corpus(corpus, out);
}

json to_json(const Violation& v) {
  return {{"code", v.code}, {"doc_id", v.doc_id}, {"event_id", v.event_id}, {"message", v.message}};
}

std::vector<Violation> validate_spans(const Document& doc) {
  std::vector<Violation> out;
  std::optional<utf8::Index> index;
  try {
    index.emplace(doc.text);
  } catch (const Error& e) {
    out.push_back({"invalid_utf8", doc.doc_id, "", e.what()});
    return out;
  }
  std::set<std::string> event_ids;
  for (const auto& e : doc.events) {
    if (!event_ids.insert(e.event_id).second) {
      out.push_back({"duplicate_id", doc.doc_id, e.event_id, "duplicate event_id"});
    }
    check_span(e.trigger, *index, doc.doc_id, e.event_id, "trigger", out);
    for (const auto& a : e.arguments) {
      if (a.role.empty()) out.push_back({"empty_role", doc.doc_id, e.event_id, "argument with empty role"});
      if (a.text.empty()) {
        out.push_back({"empty_text", doc.doc_id, e.event_id,
                       "argument of role \"" + a.role + "\" has empty text"});
      }
      if (!a.span) continue;
      if (a.span->text != a.text) {
        out.push_back({"span_text_mismatch", doc.doc_id, e.event_id,
                       "argument text \"" + a.text + "\" differs from its span text"});
      }
      check_span(*a.span, *index, doc.doc_id, e.event_id, "argument \"" + a.role + "\"", out);
    }
  }
  return out;
}

std::vector<Violation> validate_document(const Document& doc, const Ontology& ontology) {
  auto out = validate_spans(doc);
  for (const auto& e : doc.events) {
    const auto* et = ontology.find(e.event_type);
    if (et == nullptr) {
      out.push_back({"unknown_event_type", doc.doc_id, e.event_id,
                     "event type \"" + e.event_type + "\" not in ontology " + ontology.ontology_id});
      continue;
    }
    for (const auto& a : e.arguments) {
      if (et->find_role(a.role) == nullptr) {
        out.push_back({"unknown_role", doc.doc_id, e.event_id,
                       "role \"" + a.role + "\" not defined for " + e.event_type});
      }
    }
  }
  return out;
}

StatsReport corpus_stats(const Corpus& corpus) {
  StatsReport stats;
  std::set<std::string> types;
  std::set<std::string> roles;
  for (const auto& doc : corpus.documents) {
    ++stats.documents;
    const utf8::Index index(doc.text);
    // Byte positions that end a sentence.
    std::vector<std::size_t> breaks;
    for (std::size_t b = 0; b < doc.text.size(); ++b)
      if (is_sentence_break(doc.text, b)) breaks.push_back(index.cp_offset(b));
    const auto sentence_of = [&](std::size_t cp) {
      return std::lower_bound(breaks.begin(), breaks.end(), cp) - breaks.begin();
    };
    for (const auto& e : doc.events) {
      ++stats.events;
      types.insert(e.event_type);
      for (const auto& a : e.arguments) {
        ++stats.arguments;
        roles.insert(a.role);
        if (a.span && sentence_of(a.span->start) != sentence_of(e.trigger.start)) {
          stats.doc_level = true;
        }
      }
    }
  }
  stats.event_types = types.size();
  stats.role_types = roles.size();
  return stats;
}

json to_json(const StatsReport& s) {
  return {{"documents", s.documents}, {"event_types", s.event_types},
          {"role_types", s.role_types}, {"events", s.events},
          {"arguments", s.arguments},   {"doc_level", s.doc_level}};
}

std::size_t OffsetMap::to_marked(std::size_t pos) const {
  if (pos < start_) return pos;
  if (pos < end_) return pos + open_;
  return pos + open_ + close_;
}

std::size_t OffsetMap::to_marked_end(std::size_t end) const {
  if (end <= start_) return end;
  if (end <= end_) return end + open_;
  return end + open_ + close_;
}

std::optional<std::size_t> OffsetMap::to_original(std::size_t marked) const {
  if (marked < start_) return marked;
  if (marked < start_ + open_) return std::nullopt;
  if (marked < end_ + open_) return marked - open_;
  if (marked < end_ + open_ + close_) return std::nullopt;
  return marked - open_ - close_;
}

std::size_t OffsetMap::to_original_start(std::size_t marked) const {
  if (auto p = to_original(marked)) return *p;
  return marked < start_ + open_ ? start_ : end_;
}

std::size_t OffsetMap::to_original_end(std::size_t marked) const {
  if (marked <= start_) return marked;
  if (marked <= start_ + open_) return start_;
  if (marked <= end_ + open_) return marked - open_;
  if (marked <= end_ + open_ + close_) return end_;
  return marked - open_ - close_;
}

MarkedText mark_trigger(const Document& doc, const EventInstance& event,
                        std::string_view open_marker, std::string_view close_marker) {
  const utf8::Index index(doc.text);
  const Span& t = event.trigger;
  if (t.start >= t.end || t.end > index.size()) {
    throw Error(ErrorCode::kSpanOutOfBounds, "document " + doc.doc_id + " event " +
                                                 event.event_id + ": trigger span " +
                                                 span_label(t) + " out of bounds");
  }
  MarkedText out;
  const std::size_t a = index.byte_offset(t.start);
  const std::size_t b = index.byte_offset(t.end);
  out.text.reserve(doc.text.size() + open_marker.size() + close_marker.size());
  out.text.append(doc.text, 0, a);
  out.text.append(open_marker);
  out.text.append(doc.text, a, b - a);
  out.text.append(close_marker);
  out.text.append(doc.text, b, std::string::npos);
  out.offsets = OffsetMap(t.start, t.end, utf8::length(open_marker), utf8::length(close_marker));
  out.marker_collision =
      (!open_marker.empty() && doc.text.find(open_marker) != std::string::npos) ||
      (!close_marker.empty() && doc.text.find(close_marker) != std::string::npos);
  return out;
}

std::unique_ptr<CorpusAdapter> make_adapter(std::string_view name) {
  if (name == "canonical") return std::make_unique<CanonicalAdapter>();
  throw Error(ErrorCode::kNotFound, "no corpus adapter named \"" + std::string(name) + "\"");
}

}  // namespace eae
