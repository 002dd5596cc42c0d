#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eae/resources.hpp"
#include "json.hpp"

namespace eae {

// Offsets are Unicode scalar values; `end` is exclusive.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;
  bool operator==(const Span&) const = default;
};

struct ArgumentMention {
  std::string role;
  std::string text;
  std::optional<Span> span;  // absent for string-only annotations
  bool operator==(const ArgumentMention&) const = default;
};

struct EventInstance {
  std::string event_id;
  std::string event_type;
  Span trigger;
  std::vector<ArgumentMention> arguments;
  bool operator==(const EventInstance&) const = default;
};

enum class Split { kTrain, kDev, kTest };

std::string_view split_name(Split split);
std::optional<Split> parse_split(std::string_view name);

struct Document {
  std::string doc_id;
  std::string text;
  std::vector<EventInstance> events;
  Split split = Split::kTrain;

  const EventInstance* find_event(std::string_view event_id) const;
  bool operator==(const Document&) const = default;
};

struct Corpus {
  std::string dataset_id;
  std::string ontology_id;
  std::vector<Document> documents;

  const Document* find(std::string_view doc_id) const;
  Corpus filter(Split split) const;
  std::size_t argument_count() const;
  bool operator==(const Corpus&) const = default;
};

nlohmann::json to_json(const Document& doc);
// Throws Error naming the offending doc_id on schema or span violations.
Document document_from_json(const nlohmann::json& j);

// One canonical document per line. `dataset_id` defaults to the file stem.
Corpus load_corpus(const std::filesystem::path& path, std::string dataset_id = {},
                   std::string ontology_id = {});
Corpus read_corpus(std::istream& in, std::string dataset_id, std::string ontology_id = {});
// Keys are written sorted, so canonical files round-trip byte for byte.
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
void write_corpus(const Corpus& corpus, std::ostream& out);

struct Violation {
  std::string code;
  std::string doc_id;
  std::string event_id;
  std::string message;
};

nlohmann::json to_json(const Violation& v);

// Offset checks, text agreement and ontology membership. Never throws.
std::vector<Violation> validate_document(const Document& doc, const Ontology& ontology);
// Offset and text checks only.
std::vector<Violation> validate_spans(const Document& doc);

struct StatsReport {
  std::size_t documents = 0;
  std::size_t event_types = 0;
  std::size_t role_types = 0;  // identically named roles are counted once
  std::size_t events = 0;
  std::size_t arguments = 0;
  // True when some argument lies in a different sentence than its trigger
  // (sentences delimited by . ! ? followed by whitespace).
  bool doc_level = false;
};

StatsReport corpus_stats(const Corpus& corpus);
nlohmann::json to_json(const StatsReport& stats);

inline constexpr std::string_view kTriggerOpen = "<trigger>";
inline constexpr std::string_view kTriggerClose = "</trigger>";

// Maps offsets of a document onto the same document with trigger markers
// inserted. Positions inside the inserted markers have no original preimage.
class OffsetMap {
 public:
  OffsetMap() = default;
  OffsetMap(std::size_t trigger_start, std::size_t trigger_end, std::size_t open_len,
            std::size_t close_len)
      : start_(trigger_start), end_(trigger_end), open_(open_len), close_(close_len) {}

  // Character position (or inclusive start offset).
  std::size_t to_marked(std::size_t pos) const;
  // Exclusive end offset: an end at the trigger end stays before the close marker.
  std::size_t to_marked_end(std::size_t end) const;
  // Inverse on non-inserted positions.
  std::optional<std::size_t> to_original(std::size_t marked) const;
  // Inverse that snaps inserted positions to the nearest trigger boundary.
  std::size_t to_original_start(std::size_t marked) const;
  std::size_t to_original_end(std::size_t marked) const;

 private:
  std::size_t start_ = 0;
  std::size_t end_ = 0;
  std::size_t open_ = 0;
  std::size_t close_ = 0;
};

struct MarkedText {
  std::string text;
  OffsetMap offsets;
  // The document already contained a marker string; recorded, not fatal.
  bool marker_collision = false;
};

MarkedText mark_trigger(const Document& doc, const EventInstance& event,
                        std::string_view open_marker = kTriggerOpen,
                        std::string_view close_marker = kTriggerClose);

// Converts upstream dataset files into the canonical corpus. Licensed
// dataset parsers live outside this repository and plug in here.
class CorpusAdapter {
 public:
  virtual ~CorpusAdapter() = default;
  virtual std::string name() const = 0;
  virtual Corpus convert(const std::filesystem::path& input) const = 0;
};

// Reads and re-validates canonical JSONL.
class CanonicalAdapter final : public CorpusAdapter {
 public:
  std::string name() const override { return "canonical"; }
  Corpus convert(const std::filesystem::path& input) const override { return load_corpus(input); }
};

std::unique_ptr<CorpusAdapter> make_adapter(std::string_view name);

}  // namespace eae
