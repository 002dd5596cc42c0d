#include "eae/synthetic.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "eae/error.hpp"
#include "eae/utf8.hpp"

namespace eae {
namespace {

constexpr const char* kFirstNames[] = {
    "Alden", "Brienne", "Corwin", "Dalia", "Emrys", "Farrah", "Galen", "Hesper",
    "Iona",  "Jory",    "Kestrel", "Liora", "Milo", "Nadia", "Orrin", "Zoë",
    "Perrin", "Quilla", "Rowan", "Søren", "Talia", "Ulric", "Vesna", "Wren"};
constexpr const char* kLastNames[] = {
    "Ashdown", "Blackwood", "Caldera", "Dunmore", "Everly",  "Fairbanks", "Grimsby",
    "Holloway", "Ivers",   "Jessop",  "Kettering", "Lomax", "Marchetti", "Northcott",
    "Okafor",  "Pemberton", "Quayle", "Ravensworth", "Sallow", "Thorne", "Ulverston"};
constexpr const char* kPlaces[] = {
    "Northgate Depot", "the Silver Harbor", "Kessel Ridge", "the old mill", "Port Ambrel",
    "Lake Voss", "the eastern checkpoint", "São Brito", "the river crossing", "Caerwyn",
    "the Brass Quarter", "Hollow Fen", "Mount Ilse", "the rail yard", "Dunmere Square"};
constexpr const char* kThings[] = {
    "the grain shipment", "three trucks", "a crate of rifles", "medical supplies",
    "the stolen ledger", "two tonnes of copper", "the relief convoy", "a sealed archive",
    "forty barrels of fuel", "the prototype engine", "rare manuscripts"};
constexpr const char* kGroups[] = {
    "the Vane Militia", "the harbor police", "the Crescent Brigade", "local guards",
    "the federal marshals", "the Oriel Company", "border units", "the night watch"};
constexpr const char* kFiller[] = {
    "The region has seen unrest for months.",
    "Witnesses gave conflicting accounts.",
    "Officials declined to comment further.",
    "The weather was unusually cold that week.",
    "Local papers covered the story extensively.",
    "Several residents described a tense atmosphere."};

enum class Pool { kPerson, kPlace, kThing, kGroup };

struct RoleSpec {
  const char* name;
  const char* question;
  Pool pool;
};

struct TypeSpec {
  const char* name;
  const char* templ;
  std::vector<const char*> triggers;
  std::vector<RoleSpec> roles;
};

const std::vector<TypeSpec>& type_specs() {
  static const std::vector<TypeSpec> specs = {
      {"Conflict.Attack",
       "{Attacker} attacked {Target} using {Instrument} at {Place}",
       {"attacked", "struck", "assaulted"},
       {{"Attacker", "Who attacked someone?", Pool::kGroup},
        {"Target", "Who or what was attacked?", Pool::kPerson},
        {"Instrument", "What was used in the assault?", Pool::kThing},
        {"Place", "Where did the assault happen?", Pool::kPlace}}},
      {"Movement.Transport",
       "{Agent} moved {Artifact} from {Origin} to {Destination}",
       {"moved", "shipped", "transported"},
       {{"Agent", "Who moved something?", Pool::kGroup},
        {"Artifact", "What was moved?", Pool::kThing},
        {"Origin", "Where did it start out?", Pool::kPlace},
        {"Destination", "Where did it end up?", Pool::kPlace}}},
      {"Contact.Meet",
       "{Participant} met at {Place}",
       {"met", "convened", "gathered"},
       {{"Participant", "Who met with someone?", Pool::kPerson},
        {"Place", "Where did the meeting happen?", Pool::kPlace}}},
      {"Justice.Arrest",
       "{Authority} arrested {Detainee} in {Place of Arrest}",
       {"arrested", "detained", "apprehended"},
       {{"Authority", "Who took someone into custody?", Pool::kGroup},
        {"Detainee", "Who was taken into custody?", Pool::kPerson},
        {"Place of Arrest", "Where was someone taken into custody?", Pool::kPlace}}},
      {"Transaction.Transfer",
       "{Giver} gave {Recipient} {Goods}",
       {"gave", "handed", "delivered"},
       {{"Giver", "Who handed something over?", Pool::kPerson},
        {"Recipient", "Who received something?", Pool::kPerson},
        {"Goods", "What changed hands?", Pool::kThing}}},
      {"Life.Die",
       "{Victim} died in {Place} because of {Killer}",
       {"died", "perished", "was killed"},
       {{"Victim", "Who lost their life?", Pool::kPerson},
        {"Place", "Where did the death occur?", Pool::kPlace},
        {"Killer", "Who or what caused the death?", Pool::kGroup}}},
  };
  return specs;
}

template <typename T, std::size_t N>
const char* pick(const T (&arr)[N], std::mt19937_64& rng) {
  return arr[std::uniform_int_distribution<std::size_t>(0, N - 1)(rng)];
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::string draw(Pool pool, std::mt19937_64& rng) {
  switch (pool) {
    case Pool::kPerson: return std::string(pick(kFirstNames, rng)) + " " + pick(kLastNames, rng);
    case Pool::kPlace: return pick(kPlaces, rng);
    case Pool::kThing: return pick(kThings, rng);
    case Pool::kGroup: return pick(kGroups, rng);
  }
  return {};
}

bool round_trip_safe(const std::string& arg, const TemplateAst& ast,
                     const std::vector<std::string>& roles) {
  if (arg.find(" and ") != std::string::npos) return false;
  if (std::find(roles.begin(), roles.end(), arg) != roles.end()) return false;
  for (const auto& part : ast.parts) {
    if (const auto* lit = std::get_if<Literal>(&part)) {
      if (arg.find(lit->text) != std::string::npos) return false;
    }
  }
  return true;
}

// Builds document text while recording scalar offsets of inserted pieces.
class TextBuilder {
 public:
  Span append(const std::string& piece) {
    const std::size_t start = length_;
    text_ += piece;
    length_ += utf8::length(piece);
    return Span{start, length_, piece};
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
  std::size_t length_ = 0;
};

}  // namespace

Ontology synthetic_ontology() {
  Ontology ontology;
  ontology.ontology_id = "synthetic";
  for (const auto& spec : type_specs()) {
    EventTypeDef et{spec.name, spec.templ, {}};
    for (const auto& r : spec.roles) et.roles.push_back({r.name, r.question});
    ontology.event_types.push_back(std::move(et));
  }
  return ontology;
}

SyntheticDataset generate_synthetic(const SyntheticOptions& options) {
  if (options.max_args_per_role < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_args_per_role must be >= 1");
  }
  SyntheticDataset out;
  out.ontology = synthetic_ontology();
  out.corpus.dataset_id = options.dataset_id;
  out.corpus.ontology_id = out.ontology.ontology_id;
  std::mt19937_64 rng(options.seed);
  const auto& specs = type_specs();

  for (std::size_t d = 0; d < options.documents; ++d) {
    Document doc;
    doc.doc_id = options.dataset_id + "-" + std::to_string(d);
    const double split_draw = unit(rng);
    doc.split = split_draw < 0.8 ? Split::kTrain : split_draw < 0.9 ? Split::kDev : Split::kTest;
    TextBuilder text;
    text.append(pick(kFiller, rng));
    const std::size_t n_events =
        std::uniform_int_distribution<std::size_t>(1, std::max<std::size_t>(1, options.max_events_per_doc))(rng);
    for (std::size_t e = 0; e < n_events; ++e) {
      const auto& spec = specs[std::uniform_int_distribution<std::size_t>(0, specs.size() - 1)(rng)];
      const auto ast = parse_template(spec.templ);
      std::vector<std::string> role_names;
      for (const auto& r : spec.roles) role_names.emplace_back(r.name);

      EventInstance event;
      event.event_id = "e" + std::to_string(e);
      event.event_type = spec.name;

      // Argument strings per role, distinct within the role.
      std::vector<std::vector<std::string>> args(spec.roles.size());
      for (std::size_t r = 0; r < spec.roles.size(); ++r) {
        if (unit(rng) < options.empty_role_probability) continue;
        const std::size_t n =
            std::uniform_int_distribution<std::size_t>(1, options.max_args_per_role)(rng);
        for (std::size_t attempt = 0; args[r].size() < n && attempt < 20; ++attempt) {
          auto candidate = draw(spec.roles[r].pool, rng);
          if (!round_trip_safe(candidate, ast, role_names)) continue;
          if (std::find(args[r].begin(), args[r].end(), candidate) != args[r].end()) continue;
          args[r].push_back(std::move(candidate));
        }
      }

      // Main sentence: "<lead args> <trigger> ..." followed by other roles.
      text.append(" According to reports, ");
      std::vector<std::size_t> later;
      const auto emit_role = [&](std::size_t r) {
        for (std::size_t k = 0; k < args[r].size(); ++k) {
          if (k > 0) text.append(" and ");
          Span s = text.append(args[r][k]);
          event.arguments.push_back({spec.roles[r].name, args[r][k], s});
        }
      };
      if (!args[0].empty()) {
        emit_role(0);
      } else {
        text.append("someone");
      }
      text.append(" ");
      const char* trig = spec.triggers[std::uniform_int_distribution<std::size_t>(
          0, spec.triggers.size() - 1)(rng)];
      event.trigger = text.append(trig);
      for (std::size_t r = 1; r < spec.roles.size(); ++r) {
        if (args[r].empty()) continue;
        if (unit(rng) < options.cross_sentence_probability) {
          later.push_back(r);
          continue;
        }
        text.append(", involving ");
        emit_role(r);
      }
      text.append(".");
      for (const std::size_t r : later) {
        text.append(" Separately, sources named ");
        emit_role(r);
        text.append(" in connection with the ");
        text.append(spec.roles[r].pool == Pool::kPlace ? "location" : "case");
        text.append(".");
      }
      if (unit(rng) < 0.5) {
        text.append(" ");
        text.append(pick(kFiller, rng));
      }
      doc.events.push_back(std::move(event));
    }
    doc.text = text.text();
    out.corpus.documents.push_back(std::move(doc));
  }
  return out;
}

}  // namespace eae
