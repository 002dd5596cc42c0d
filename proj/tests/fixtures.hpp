#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "eae/corpus.hpp"
#include "eae/resources.hpp"

namespace eae::test {

// Conflict.Attack with two roles and a second type sharing "Place".
inline Ontology attack_ontology() {
  Ontology o;
  o.ontology_id = "fixture";
  o.event_types.push_back({"Conflict.Attack",
                           "{Attacker} attacked {Target}",
                           {{"Attacker", "Who attacked someone?"},
                            {"Target", "Who or what was attacked?"}}});
  o.event_types.push_back({"Contact.Meet",
                           "{Participant} met at {Place}",
                           {{"Participant", "Who met with someone?"},
                            {"Place", "Where did the meeting happen?"}}});
  return o;
}

// "John attacked the base near Kabul. Officials met in Kabul."
inline Document attack_document() {
  Document d;
  d.doc_id = "doc1";
  d.text = "John attacked the base near Kabul. Officials met in Kabul.";
  d.split = Split::kTest;
  EventInstance attack{"e1", "Conflict.Attack", {5, 13, "attacked"}, {}};
  attack.arguments.push_back({"Attacker", "John", Span{0, 4, "John"}});
  attack.arguments.push_back({"Target", "the base", Span{14, 22, "the base"}});
  EventInstance meet{"e2", "Contact.Meet", {45, 48, "met"}, {}};
  meet.arguments.push_back({"Participant", "Officials", Span{35, 44, "Officials"}});
  meet.arguments.push_back({"Place", "Kabul", Span{52, 57, "Kabul"}});
  d.events = {attack, meet};
  return d;
}

inline Corpus attack_corpus() {
  Corpus c;
  c.dataset_id = "fixture";
  c.ontology_id = "fixture";
  c.documents.push_back(attack_document());
  return c;
}

// A fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  static std::mt19937_64 rng{std::random_device{}()};
  auto dir = std::filesystem::temp_directory_path() /
             ("eae-test-" + name + "-" + std::to_string(rng() % 1000000000));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace eae::test
