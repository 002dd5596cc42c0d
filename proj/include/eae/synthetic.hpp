#pragma once

#include <cstddef>
#include <cstdint>

#include "eae/corpus.hpp"
#include "eae/resources.hpp"

namespace eae {

struct SyntheticOptions {
  std::size_t documents = 200;
  std::size_t max_events_per_doc = 3;
  std::size_t max_args_per_role = 2;
  double empty_role_probability = 0.2;
  // Fraction of argument mentions placed in a sentence after the trigger's.
  double cross_sentence_probability = 0.3;
  std::uint64_t seed = 1;
  std::string dataset_id = "synthetic";
};

struct SyntheticDataset {
  Ontology ontology;
  Corpus corpus;
};

// A small lint-clean ontology and a corpus whose argument strings satisfy the
// template round-trip preconditions: no " and ", never equal to a role name,
// never containing a literal segment of their event type's template. Splits
// are assigned 80/10/10.
SyntheticDataset generate_synthetic(const SyntheticOptions& options);

Ontology synthetic_ontology();

}  // namespace eae
