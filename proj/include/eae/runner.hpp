#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "eae/backends.hpp"
#include "eae/corpus.hpp"
#include "eae/metrics.hpp"
#include "eae/qa.hpp"
#include "eae/resources.hpp"
#include "eae/ti.hpp"
#include "json.hpp"

namespace eae {

enum class Method { kTI, kQA, kLLM };

std::string_view method_name(Method method);
Method parse_method(std::string_view name);

// One (source, target) evaluation. The backend stands for a model trained on
// `source_id`; it is evaluated on the target corpus with the target's own
// questions and templates.
struct ExperimentConfig {
  Method method = Method::kTI;
  BackendDescriptor backend;
  std::string model = "model";  // row label, e.g. "Flan-T5" or "GPT-4"
  std::string source_id;        // empty: no training source (zero-shot LLM)
  std::string target_id;
  std::filesystem::path corpus_path;
  std::filesystem::path ontology_path;
  std::optional<Split> split;       // evaluate only this split
  std::vector<std::uint64_t> seeds;  // one run per seed (TI/QA)
  std::vector<int> prompt_variants{1, 2, 3};  // one run per variant (LLM)
  QAConfig qa;
  double t_dev = 0.0;  // calibrated once on source dev, reused for every target
  std::size_t batch_size = 32;
  std::filesystem::path output_dir;  // empty: do not persist

  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
// Relative paths resolve against `base_dir`.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base_dir = {});

// Runs batches through a backend on up to max_concurrency threads.
std::vector<GenerationResponse> run_generate(Backend& backend,
                                             std::span<const GenerationRequest> requests,
                                             std::size_t batch_size);
std::vector<SpanScoringResponse> run_score_spans(Backend& backend,
                                                 std::span<const SpanScoringRequest> requests,
                                                 std::size_t batch_size);

// Decoding pipelines: build inputs, query the backend, decode into predictions.
PredictionSet predict_ti(const Corpus& corpus, const Ontology& ontology, Backend& backend,
                         const InputFormat& format, std::size_t batch_size = 32);
std::vector<RoleCandidates> score_qa(const Corpus& corpus, const Ontology& ontology,
                                     Backend& backend, const QAConfig& config,
                                     std::size_t batch_size = 32);
PredictionSet predict_qa(const Corpus& corpus, const Ontology& ontology, Backend& backend,
                         const QAConfig& config, double t_dev, std::size_t batch_size = 32);
PredictionSet predict_llm(const Corpus& corpus, const Ontology& ontology, Backend& backend,
                          int variant, std::size_t batch_size = 32);

// Maps backend token offsets over the marked document region back onto the
// original document.
std::vector<TokenOffset> to_document_offsets(std::span<const TokenOffset> region_offsets,
                                             const OffsetMap& map);

using BackendFactory = std::function<std::unique_ptr<Backend>(
    const ExperimentConfig& config, std::optional<std::uint64_t> seed,
    std::shared_ptr<const Corpus> corpus, std::shared_ptr<const Ontology> ontology)>;

// Builds the backend named by the config's descriptor.
BackendFactory default_backend_factory();

struct CellResult {
  AggregateReport report;
  std::vector<PredictionSet> predictions;  // one per run
  std::filesystem::path run_dir;
};

// Evaluates one cell. With an output directory, writes config.json,
// predictions.jsonl and report.json there; an existing report.json is never
// overwritten (Error kRunExists). On backend failure the predictions of
// completed runs and failure.json are persisted before rethrowing.
CellResult run_cell(const ExperimentConfig& config,
                    const BackendFactory& factory = default_backend_factory());

// predictions.jsonl: one line per (run, event).
void write_predictions(const std::filesystem::path& path, const std::vector<PredictionSet>& runs);
std::vector<PredictionSet> read_predictions(const std::filesystem::path& path);

// Re-scores a completed run directory without a backend.
AggregateReport rescore_run(const std::filesystem::path& run_dir);

struct MatrixCell {
  bool present = false;
  double f1 = 0.0;  // mean over runs, in [0, 1]
  std::vector<double> run_f1;
  std::string error;  // why the cell is missing
};

struct MatrixRow {
  std::string model;
  std::string method;
  std::string source_id;  // empty: zero-shot everywhere
  std::vector<MatrixCell> cells;  // aligned with ResultMatrix::columns
};

struct ResultMatrix {
  std::vector<std::string> columns;  // target ids
  std::vector<MatrixRow> rows;

  bool in_domain(std::size_t row, std::size_t column) const {
    return rows[row].source_id == columns[column];
  }
};

nlohmann::json to_json(const ResultMatrix& matrix);
std::string matrix_csv(const ResultMatrix& matrix);

struct GridConfig {
  std::vector<ExperimentConfig> cells;
  std::filesystem::path output_dir;  // matrix.csv, table.txt, cells/<name>/
};

GridConfig grid_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

// Rows are (model, method, source) in first-appearance order; columns are
// targets in first-appearance order. Failing cells become missing cells.
ResultMatrix run_matrix(const GridConfig& grid,
                        const BackendFactory& factory = default_backend_factory());

enum class CellMark { kNone, kBold, kUnderline };

struct FormattedTable {
  std::string plain;  // **bold**, __underline__
  std::string latex;  // \textbf{}, \underline{}
  std::vector<std::vector<CellMark>> marks;
};

// Per column: the largest in-domain cell is bolded and the largest zero-shot
// cell underlined, across every row of the matrix. Ties go to the first row.
FormattedTable format_matrix(const ResultMatrix& matrix);

// Builds a fully populated matrix from F1 values in [0, 1].
ResultMatrix matrix_from_values(std::vector<std::string> columns,
                                const std::vector<std::tuple<std::string, std::string, std::string,
                                                             std::vector<double>>>& rows);

struct ParaphraseSets {
  // (event type, role) -> five question paraphrases
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> questions;
  // event type -> five template paraphrases (DSL form)
  std::map<std::string, std::vector<std::string>> templates;
};

ParaphraseSets paraphrase_sets_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ParaphraseSets& sets);

// Training resources with the original plus five paraphrases for every
// question and template. Inference keeps using the original ontology.
struct AugmentedResources {
  Ontology original;
  // variants[i] replaces every question and template by its i-th variant;
  // variants[0] is the original.
  std::vector<Ontology> variants;

  std::size_t question_variant_count() const;
  std::size_t template_variant_count() const;
};

inline constexpr std::size_t kVariantsPerResource = 6;

// Throws Error(kMissingResource) when a question or template lacks a
// paraphrase set, or the validation error naming the offending resource.
AugmentedResources build_paraphrase_augmented_resources(const Ontology& ontology,
                                                        const ParaphraseSets& paraphrases);

nlohmann::json to_json(const AugmentedResources& resources);

// Training examples over every variant (6x the plain example count).
TrainingExamples build_augmented_qa_examples(const Corpus& corpus,
                                             const AugmentedResources& resources,
                                             const QAConfig& config);
std::vector<TIExample> build_augmented_ti_examples(const Corpus& corpus,
                                                   const AugmentedResources& resources,
                                                   const InputFormat& format);

}  // namespace eae
