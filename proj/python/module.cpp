#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "eae/corpus.hpp"
#include "eae/error.hpp"
#include "eae/llm_protocol.hpp"
#include "eae/metrics.hpp"
#include "eae/qa.hpp"
#include "eae/resources.hpp"
#include "eae/runner.hpp"
#include "eae/synthetic.hpp"
#include "eae/template.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

py::object to_py(const json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

json from_py(const py::handle& obj) {
  return json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

eae::ParaphraseKind kind_of(const std::string& name) {
  const auto kind = eae::parse_paraphrase_kind(name);
  if (!kind) throw eae::Error(eae::ErrorCode::kInvalidArgument, "unknown paraphrase kind " + name);
  return *kind;
}

py::dict decoded_to_py(const eae::DecodedSpans& d) {
  py::list cands;
  for (const auto& c : d.candidates) {
    py::dict item;
    item["start"] = c.char_span.start;
    item["end"] = c.char_span.end;
    item["text"] = c.text;
    item["confidence"] = c.confidence;
    cands.append(item);
  }
  py::dict out;
  out["candidates"] = cands;
  out["null_confidence"] = d.null_confidence;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Event argument extraction transfer harness";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result(
      [&]() { return py::exception<eae::Error>(m, "EaeError", PyExc_RuntimeError); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const eae::Error& e) {
      py::object type = error_type.get_stored();
      py::object inst = type(e.what());
      inst.attr("code") = std::string(eae::error_code_name(e.code()));
      PyErr_SetObject(type.ptr(), inst.ptr());
    }
  });

  // Templates.
  m.def("render_unfilled",
        [](const std::string& source) { return eae::render_unfilled(eae::parse_template(source)); },
        py::arg("template"));
  m.def("render_filled",
        [](const std::string& source, const eae::RoleFills& fills) {
          return eae::render_filled(eae::parse_template(source), fills);
        },
        py::arg("template"), py::arg("fills"));
  m.def("parse_filled",
        [](const std::string& source, const std::string& text) {
          const auto parsed = eae::parse_filled(eae::parse_template(source), text);
          py::dict out;
          out["fills"] = parsed.fills;
          out["multi_arg_roles"] = parsed.multi_arg_roles;
          return out;
        },
        py::arg("template"), py::arg("text"));
  m.def("template_slots",
        [](const std::string& source) { return eae::parse_template(source).slot_roles(); },
        py::arg("template"));

  // QA decoding.
  m.def("decode_spans",
        [](const std::vector<double>& start, const std::vector<double>& end,
           const std::vector<std::pair<std::size_t, std::size_t>>& offsets, const std::string& text,
           std::size_t k, std::size_t max_span_tokens) {
          std::vector<eae::TokenOffset> tokens;
          for (const auto& [s, e] : offsets) tokens.push_back({s, e});
          eae::QAConfig config;
          config.k = k;
          config.max_span_tokens = max_span_tokens;
          return decoded_to_py(eae::decode_spans(start, end, tokens, text, config));
        },
        py::arg("start_probs"), py::arg("end_probs"), py::arg("token_offsets"), py::arg("text"),
        py::arg("k") = 5, py::arg("max_span_tokens") = 30);
  m.def("select_arguments",
        [](const py::dict& decoded, double t_dev, std::size_t k) {
          std::vector<eae::SpanCandidate> cands;
          for (const auto& item : decoded["candidates"].cast<py::list>()) {
            const auto d = item.cast<py::dict>();
            cands.push_back({{d["start"].cast<std::size_t>(), d["end"].cast<std::size_t>(),
                              d["text"].cast<std::string>()},
                             d["text"].cast<std::string>(),
                             d["confidence"].cast<double>()});
          }
          std::vector<std::string> out;
          for (const auto& a : eae::select_arguments(cands, decoded["null_confidence"].cast<double>(),
                                                     t_dev, k)) {
            out.push_back(a.text);
          }
          return out;
        },
        py::arg("decoded"), py::arg("t_dev"), py::arg("k") = 5);

  // Metrics.
  m.def("pearson_rho",
        [](const std::vector<double>& xs, const std::vector<double>& ys) {
          return eae::pearson_rho(xs, ys);
        },
        py::arg("xs"), py::arg("ys"));
  m.def("argument_f1",
        [](const std::string& predictions_path, const std::string& corpus_path) {
          const auto gold = eae::load_corpus(corpus_path);
          std::vector<eae::EvalReport> runs;
          for (const auto& p : eae::read_predictions(predictions_path)) {
            runs.push_back(eae::argument_f1(p, gold));
          }
          return to_py(eae::to_json(eae::aggregate_runs(runs)));
        },
        py::arg("predictions_path"), py::arg("corpus_path"));
  m.def("correlate_transfer",
        [](const std::map<std::string, double>& in_domain,
           const std::map<std::string, double>& zero_shot) {
          const auto r = eae::correlate_transfer(in_domain, zero_shot);
          return py::make_tuple(r.rho, r.n_types);
        },
        py::arg("in_domain"), py::arg("zero_shot"));

  // Corpus and resources.
  m.def("corpus_stats",
        [](const std::string& path) { return to_py(eae::to_json(eae::corpus_stats(eae::load_corpus(path)))); },
        py::arg("corpus_path"));
  m.def("lint_ontology",
        [](const std::string& path) {
          json out = json::array();
          for (const auto& f : eae::lint_ontology(eae::read_ontology(path))) out.push_back(eae::to_json(f));
          return to_py(out);
        },
        py::arg("ontology_path"));
  m.def("generate_synthetic",
        [](const std::string& corpus_out, const std::string& ontology_out, std::size_t documents,
           std::uint64_t seed, std::size_t max_args_per_role) {
          eae::SyntheticOptions options;
          options.documents = documents;
          options.seed = seed;
          options.max_args_per_role = max_args_per_role;
          const auto data = eae::generate_synthetic(options);
          eae::save_corpus(data.corpus, corpus_out);
          eae::save_ontology(data.ontology, ontology_out);
          return data.corpus.argument_count();
        },
        py::arg("corpus_out"), py::arg("ontology_out"), py::arg("documents") = 200,
        py::arg("seed") = 1, py::arg("max_args_per_role") = 2);

  // LLM protocol.
  m.def("build_extraction_prompt",
        [](const std::string& corpus_path, const std::string& ontology_path,
           const std::string& doc_id, const std::string& event_id, int variant) {
          const auto corpus = eae::load_corpus(corpus_path);
          const auto ontology = eae::load_ontology(ontology_path);
          const eae::Document* doc = corpus.find(doc_id);
          if (!doc) throw eae::Error(eae::ErrorCode::kNotFound, "unknown document " + doc_id);
          const eae::EventInstance* event = doc->find_event(event_id);
          if (!event) throw eae::Error(eae::ErrorCode::kNotFound, "unknown event " + event_id);
          const auto prompt =
              eae::build_extraction_prompt(*doc, *event, ontology, eae::prompt_variant(variant));
          py::dict out;
          out["system"] = prompt.system;
          out["user"] = prompt.user;
          out["question_order"] = prompt.question_order;
          return out;
        },
        py::arg("corpus_path"), py::arg("ontology_path"), py::arg("doc_id"), py::arg("event_id"),
        py::arg("variant") = 1);
  m.def("parse_answer_sheet",
        [](const std::string& raw, const std::vector<std::string>& roles,
           const std::string& document_text) {
          eae::Document doc;
          doc.text = document_text;
          return to_py(eae::to_json(eae::parse_answer_sheet(raw, roles, doc)));
        },
        py::arg("raw"), py::arg("roles"), py::arg("document_text"));
  m.def("build_paraphrase_prompt",
        [](const std::string& kind, const std::string& source) {
          return eae::build_paraphrase_prompt(kind_of(kind), source);
        },
        py::arg("kind"), py::arg("source"));
  m.def("parse_paraphrases",
        [](const std::string& raw, const std::string& original, const std::string& kind) {
          return eae::parse_paraphrases(raw, original, kind_of(kind));
        },
        py::arg("raw"), py::arg("original"), py::arg("kind"));

  // Runner.
  m.def("run_cell",
        [](const py::dict& config, const std::string& base_dir) {
          const auto c = eae::experiment_config_from_json(from_py(config), base_dir);
          eae::CellResult result;
          {
            py::gil_scoped_release release;
            result = eae::run_cell(c);
          }
          return to_py(eae::to_json(result.report));
        },
        py::arg("config"), py::arg("base_dir") = "");
  m.def("format_matrix",
        [](const std::vector<std::string>& columns,
           const std::vector<std::tuple<std::string, std::string, std::string, std::vector<double>>>& rows) {
          const auto table = eae::format_matrix(eae::matrix_from_values(columns, rows));
          py::dict out;
          out["plain"] = table.plain;
          out["latex"] = table.latex;
          return out;
        },
        py::arg("columns"), py::arg("rows"));
}
