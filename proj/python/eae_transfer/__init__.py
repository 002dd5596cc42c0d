"""Python bindings for the event argument extraction transfer harness."""

from ._core import (
    EaeError,
    argument_f1,
    build_extraction_prompt,
    build_paraphrase_prompt,
    corpus_stats,
    correlate_transfer,
    decode_spans,
    format_matrix,
    generate_synthetic,
    lint_ontology,
    parse_answer_sheet,
    parse_filled,
    parse_paraphrases,
    pearson_rho,
    render_filled,
    render_unfilled,
    run_cell,
    select_arguments,
    template_slots,
)

__all__ = [
    "EaeError",
    "argument_f1",
    "build_extraction_prompt",
    "build_paraphrase_prompt",
    "corpus_stats",
    "correlate_transfer",
    "decode_spans",
    "format_matrix",
    "generate_synthetic",
    "lint_ontology",
    "parse_answer_sheet",
    "parse_filled",
    "parse_paraphrases",
    "pearson_rho",
    "render_filled",
    "render_unfilled",
    "run_cell",
    "select_arguments",
    "template_slots",
]
