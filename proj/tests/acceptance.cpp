// Acceptance suite: one PASS/FAIL line per criterion; exits nonzero on any FAIL.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "eae/error.hpp"
#include "eae/llm_protocol.hpp"
#include "eae/metrics.hpp"
#include "eae/qa.hpp"
#include "eae/runner.hpp"
#include "eae/synthetic.hpp"
#include "eae/template.hpp"
#include "fixtures.hpp"
#include "golden.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "reference_matrix.hpp"

using namespace eae;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Writes a synthetic dataset plus a one-cell grid and runs it through the CLI.
Outcome gold_matrix(const std::string& name, const std::string& method, std::size_t max_args) {
  const auto t0 = Clock::now();
  const auto dir = test::scratch_dir(name);
  SyntheticOptions options;
  options.documents = 200;
  options.max_args_per_role = max_args;
  options.seed = 20240611;
  const auto data = generate_synthetic(options);
  save_corpus(data.corpus, dir / "synth.jsonl");
  save_ontology(data.ontology, dir / "synth.ontology.json");
  json cell = {{"method", method}, {"source", "synth"}, {"target", "synth"},
               {"corpus", "synth.jsonl"}, {"ontology", "synth.ontology.json"},
               {"backend", {{"kind", "gold-oracle"}}}};
  if (method == "QA") cell["t_dev"] = 0.0;
  std::ofstream(dir / "grid.json") << json{{"output_dir", "out"}, {"cells", {cell}}}.dump(2);

  std::ostringstream out, err;
  const int status = run_cli({"matrix", "--config", (dir / "grid.json").string()}, out, err);
  const double elapsed = seconds_since(t0);
  if (status != 0) return {false, "matrix exited " + std::to_string(status) + ": " + err.str()};
  std::ifstream in(dir / "out" / "matrix.json");
  const auto m = json::parse(in);
  const double f1 = m["rows"][0]["cells"][0]["f1"].get<double>();
  fs::remove_all(dir);
  return {f1 == 1.0 && elapsed < 10.0,
          fmt("F1=%.3f over %zu arguments in %.2fs", f1, data.corpus.argument_count(), elapsed)};
}

Outcome noisy_recall() {
  SyntheticOptions options;
  options.documents = 600;
  options.seed = 99;
  const auto data = generate_synthetic(options);
  auto corpus = std::make_shared<const Corpus>(data.corpus);
  auto ontology = std::make_shared<const Ontology>(data.ontology);
  OracleOptions oo;
  oo.drop_probability = 0.3;
  oo.seed = 1337;
  auto backend = make_noisy_oracle(corpus, ontology, oo);
  const auto pred = predict_ti(*corpus, *ontology, *backend, InputFormat{});
  const auto report = argument_f1(pred, *corpus);
  const std::size_t gold = report.tp + report.fn;
  return {gold >= 2000 && report.recall >= 0.65 && report.recall <= 0.75,
          fmt("recall=%.4f over %zu gold arguments", report.recall, gold)};
}

// Random (template, fills) pairs whose argument strings satisfy the round-trip
// preconditions: no " and ", not the role name, no literal segment inside.
// Containment is checked on the argument padded with a space on each side, so
// "base and" is excluded as well: "base and" + " and " + "3" renders exactly
// like "base" + " and " + "and 3", and no parser can tell them apart.
Outcome template_round_trip() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(424242);
  const std::vector<std::string> roles{"Agent", "Victim", "Place", "Time", "Instrument", "Giver", "Recipient", "Target"};
  const std::vector<std::string> glue{" struck ", " near ", " at ", ", using ", " gave ", " to ", " on ",
                                      " in front of ", " / ", "; "};
  const std::vector<std::string> prefixes{"", "On ", "Yesterday ", "«"};
  const std::vector<std::string> suffixes{"", ".", " today.", "»", "!"};
  const std::vector<std::string> words{"Kabul", "the", "old", "base", "Zoë", "Łódź", "rebels", "3", "tanks",
                                       "北京", "Smith", "a", "convoy", "Agent", "and", "at", "near"};
  int failures = 0;
  std::size_t rejected = 0;
  std::string first_failure;
  const int cases = 10000;
  for (int n = 0; n < cases; ++n) {
    std::vector<std::string> pool = roles;
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t slots = 1 + rng() % 4;
    std::string source = prefixes[rng() % prefixes.size()];
    std::vector<std::string> literals;
    if (!source.empty()) literals.push_back(source);
    for (std::size_t s = 0; s < slots; ++s) {
      if (s) {
        const auto& g = glue[rng() % glue.size()];
        source += g;
        literals.push_back(g);
      }
      source += "{" + pool[s] + "}";
    }
    const auto& suffix = suffixes[rng() % suffixes.size()];
    source += suffix;
    if (!suffix.empty()) literals.push_back(suffix);

    const auto ast = parse_template(source);
    RoleFills fills;
    for (std::size_t s = 0; s < slots; ++s) {
      auto& list = fills[pool[s]];
      const int count = static_cast<int>(rng() % 4);
      while (static_cast<int>(list.size()) < count) {
        std::string arg;
        const std::size_t len = 1 + rng() % 3;
        for (std::size_t w = 0; w < len; ++w) arg += (w ? " " : "") + words[rng() % words.size()];
        const std::string padded = " " + arg + " ";
        bool ok = padded.find(" and ") == std::string::npos && arg != pool[s];
        for (const auto& lit : literals) ok = ok && padded.find(lit) == std::string::npos;
        if (ok) {
          list.push_back(arg);
        } else {
          ++rejected;
        }
      }
    }
    bool same = false;
    try {
      same = parse_filled(ast, render_filled(ast, fills)).fills == fills;
    } catch (const Error&) {
    }
    if (!same && failures++ == 0) first_failure = " first failure: " + render_filled(ast, fills);
  }
  const double elapsed = seconds_since(t0);
  return {failures == 0 && elapsed < 30.0,
          fmt("%d/%d failures in %.2fs, %zu candidate arguments rejected", failures, cases, elapsed,
              rejected) +
              first_failure};
}

Outcome decode_equivalence() {
  std::mt19937_64 rng(8080);
  const std::vector<std::string> words{"x", "y", "Zoë", "é", "北京", "the", "x"};
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int mismatches = 0;
  std::size_t compared = 0;
  for (int n = 0; n < 1000; ++n) {
    const std::size_t length = 2 + rng() % 11;  // positions including the null token
    std::string text;
    std::vector<TokenOffset> off{{0, 0}};
    std::size_t pos = 0;
    for (std::size_t t = 1; t < length; ++t) {
      if (t > 1) {
        const std::size_t gap = 1 + rng() % 2;
        text += std::string(gap, ' ');
        pos += gap;
      }
      const auto& w = words[rng() % words.size()];
      text += w;
      const auto units = oracle::to_u32(w).size();
      off.push_back({pos, pos + units});
      pos += units;
    }
    // Coarse quantization creates ties and duplicate products; zeros exercise
    // the zero-score rule.
    auto draw = [&] {
      std::vector<double> v(length);
      double sum = 0;
      const int mode = static_cast<int>(rng() % 3);
      for (auto& x : v) {
        x = mode == 0 ? unif(rng) : static_cast<double>(rng() % 4);
        sum += x;
      }
      if (sum == 0) {
        v[0] = 1;
        sum = 1;
      }
      for (auto& x : v) x /= sum;
      return v;
    };
    const auto s = draw(), e = draw();
    QAConfig config;
    config.k = 1 + rng() % 8;
    config.max_span_tokens = 1 + rng() % 12;
    const auto got = decode_spans(s, e, off, text, config);
    const auto [want, null] = oracle::decode(s, e, off, text, config.k, config.max_span_tokens);
    bool same = got.null_confidence == null && got.candidates.size() == want.size();
    for (std::size_t i = 0; same && i < want.size(); ++i) {
      const auto& g = got.candidates[i];
      same = g.text == want[i].text && g.confidence == want[i].score &&
             g.char_span.start == want[i].start && g.char_span.end == want[i].end &&
             g.char_span.text == want[i].text;
    }
    mismatches += !same;
    compared += want.size();
  }
  return {mismatches == 0, fmt("%d/1000 mismatches, %zu candidates compared", mismatches, compared)};
}

Outcome calibration_equivalence() {
  std::mt19937_64 rng(5150);
  const std::vector<std::string> texts{"a", "b", "c", "d", "e", "f"};
  int mismatches = 0, null_bound = 0, tied = 0;
  for (int n = 0; n < 100; ++n) {
    Corpus gold;
    std::vector<RoleCandidates> dev;
    const std::size_t docs = 1 + rng() % 15;
    for (std::size_t d = 0; d < docs; ++d) {
      Document doc;
      doc.doc_id = "d" + std::to_string(d);
      doc.text = "x";
      EventInstance ev{"e", "T", {0, 1, "x"}, {}};
      for (const std::string role : {"R1", "R2"}) {
        for (const auto& t : texts)
          if (rng() % 4 == 0) ev.arguments.push_back({role, t, std::nullopt});
        RoleCandidates rc{doc.doc_id, "e", role, {}};
        std::vector<std::string> shuffled = texts;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const std::size_t m = rng() % 6;
        std::vector<double> confs;
        for (std::size_t i = 0; i < m; ++i) confs.push_back(static_cast<double>(1 + rng() % 19) / 20.0);
        std::sort(confs.rbegin(), confs.rend());
        for (std::size_t i = 0; i < m; ++i) rc.decoded.candidates.push_back({Span{0, 1, shuffled[i]}, shuffled[i], confs[i]});
        rc.decoded.null_confidence = rng() % 3 == 0 ? static_cast<double>(rng() % 20) / 20.0 : 0.0;
        dev.push_back(std::move(rc));
      }
      doc.events.push_back(std::move(ev));
      gold.documents.push_back(std::move(doc));
    }
    if (dev[0].decoded.candidates.empty()) dev[0].decoded.candidates.push_back({Span{0, 1, "a"}, "a", 0.5});

    QAConfig config;
    const auto got = calibrate_threshold(dev, gold, config);
    const auto [t, rows] = oracle::sweep(dev, gold, config.k);
    bool same = got.t_dev == t && got.sweep_table.size() == rows.size();
    for (std::size_t i = 0; same && i < rows.size(); ++i) {
      same = got.sweep_table[i].percentile == rows[i].percentile &&
             got.sweep_table[i].threshold == rows[i].threshold && got.sweep_table[i].f1 == rows[i].f1;
    }
    mismatches += !same;
    // Coverage: did the null bar or a tie decide anything in this pool?
    for (const auto& rc : dev) null_bound += rc.decoded.null_confidence > t;
    std::set<double> best_thresholds;
    double best = -1;
    for (const auto& r : rows) best = std::max(best, r.f1);
    for (const auto& r : rows)
      if (r.f1 == best) best_thresholds.insert(r.threshold);
    tied += best_thresholds.size() > 1;
  }
  return {mismatches == 0 && null_bound > 0 && tied > 0,
          fmt("%d/100 mismatches; null bar above t_dev %d times; %d pools with tied best F1", mismatches,
              null_bound, tied)};
}

Outcome metric_equivalence() {
  std::mt19937_64 rng(31337);
  const std::vector<std::string> strings{"x", "y", "X", " x ", "z", "x\t", "Zoë"};
  const std::vector<std::string> roles{"A", "B", "C"};
  int mismatches = 0;
  for (int n = 0; n < 1000; ++n) {
    Corpus corpus;
    PredictionSet pred;
    const std::size_t docs = 1 + rng() % 3;
    for (std::size_t d = 0; d < docs; ++d) {
      Document doc;
      doc.doc_id = "d" + std::to_string(d);
      doc.text = "x";
      const std::size_t events = 1 + rng() % 2;
      for (std::size_t e = 0; e < events; ++e) {
        EventInstance ev{"e" + std::to_string(e), rng() % 2 ? "T1" : "T2", {0, 1, "x"}, {}};
        const std::size_t args = rng() % 5;
        for (std::size_t a = 0; a < args; ++a)
          ev.arguments.push_back({roles[rng() % roles.size()], strings[rng() % strings.size()], std::nullopt});
        if (rng() % 4) {
          auto& pr = pred.events[EventKey{doc.doc_id, ev.event_id}];
          const std::size_t preds = rng() % 5;
          for (std::size_t p = 0; p < preds; ++p)
            pr[rng() % 5 == 0 ? "D" : roles[rng() % roles.size()]].push_back(strings[rng() % strings.size()]);
        }
        doc.events.push_back(std::move(ev));
      }
      corpus.documents.push_back(std::move(doc));
    }
    const auto got = argument_f1(pred, corpus);
    const auto want = oracle::count(pred, corpus);
    const bool same = got.tp == want.tp && got.tp + got.fp == want.pred && got.tp + got.fn == want.gold &&
                      got.f1 == want.f1();
    mismatches += !same;
  }

  Corpus worked;
  Document d;
  d.doc_id = "d";
  d.text = "John attacked";
  d.events.push_back({"e", "Attack", {5, 13, "attacked"}, {{"Attacker", "John", Span{0, 4, "John"}}}});
  worked.documents = {d};
  PredictionSet pred;
  pred.events[EventKey{"d", "e"}]["Attacker"] = {"John", "Mary"};
  const double f1 = argument_f1(pred, worked).f1;
  const bool worked_ok = std::abs(f1 - 2.0 / 3.0) <= 1e-12;
  return {mismatches == 0 && worked_ok, fmt("%d/1000 mismatches; worked case F1=%.15f", mismatches, f1)};
}

Outcome table_marks() {
  const auto m = test::reference_matrix();
  const auto t = format_matrix(m);
  int wrong = 0;
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    for (std::size_t c = 0; c < m.columns.size(); ++c) {
      const std::pair<int, int> at{static_cast<int>(r), static_cast<int>(c)};
      auto expected = CellMark::kNone;
      for (const auto& b : test::kReferenceBold)
        if (b == at) expected = CellMark::kBold;
      for (const auto& u : test::kReferenceUnderline)
        if (u == at) expected = CellMark::kUnderline;
      wrong += t.marks[r][c] != expected;
    }
  }
  const bool named = t.latex.find("\\textbf{65.95}") != std::string::npos &&
                     t.latex.find("\\underline{48.14}") != std::string::npos &&
                     t.latex.find("\\underline{36.47}") != std::string::npos;
  return {wrong == 0 && named, fmt("%d of %zu cells marked differently", wrong, m.rows.size() * m.columns.size())};
}

Outcome prompt_goldens() {
  const auto doc = test::attack_document();
  const auto ontology = test::attack_ontology();
  int wrong = 0;
  for (int v = 1; v <= 3; ++v) {
    const auto p = build_extraction_prompt(doc, doc.events[0], ontology, prompt_variant(v));
    wrong += p.system != test::golden("extraction_v" + std::to_string(v) + ".system.txt");
    wrong += p.user != test::golden("extraction_v" + std::to_string(v) + ".user.txt");
  }
  wrong += build_paraphrase_prompt(ParaphraseKind::kQuestion, "Who attacked someone?") !=
           test::golden("paraphrase_question.txt");
  const auto tmpl = build_paraphrase_prompt(ParaphraseKind::kTemplate, "{Attacker} attacked {Target}");
  wrong += tmpl != test::golden("paraphrase_template.txt");
  const bool brackets = tmpl.find("in between brackets ([])") != std::string::npos;
  return {wrong == 0 && brackets, fmt("%d of 8 prompts differ from the golden files", wrong)};
}

Outcome pearson() {
  const std::vector<double> a{0.12, 0.31, 0.27, 0.55, 0.48, 0.9};
  const std::vector<double> rev(a.rbegin(), a.rend());
  const std::vector<double> inc{1, 2, 3, 4, 5, 6}, dec{6, 5, 4, 3, 2, 1};
  const double self = pearson_rho(a, a);
  const double reversed = pearson_rho(inc, dec);
  const double three = pearson_rho(std::vector<double>{1, 2, 4}, std::vector<double>{1, 3, 3});
  const double hand = 24.0 / std::sqrt(1008.0);
  const bool ok = std::abs(self - 1.0) <= 1e-12 && std::abs(reversed + 1.0) <= 1e-12 &&
                  std::abs(three - hand) <= 1e-9 && std::abs(pearson_rho(a, rev) - oracle::pearson(a, rev)) <= 1e-12;
  return {ok, fmt("self=%.15f reversed=%.15f three-point=%.12f (hand %.12f)", self, reversed, three, hand)};
}

Outcome augmentation() {
  Ontology o;
  o.ontology_id = "three-roles";
  o.event_types.push_back({"Conflict.Attack", "{Attacker} attacked {Target} with {Weapon}",
                           {{"Attacker", "Who attacked?"}, {"Target", "What was attacked?"},
                            {"Weapon", "What was used in the attack?"}}});
  ParaphraseSets sets;
  const std::vector<std::vector<std::string>> questions{
      {"Who was the attacker?", "Who carried out the attack?", "Who launched the attack?",
       "Who was responsible for attacking?", "Which party attacked?"},
      {"What was the target?", "What did the attacker hit?", "What was struck?",
       "Which thing came under attack?", "What was the attack aimed at?"},
      {"What weapon was used?", "What did the attacker use?", "With what was the attack done?",
       "Which instrument was used?", "What was the attack carried out with?"}};
  for (std::size_t r = 0; r < 3; ++r) sets.questions[{"Conflict.Attack", o.event_types[0].roles[r].name}] = questions[r];
  sets.templates["Conflict.Attack"] = {"{Target} was attacked by {Attacker} with {Weapon}",
                                       "{Attacker} struck {Target} using {Weapon}",
                                       "{Attacker} hit {Target} via {Weapon}",
                                       "With {Weapon}, {Attacker} attacked {Target}",
                                       "{Attacker} assaulted {Target} with {Weapon}"};
  const auto aug = build_paraphrase_augmented_resources(o, sets);

  Corpus c;
  Document d;
  d.doc_id = "d";
  d.text = "Rebels attacked the town with rockets. Nobody was hurt.";
  d.events.push_back({"e", "Conflict.Attack", {7, 15, "attacked"},
                      {{"Attacker", "Rebels", Span{0, 6, "Rebels"}},
                       {"Target", "the town", Span{16, 24, "the town"}},
                       {"Weapon", "rockets", Span{30, 37, "rockets"}}}});
  c.documents = {d};
  const auto qa = build_training_examples(c, o, QAConfig{}).examples.size();
  const auto qa_aug = build_augmented_qa_examples(c, aug, QAConfig{}).examples.size();
  const auto ti = build_ti_examples(c, o, InputFormat{}, true).size();
  const auto ti_aug = build_augmented_ti_examples(c, aug, InputFormat{}).size();
  const bool ok = aug.variants.size() == 6 && aug.question_variant_count() == 18 &&
                  aug.template_variant_count() == 6 && qa_aug == 6 * qa && ti_aug == 6 * ti;
  return {ok, fmt("%zu variants, %zu question and %zu template variants; QA %zu -> %zu, TI %zu -> %zu",
                  aug.variants.size(), aug.question_variant_count(), aug.template_variant_count(), qa, qa_aug,
                  ti, ti_aug)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gold-oracle TI matrix F1 = 1.000 in < 10 s", [] { return gold_matrix("acc_ti", "TI", 2); }},
      {"gold-oracle QA matrix F1 = 1.000 in < 10 s", [] { return gold_matrix("acc_qa", "QA", 1); }},
      {"noisy-oracle TI recall 0.70 +/- 0.05", noisy_recall},
      {"template round trip on 10,000 random cases in < 30 s", template_round_trip},
      {"decode_spans matches exhaustive enumeration", decode_equivalence},
      {"calibrate_threshold matches an independent sweep", calibration_equivalence},
      {"argument_f1 matches brute-force counting", metric_equivalence},
      {"reference table bold/underline marks", table_marks},
      {"prompt golden files", prompt_goldens},
      {"Pearson correlation fixtures", pearson},
      {"paraphrase augmentation multiplies resources 6x", augmentation},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " (" << o.detail << ")" << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
