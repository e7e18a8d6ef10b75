// clinassert: command-line driver for annotation, merging, evaluation,
// latency benchmarks and corpus conversion over JSON-lines files.
//
// Exit codes: 0 success, 1 data or configuration error, 2 usage error.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "clinassert/clinassert.hpp"

namespace {

using namespace clinassert;

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string data_dir() {
  if (const char* env = std::getenv("CLINASSERT_DATA_DIR"); env && *env) return env;
  return CLINASSERT_DEFAULT_DATA_DIR;
}

std::vector<std::string> default_rule_files(const std::string& engine) {
  const std::string dir = data_dir();
  if (engine == "negex") return {dir + "/negex_cues.jsonl"};
  return {dir + "/rules/absent.jsonl", dir + "/rules/possible.jsonl", dir + "/rules/conditional.jsonl",
          dir + "/rules/associated_with_someone_else.jsonl"};
}

std::string joined_command(int argc, char** argv) {
  std::string cmd;
  for (int i = 0; i < argc; ++i) cmd += (i ? " " : "") + std::string(argv[i]);
  return cmd;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  return os;
}

struct EngineOptions {
  std::string engine = "contextual";
  std::vector<std::string> rules;
  std::size_t max_scope = 5;
  bool no_sentence_bound = false;
  std::string abbreviations;
  std::size_t workers = 1;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--engine", engine, "Annotator to run")->check(CLI::IsMember({"negex", "contextual"}));
    cmd->add_option("--rules", rules, "Rule files (contextual) or cue file (negex); bundled defaults if omitted");
    cmd->add_option("--max-scope", max_scope, "NegEx scope in tokens")->check(CLI::PositiveNumber);
    cmd->add_flag("--no-sentence-bound", no_sentence_bound, "Let NegEx scopes cross sentence boundaries");
    cmd->add_option("--abbreviations", abbreviations, "Abbreviation list for the tokenizer");
    cmd->add_option("--workers", workers, "Documents processed in parallel")->check(CLI::PositiveNumber);
  }

  std::vector<std::string> rule_files() const { return rules.empty() ? default_rule_files(engine) : rules; }

  Abbreviations load_abbreviations() const {
    return abbreviations.empty() ? Abbreviations::clinical() : Abbreviations::load(abbreviations);
  }

  Engine build() const {
    const auto files = rule_files();
    if (engine == "negex") {
      if (files.size() != 1) throw UsageError("negex takes exactly one cue file");
      NegexConfig config = load_negex_cues(files.front());
      config.max_scope = max_scope;
      config.sentence_bounded = !no_sentence_bound;
      return NegexAnnotator(std::move(config));
    }
    return compile_rules(files);
  }
};

int cmd_annotate(const EngineOptions& eo, const std::string& corpus_path, const std::string& chunks_path,
                 const std::string& out_path, bool emit_absent_only, const std::string& command) {
  const Engine engine = eo.build();
  const Abbreviations abbrev = eo.load_abbreviations();
  const auto corpus = PreparedCorpus::build(read_corpus(corpus_path), read_chunk_rows(chunks_path), chunks_path);
  const auto results = annotate_corpus(corpus, engine, eo.workers, abbrev);

  {
    auto os = open_output(out_path);
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& a = results[i];
      if (emit_absent_only) {
        if (a && a->label == Assertion::absent) write_annotation_line(os, *a);
      } else if (a) {
        write_annotation_line(os, *a);
      } else {
        write_abstention_line(os, corpus.chunks[i]);
      }
    }
  }
  RunManifest manifest{command, {corpus_path, chunks_path}, eo.rule_files(), {out_path}};
  if (!eo.abbreviations.empty()) manifest.configs.push_back(eo.abbreviations);
  manifest.write();
  std::cerr << "annotated " << results.size() << " chunks -> " << out_path << '\n';
  return 0;
}

int cmd_merge(const std::string& pipeline_path, const std::vector<std::string>& stream_args,
              const std::string& out_path, const std::string& command) {
  const PipelineConfig pipeline = load_pipeline(pipeline_path);
  StreamMap streams;
  std::vector<std::string> inputs;
  for (const auto& arg : stream_args) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size())
      throw UsageError("--stream expects NAME=PATH, got '" + arg + "'");
    const std::string name = arg.substr(0, eq);
    const std::string path = arg.substr(eq + 1);
    if (streams.contains(name)) throw UsageError("stream '" + name + "' given twice");
    streams[name] = read_annotations(path, name);
    inputs.push_back(path);
  }
  const auto referenced = pipeline.referenced_streams();
  for (const auto& name : referenced)
    if (!streams.contains(name)) throw ConfigError("pipeline references stream '" + name + "' but it was not supplied");
  for (const auto& [name, _] : streams)
    if (!referenced.contains(name)) std::cerr << "warning: stream '" << name << "' is not used by the pipeline\n";

  const auto merged = run_pipeline(streams, pipeline);
  {
    auto os = open_output(out_path);
    write_annotations(os, merged);
  }
  RunManifest{command, inputs, {pipeline_path}, {out_path}}.write();
  std::cerr << "merged " << merged.size() << " annotations -> " << out_path << '\n';
  return 0;
}

std::optional<std::set<Assertion>> parse_classes(const std::string& spec) {
  if (spec.empty()) return std::nullopt;
  std::set<Assertion> classes;
  if (spec == "all") return std::set<Assertion>(kAllAssertions.begin(), kAllAssertions.end());
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = normalize_space(item);
    const auto a = parse_assertion(item);
    if (!a) throw UsageError("unknown class '" + item + "'");
    classes.insert(*a);
  }
  if (classes.empty()) throw UsageError("--classes is empty");
  return classes;
}

int cmd_evaluate(const std::string& gold_path, const std::string& pred_path, const std::string& map_path,
                 const std::string& classes_spec, bool strict_miss, bool drop_unmapped,
                 const std::string& report_path, const std::string& command) {
  EvalOptions options;
  options.classes = parse_classes(classes_spec);
  options.include_unmatched_as_miss = strict_miss;
  if (!map_path.empty())
    options.label_map = LabelMap::load(map_path, drop_unmapped ? UnmappedPolicy::drop : UnmappedPolicy::error);
  else if (drop_unmapped)
    options.label_map = LabelMap(UnmappedPolicy::drop);

  const auto gold = read_gold(gold_path);
  const auto pred = read_annotations(pred_path, "prediction");
  const EvalReport report = evaluate(gold, pred, options);
  print_report(std::cout, report);
  if (!report_path.empty()) {
    {
      auto os = open_output(report_path);
      os << to_json(report).dump(2) << '\n';
    }
    RunManifest manifest{command, {gold_path, pred_path}, {}, {report_path}};
    if (!map_path.empty()) manifest.configs.push_back(map_path);
    manifest.write();
  }
  return 0;
}

int cmd_bench(const EngineOptions& eo, std::string corpus_path, std::string chunks_path, std::size_t reps) {
  if (reps < kMinBenchRepetitions)
    throw UsageError("--reps must be at least " + std::to_string(kMinBenchRepetitions));
  if (corpus_path.empty() != chunks_path.empty())
    throw UsageError("--corpus and --chunks must be given together");
  if (corpus_path.empty()) {
    corpus_path = data_dir() + "/bench/corpus.jsonl";
    chunks_path = data_dir() + "/bench/chunks.jsonl";
  }
  const Engine engine = eo.build();
  const Abbreviations abbrev = eo.load_abbreviations();
  const auto corpus = PreparedCorpus::build(read_corpus(corpus_path), read_chunk_rows(chunks_path), chunks_path);
  if (corpus.chunks.empty()) throw Error("benchmark corpus has no chunks");

  const LatencyStats stats = bench(
      [&] { return annotate_corpus(corpus, engine, eo.workers, abbrev).size(); }, reps, eo.workers > 1);
  std::cout << std::left << std::setw(14) << "engine" << std::right << std::setw(8) << "rows" << std::setw(6)
            << "reps" << std::setw(16) << "mean s/100rows" << std::setw(16) << "stddev s/100" << '\n';
  std::cout << std::left << std::setw(14) << eo.engine << std::right << std::setw(8) << stats.rows << std::setw(6)
            << stats.repetitions << std::setw(16) << std::setprecision(6) << std::fixed << stats.mean_seconds_per_100
            << std::setw(16) << stats.stddev_seconds_per_100 << '\n';
  std::cout << "hardware: " << stats.hardware << "; workers: " << eo.workers
            << (stats.parallel ? " (parallel)" : " (sequential)") << '\n';
  return 0;
}

void write_corpus_and_gold(const std::vector<Document>& documents, const std::vector<Annotation>& gold,
                           const std::string& corpus_path, const std::string& chunks_path) {
  auto docs = open_output(corpus_path);
  for (const auto& d : documents) docs << nlohmann::ordered_json{{"doc_id", d.doc_id}, {"text", d.text}}.dump() << '\n';
  auto rows = open_output(chunks_path);
  for (const auto& g : gold) {
    auto j = chunk_json(g.chunk);
    j["label"] = g.label.name();
    rows << j.dump() << '\n';
  }
}

int cmd_synth(std::size_t chunks, std::uint64_t seed, const std::string& corpus_path, const std::string& chunks_path,
              const std::string& command) {
  const auto corpus = make_synthetic_corpus(chunks, 5, seed);
  write_corpus_and_gold(corpus.documents, corpus.gold, corpus_path, chunks_path);
  RunManifest{command, {}, {}, {corpus_path, chunks_path}}.write();
  return 0;
}

int cmd_convert_i2b2(const std::string& txt_dir, const std::string& ast_dir, const std::string& corpus_path,
                     const std::string& chunks_path, const std::string& command) {
  std::vector<Document> documents;
  std::vector<Annotation> gold;
  for (auto& note : convert_i2b2(txt_dir, ast_dir)) {
    documents.push_back(std::move(note.document));
    gold.insert(gold.end(), note.gold.begin(), note.gold.end());
  }
  write_corpus_and_gold(documents, gold, corpus_path, chunks_path);
  RunManifest{command, {}, {}, {corpus_path, chunks_path}}.write();
  std::cerr << "converted " << documents.size() << " notes, " << gold.size() << " concepts\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clinical assertion status detection: annotate, merge, evaluate, bench"};
  app.require_subcommand(0, 1);
  bool version = false;
  app.add_flag("--version", version, "Print tool and schema versions");

  EngineOptions annotate_opts;
  std::string corpus, chunks, out;
  bool emit_absent_only = false;
  auto* annotate = app.add_subcommand("annotate", "Assign assertion labels to chunks");
  annotate_opts.add_to(annotate);
  annotate->add_option("--corpus", corpus, "Documents (JSON lines)")->required();
  annotate->add_option("--chunks", chunks, "Chunks to label (JSON lines)")->required();
  annotate->add_option("--out", out, "Annotation output (JSON lines)")->required();
  annotate->add_flag("--emit-absent-only", emit_absent_only, "Write only rows labeled absent");

  std::string pipeline;
  std::vector<std::string> streams;
  std::string merge_out;
  auto* merge_cmd = app.add_subcommand("merge", "Combine annotation streams through a merger pipeline");
  merge_cmd->add_option("--pipeline", pipeline, "Pipeline config (JSON)")->required();
  merge_cmd->add_option("--stream", streams, "Annotation stream NAME=PATH")->required();
  merge_cmd->add_option("--out", merge_out, "Merged output (JSON lines)")->required();

  std::string gold, pred, label_map, classes, report;
  bool strict_miss = false, drop_unmapped = false;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions against gold chunks");
  evaluate_cmd->add_option("--gold", gold, "Gold chunks with labels (JSON lines)")->required();
  evaluate_cmd->add_option("--pred", pred, "Predicted annotations (JSON lines)")->required();
  evaluate_cmd->add_option("--label-map", label_map, "Raw-to-canonical label map (JSON)");
  evaluate_cmd->add_option("--classes", classes, "Comma-separated classes, or 'all'; default: predicted labels");
  evaluate_cmd->add_flag("--strict-miss", strict_miss, "Count unmatched gold rows as false negatives");
  evaluate_cmd->add_flag("--drop-unmapped", drop_unmapped, "Drop predictions with unmapped labels instead of failing");
  evaluate_cmd->add_option("--report", report, "JSON report output");

  EngineOptions bench_opts;
  std::string bench_corpus, bench_chunks;
  std::size_t reps = 5;
  auto* bench_cmd = app.add_subcommand("bench", "Measure latency per 100 rows");
  bench_opts.add_to(bench_cmd);
  bench_cmd->add_option("--corpus", bench_corpus, "Documents (default: bundled synthetic corpus)");
  bench_cmd->add_option("--chunks", bench_chunks, "Chunks (default: bundled synthetic chunks)");
  bench_cmd->add_option("--reps", reps, "Timed repetitions (at least 3)");

  std::size_t synth_chunks = 500;
  std::uint64_t seed = 20240501;
  std::string synth_corpus, synth_rows;
  auto* synth = app.add_subcommand("synth", "Write a deterministic synthetic corpus with gold labels");
  synth->add_option("--chunks", synth_chunks, "Number of chunks")->check(CLI::PositiveNumber);
  synth->add_option("--seed", seed, "Generator seed");
  synth->add_option("--out-corpus", synth_corpus, "Corpus output")->required();
  synth->add_option("--out-chunks", synth_rows, "Chunk output")->required();

  std::string txt_dir, ast_dir, i2b2_corpus, i2b2_gold;
  auto* convert = app.add_subcommand("convert-i2b2", "Convert i2b2 2010 assertion notes to JSON lines");
  convert->add_option("--txt", txt_dir, "Directory of .txt notes")->required();
  convert->add_option("--ast", ast_dir, "Directory of .ast assertion files")->required();
  convert->add_option("--out-corpus", i2b2_corpus, "Corpus output")->required();
  convert->add_option("--out-gold", i2b2_gold, "Gold chunk output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (version) {
    std::cout << "clinassert " << kToolVersion << " (schema " << kSchemaVersion << ")\n";
    return 0;
  }
  const std::string command = joined_command(argc, argv);
  try {
    if (annotate->parsed()) return cmd_annotate(annotate_opts, corpus, chunks, out, emit_absent_only, command);
    if (merge_cmd->parsed()) return cmd_merge(pipeline, streams, merge_out, command);
    if (evaluate_cmd->parsed())
      return cmd_evaluate(gold, pred, label_map, classes, strict_miss, drop_unmapped, report, command);
    if (bench_cmd->parsed()) return cmd_bench(bench_opts, bench_corpus, bench_chunks, reps);
    if (synth->parsed()) return cmd_synth(synth_chunks, seed, synth_corpus, synth_rows, command);
    if (convert->parsed()) return cmd_convert_i2b2(txt_dir, ast_dir, i2b2_corpus, i2b2_gold, command);
    std::cerr << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
}
