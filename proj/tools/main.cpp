// skillrel command line: wires corpus mining, skill extraction, benchmark
// assembly, embedding training and evaluation into reproducible runs. Every
// subcommand writes exactly one manifest.json next to its outputs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "skillrel/builder.hpp"
#include "skillrel/corpus.hpp"
#include "skillrel/embedding.hpp"
#include "skillrel/error.hpp"
#include "skillrel/eval.hpp"
#include "skillrel/extraction.hpp"
#include "skillrel/infonce.hpp"
#include "skillrel/llm.hpp"
#include "skillrel/manifest.hpp"
#include "skillrel/miner.hpp"
#include "skillrel/sgns.hpp"
#include "skillrel/version.hpp"

namespace fs = std::filesystem;
using namespace skillrel;

namespace {

int default_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

// Options every subcommand accepts.
struct CommonOpts {
  std::string out = ".";
  std::uint64_t seed = 42;
  bool quiet = false;
};

void log_line(const CommonOpts& c, const std::string& msg) {
  if (!c.quiet) std::cerr << msg << "\n";
}

constexpr std::size_t kProgressEvery = 10000;

void progress(const CommonOpts& c, std::size_t n, const char* what) {
  if (!c.quiet && n % kProgressEvery == 0)
    std::cerr << "  ..." << n << " " << what << "\n";
}

std::string fmt_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void add_common(CLI::App* sub, CommonOpts& c) {
  sub->add_option("-o,--out", c.out, "output directory")->capture_default_str();
  sub->add_option("--seed", c.seed, "random seed")->capture_default_str();
  sub->add_flag("-q,--quiet", c.quiet, "suppress progress logging");
}

RunManifest begin_manifest(const std::string& subcommand, const CommonOpts& c) {
  RunManifest m;
  m.subcommand = subcommand;
  m.seed = c.seed;
  m.tool_version = kVersion;
  m.started_utc = utc_timestamp();
  return m;
}

void end_manifest(RunManifest& m, const CommonOpts& c) {
  m.finished_utc = utc_timestamp();
  save_manifest(m, c.out);
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  for (const auto& line : lines) out << line << "\n";
  if (!out) throw io_error("write failed: " + path);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  out << text;
  if (!out) throw io_error("write failed: " + path);
}

void ensure_out_dir(const CommonOpts& c) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw io_error("cannot create directory " + c.out + ": " + ec.message());
}

// ---------------------------------------------------------------- mine ----

struct MineOpts {
  std::string corpus;
  std::string patterns;  // empty: built-in pattern set
  int threads = default_threads();
  CommonOpts common;
};

// Streams the corpus into sentences with progress, then matches patterns.
MineResult mine_with_progress(const std::string& corpus_path, const PatternConfig& pcfg,
                              int threads, const CommonOpts& c, std::size_t* ads_out) {
  CorpusReader reader(corpus_path);
  std::vector<Sentence> sentences;
  std::size_t ads = 0;
  while (auto ad = reader.next()) {
    auto segs = segment_sentences(*ad);
    sentences.insert(sentences.end(), std::make_move_iterator(segs.begin()),
                     std::make_move_iterator(segs.end()));
    ++ads;
    progress(c, ads, "ads read");
  }
  if (ads_out) *ads_out = ads;
  for (const auto& err : reader.stats().errors) log_line(c, "warning: " + err);
  auto result = mine_sentences(sentences, pcfg, threads);
  result.stats.ads_scanned = ads;
  return result;
}

void run_mine(const MineOpts& o) {
  auto manifest = begin_manifest("mine", o.common);
  PatternConfig pcfg =
      o.patterns.empty() ? PatternConfig{} : PatternConfig::from_file(o.patterns);
  pcfg.validate();

  std::size_t ads = 0;
  auto result = mine_with_progress(o.corpus, pcfg, o.threads, o.common, &ads);

  ensure_out_dir(o.common);
  const std::string out_path = (fs::path(o.common.out) / "mined.jsonl").string();
  std::vector<std::string> lines;
  lines.reserve(result.matches.size());
  for (const auto& m : result.matches) lines.push_back(match_to_json(m));
  write_lines(out_path, lines);

  log_line(o.common, "mine: " + std::to_string(ads) + " ads, " +
                         std::to_string(result.stats.sentences_scanned) + " sentences, " +
                         std::to_string(result.matches.size()) + " matches -> " + out_path);
  for (const auto& [pattern, n] : result.stats.per_pattern)
    log_line(o.common, "  " + pattern + ": " + std::to_string(n));

  manifest.config = {{"patterns", o.patterns.empty() ? "builtin" : o.patterns},
                     {"kw_window_chars", std::to_string(pcfg.kw_window_chars)},
                     {"clip_x_at_semicolon", pcfg.clip_x_at_semicolon ? "true" : "false"},
                     {"threads", std::to_string(o.threads)}};
  manifest.inputs = {o.corpus};
  if (!o.patterns.empty()) manifest.inputs.push_back(o.patterns);
  manifest.outputs = {out_path};
  end_manifest(manifest, o.common);
}

// ------------------------------------------------------------- extract ----

struct ExtractOpts {
  std::string matches;
  std::string ads;
  std::string extractor = "rule";
  std::string prompt;
  std::string checkpoint;
  EndpointConfig endpoint;
  CommonOpts common;
};

// Validates mode flags and runs extraction over matches or whole ads.
// `tpl` must outlive the returned options' use.
ExtractResult run_extraction(const ExtractOpts& o, const std::vector<PatternMatch>* matches,
                             const std::vector<JobAd>* ads) {
  ExtractOptions lib;
  lib.extractor = o.extractor;
  lib.checkpoint_path = o.checkpoint;
  PromptTemplate tpl;
  if (o.extractor == "llm") {
    if (o.prompt.empty()) throw config_error("--prompt is required with --extractor llm");
    if (o.endpoint.base_url.empty())
      throw config_error("--endpoint-url is required with --extractor llm");
    o.endpoint.validate();
    tpl = PromptTemplate::from_file(o.prompt);
    lib.tpl = &tpl;
    lib.endpoint = &o.endpoint;
  } else if (o.extractor != "rule") {
    throw config_error("unknown extractor '" + o.extractor + "' (expected rule or llm)");
  }
  return matches ? extract_corpus(*matches, lib) : extract_corpus(*ads, lib);
}

void run_extract(const ExtractOpts& o) {
  auto manifest = begin_manifest("extract", o.common);
  if (o.matches.empty() == o.ads.empty())
    throw config_error("pass exactly one of --matches or --ads");

  ExtractResult result;
  if (!o.matches.empty()) {
    auto matches = load_matches(o.matches);
    log_line(o.common, "extract: " + std::to_string(matches.size()) + " match records");
    result = run_extraction(o, &matches, nullptr);
  } else {
    auto ads = load_corpus(o.ads);
    log_line(o.common, "extract: " + std::to_string(ads.size()) + " ads");
    result = run_extraction(o, nullptr, &ads);
  }

  ensure_out_dir(o.common);
  const std::string out_path = (fs::path(o.common.out) / "skills.jsonl").string();
  std::vector<std::string> lines;
  lines.reserve(result.lists.size());
  for (const auto& list : result.lists) lines.push_back(skill_list_to_json(list));
  write_lines(out_path, lines);

  const auto& st = result.stats;
  log_line(o.common, "extract: " + std::to_string(st.items_processed) + " processed, " +
                         std::to_string(st.items_skipped_checkpoint) + " checkpointed, " +
                         std::to_string(st.items_empty) + " empty, " +
                         std::to_string(st.failures) + " failures -> " + out_path);

  manifest.config = {{"extractor", o.extractor},
                     {"prompt", o.prompt},
                     {"checkpoint", o.checkpoint},
                     {"endpoint_url", o.endpoint.base_url},
                     {"model", o.endpoint.model},
                     {"adapter", o.endpoint.adapter}};
  manifest.inputs = {o.matches.empty() ? o.ads : o.matches};
  manifest.outputs = {out_path};
  end_manifest(manifest, o.common);
}

// ----------------------------------------------------- build-benchmark ----

struct BuildOpts {
  std::string skills;
  BuilderConfig cfg;
  int threads = default_threads();
  CommonOpts common;
};

Benchmark build_from_lists(const std::vector<SkillList>& lists, const BuilderConfig& cfg,
                           int threads, const CommonOpts& c) {
  cfg.validate();
  auto casing = build_casing_map(lists);
  auto stats = count_pairs(lists, casing, threads);
  auto positives = filter_positives(stats, cfg);
  auto negatives = sample_negatives(stats, positives.size(), cfg.seed);
  log_line(c, "build-benchmark: " + std::to_string(stats.lists_counted) + " lists, " +
                  std::to_string(stats.skill_count.size()) + " skills, " +
                  std::to_string(positives.size()) + " positives, " +
                  std::to_string(negatives.size()) + " negatives");
  return assemble_benchmark(std::move(positives), std::move(negatives), cfg, stats);
}

void save_benchmark_files(const Benchmark& bench, const CommonOpts& c, std::string* tsv_path,
                          std::string* meta_path) {
  ensure_out_dir(c);
  *tsv_path = (fs::path(c.out) / "benchmark.tsv").string();
  *meta_path = (fs::path(c.out) / "benchmark_meta.json").string();
  save_benchmark(bench, *tsv_path);
  save_benchmark_meta(bench.meta, *meta_path);
}

void run_build(const BuildOpts& o) {
  auto manifest = begin_manifest("build-benchmark", o.common);
  BuilderConfig cfg = o.cfg;
  cfg.seed = o.common.seed;

  auto lists = load_skill_lists(o.skills);
  auto bench = build_from_lists(lists, cfg, o.threads, o.common);

  std::string tsv_path;
  std::string meta_path;
  save_benchmark_files(bench, o.common, &tsv_path, &meta_path);
  log_line(o.common, "build-benchmark: wrote " + tsv_path);

  manifest.config = {{"min_count", std::to_string(cfg.min_count)},
                     {"min_cond", fmt_num(cfg.min_cond)},
                     {"target_positives", std::to_string(cfg.target_positives)},
                     {"threads", std::to_string(o.threads)}};
  manifest.inputs = {o.skills};
  manifest.outputs = {tsv_path, meta_path};
  end_manifest(manifest, o.common);
}

// ------------------------------------------------------------ gen-pairs ----

struct GenPairsOpts {
  std::string skills;
  CommonOpts common;
};

void run_gen_pairs(const GenPairsOpts& o) {
  auto manifest = begin_manifest("gen-pairs", o.common);
  auto lists = load_skill_lists(o.skills);
  auto pairs = gen_adjacent_pairs(lists);

  ensure_out_dir(o.common);
  const std::string out_path = (fs::path(o.common.out) / "pairs.jsonl").string();
  save_pairs(pairs, out_path);
  log_line(o.common, "gen-pairs: " + std::to_string(lists.size()) + " lists -> " +
                         std::to_string(pairs.size()) + " pairs -> " + out_path);

  manifest.config = {};
  manifest.inputs = {o.skills};
  manifest.outputs = {out_path};
  end_manifest(manifest, o.common);
}

// ------------------------------------------------------------ train-sgns ----

struct TrainSgnsOpts {
  std::string corpus;
  SGNSConfig cfg;  // threads defaults to 1: bit-deterministic
  bool subword = false;
  SubwordConfig sub;
  CommonOpts common;
};

void run_train_sgns(const TrainSgnsOpts& o) {
  auto manifest = begin_manifest("train-sgns", o.common);
  SGNSConfig cfg = o.cfg;
  cfg.seed = o.common.seed;
  if (o.subword) cfg.subword = o.sub;
  cfg.validate();

  CorpusReader reader(o.corpus);
  std::vector<std::vector<std::string>> sentences;
  std::size_t ads = 0;
  while (auto ad = reader.next()) {
    for (const auto& s : segment_sentences(*ad)) {
      auto tokens = tokenize_for_embedding(s.text);
      if (!tokens.empty()) sentences.push_back(std::move(tokens));
    }
    ++ads;
    progress(o.common, ads, "ads read");
  }
  log_line(o.common, "train-sgns: " + std::to_string(ads) + " ads, " +
                         std::to_string(sentences.size()) + " sentences");

  auto model = train_sgns(sentences, cfg);
  ensure_out_dir(o.common);
  save_sgns_model(model, o.common.out);
  log_line(o.common, "train-sgns: " + std::to_string(model.table.size()) + " vocabulary rows -> " +
                         o.common.out);

  manifest.config = {{"dim", std::to_string(cfg.dim)},
                     {"window", std::to_string(cfg.window)},
                     {"negatives", std::to_string(cfg.negatives)},
                     {"min_count", std::to_string(cfg.min_count)},
                     {"epochs", std::to_string(cfg.epochs)},
                     {"learning_rate", fmt_num(cfg.learning_rate)},
                     {"threads", std::to_string(cfg.threads)},
                     {"subword", o.subword ? "true" : "false"}};
  if (o.subword) {
    manifest.config["min_n"] = std::to_string(o.sub.min_n);
    manifest.config["max_n"] = std::to_string(o.sub.max_n);
    manifest.config["buckets"] = std::to_string(o.sub.buckets);
  }
  manifest.inputs = {o.corpus};
  manifest.outputs = {(fs::path(o.common.out) / "model.json").string()};
  end_manifest(manifest, o.common);
}

// --------------------------------------------------------- train-infonce ----

struct TrainInfonceOpts {
  std::string pairs;
  InfoNCEConfig cfg;
  CommonOpts common;
};

void run_train_infonce(const TrainInfonceOpts& o) {
  auto manifest = begin_manifest("train-infonce", o.common);
  InfoNCEConfig cfg = o.cfg;
  cfg.seed = o.common.seed;
  cfg.validate();

  auto pairs = load_pairs(o.pairs);
  log_line(o.common, "train-infonce: " + std::to_string(pairs.size()) + " pairs");

  auto result = train_infonce(pairs, cfg);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e)
    log_line(o.common,
             "  epoch " + std::to_string(e + 1) + " loss " + fmt_num(result.epoch_loss[e]));

  ensure_out_dir(o.common);
  const std::string out_path = (fs::path(o.common.out) / "vectors.vec").string();
  save_table(result.table, out_path);
  log_line(o.common, "train-infonce: " + std::to_string(result.table.size()) + " phrases -> " +
                         out_path);

  manifest.config = {{"scale", fmt_num(cfg.scale)},
                     {"batch_size", std::to_string(cfg.batch_size)},
                     {"learning_rate", fmt_num(cfg.learning_rate)},
                     {"epochs", std::to_string(cfg.epochs)},
                     {"warmup_fraction", fmt_num(cfg.warmup_fraction)},
                     {"dim", std::to_string(cfg.dim)}};
  manifest.inputs = {o.pairs};
  manifest.outputs = {out_path};
  end_manifest(manifest, o.common);
}

// ------------------------------------------------------------- evaluate ----

// Owns whatever the chosen embedder borrows.
struct EmbedderBundle {
  EmbeddingTable table;
  FrequencyTable freqs;
  std::optional<SGNSModel> model;
  std::unique_ptr<Embedder> embedder;
  std::string mode;
};

// mode: auto | phrase | composed | subword. auto picks phrase for a vector
// file and the richest mode the model supports otherwise.
std::unique_ptr<EmbedderBundle> make_embedder(const std::string& embeddings,
                                              const std::string& model_dir,
                                              const std::string& freqs_path, std::string mode) {
  if (embeddings.empty() == model_dir.empty())
    throw config_error("pass exactly one of --embeddings or --model");
  auto bundle = std::make_unique<EmbedderBundle>();

  const EmbeddingTable* table = nullptr;
  const FrequencyTable* freqs = nullptr;
  const SubwordModel* subword = nullptr;
  if (!embeddings.empty()) {
    bundle->table = load_table(embeddings);
    if (!freqs_path.empty()) bundle->freqs = load_frequencies(freqs_path);
    table = &bundle->table;
    freqs = &bundle->freqs;
    if (mode == "auto") mode = "phrase";
  } else {
    bundle->model = load_sgns_model(model_dir);
    table = &bundle->model->table;
    freqs = &bundle->model->freqs;
    if (bundle->model->subword) subword = &*bundle->model->subword;
    if (mode == "auto") mode = subword ? "subword" : "composed";
  }

  if (mode == "phrase") {
    bundle->embedder = std::make_unique<PhraseTableEmbedder>(*table);
  } else if (mode == "composed") {
    bundle->embedder = std::make_unique<ComposedWordEmbedder>(*table, *freqs);
  } else if (mode == "subword") {
    if (!subword) throw config_error("--mode subword needs a subword model directory");
    bundle->embedder = std::make_unique<SubwordPhraseEmbedder>(*subword, *freqs);
  } else {
    throw config_error("unknown mode '" + mode + "' (expected phrase, composed or subword)");
  }
  bundle->mode = mode;
  return bundle;
}

struct EvaluateOpts {
  std::string benchmark;
  std::string embeddings;
  std::string model;
  std::string freqs;
  std::string mode = "auto";
  std::string missing = "score-neg-one";
  int threads = default_threads();
  CommonOpts common;
};

void run_evaluate(const EvaluateOpts& o) {
  auto manifest = begin_manifest("evaluate", o.common);
  auto bench = load_benchmark(o.benchmark);
  auto bundle = make_embedder(o.embeddings, o.model, o.freqs, o.mode);
  auto policy = missing_policy_from_string(o.missing);

  auto report = evaluate(bench, *bundle->embedder, policy, o.threads);

  ensure_out_dir(o.common);
  const std::string report_path = (fs::path(o.common.out) / "report.json").string();
  const std::string curve_path = (fs::path(o.common.out) / "pr_curve.tsv").string();
  save_report(report, report_path);
  save_pr_curve(report.pr_curve, curve_path);

  std::printf("auc_pr\t%.6f\n", report.auc_pr);
  std::printf("mrr\t%.6f\n", report.mrr);
  std::printf("n_pairs\t%zu\n", report.n_pairs);
  std::printf("n_queries\t%zu\n", report.n_queries);
  std::printf("oov_phrases\t%zu\n", report.oov_phrases);
  log_line(o.common, "evaluate: wrote " + report_path);

  manifest.config = {{"mode", bundle->mode},
                     {"missing_policy", to_string(policy)},
                     {"threads", std::to_string(o.threads)}};
  manifest.inputs = {o.benchmark, o.embeddings.empty() ? o.model : o.embeddings};
  if (!o.freqs.empty()) manifest.inputs.push_back(o.freqs);
  manifest.outputs = {report_path, curve_path};
  end_manifest(manifest, o.common);
}

// -------------------------------------------------------------- heatmap ----

struct HeatmapOpts {
  std::vector<std::string> skills;
  std::string skills_file;
  std::string embeddings;
  std::string model;
  std::string freqs;
  std::string mode = "auto";
  CommonOpts common;
};

void run_heatmap(const HeatmapOpts& o) {
  auto manifest = begin_manifest("heatmap", o.common);
  std::vector<std::string> skills = o.skills;
  if (!o.skills_file.empty()) {
    std::ifstream in(o.skills_file);
    if (!in) throw io_error("cannot read " + o.skills_file);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) skills.push_back(line);
  }
  if (skills.empty()) throw config_error("no skills given; pass names or --skills-file");

  auto bundle = make_embedder(o.embeddings, o.model, o.freqs, o.mode);
  auto matrix = similarity_matrix(skills, skills, *bundle->embedder);

  ensure_out_dir(o.common);
  const std::string tsv_path = (fs::path(o.common.out) / "matrix.tsv").string();
  const std::string svg_path = (fs::path(o.common.out) / "heatmap.svg").string();
  write_text(tsv_path, matrix_tsv(skills, skills, matrix));
  write_text(svg_path, heatmap_svg(skills, skills, matrix));
  log_line(o.common, "heatmap: " + std::to_string(skills.size()) + " skills -> " + svg_path);

  manifest.config = {{"mode", bundle->mode}, {"skills", std::to_string(skills.size())}};
  manifest.inputs = {o.embeddings.empty() ? o.model : o.embeddings};
  if (!o.skills_file.empty()) manifest.inputs.push_back(o.skills_file);
  manifest.outputs = {tsv_path, svg_path};
  end_manifest(manifest, o.common);
}

// ------------------------------------------------------------- pipeline ----

struct PipelineOpts {
  std::string corpus;
  std::string patterns;
  ExtractOpts extract;  // extractor/prompt/endpoint/checkpoint reused
  BuilderConfig builder;
  int threads = default_threads();
  CommonOpts common;
};

void run_pipeline(const PipelineOpts& o) {
  auto manifest = begin_manifest("pipeline", o.common);
  ensure_out_dir(o.common);

  PatternConfig pcfg =
      o.patterns.empty() ? PatternConfig{} : PatternConfig::from_file(o.patterns);
  pcfg.validate();
  std::size_t ads = 0;
  auto mined = mine_with_progress(o.corpus, pcfg, o.threads, o.common, &ads);
  const std::string mined_path = (fs::path(o.common.out) / "mined.jsonl").string();
  {
    std::vector<std::string> lines;
    lines.reserve(mined.matches.size());
    for (const auto& m : mined.matches) lines.push_back(match_to_json(m));
    write_lines(mined_path, lines);
  }
  log_line(o.common, "pipeline: mined " + std::to_string(mined.matches.size()) + " matches from " +
                         std::to_string(ads) + " ads");

  auto extracted = run_extraction(o.extract, &mined.matches, nullptr);
  const std::string skills_path = (fs::path(o.common.out) / "skills.jsonl").string();
  {
    std::vector<std::string> lines;
    lines.reserve(extracted.lists.size());
    for (const auto& list : extracted.lists) lines.push_back(skill_list_to_json(list));
    write_lines(skills_path, lines);
  }
  log_line(o.common,
           "pipeline: extracted " + std::to_string(extracted.lists.size()) + " skill lists");

  BuilderConfig bcfg = o.builder;
  bcfg.seed = o.common.seed;
  auto bench = build_from_lists(extracted.lists, bcfg, o.threads, o.common);
  std::string tsv_path;
  std::string meta_path;
  save_benchmark_files(bench, o.common, &tsv_path, &meta_path);
  log_line(o.common, "pipeline: wrote " + tsv_path);

  manifest.config = {{"patterns", o.patterns.empty() ? "builtin" : o.patterns},
                     {"extractor", o.extract.extractor},
                     {"min_count", std::to_string(bcfg.min_count)},
                     {"min_cond", fmt_num(bcfg.min_cond)},
                     {"target_positives", std::to_string(bcfg.target_positives)},
                     {"threads", std::to_string(o.threads)}};
  manifest.inputs = {o.corpus};
  if (!o.patterns.empty()) manifest.inputs.push_back(o.patterns);
  manifest.outputs = {mined_path, skills_path, tsv_path, meta_path};
  end_manifest(manifest, o.common);
}

// ------------------------------------------------------------- wiring ----

void add_endpoint_flags(CLI::App* sub, ExtractOpts& o) {
  sub->add_option("--extractor", o.extractor, "rule | llm")->capture_default_str();
  sub->add_option("--prompt", o.prompt, "prompt template file (llm extractor)");
  sub->add_option("--checkpoint", o.checkpoint, "checkpoint file for resumable extraction");
  sub->add_option("--endpoint-url", o.endpoint.base_url, "completion endpoint base URL");
  sub->add_option("--model", o.endpoint.model, "model name sent to the endpoint");
  sub->add_option("--auth-env", o.endpoint.auth_env,
                  "environment variable holding the API token");
  sub->add_option("--adapter", o.endpoint.adapter, "simple | openai_chat")
      ->capture_default_str();
  sub->add_option("--timeout", o.endpoint.timeout_seconds, "request timeout, seconds")
      ->capture_default_str();
  sub->add_option("--rate", o.endpoint.rate_limit_rps, "request rate limit per second")
      ->capture_default_str();
  sub->add_option("--concurrency", o.endpoint.concurrency, "parallel requests")
      ->capture_default_str();
  sub->add_option("--retries", o.endpoint.max_retries, "transport retries")
      ->capture_default_str();
}

void add_builder_flags(CLI::App* sub, BuilderConfig& cfg) {
  sub->add_option("--min-count", cfg.min_count, "minimum pair co-occurrence")
      ->capture_default_str();
  sub->add_option("--min-cond", cfg.min_cond, "minimum conditional probability both ways")
      ->capture_default_str();
  sub->add_option("--target-positives", cfg.target_positives,
                  "cap on positive pairs (0 keeps all)")
      ->capture_default_str();
}

void add_embedder_flags(CLI::App* sub, std::string& embeddings, std::string& model,
                        std::string& freqs, std::string& mode) {
  auto* e = sub->add_option("--embeddings", embeddings, "vector file (token per line)");
  auto* m = sub->add_option("--model", model, "trained model directory");
  e->excludes(m);
  sub->add_option("--freqs", freqs, "frequency sidecar for composed mode");
  sub->add_option("--mode", mode, "auto | phrase | composed | subword")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skillrel: mine, benchmark and evaluate skill relatedness"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "read options from a config file (flags win)");
  app.option_defaults()->always_capture_default(true);
  app.require_subcommand(1);

  MineOpts mine_o;
  auto* mine_cmd = app.add_subcommand("mine", "mine related-skill pattern matches from a corpus");
  mine_cmd->add_option("--corpus", mine_o.corpus, "job-ad corpus, one JSON record per line")
      ->required();
  mine_cmd->add_option("--patterns", mine_o.patterns, "pattern config file (default built-in)");
  mine_cmd->add_option("--threads", mine_o.threads, "worker threads")->capture_default_str();
  add_common(mine_cmd, mine_o.common);
  mine_cmd->callback([&] { run_mine(mine_o); });

  ExtractOpts extract_o;
  auto* extract_cmd =
      app.add_subcommand("extract", "extract skill mentions from matches or whole ads");
  auto* matches_opt =
      extract_cmd->add_option("--matches", extract_o.matches, "mined matches (mine output)");
  extract_cmd->add_option("--ads", extract_o.ads, "job-ad corpus (llm extractor only)")
      ->excludes(matches_opt);
  add_endpoint_flags(extract_cmd, extract_o);
  add_common(extract_cmd, extract_o.common);
  extract_cmd->callback([&] { run_extract(extract_o); });

  BuildOpts build_o;
  auto* build_cmd =
      app.add_subcommand("build-benchmark", "build a balanced relatedness benchmark");
  build_cmd->add_option("--skills", build_o.skills, "skill lists (extract output)")->required();
  add_builder_flags(build_cmd, build_o.cfg);
  build_cmd->add_option("--threads", build_o.threads, "worker threads")->capture_default_str();
  add_common(build_cmd, build_o.common);
  build_cmd->callback([&] { run_build(build_o); });

  GenPairsOpts gen_o;
  auto* gen_cmd =
      app.add_subcommand("gen-pairs", "adjacent-span training pairs from skill lists");
  gen_cmd->add_option("--skills", gen_o.skills, "skill lists (extract output)")->required();
  add_common(gen_cmd, gen_o.common);
  gen_cmd->callback([&] { run_gen_pairs(gen_o); });

  TrainSgnsOpts sgns_o;
  auto* sgns_cmd = app.add_subcommand("train-sgns", "train skip-gram word vectors on a corpus");
  sgns_cmd->add_option("--corpus", sgns_o.corpus, "job-ad corpus, one JSON record per line")
      ->required();
  sgns_cmd->add_option("--dim", sgns_o.cfg.dim, "vector dimensionality")->capture_default_str();
  sgns_cmd->add_option("--window", sgns_o.cfg.window, "max context window")
      ->capture_default_str();
  sgns_cmd->add_option("--negatives", sgns_o.cfg.negatives, "noise samples per pair")
      ->capture_default_str();
  sgns_cmd->add_option("--min-count", sgns_o.cfg.min_count, "minimum token count")
      ->capture_default_str();
  sgns_cmd->add_option("--epochs", sgns_o.cfg.epochs, "training epochs")->capture_default_str();
  sgns_cmd->add_option("--lr", sgns_o.cfg.learning_rate, "initial learning rate")
      ->capture_default_str();
  sgns_cmd->add_option("--threads", sgns_o.cfg.threads, "worker threads (1 = bit-deterministic)")
      ->capture_default_str();
  sgns_cmd->add_flag("--subword", sgns_o.subword, "hash character n-grams into bucket vectors");
  sgns_cmd->add_option("--min-n", sgns_o.sub.min_n, "shortest n-gram")->capture_default_str();
  sgns_cmd->add_option("--max-n", sgns_o.sub.max_n, "longest n-gram")->capture_default_str();
  sgns_cmd->add_option("--buckets", sgns_o.sub.buckets, "n-gram hash buckets")
      ->capture_default_str();
  add_common(sgns_cmd, sgns_o.common);
  sgns_cmd->callback([&] { run_train_sgns(sgns_o); });

  TrainInfonceOpts nce_o;
  auto* nce_cmd =
      app.add_subcommand("train-infonce", "contrastive phrase table from training pairs");
  nce_cmd->add_option("--pairs", nce_o.pairs, "training pairs (gen-pairs output)")->required();
  nce_cmd->add_option("--scale", nce_o.cfg.scale, "softmax similarity scale")
      ->capture_default_str();
  nce_cmd->add_option("--batch-size", nce_o.cfg.batch_size, "pairs per batch")
      ->capture_default_str();
  nce_cmd->add_option("--lr", nce_o.cfg.learning_rate, "peak learning rate")
      ->capture_default_str();
  nce_cmd->add_option("--epochs", nce_o.cfg.epochs, "training epochs")->capture_default_str();
  nce_cmd->add_option("--warmup", nce_o.cfg.warmup_fraction, "warmup fraction of total steps")
      ->capture_default_str();
  nce_cmd->add_option("--dim", nce_o.cfg.dim, "vector dimensionality")->default_val(300);
  add_common(nce_cmd, nce_o.common);
  nce_cmd->callback([&] { run_train_infonce(nce_o); });

  EvaluateOpts eval_o;
  auto* eval_cmd = app.add_subcommand("evaluate", "score an embedding against a benchmark");
  eval_cmd->add_option("--benchmark", eval_o.benchmark, "benchmark TSV")->required();
  add_embedder_flags(eval_cmd, eval_o.embeddings, eval_o.model, eval_o.freqs, eval_o.mode);
  eval_cmd
      ->add_option("--missing-policy", eval_o.missing, "score-neg-one | zero | skip")
      ->capture_default_str();
  eval_cmd->add_option("--threads", eval_o.threads, "worker threads")->capture_default_str();
  add_common(eval_cmd, eval_o.common);
  eval_cmd->callback([&] { run_evaluate(eval_o); });

  HeatmapOpts heat_o;
  auto* heat_cmd = app.add_subcommand("heatmap", "pairwise similarity matrix and SVG heatmap");
  heat_cmd->add_option("skills", heat_o.skills, "skill phrases to compare");
  heat_cmd->add_option("--skills-file", heat_o.skills_file, "file with one skill per line");
  add_embedder_flags(heat_cmd, heat_o.embeddings, heat_o.model, heat_o.freqs, heat_o.mode);
  add_common(heat_cmd, heat_o.common);
  heat_cmd->callback([&] { run_heatmap(heat_o); });

  PipelineOpts pipe_o;
  auto* pipe_cmd =
      app.add_subcommand("pipeline", "mine, extract and build a benchmark in one run");
  pipe_cmd->add_option("--corpus", pipe_o.corpus, "job-ad corpus, one JSON record per line")
      ->required();
  pipe_cmd->add_option("--patterns", pipe_o.patterns, "pattern config file (default built-in)");
  add_endpoint_flags(pipe_cmd, pipe_o.extract);
  add_builder_flags(pipe_cmd, pipe_o.builder);
  pipe_cmd->add_option("--threads", pipe_o.threads, "worker threads")->capture_default_str();
  add_common(pipe_cmd, pipe_o.common);
  pipe_cmd->callback([&] { run_pipeline(pipe_o); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.category() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
