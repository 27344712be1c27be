#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "relgrade/corpus.hpp"
#include "relgrade/date.hpp"
#include "relgrade/errors.hpp"
#include "relgrade/evaluation.hpp"
#include "relgrade/grading.hpp"
#include "relgrade/index.hpp"
#include "relgrade/synthetic.hpp"
#include "relgrade/training.hpp"

namespace fs = std::filesystem;
using namespace relgrade;

namespace {

struct Opts {
  std::string out = "out";
  std::uint64_t seed = 0;
  std::size_t dim = 384;

  std::string documents;
  std::string queries;
  std::string pairs;
  std::string train_pairs;
  std::string test_pairs;
  std::string gold;
  std::string index_file;
  std::string head_file;
  std::string verdicts_file;
  std::vector<std::string> verdicts_files;
  std::string name;

  std::size_t m = 16;
  std::size_t ef_construction = 200;
  std::size_t ef_search = 100;
  std::size_t k = 5;
  std::string window_start;
  std::string window_end;
  std::string engine = "hnsw";
  bool dedupe = false;

  std::string grader;
  double t = 0.5;
  std::string endpoint;
  std::string model = "relevance-judge";
  std::string judge_path = "/v1/chat/completions";
  int timeout_ms = 30000;
  int max_retries = 2;
  int parallelism = 4;

  std::string loss = "ce";
  std::string resample = "none";
  double margin = 1.0;
  double lr = 1e-3;
  double final_lr_fraction = 0.1;
  double weight_decay = 0.0;
  double test_fraction = 0.2;
  std::size_t epochs = 20;
  std::size_t batch = 256;

  std::size_t n_docs = 10000;
  std::size_t n_queries = 16;
  std::size_t pairs_per_query_date = 5;
  double positive_rate = 0.123;
  double noise = 0.04;
  double band_lo = 0.55;
  double band_hi = 0.85;
  double separation = 0.2;
  double mid_fraction = 0.5;

  std::size_t bins = 0;
};

Date parse_date_flag(const std::string& value, const char* flag) {
  auto d = Date::parse(value);
  if (!d) {
    throw std::invalid_argument(std::string(flag) + ": expected YYYY-MM-DD, got '" + value + "'");
  }
  return *d;
}

/// Explicit flag value if given, else the first candidate that exists under
/// the output directory, else the first candidate (the reader reports it).
fs::path resolve_input(const std::string& flag_value, const fs::path& out,
                       std::initializer_list<const char*> candidates) {
  if (!flag_value.empty()) return flag_value;
  for (const char* name : candidates) {
    if (fs::exists(out / name)) return out / name;
  }
  return out / *candidates.begin();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  f.flush();
  if (!f) throw IoError("write failed: " + path.string());
}

Corpus load_corpus(const Opts& o, bool with_queries) {
  Corpus corpus(o.dim);
  fs::path docs = resolve_input(o.documents, o.out, {"documents.jsonl"});
  std::size_t nd = corpus.ingest_documents(docs);
  std::cerr << "documents: " << nd << " from " << docs.string() << "\n";
  if (with_queries) {
    fs::path qs = resolve_input(o.queries, o.out, {"queries.jsonl"});
    std::size_t nq = corpus.ingest_queries(qs);
    std::cerr << "queries: " << nq << " from " << qs.string() << "\n";
  }
  return corpus;
}

std::string opt_metric(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *v);
  return buf;
}

void run_ingest(const Opts& o) {
  if (o.documents.empty() && o.queries.empty()) {
    throw std::invalid_argument("ingest: pass --documents and/or --queries");
  }
  Corpus corpus(o.dim);
  fs::path out = o.out;
  if (!o.documents.empty()) {
    std::size_t n = corpus.ingest_documents(o.documents);
    fs::path dst = out / "documents.jsonl";
    if (!fs::exists(dst) || !fs::equivalent(fs::path(o.documents), dst)) {
      write_documents_jsonl(dst, corpus.documents());
    }
    std::cerr << "ingested " << n << " documents -> " << dst.string() << "\n";
  }
  if (!o.queries.empty()) {
    std::size_t n = corpus.ingest_queries(o.queries);
    fs::path dst = out / "queries.jsonl";
    if (!fs::exists(dst) || !fs::equivalent(fs::path(o.queries), dst)) {
      write_queries_jsonl(dst, corpus.queries());
    }
    std::cerr << "ingested " << n << " queries -> " << dst.string() << "\n";
  }
  if (auto range = corpus.date_range()) {
    std::cerr << "date range: " << range->first.to_string() << " .. "
              << range->second.to_string() << "\n";
  }
}

void run_synth(const Opts& o) {
  SyntheticSpec spec;
  spec.dim = o.dim;
  spec.n_documents = o.n_docs;
  spec.n_queries = o.n_queries;
  spec.positive_rate = o.positive_rate;
  spec.noise_scale = o.noise;
  spec.band_lo = o.band_lo;
  spec.band_hi = o.band_hi;
  spec.separation = o.separation;
  spec.mid_fraction = o.mid_fraction;
  spec.pairs_per_query_date = o.pairs_per_query_date;
  spec.seed = o.seed;
  SyntheticDataset data = generate(spec);

  fs::path out = o.out;
  write_documents_jsonl(out / "documents.jsonl", data.documents);
  write_queries_jsonl(out / "queries.jsonl", data.queries);
  write_pairs_jsonl(out / "pairs.jsonl", data.pairs);
  write_gold_jsonl(out / "gold.jsonl", cross_gold(data));
  std::cerr << "synth: " << data.documents.size() << " documents, " << data.queries.size()
            << " queries, " << data.pairs.size() << " pairs (positive rate "
            << opt_metric(positive_rate(data.pairs)) << ") -> " << out.string() << "\n";
}

void run_build_index(const Opts& o) {
  Corpus corpus = load_corpus(o, false);
  HnswParams params;
  params.m = static_cast<std::uint32_t>(o.m);
  params.ef_construction = static_cast<std::uint32_t>(o.ef_construction);
  params.seed = o.seed;
  HnswIndex index(o.dim, params);
  for (const Document& doc : corpus.documents()) {
    index.insert(doc.doc_id, doc.embedding);
  }
  fs::path dst = fs::path(o.out) / "index.bin";
  index.save(dst);
  auto st = index.stats();
  std::cerr << "index: " << st.nodes << " nodes, max level " << st.max_level
            << ", mean layer-0 degree " << st.mean_degree_layer0 << " -> " << dst.string()
            << "\n";
}

void run_validate_index(const Opts& o) {
  fs::path src = o.index_file.empty() ? fs::path(o.out) / "index.bin" : fs::path(o.index_file);
  HnswIndex index = HnswIndex::load(src);
  index.validate();
  auto st = index.stats();
  std::cout << "ok: " << st.nodes << " nodes, max level " << st.max_level << ", layers";
  for (std::size_t n : st.nodes_per_layer) std::cout << " " << n;
  std::cout << ", mean layer-0 degree " << st.mean_degree_layer0 << ", max " << st.max_degree_layer0
            << "\n";
}

void run_generate_pairs(const Opts& o) {
  Corpus corpus = load_corpus(o, true);
  PairGenConfig cfg;
  if (o.window_start.empty() || o.window_end.empty()) {
    auto range = corpus.date_range();
    if (!range) throw std::domain_error("generate-pairs: corpus has no documents");
    cfg.window_start = o.window_start.empty() ? range->first
                                              : parse_date_flag(o.window_start, "--window-start");
    cfg.window_end =
        o.window_end.empty() ? range->second : parse_date_flag(o.window_end, "--window-end");
  } else {
    cfg.window_start = parse_date_flag(o.window_start, "--window-start");
    cfg.window_end = parse_date_flag(o.window_end, "--window-end");
  }
  cfg.k = o.k;
  cfg.engine = o.engine == "bf" ? IndexEngine::kBruteForce : IndexEngine::kHnsw;
  cfg.hnsw.m = static_cast<std::uint32_t>(o.m);
  cfg.hnsw.ef_construction = static_cast<std::uint32_t>(o.ef_construction);
  cfg.hnsw.seed = o.seed;
  cfg.ef_search = o.ef_search;
  cfg.dedupe = o.dedupe;

  PairGenResult result = generate_pairs(corpus, cfg);
  fs::path dst = fs::path(o.out) / "pairs.jsonl";
  write_pairs_jsonl(dst, result.pairs);
  std::cerr << "pairs: " << result.pairs.size() << " over " << result.dates_searched
            << " dates (" << result.dates_without_documents << " empty, " << result.deduped
            << " deduped) -> " << dst.string() << "\n";
}

std::vector<GraderVerdict> grade_pairs(const Opts& o, const std::vector<PairRecord>& pairs) {
  if (o.grader == "threshold") {
    return grade_with_threshold(pairs, o.t);
  }
  Corpus corpus = load_corpus(o, true);
  if (o.grader == "head") {
    fs::path src = o.head_file.empty() ? fs::path(o.out) / "head.json" : fs::path(o.head_file);
    HeadCheckpoint ckpt = load_head(src);
    std::cerr << "head: " << ckpt.head.feature_dim << " features from " << src.string() << "\n";
    return grade_with_head(pairs, ckpt.head, corpus_feature_source(corpus));
  }
  JudgeConfig jc;
  jc.endpoint = o.endpoint;
  jc.path = o.judge_path;
  jc.model = o.model;
  jc.timeout_ms = o.timeout_ms;
  jc.max_retries = o.max_retries;
  jc.parallelism = o.parallelism;
  load_judge_token_from_env(jc);
  std::cerr << "judge: " << jc.endpoint << jc.path << " model " << jc.model << ", token "
            << (jc.auth_token.empty() ? "absent" : "present") << "\n";
  return grade_with_judge(pairs, corpus, jc);
}

void log_verdict_tally(const std::vector<GraderVerdict>& verdicts) {
  std::size_t relevant = 0, not_relevant = 0, ungraded = 0;
  for (const auto& v : verdicts) {
    if (!v.relevant) {
      ++ungraded;
    } else if (*v.relevant) {
      ++relevant;
    } else {
      ++not_relevant;
    }
  }
  std::cerr << "verdicts: " << relevant << " relevant, " << not_relevant << " not relevant, "
            << ungraded << " ungraded\n";
}

void run_grade(const Opts& o) {
  auto pairs = read_pairs_jsonl(resolve_input(o.pairs, o.out, {"pairs.jsonl"}));
  auto verdicts = grade_pairs(o, pairs);
  fs::path dst = fs::path(o.out) / "verdicts.jsonl";
  write_verdicts_jsonl(dst, verdicts);
  log_verdict_tally(verdicts);
  std::cerr << "wrote " << dst.string() << "\n";
}

void run_split(const Opts& o) {
  auto pairs = read_pairs_jsonl(resolve_input(o.pairs, o.out, {"pairs.jsonl"}));
  bool unlabeled = std::any_of(pairs.begin(), pairs.end(),
                               [](const PairRecord& p) { return !p.label.has_value(); });
  fs::path gold = o.gold;
  if (gold.empty() && unlabeled && fs::exists(fs::path(o.out) / "gold.jsonl")) {
    gold = fs::path(o.out) / "gold.jsonl";
  }
  if (!gold.empty()) {
    GoldLoadStats stats = load_gold_labels(gold, pairs);
    std::cerr << "gold: " << stats.entries << " entries, labeled " << stats.labeled
              << " pairs, " << stats.unmatched << " unmatched, " << stats.unlabeled
              << " still unlabeled (" << gold.string() << ")\n";
  }
  auto [train_set, test_set] = stratified_split(pairs, o.test_fraction, o.seed);
  write_pairs_jsonl(fs::path(o.out) / "train_pairs.jsonl", train_set);
  write_pairs_jsonl(fs::path(o.out) / "test_pairs.jsonl", test_set);
  auto positives = [](const std::vector<PairRecord>& v) {
    return std::count_if(v.begin(), v.end(),
                         [](const PairRecord& p) { return p.label && *p.label; });
  };
  std::cerr << "split: train " << train_set.size() << " (" << positives(train_set)
            << " positive), test " << test_set.size() << " (" << positives(test_set)
            << " positive)\n";
}

void run_train(const Opts& o) {
  Corpus corpus = load_corpus(o, true);
  auto train_set =
      read_pairs_jsonl(resolve_input(o.train_pairs, o.out, {"train_pairs.jsonl", "pairs.jsonl"}));
  std::vector<PairRecord> test_set;
  fs::path test_path =
      o.test_pairs.empty() ? fs::path(o.out) / "test_pairs.jsonl" : fs::path(o.test_pairs);
  if (!o.test_pairs.empty() || fs::exists(test_path)) {
    test_set = read_pairs_jsonl(test_path);
  }
  std::cerr << "train pairs: " << train_set.size() << ", test pairs: " << test_set.size() << "\n";

  TrainingConfig cfg;
  cfg.loss = *loss_from_string(o.loss);
  cfg.margin = o.margin;
  cfg.peak_lr = o.lr;
  cfg.final_lr_fraction = o.final_lr_fraction;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch;
  cfg.resampling = *resampling_from_string(o.resample);
  cfg.seed = o.seed;
  cfg.adamw.weight_decay = o.weight_decay;

  TrainReport report = train(train_set, test_set, corpus_feature_source(corpus), cfg);
  fs::path head_dst = fs::path(o.out) / "head.json";
  save_head(head_dst, report.head, report.config);
  write_text(fs::path(o.out) / "training.csv", train_report_csv(report));
  std::cerr << "trained on " << report.train_pairs_used << " pairs (" << report.positives_used
            << " positive, " << report.negatives_used << " negative) -> " << head_dst.string()
            << "\n";
  if (!report.epochs.empty()) {
    const EpochStats& last = report.epochs.back();
    std::cerr << "epoch " << last.epoch << ": train loss " << last.train_loss << ", accuracy "
              << opt_metric(last.test.accuracy) << ", precision " << opt_metric(last.test.precision)
              << ", recall " << opt_metric(last.test.recall) << ", f1 " << opt_metric(last.test.f1)
              << "\n";
  }
}

void write_report(const Opts& o, const std::vector<ScoredGrader>& rows) {
  write_text(fs::path(o.out) / "report.csv", report_csv(rows));
  write_text(fs::path(o.out) / "report.txt", report_text(rows));
  std::cout << report_text(rows);
  std::cerr << "wrote " << (fs::path(o.out) / "report.csv").string() << "\n";
}

void run_evaluate(const Opts& o) {
  auto truth = read_pairs_jsonl(resolve_input(o.pairs, o.out, {"test_pairs.jsonl", "pairs.jsonl"}));
  std::string name = o.name;
  std::vector<GraderVerdict> verdicts;
  if (!o.grader.empty()) {
    verdicts = grade_pairs(o, truth);
    if (name.empty()) name = o.grader;
  } else {
    fs::path vf =
        o.verdicts_file.empty() ? fs::path(o.out) / "verdicts.jsonl" : fs::path(o.verdicts_file);
    if (!o.verdicts_file.empty() || fs::exists(vf)) {
      verdicts = read_verdicts_jsonl(vf);
      if (name.empty()) name = vf.stem().string();
    } else if (fs::exists(fs::path(o.out) / "head.json")) {
      Opts with_head = o;
      with_head.grader = "head";
      verdicts = grade_pairs(with_head, truth);
      if (name.empty()) name = "head";
    } else {
      throw std::invalid_argument("evaluate: nothing to score; pass --grader or --verdicts");
    }
  }
  log_verdict_tally(verdicts);
  write_report(o, {score_grader(name, verdicts, truth)});
}

void run_report(const Opts& o) {
  auto truth = read_pairs_jsonl(resolve_input(o.pairs, o.out, {"test_pairs.jsonl", "pairs.jsonl"}));
  std::vector<std::string> files = o.verdicts_files;
  if (files.empty()) files.push_back((fs::path(o.out) / "verdicts.jsonl").string());
  std::vector<std::pair<std::string, std::vector<GraderVerdict>>> graders;
  for (const std::string& file : files) {
    std::string name = fs::path(file).stem().string();
    for (const auto& [existing, ignored] : graders) {
      if (existing == name) {
        throw std::invalid_argument("report: duplicate grader name '" + name + "'");
      }
    }
    graders.emplace_back(name, read_verdicts_jsonl(file));
  }
  if (o.bins > 0) {
    bool by_label = std::all_of(truth.begin(), truth.end(),
                                [](const PairRecord& p) { return p.label.has_value(); });
    auto bins = similarity_histogram(truth, o.bins, by_label);
    write_text(fs::path(o.out) / "histogram.csv", histogram_csv(bins));
    std::cerr << "wrote " << (fs::path(o.out) / "histogram.csv").string() << "\n";
  }
  write_report(o, compare(graders, truth));
}

void echo_config(const CLI::App& sub, const Opts& o) {
  std::string cfg = sub.config_to_str(true, false);
  std::cerr << "[" << sub.get_name() << "] seed " << o.seed << ", effective config:\n" << cfg;
  fs::create_directories(o.out);
  write_text(fs::path(o.out) / ("config_" + sub.get_name() + ".toml"), cfg);
}

}  // namespace

int main(int argc, char** argv) {
  Opts o;
  CLI::App app{"relevance grading pipeline: retrieval replay, grading, head training, reports"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "TOML key=value config with one [section] per subcommand; flags win on conflict");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "seed for every stochastic step");
  };
  auto add_corpus_inputs = [&](CLI::App* sub, bool with_queries) {
    sub->add_option("--dim", o.dim, "embedding dimension");
    sub->add_option("--documents", o.documents, "documents JSONL (default <out>/documents.jsonl)");
    if (with_queries) {
      sub->add_option("--queries", o.queries, "queries JSONL (default <out>/queries.jsonl)");
    }
  };
  auto add_grader_opts = [&](CLI::App* sub, bool required) {
    auto* g = sub->add_option("--grader", o.grader, "grader backend")
                  ->check(CLI::IsMember({"threshold", "head", "judge"}));
    if (required) g->required();
    sub->add_option("--t", o.t, "cosine threshold (grader threshold)");
    sub->add_option("--head", o.head_file, "head checkpoint (default <out>/head.json)");
    sub->add_option("--endpoint", o.endpoint, "judge endpoint, scheme://host[:port]");
    sub->add_option("--model", o.model, "judge model name");
    sub->add_option("--judge-path", o.judge_path, "judge HTTP path");
    sub->add_option("--timeout-ms", o.timeout_ms, "judge request timeout");
    sub->add_option("--max-retries", o.max_retries, "judge retries after the first attempt");
    sub->add_option("--parallelism", o.parallelism, "concurrent judge requests");
  };

  CLI::App* ingest = app.add_subcommand("ingest", "validate corpus files and write canonical copies");
  add_common(ingest);
  ingest->add_option("--dim", o.dim, "embedding dimension");
  ingest->add_option("--documents", o.documents, "documents JSONL to ingest");
  ingest->add_option("--queries", o.queries, "queries JSONL to ingest");

  CLI::App* synth = app.add_subcommand("synth", "generate a planted-relevance synthetic dataset");
  add_common(synth);
  synth->add_option("--dim", o.dim, "embedding dimension");
  synth->add_option("--n-docs", o.n_docs, "number of documents");
  synth->add_option("--n-queries", o.n_queries, "number of queries");
  synth->add_option("--positive-rate", o.positive_rate, "fraction of relevant pairs");
  synth->add_option("--noise", o.noise, "cosine noise around the relevance band");
  synth->add_option("--band-lo", o.band_lo, "relevance band lower bound");
  synth->add_option("--band-hi", o.band_hi, "relevance band upper bound");
  synth->add_option("--separation", o.separation, "gap between positives and near negatives");
  synth->add_option("--mid-fraction", o.mid_fraction, "fraction of negatives near the band");
  synth->add_option("--pairs-per-query-date", o.pairs_per_query_date,
                    "documents per (query, date) group");

  CLI::App* build_index = app.add_subcommand("build-index", "build and save an HNSW index");
  add_common(build_index);
  add_corpus_inputs(build_index, false);
  build_index->add_option("--m", o.m, "max neighbors per node per upper layer");
  build_index->add_option("--ef-construction", o.ef_construction, "build-time candidate list size");

  CLI::App* validate_index =
      app.add_subcommand("validate-index", "load an index and check its graph invariants");
  add_common(validate_index);
  validate_index->add_option("--index", o.index_file, "index file (default <out>/index.bin)");

  CLI::App* gen_pairs =
      app.add_subcommand("generate-pairs", "replay daily top-k retrieval into pair records");
  add_common(gen_pairs);
  add_corpus_inputs(gen_pairs, true);
  gen_pairs->add_option("--k", o.k, "results per query per date");
  gen_pairs->add_option("--window-start", o.window_start,
                        "first retrieval date, YYYY-MM-DD (default: earliest document)");
  gen_pairs->add_option("--window-end", o.window_end,
                        "last retrieval date, YYYY-MM-DD (default: latest document)");
  gen_pairs->add_option("--engine", o.engine, "index engine")
      ->check(CLI::IsMember({"hnsw", "bf"}));
  gen_pairs->add_option("--m", o.m, "HNSW max neighbors per node per upper layer");
  gen_pairs->add_option("--ef-construction", o.ef_construction, "HNSW build candidate list size");
  gen_pairs->add_option("--ef-search", o.ef_search, "HNSW search candidate list size");
  gen_pairs->add_flag("--dedupe", o.dedupe, "drop repeats of (query, doc) on later dates");

  CLI::App* grade = app.add_subcommand("grade", "grade pairs and write verdicts");
  add_common(grade);
  add_corpus_inputs(grade, true);
  grade->add_option("--pairs", o.pairs, "pairs JSONL (default <out>/pairs.jsonl)");
  add_grader_opts(grade, true);

  CLI::App* split = app.add_subcommand("split", "attach gold labels and split train/test");
  add_common(split);
  split->add_option("--pairs", o.pairs, "pairs JSONL (default <out>/pairs.jsonl)");
  split->add_option("--gold", o.gold,
                    "gold labels JSONL (default <out>/gold.jsonl when pairs lack labels)");
  split->add_option("--test-fraction", o.test_fraction, "per-class test fraction");

  CLI::App* train_cmd = app.add_subcommand("train", "train the classifier head");
  add_common(train_cmd);
  add_corpus_inputs(train_cmd, true);
  train_cmd->add_option("--train-pairs", o.train_pairs,
                        "training pairs JSONL (default <out>/train_pairs.jsonl, else pairs.jsonl)");
  train_cmd->add_option("--test-pairs", o.test_pairs,
                        "held-out pairs JSONL (default <out>/test_pairs.jsonl when present)");
  train_cmd->add_option("--loss", o.loss, "training loss")
      ->check(CLI::IsMember({"ce", "contrastive"}));
  train_cmd->add_option("--margin", o.margin, "contrastive margin");
  train_cmd->add_option("--lr", o.lr, "peak learning rate");
  train_cmd->add_option("--final-lr-fraction", o.final_lr_fraction,
                        "final learning rate as a fraction of peak");
  train_cmd->add_option("--epochs", o.epochs, "training epochs");
  train_cmd->add_option("--batch", o.batch, "minibatch size");
  train_cmd->add_option("--resample", o.resample, "class rebalancing")
      ->check(CLI::IsMember({"none", "over", "under"}));
  train_cmd->add_option("--weight-decay", o.weight_decay, "AdamW weight decay");

  CLI::App* evaluate = app.add_subcommand("evaluate", "score one grader against labeled pairs");
  add_common(evaluate);
  add_corpus_inputs(evaluate, true);
  evaluate->add_option("--pairs", o.pairs,
                       "labeled truth pairs JSONL (default <out>/test_pairs.jsonl, else pairs.jsonl)");
  evaluate->add_option("--verdicts", o.verdicts_file,
                       "verdicts JSONL to score (default <out>/verdicts.jsonl)");
  evaluate->add_option("--name", o.name, "report row name");
  add_grader_opts(evaluate, false);

  CLI::App* report = app.add_subcommand("report", "compare verdict files in one report");
  add_common(report);
  report->add_option("--pairs", o.pairs,
                     "labeled truth pairs JSONL (default <out>/test_pairs.jsonl, else pairs.jsonl)");
  report->add_option("--verdicts", o.verdicts_files, "verdicts JSONL, repeatable; rows named by file stem");
  report->add_option("--bins", o.bins, "also write a similarity histogram with this many bins");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      return app.exit(e);
    }
    std::cerr << "error: " << e.what() << "\n\n" << app.help() << std::flush;
    return 1;
  }

  const CLI::App* sub = app.get_subcommands().front();
  try {
    echo_config(*sub, o);
    const std::string& cmd = sub->get_name();
    if (cmd == "ingest") {
      run_ingest(o);
    } else if (cmd == "synth") {
      run_synth(o);
    } else if (cmd == "build-index") {
      run_build_index(o);
    } else if (cmd == "validate-index") {
      run_validate_index(o);
    } else if (cmd == "generate-pairs") {
      run_generate_pairs(o);
    } else if (cmd == "grade") {
      run_grade(o);
    } else if (cmd == "split") {
      run_split(o);
    } else if (cmd == "train") {
      run_train(o);
    } else if (cmd == "evaluate") {
      run_evaluate(o);
    } else {
      run_report(o);
    }
    return 0;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
