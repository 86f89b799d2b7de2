// pgnet: pointer-generator summarization workbench.
// Subcommands: preprocess, train, finetune, decode, evaluate, report.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "pgnet/checkpoint.hpp"
#include "pgnet/corpus.hpp"
#include "pgnet/decoding.hpp"
#include "pgnet/metrics.hpp"
#include "pgnet/training.hpp"
#include "pgnet/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonPaths {
  std::string corpus;
  std::string vocab;
  std::string manifest;
  std::string out_dir;
};

void ensure_out_dir(const std::string& out_dir) {
  if (out_dir.empty()) pgnet::fail("--out-dir is required");
  fs::create_directories(out_dir);
}

std::string path_in(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::array<double, 3> parse_ratios(const std::string& text) {
  std::array<double, 3> out{};
  std::string s = text;
  for (auto& c : s)
    if (c == ':' || c == ',') c = ' ';
  std::istringstream is(s);
  if (!(is >> out[0] >> out[1] >> out[2]))
    pgnet::fail("--ratios must be three numbers, got '", text, "'");
  return out;
}

// Optional JSON config: values act as defaults, explicit flags win.
json preload_config(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config")
      return json::parse(pgnet::read_file(argv[i + 1]));
  return json::object();
}

template <typename T>
void config_default(const json& cfg, const char* key, T& value) {
  if (cfg.contains(key)) value = cfg.at(key).get<T>();
}

struct TrainFlags {
  CommonPaths paths;
  pgnet::TrainingConfig cfg;
  double coverage_frac = 0.20;
  int d_emb = 128;
  int d_hid = 256;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f, const json& cfg) {
  config_default(cfg, "max_steps", f.cfg.max_steps);
  config_default(cfg, "batch_size", f.cfg.batch_size);
  config_default(cfg, "lr", f.cfg.learning_rate);
  config_default(cfg, "lambda", f.cfg.lambda);
  config_default(cfg, "coverage_frac", f.coverage_frac);
  config_default(cfg, "seed", f.cfg.seed);
  config_default(cfg, "d_emb", f.d_emb);
  config_default(cfg, "d_hid", f.d_hid);

  cmd->add_option("--corpus", f.paths.corpus, "canonical JSON-lines corpus")->required();
  cmd->add_option("--vocab", f.paths.vocab, "vocabulary file")->required();
  cmd->add_option("--manifest", f.paths.manifest, "split manifest JSON")->required();
  cmd->add_option("--out-dir", f.paths.out_dir)->required();
  cmd->add_option("--max-steps", f.cfg.max_steps);
  cmd->add_option("--batch-size", f.cfg.batch_size);
  cmd->add_option("--lr", f.cfg.learning_rate);
  cmd->add_option("--lambda", f.cfg.lambda);
  cmd->add_option("--clip-norm", f.cfg.clip_norm);
  cmd->add_option("--coverage-frac", f.coverage_frac,
                  "fraction of final steps trained with coverage");
  cmd->add_option("--validate-every", f.cfg.validate_every);
  cmd->add_option("--patience", f.cfg.patience);
  cmd->add_option("--seed", f.cfg.seed);
  cmd->add_option("--max-article-len", f.cfg.max_article_len);
  cmd->add_option("--max-summary-len", f.cfg.max_summary_len);
  cmd->add_option("--d-emb", f.d_emb);
  cmd->add_option("--d-hid", f.d_hid);
}

// The coverage phase covers the final fraction of the run, at least 50 steps
// once enabled at all.
int coverage_steps_from_frac(double frac, int max_steps) {
  if (frac <= 0 || max_steps == 0) return 0;
  return std::max(50, static_cast<int>(std::lround(frac * max_steps)));
}

struct LoadedCorpus {
  std::vector<pgnet::RawExample> raw;
  pgnet::Vocabulary vocab;
  pgnet::SplitManifest manifest;
};

LoadedCorpus load_inputs(const CommonPaths& paths) {
  LoadedCorpus c;
  c.raw = pgnet::load_corpus(paths.corpus);
  c.vocab = pgnet::Vocabulary::load(paths.vocab);
  c.manifest = pgnet::SplitManifest::load(paths.manifest);
  for (const auto* split : {&c.manifest.train, &c.manifest.validation, &c.manifest.test})
    for (int id : *split)
      if (id < 0 || id >= static_cast<int>(c.raw.size()))
        pgnet::fail("manifest id ", id, " outside corpus of size ", c.raw.size());
  return c;
}

std::vector<pgnet::RawExample> select_split(const std::vector<pgnet::RawExample>& raw,
                                            const std::vector<int>& ids) {
  std::vector<pgnet::RawExample> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(raw[static_cast<size_t>(id)]);
  return out;
}

void write_train_outputs(const pgnet::TrainResult& res, const std::string& out_dir) {
  pgnet::save_checkpoint(res.best.params, res.best.meta, path_in(out_dir, "model.ckpt"));
  pgnet::write_file_atomic(path_in(out_dir, "loss_curve.csv"),
                           pgnet::curve_to_csv(res.curve));
  std::printf("steps run: %d\n", res.steps_run);
  std::printf("final validation loss: %s\n",
              pgnet::format_double(res.best_val_loss).c_str());
  if (res.aborted_nonfinite)
    pgnet::fail("training aborted on a non-finite loss; last good checkpoint kept");
}

int cmd_preprocess(const std::string& input, const std::string& format,
                   const std::string& article_field, const std::string& summary_field,
                   int vocab_size, const std::string& ratios, uint64_t seed,
                   const std::string& out_dir) {
  ensure_out_dir(out_dir);
  const auto raw =
      pgnet::ingest(input, pgnet::parse_format(format), article_field, summary_field);
  const auto manifest =
      pgnet::split_dataset(static_cast<int>(raw.size()), parse_ratios(ratios), seed);

  // The vocabulary sees only the training split.
  std::vector<std::vector<std::string>> streams;
  for (int id : manifest.train) {
    streams.push_back(pgnet::tokenize(raw[static_cast<size_t>(id)].article));
    streams.push_back(pgnet::tokenize(raw[static_cast<size_t>(id)].summary));
  }
  const auto vocab = pgnet::Vocabulary::build(streams, vocab_size);

  pgnet::save_corpus(path_in(out_dir, "corpus.jsonl"), raw);
  vocab.save(path_in(out_dir, "vocab.txt"));
  manifest.save(path_in(out_dir, "manifest.json"));
  std::printf("examples: %zu  splits: %zu/%zu/%zu  vocab: %d\n", raw.size(),
              manifest.train.size(), manifest.validation.size(),
              manifest.test.size(), vocab.size());
  return 0;
}

int cmd_train(const TrainFlags& f) {
  ensure_out_dir(f.paths.out_dir);
  auto inputs = load_inputs(f.paths);

  pgnet::TrainingConfig cfg = f.cfg;
  cfg.coverage_phase_steps = coverage_steps_from_frac(f.coverage_frac, cfg.max_steps);

  pgnet::ModelDims dims;
  dims.d_emb = f.d_emb;
  dims.d_hid = f.d_hid;
  dims.vocab_size = inputs.vocab.size();

  const auto train_set =
      pgnet::encode_corpus(select_split(inputs.raw, inputs.manifest.train),
                           inputs.vocab, cfg.max_article_len, cfg.max_summary_len);
  const auto val_set =
      pgnet::encode_corpus(select_split(inputs.raw, inputs.manifest.validation),
                           inputs.vocab, cfg.max_article_len, cfg.max_summary_len);

  const auto res = pgnet::train(cfg, dims, train_set, val_set, inputs.vocab, nullptr,
                                0, path_in(f.paths.out_dir, "model.ckpt"));
  write_train_outputs(res, f.paths.out_dir);
  return 0;
}

int cmd_finetune(const TrainFlags& f, const std::string& checkpoint_path) {
  ensure_out_dir(f.paths.out_dir);

  if (f.cfg.max_steps == 0) {
    // Zero-step fine-tune: the checkpoint passes through unchanged.
    pgnet::load_checkpoint(checkpoint_path);  // still validated
    pgnet::write_file_atomic(path_in(f.paths.out_dir, "model.ckpt"),
                             pgnet::read_file(checkpoint_path));
    pgnet::write_file_atomic(path_in(f.paths.out_dir, "loss_curve.csv"),
                             pgnet::curve_to_csv({}));
    std::printf("steps run: 0\n");
    return 0;
  }

  auto inputs = load_inputs(f.paths);
  const auto ck = pgnet::load_checkpoint(checkpoint_path);

  pgnet::TrainingConfig cfg = f.cfg;
  cfg.coverage_phase_steps = coverage_steps_from_frac(f.coverage_frac, cfg.max_steps);

  const auto train_set =
      pgnet::encode_corpus(select_split(inputs.raw, inputs.manifest.train),
                           inputs.vocab, cfg.max_article_len, cfg.max_summary_len);
  const auto val_set =
      pgnet::encode_corpus(select_split(inputs.raw, inputs.manifest.validation),
                           inputs.vocab, cfg.max_article_len, cfg.max_summary_len);

  const auto res = pgnet::finetune(ck, cfg, train_set, val_set, inputs.vocab,
                                   path_in(f.paths.out_dir, "model.ckpt"));
  write_train_outputs(res, f.paths.out_dir);
  return 0;
}

int cmd_decode(const CommonPaths& paths, const std::string& checkpoint_path,
               const std::string& split, int beam_size, int max_len, int min_len,
               bool greedy, int max_article_len) {
  ensure_out_dir(paths.out_dir);
  auto inputs = load_inputs(paths);
  const auto ck = pgnet::load_checkpoint(checkpoint_path);
  if (ck.meta.vocab_hash_hex != pgnet::to_hex(inputs.vocab.hash()))
    pgnet::fail("decode: vocabulary does not match the checkpoint (hash ",
                pgnet::to_hex(inputs.vocab.hash()), " vs ", ck.meta.vocab_hash_hex,
                ")");

  std::vector<int> ids;
  if (split == "train") ids = inputs.manifest.train;
  else if (split == "validation") ids = inputs.manifest.validation;
  else if (split == "test") ids = inputs.manifest.test;
  else if (split == "all")
    for (size_t i = 0; i < inputs.raw.size(); ++i) ids.push_back(static_cast<int>(i));
  else pgnet::fail("decode: unknown split '", split, "'");

  pgnet::DecodeOptions opts;
  opts.beam_size = beam_size;
  opts.max_len = max_len;
  opts.min_len = min_len;

  std::string summaries, references;
  for (int id : ids) {
    const auto& raw = inputs.raw[static_cast<size_t>(id)];
    const auto ex = pgnet::encode_example(pgnet::tokenize(raw.article),
                                          pgnet::tokenize(raw.summary), inputs.vocab,
                                          max_article_len, 100000);
    const pgnet::DecodedSummary dec =
        (greedy || beam_size == 1)
            ? pgnet::greedy_decode(ck.params, ex, inputs.vocab, max_len, min_len,
                                   ck.meta.coverage_enabled)
            : pgnet::beam_decode(ck.params, ex, inputs.vocab, opts,
                                 ck.meta.coverage_enabled);

    json s;
    s["id"] = id;
    s["summary"] = pgnet::render(dec.ids, inputs.vocab, ex.oov_words);
    s["origin_tags"] = dec.origin;
    s["mean_logprob"] = dec.mean_logprob;
    summaries += s.dump();
    summaries += '\n';

    json r;
    r["id"] = id;
    r["summary"] = raw.summary;
    references += r.dump();
    references += '\n';
  }
  pgnet::write_file_atomic(path_in(paths.out_dir, "summaries.jsonl"), summaries);
  pgnet::write_file_atomic(path_in(paths.out_dir, "references.jsonl"), references);
  std::printf("decoded %zu examples\n", ids.size());
  return 0;
}

std::map<std::string, std::string, std::less<>> read_id_text(const std::string& path) {
  std::map<std::string, std::string, std::less<>> out;
  std::istringstream in(pgnet::read_file(path));
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("id") || !j.contains("summary"))
      pgnet::fail(path, ": line ", line_no, " is not {id, summary, ...}");
    const std::string id = j["id"].is_string() ? j["id"].get<std::string>()
                                               : j["id"].dump();
    out[id] = j["summary"].get<std::string>();
  }
  return out;
}

void print_score_table(const std::vector<pgnet::ExampleScores>& scores) {
  auto agg = [&](auto getter) {
    std::vector<double> v;
    for (const auto& s : scores) v.push_back(getter(s));
    return pgnet::aggregate(v);
  };
  const auto fact = agg([](const pgnet::ExampleScores& s) { return s.fact.f1; });
  const auto rouge = agg([](const pgnet::ExampleScores& s) { return s.rouge.f1; });
  std::printf("%-8s %12s %12s\n", "", "Factual F1", "ROUGE-2 F1");
  auto row = [](const char* name, double f, double r) {
    std::printf("%-8s %12.2f %12.2f\n", name, 100.0 * f, 100.0 * r);
  };
  row("Min", fact.min, rouge.min);
  row("Median", fact.median, rouge.median);
  row("Mean", fact.mean, rouge.mean);
  row("Max", fact.max, rouge.max);
}

int cmd_evaluate(const std::string& summaries_path, const std::string& references_path,
                 const pgnet::MetricBackends& backends, const std::string& out_dir) {
  ensure_out_dir(out_dir);
  const auto summaries = read_id_text(summaries_path);
  const auto references = read_id_text(references_path);

  std::vector<std::string> missing;
  for (const auto& [id, _] : summaries)
    if (!references.count(id)) missing.push_back("reference for " + id);
  for (const auto& [id, _] : references)
    if (!summaries.count(id)) missing.push_back("summary for " + id);
  if (!missing.empty())
    pgnet::fail("evaluate: id mismatch, missing: ", pgnet::join(missing, ", "));

  std::vector<pgnet::ExampleScores> scores;
  for (const auto& [id, text] : summaries) {
    scores.push_back(pgnet::score_example(id, text, references.at(id), backends));
    if (scores.back().fact.degenerate)
      std::fprintf(stderr, "warning: example %s has an empty fact set\n", id.c_str());
  }

  pgnet::write_file_atomic(path_in(out_dir, "scores.csv"), pgnet::scores_to_csv(scores));
  pgnet::write_file_atomic(path_in(out_dir, "aggregate.json"),
                           pgnet::aggregate_to_json(scores));
  print_score_table(scores);
  return 0;
}

int cmd_report(const std::vector<std::string>& score_paths,
               std::vector<std::string> names, const std::string& out_dir) {
  ensure_out_dir(out_dir);
  if (score_paths.size() < 2) pgnet::fail("report: need at least two --scores files");
  if (names.empty())
    for (const auto& p : score_paths) names.push_back(fs::path(p).stem().string());
  if (names.size() != score_paths.size())
    pgnet::fail("report: ", names.size(), " names for ", score_paths.size(), " files");

  std::vector<std::vector<pgnet::ExampleScores>> models;
  for (const auto& p : score_paths)
    models.push_back(pgnet::scores_from_csv(pgnet::read_file(p)));

  // All files must cover the same example ids.
  std::set<std::string> base_ids;
  for (const auto& s : models[0]) base_ids.insert(s.id);
  for (size_t m = 1; m < models.size(); ++m) {
    std::set<std::string> ids;
    for (const auto& s : models[m]) ids.insert(s.id);
    if (ids != base_ids)
      pgnet::fail("report: '", score_paths[m], "' does not share example ids with '",
                  score_paths[0], "'");
  }

  using Getter = double (*)(const pgnet::ExampleScores&);
  const std::vector<std::pair<std::string, Getter>> metrics = {
      {"rouge2_p", [](const pgnet::ExampleScores& s) { return s.rouge.precision; }},
      {"rouge2_r", [](const pgnet::ExampleScores& s) { return s.rouge.recall; }},
      {"rouge2_f1", [](const pgnet::ExampleScores& s) { return s.rouge.f1; }},
      {"fact_p", [](const pgnet::ExampleScores& s) { return s.fact.precision; }},
      {"fact_r", [](const pgnet::ExampleScores& s) { return s.fact.recall; }},
      {"fact_f1", [](const pgnet::ExampleScores& s) { return s.fact.f1; }},
  };

  std::string csv = "metric,stat";
  for (const auto& n : names) csv += "," + n;
  csv += '\n';
  for (const auto& [mname, getter] : metrics) {
    std::vector<pgnet::Aggregate> aggs;
    for (const auto& model : models) {
      std::vector<double> v;
      for (const auto& s : model) v.push_back(getter(s));
      aggs.push_back(pgnet::aggregate(v));
    }
    const std::vector<std::pair<std::string, double pgnet::Aggregate::*>> stats = {
        {"min", &pgnet::Aggregate::min},
        {"median", &pgnet::Aggregate::median},
        {"mean", &pgnet::Aggregate::mean},
        {"max", &pgnet::Aggregate::max},
    };
    for (const auto& [sname, member] : stats) {
      csv += mname + "," + sname;
      for (const auto& a : aggs) csv += "," + pgnet::format_double(a.*member);
      csv += '\n';
    }
  }
  pgnet::write_file_atomic(path_in(out_dir, "comparison.csv"), csv);

  // Per-example deltas against the first model.
  std::map<std::string, const pgnet::ExampleScores*> base;
  for (const auto& s : models[0]) base[s.id] = &s;
  std::string deltas = "id,metric";
  for (const auto& n : names) deltas += "," + n;
  for (size_t m = 1; m < names.size(); ++m) deltas += ",delta_" + names[m];
  deltas += '\n';
  for (const auto& s0 : models[0]) {
    for (const auto& [mname, getter] : metrics) {
      if (mname != "rouge2_f1" && mname != "fact_f1") continue;
      deltas += s0.id + "," + mname;
      std::vector<double> vals;
      for (const auto& model : models) {
        const pgnet::ExampleScores* row = nullptr;
        for (const auto& s : model)
          if (s.id == s0.id) row = &s;
        vals.push_back(getter(*row));
      }
      for (double v : vals) deltas += "," + pgnet::format_double(v);
      for (size_t m = 1; m < vals.size(); ++m)
        deltas += "," + pgnet::format_double(vals[m] - vals[0]);
      deltas += '\n';
    }
  }
  pgnet::write_file_atomic(path_in(out_dir, "deltas.csv"), deltas);

  // Human-readable tables, scores x100 as in the score reports.
  std::string txt;
  for (const char* mname : {"fact_f1", "rouge2_f1"}) {
    txt += std::string(mname) + "\n";
    txt += pgnet::strcat(std::string(8, ' '));
    for (const auto& n : names) txt += pgnet::strcat("  ", n);
    txt += '\n';
    const Getter getter = std::string(mname) == "fact_f1"
                              ? metrics[5].second
                              : metrics[2].second;
    std::vector<pgnet::Aggregate> aggs;
    for (const auto& model : models) {
      std::vector<double> v;
      for (const auto& s : model) v.push_back(getter(s));
      aggs.push_back(pgnet::aggregate(v));
    }
    const std::vector<std::pair<std::string, double pgnet::Aggregate::*>> stats = {
        {"Min", &pgnet::Aggregate::min},
        {"Median", &pgnet::Aggregate::median},
        {"Mean", &pgnet::Aggregate::mean},
        {"Max", &pgnet::Aggregate::max},
    };
    for (const auto& [sname, member] : stats) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%-8s", sname.c_str());
      txt += buf;
      for (size_t m = 0; m < aggs.size(); ++m) {
        std::snprintf(buf, sizeof(buf), "  %*.2f",
                      static_cast<int>(names[m].size()), 100.0 * (aggs[m].*member));
        txt += buf;
      }
      txt += '\n';
    }
    txt += '\n';
  }
  pgnet::write_file_atomic(path_in(out_dir, "comparison.txt"), txt);
  std::fputs(txt.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pointer-generator summarization workbench"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config with flag defaults");

  json cfg;
  try {
    cfg = preload_config(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "ingest, split, build vocabulary");
  std::string input, format = "jsonl", article_field = "article",
              summary_field = "summary", ratios = "0.70,0.15,0.15", pre_out;
  int vocab_size = 50000;
  uint64_t pre_seed = 13;
  config_default(cfg, "format", format);
  config_default(cfg, "vocab_size", vocab_size);
  config_default(cfg, "ratios", ratios);
  config_default(cfg, "seed", pre_seed);
  pre->add_option("--input", input)->required();
  pre->add_option("--format", format, "csv or jsonl");
  pre->add_option("--article-field", article_field);
  pre->add_option("--summary-field", summary_field);
  pre->add_option("--vocab-size", vocab_size);
  pre->add_option("--ratios", ratios, "train:validation:test");
  pre->add_option("--seed", pre_seed);
  pre->add_option("--out-dir", pre_out)->required();

  // train / finetune
  TrainFlags train_flags, ft_flags;
  auto* train_cmd = app.add_subcommand("train", "train from scratch");
  add_train_flags(train_cmd, train_flags, cfg);
  auto* ft_cmd = app.add_subcommand("finetune", "continue from a checkpoint");
  add_train_flags(ft_cmd, ft_flags, cfg);
  std::string ft_checkpoint;
  ft_cmd->add_option("--checkpoint", ft_checkpoint)->required();

  // decode
  auto* dec = app.add_subcommand("decode", "generate summaries for a split");
  CommonPaths dec_paths;
  std::string dec_checkpoint, dec_split = "test";
  int beam_size = 4, max_len = 120, min_len = 35, dec_article_len = 400;
  bool greedy = false;
  config_default(cfg, "beam_size", beam_size);
  config_default(cfg, "max_len", max_len);
  config_default(cfg, "min_len", min_len);
  dec->add_option("--checkpoint", dec_checkpoint)->required();
  dec->add_option("--corpus", dec_paths.corpus)->required();
  dec->add_option("--vocab", dec_paths.vocab)->required();
  dec->add_option("--manifest", dec_paths.manifest)->required();
  dec->add_option("--split", dec_split, "train|validation|test|all");
  dec->add_option("--beam-size", beam_size);
  dec->add_option("--max-len", max_len);
  dec->add_option("--min-len", min_len);
  dec->add_flag("--greedy", greedy, "greedy decoding (same as --beam-size 1)");
  dec->add_option("--max-article-len", dec_article_len);
  dec->add_option("--out-dir", dec_paths.out_dir)->required();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "score summaries against references");
  std::string summaries_path, references_path, eval_out;
  pgnet::MetricBackends backends;
  config_default(cfg, "extractor", backends.extractor);
  config_default(cfg, "embedder", backends.embedder);
  config_default(cfg, "embed_width", backends.embed_width);
  eval->add_option("--summaries", summaries_path)->required();
  eval->add_option("--references", references_path)->required();
  eval->add_option("--extractor", backends.extractor, "builtin or exec:COMMAND");
  eval->add_option("--embedder", backends.embedder, "hashed or exec:COMMAND");
  eval->add_option("--predicate-lexicon", backends.lexicon_path);
  eval->add_option("--embed-width", backends.embed_width);
  eval->add_option("--out-dir", eval_out)->required();

  // report
  auto* rep = app.add_subcommand("report", "compare score files across models");
  std::vector<std::string> score_paths, model_names;
  std::string rep_out;
  rep->add_option("--scores", score_paths, "per-example score CSV (repeat per model)")
      ->required();
  rep->add_option("--names", model_names, "model names (defaults to file stems)");
  rep->add_option("--out-dir", rep_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (pre->parsed())
      return cmd_preprocess(input, format, article_field, summary_field, vocab_size,
                            ratios, pre_seed, pre_out);
    if (train_cmd->parsed()) return cmd_train(train_flags);
    if (ft_cmd->parsed()) return cmd_finetune(ft_flags, ft_checkpoint);
    if (dec->parsed())
      return cmd_decode(dec_paths, dec_checkpoint, dec_split, beam_size, max_len,
                        min_len, greedy, dec_article_len);
    if (eval->parsed())
      return cmd_evaluate(summaries_path, references_path, backends, eval_out);
    if (rep->parsed()) return cmd_report(score_paths, model_names, rep_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
