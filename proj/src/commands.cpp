#include "bcdlog/commands.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>

#include "bcdlog/errors.hpp"
#include "bcdlog/loghub_csv.hpp"
#include "bcdlog/metrics.hpp"
#include "bcdlog/pipeline.hpp"
#include "bcdlog/training.hpp"

namespace bcdlog {
namespace {

using nlohmann::json;

template <typename V>
void read_key(const json& j, const char* key, V& target) {
  try {
    target = j.at(key).get<V>();
  } catch (const json::exception& e) {
    throw Error("config", std::string("config key '") + key + "': " + e.what());
  }
}

void read_path(const json& j, const char* key, std::filesystem::path& target) {
  std::string s;
  read_key(j, key, s);
  target = s;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io", "cannot write '" + path.string() + "'");
  return out;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("io", "cannot create directory '" + dir.string() + "': " + ec.message());
}

Model load_model(const RunConfig& cfg) {
  Model model = load_checkpoint(cfg.checkpoint);
  if (model.config().max_seq_len != cfg.max_seq_len) {
    // Positions are not learned, so the input window can be resized freely.
    ModelConfig c = model.config();
    c.max_seq_len = cfg.max_seq_len;
    model.tagger = Tagger<float>(c, model.tagger.params());
  }
  return model;
}

std::vector<std::string> contents(const std::vector<LoghubRecord>& records) {
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.content);
  return out;
}

struct ParseRun {
  std::vector<ParseResult> results;
  ParseStats stats;
  std::size_t truncated = 0;
};

ParseRun run_parse(const RunConfig& cfg, const Model& model, const std::vector<LoghubRecord>& records) {
  const ModelPredictor predictor(model);
  ParseRun run;
  const auto messages = contents(records);
  if (cfg.use_cache && !cfg.warm_cache.empty()) {
    LogParser parser(predictor, true);
    parser.warm_start(ParseCache::load(cfg.warm_cache));
    run.results.reserve(messages.size());
    for (const auto& m : messages) run.results.push_back(parser.parse(m));
    run.stats = parser.stats();
  } else {
    run.results = parse_messages(predictor, messages, cfg.use_cache, cfg.threads, &run.stats);
  }
  run.truncated = predictor.truncated();
  return run;
}

void write_parse_outputs(const std::filesystem::path& dir, const std::vector<LoghubRecord>& records,
                         const std::vector<ParseResult>& results) {
  ensure_dir(dir);
  auto csv = open_output(dir / "parsed.csv");
  csv << "LineId,Content,EventTemplate,ParameterMask\n";
  std::vector<std::string> templates;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& t = results[i].tmpl.text;
    csv << records[i].line_id << ',' << csv_escape(records[i].content) << ',' << csv_escape(t)
        << ',' << results[i].mask.to_string() << '\n';
    if (seen.insert(t).second) templates.push_back(t);
  }
  auto tfile = open_output(dir / "templates.txt");
  for (const auto& t : templates) tfile << t << '\n';
}

ParsedCorpus to_corpus(const std::vector<LoghubRecord>& records) {
  std::vector<ParsedEntry> entries;
  entries.reserve(records.size());
  for (const auto& r : records) entries.push_back({r.line_id, r.content, r.event_template.value_or("")});
  return ParsedCorpus(std::move(entries));
}

}  // namespace

void RunConfig::merge_json(const json& j) {
  if (!j.is_object()) throw Error("config", "config file must hold a JSON object");
  static const std::set<std::string> known = {
      "input",  "checkpoint",    "out",           "pred",          "warm_cache",
      "seed",   "cache",         "max_seq_len",   "batch_size",    "epochs",
      "threads", "per_template_cap", "learning_rate", "weight_decay", "repeats",
      "warmup_lines", "fta_string_only", "clip_norm"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw Error("config", "unknown config key '" + key + "'");
  }
  if (j.contains("input")) read_path(j, "input", input);
  if (j.contains("checkpoint")) read_path(j, "checkpoint", checkpoint);
  if (j.contains("out")) read_path(j, "out", out);
  if (j.contains("pred")) read_path(j, "pred", pred);
  if (j.contains("warm_cache")) read_path(j, "warm_cache", warm_cache);
  if (j.contains("seed")) read_key(j, "seed", seed);
  if (j.contains("cache")) read_key(j, "cache", use_cache);
  if (j.contains("max_seq_len")) read_key(j, "max_seq_len", max_seq_len);
  if (j.contains("batch_size")) read_key(j, "batch_size", batch_size);
  if (j.contains("epochs")) read_key(j, "epochs", epochs);
  if (j.contains("threads")) read_key(j, "threads", threads);
  if (j.contains("per_template_cap")) read_key(j, "per_template_cap", per_template_cap);
  if (j.contains("learning_rate")) read_key(j, "learning_rate", learning_rate);
  if (j.contains("weight_decay")) read_key(j, "weight_decay", weight_decay);
  if (j.contains("repeats")) read_key(j, "repeats", repeats);
  if (j.contains("warmup_lines")) read_key(j, "warmup_lines", warmup_lines);
  if (j.contains("fta_string_only")) read_key(j, "fta_string_only", fta_string_only);
  if (j.contains("clip_norm")) {
    double v = 0.0;
    read_key(j, "clip_norm", v);
    clip_norm = v;
  }
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("config", "config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  RunConfig cfg;
  cfg.merge_json(j);
  return cfg;
}

void RunConfig::validate(const std::string& command) const {
  auto need = [&](const std::filesystem::path& p, const char* flag) {
    if (p.empty()) throw Error("config", command + " requires --" + flag);
  };
  need(input, "input");
  if (command == "train") need(checkpoint, "checkpoint");
  if (command == "parse") {
    need(checkpoint, "checkpoint");
    need(out, "out");
  }
  if (command == "eval" && pred.empty()) need(checkpoint, "checkpoint");
  if (command == "bench") need(checkpoint, "checkpoint");
  if (threads == 0 || batch_size == 0 || epochs == 0 || per_template_cap == 0 || repeats == 0 ||
      max_seq_len == 0 || max_seq_len % 4 != 0) {
    throw Error("config", "numeric options must be positive (max_seq_len a multiple of 4)");
  }
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
  cfg.validate("train");
  const auto records = ingest_csv(cfg.input, TemplateColumn::kRequired);
  std::vector<LabeledMessage> corpus;
  corpus.reserve(records.size());
  for (const auto& r : records) corpus.push_back({r.content, *r.event_template});
  const TrainingSet set = build_training_set(corpus, cfg.per_template_cap, cfg.seed);
  log << "training examples: " << set.examples.size() << " of " << corpus.size()
      << " lines (alignment failures: " << set.failures.size() << ")\n";
  for (const auto& f : set.failures) {
    log << "  skipped line " << records[f.index].line_id << ": template '" << f.template_text
        << "' does not align\n";
  }

  ModelConfig mc;
  mc.max_seq_len = cfg.max_seq_len;
  TrainConfig tc;
  tc.batch_size = cfg.batch_size;
  tc.epochs = cfg.epochs;
  tc.learning_rate = cfg.learning_rate;
  tc.weight_decay = cfg.weight_decay;
  tc.clip_norm = cfg.clip_norm;
  tc.per_template_cap = cfg.per_template_cap;
  tc.seed = cfg.seed;
  const TrainResult result = train(set.examples, mc, tc, [&](std::size_t epoch, double loss) {
    log << "epoch " << epoch << " mean_nll " << std::setprecision(6) << loss << '\n';
  });
  save_checkpoint(result.model, cfg.checkpoint);
  log << "checkpoint written to " << cfg.checkpoint.string() << '\n';
}

void cmd_parse(const RunConfig& cfg, std::ostream& log) {
  cfg.validate("parse");
  const auto records = ingest_csv(cfg.input, TemplateColumn::kOptional);
  const Model model = load_model(cfg);
  const ParseRun run = run_parse(cfg, model, records);
  write_parse_outputs(cfg.out, records, run.results);
  log << "parsed " << run.stats.lines << " lines (" << (cfg.use_cache ? "cached" : "cacheless")
      << "), model calls " << run.stats.model_calls << ", cache hits " << run.stats.cache_hits
      << ", ambiguous hits " << run.stats.ambiguous_hits << '\n';
  if (run.truncated > 0) {
    log << "warning: " << run.truncated << " lines exceeded max_seq_len " << cfg.max_seq_len
        << "; their tails were labeled static\n";
  }
}

void cmd_eval(const RunConfig& cfg, std::ostream& log) {
  cfg.validate("eval");
  const auto gt_records = ingest_csv(cfg.input, TemplateColumn::kRequired);
  std::vector<LoghubRecord> pred_records;
  std::map<MessageId, ParameterMask> masks;
  if (!cfg.pred.empty()) {
    pred_records = ingest_csv(cfg.pred, TemplateColumn::kRequired);
    for (const auto& r : pred_records) {
      if (r.parameter_mask) masks[r.line_id] = ParameterMask::from_string(*r.parameter_mask);
    }
  } else {
    const Model model = load_model(cfg);
    const ParseRun run = run_parse(cfg, model, gt_records);
    for (std::size_t i = 0; i < gt_records.size(); ++i) {
      LoghubRecord r = gt_records[i];
      r.event_template = run.results[i].tmpl.text;
      masks[r.line_id] = run.results[i].mask;
      pred_records.push_back(std::move(r));
    }
  }
  EvalOptions options;
  options.fta_string_only = cfg.fta_string_only;
  const EvalReport report = build_report(to_corpus(pred_records), to_corpus(gt_records), &masks, options);
  write_report_table(log, report);
  for (auto id : report.failed_ids) log << "  unalignable ground truth: line " << id << '\n';
  if (!cfg.out.empty()) {
    ensure_dir(cfg.out);
    auto csv = open_output(cfg.out / "report.csv");
    csv << report_csv_header() << '\n' << report_csv_row(report) << '\n';
    auto txt = open_output(cfg.out / "report.txt");
    write_report_table(txt, report);
  }
}

void cmd_bench(const RunConfig& cfg, std::ostream& log) {
  cfg.validate("bench");
  const auto records = ingest_csv(cfg.input, TemplateColumn::kOptional);
  const Model model = load_model(cfg);
  const ModelPredictor predictor(model);
  BenchOptions options;
  options.threads = cfg.threads;
  options.repeats = cfg.repeats;
  options.warmup_lines = cfg.warmup_lines;
  const auto messages = contents(records);
  const BenchReport r = run_benchmark(predictor, messages, options);
  log << std::fixed << std::setprecision(1) << "lines               " << r.lines << '\n'
      << "cacheless lines/s   " << r.cacheless.lines_per_second << '\n'
      << "cached lines/s      " << r.cached.lines_per_second << '\n'
      << std::setprecision(3) << "speedup             " << r.speedup() << '\n'
      << "cache hit rate      " << r.hit_rate << '\n'
      << "cached templates    " << r.cached_templates << '\n';
  log.unsetf(std::ios::fixed);
  if (!cfg.out.empty()) {
    ensure_dir(cfg.out);
    auto csv = open_output(cfg.out / "bench.csv");
    csv << "lines,cacheless_lines_per_s,cached_lines_per_s,speedup,hit_rate,cached_templates\n"
        << r.lines << ',' << r.cacheless.lines_per_second << ',' << r.cached.lines_per_second << ','
        << r.speedup() << ',' << r.hit_rate << ',' << r.cached_templates << '\n';
  }
}

std::string error_line(const std::string& code, const std::string& message) {
  return "error " + json{{"code", code}, {"message", message}}.dump();
}

}  // namespace bcdlog
