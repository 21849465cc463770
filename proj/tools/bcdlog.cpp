// bcdlog: character-level log template extraction.
//
//   bcdlog train --input train.csv --checkpoint model.bin
//   bcdlog parse --input logs.csv --checkpoint model.bin --out parsed/ [--no-cache]
//   bcdlog eval  --input gt.csv (--checkpoint model.bin | --pred parsed/parsed.csv) [--out dir]
//   bcdlog bench --input logs.csv --checkpoint model.bin

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "bcdlog/commands.hpp"
#include "bcdlog/errors.hpp"

namespace {

struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> input;
  std::optional<std::string> checkpoint;
  std::optional<std::string> out;
  std::optional<std::string> pred;
  std::optional<std::string> warm_cache;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> max_seq_len;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> repeats;
  std::optional<double> clip_norm;
  bool no_cache = false;
  bool fta_string_only = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON file with run settings (flags take precedence)");
  cmd->add_option("--input", f.input, "Loghub-style structured CSV");
  cmd->add_option("--checkpoint", f.checkpoint, "model checkpoint path");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--threads", f.threads, "worker threads");
  cmd->add_option("--max-seq-len", f.max_seq_len, "characters seen by the model per line");
  cmd->add_flag("--no-cache", f.no_cache, "disable the parsing cache");
}

bcdlog::RunConfig resolve(const Flags& f) {
  bcdlog::RunConfig cfg = f.config ? bcdlog::RunConfig::from_file(*f.config) : bcdlog::RunConfig{};
  if (f.input) cfg.input = *f.input;
  if (f.checkpoint) cfg.checkpoint = *f.checkpoint;
  if (f.out) cfg.out = *f.out;
  if (f.pred) cfg.pred = *f.pred;
  if (f.warm_cache) cfg.warm_cache = *f.warm_cache;
  if (f.seed) cfg.seed = *f.seed;
  if (f.threads) cfg.threads = *f.threads;
  if (f.max_seq_len) cfg.max_seq_len = *f.max_seq_len;
  if (f.batch_size) cfg.batch_size = *f.batch_size;
  if (f.epochs) cfg.epochs = *f.epochs;
  if (f.repeats) cfg.repeats = *f.repeats;
  if (f.clip_norm) cfg.clip_norm = *f.clip_norm;
  if (f.no_cache) cfg.use_cache = false;
  if (f.fta_string_only) cfg.fta_string_only = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bcdlog - character-level log parser"};
  app.require_subcommand(1);
  Flags flags;

  auto* train = app.add_subcommand("train", "train a model from annotated logs");
  add_common(train, flags);
  train->add_option("--batch-size", flags.batch_size, "mini-batch size");
  train->add_option("--epochs", flags.epochs, "training epochs");
  train->add_option("--clip-norm", flags.clip_norm, "clip the gradient norm (e.g. 5); off by default");

  auto* parse = app.add_subcommand("parse", "extract templates");
  add_common(parse, flags);
  parse->add_option("--warm-cache", flags.warm_cache, "template dump to preload into the cache");

  auto* eval = app.add_subcommand("eval", "score templates against ground truth");
  add_common(eval, flags);
  eval->add_option("--pred", flags.pred, "existing parse output to score");
  eval->add_flag("--fta-string-only", flags.fta_string_only,
                 "count a template correct on string equality alone");

  auto* bench = app.add_subcommand("bench", "measure cached and cacheless throughput");
  add_common(bench, flags);
  bench->add_option("--repeats", flags.repeats, "timed passes per mode (best is reported)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << bcdlog::error_line("usage", e.what()) << '\n';
    return 2;
  }

  try {
    const bcdlog::RunConfig cfg = resolve(flags);
    if (train->parsed()) bcdlog::cmd_train(cfg, std::cout);
    if (parse->parsed()) bcdlog::cmd_parse(cfg, std::cout);
    if (eval->parsed()) bcdlog::cmd_eval(cfg, std::cout);
    if (bench->parsed()) bcdlog::cmd_bench(cfg, std::cout);
  } catch (const bcdlog::Error& e) {
    std::cerr << bcdlog::error_line(e.code(), e.what()) << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << bcdlog::error_line("internal", e.what()) << '\n';
    return 1;
  }
  return 0;
}
