#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"

namespace bcdlog {

struct RunConfig {
  std::filesystem::path input;
  std::filesystem::path checkpoint;
  std::filesystem::path out;
  std::filesystem::path pred;        // eval: score an existing parse instead of running one
  std::filesystem::path warm_cache;  // parse: preload a template dump
  std::uint64_t seed = 42;
  bool use_cache = true;
  std::size_t max_seq_len = 2048;
  std::size_t batch_size = 16;
  std::size_t epochs = 10;
  std::size_t per_template_cap = 50;
  double learning_rate = 1e-3;
  double weight_decay = 1e-4;
  std::size_t threads = 1;
  std::size_t repeats = 1;
  std::size_t warmup_lines = 32;
  bool fta_string_only = false;
  std::optional<double> clip_norm;  // gradient clipping, off unless set

  // Applies keys from a JSON object. Unknown keys and ill-typed values throw
  // bcdlog::Error("config").
  void merge_json(const nlohmann::json& j);
  static RunConfig from_file(const std::filesystem::path& path);
  void validate(const std::string& command) const;
};

// Each command writes a human-readable log to `log` and throws bcdlog::Error
// on failure.
void cmd_train(const RunConfig& cfg, std::ostream& log);
void cmd_parse(const RunConfig& cfg, std::ostream& log);
void cmd_eval(const RunConfig& cfg, std::ostream& log);
void cmd_bench(const RunConfig& cfg, std::ostream& log);

// Formats the single machine-readable failure line printed on stderr.
std::string error_line(const std::string& code, const std::string& message);

}  // namespace bcdlog
