#include "synthetic.hpp"

#include <fstream>
#include <random>
#include <set>

#include "bcdlog/loghub_csv.hpp"

namespace synthetic {
namespace {

std::string draw(const std::string& slot, std::mt19937_64& rng) {
  auto uniform = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };
  if (slot == "int") return std::to_string(uniform(1, 9999999));
  if (slot == "small") return std::to_string(uniform(0, 64));
  if (slot == "port") return std::to_string(uniform(1024, 65535));
  if (slot == "ip") {
    return std::to_string(uniform(1, 254)) + "." + std::to_string(uniform(0, 255)) + "." +
           std::to_string(uniform(0, 255)) + "." + std::to_string(uniform(1, 254));
  }
  if (slot == "float") return std::to_string(uniform(0, 999)) + "." + std::to_string(uniform(0, 99));
  if (slot == "hex") {
    static const char* digits = "0123456789abcdef";
    std::string s;
    const long len = uniform(8, 16);
    for (long i = 0; i < len; ++i) s.push_back(digits[uniform(0, 15)]);
    return s;
  }
  return "?";
}

Line instantiate(const std::string& pattern, std::mt19937_64& rng) {
  Line line;
  std::size_t i = 0;
  while (i < pattern.size()) {
    if (pattern[i] == '{') {
      const std::size_t close = pattern.find('}', i);
      line.message += draw(pattern.substr(i + 1, close - i - 1), rng);
      line.template_text += "<*>";
      i = close + 1;
    } else {
      line.message.push_back(pattern[i]);
      line.template_text.push_back(pattern[i]);
      ++i;
    }
  }
  return line;
}

}  // namespace

const std::vector<std::string>& catalog() {
  static const std::vector<std::string> patterns = {
      "Received block blk_{int} of size {int} from /{ip}:{port}",
      "Connection closed by {ip} port {port} after {int} ms",
      "Job {int} finished with exit code {small}",
      "Deleting cache file /var/tmp/{hex}.tmp",
      "CPU load {float} on core {small}",
      "Session {hex} expired after {int} seconds",
      "Starting worker thread {small} of {small}",
      "Read {int} bytes in {float} ms",
      "GC pause {int}ms heap {int}K->{int}K",
      "Heartbeat from node-{small} latency={float}s",
  };
  return patterns;
}

std::vector<Line> repeated_corpus(std::size_t count, std::uint64_t seed, std::size_t templates) {
  std::mt19937_64 rng(seed);
  std::vector<Line> lines;
  lines.reserve(count);
  for (std::size_t i = 0; i < count; ++i) lines.push_back(instantiate(catalog()[i % templates], rng));
  return lines;
}

std::vector<Line> unique_corpus(std::size_t count, std::uint64_t seed) {
  static const std::vector<std::string> words = {
      "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel", "india", "juliet",
      "kilo", "lima", "mike", "november", "oscar", "papa", "quebec", "romeo", "sierra", "tango",
      "uniform", "victor", "whiskey", "xray", "yankee", "zulu", "service", "request", "queue", "disk"};
  std::mt19937_64 rng(seed);
  std::set<std::string> seen;
  std::vector<Line> lines;
  while (lines.size() < count) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(3, 7)(rng);
    std::string pattern;
    for (std::size_t w = 0; w < n; ++w) {
      if (w > 0) pattern += ' ';
      pattern += words[std::uniform_int_distribution<std::size_t>(0, words.size() - 1)(rng)];
    }
    pattern += " id={int}";
    if (!seen.insert(pattern).second) continue;
    lines.push_back(instantiate(pattern, rng));
  }
  return lines;
}

void write_csv(const std::filesystem::path& path, const std::vector<Line>& lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << "LineId,Content,EventId,EventTemplate\n";
  std::set<std::string> ids;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out << i + 1 << ',' << bcdlog::csv_escape(lines[i].message) << ",E" << i % 97 << ','
        << bcdlog::csv_escape(lines[i].template_text) << '\n';
  }
}

}  // namespace synthetic
