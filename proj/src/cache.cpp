#include "bcdlog/cache.hpp"

#include <algorithm>
#include <fstream>

#include "bcdlog/errors.hpp"

namespace bcdlog {
namespace {

constexpr std::size_t kKeyedTokens = 2;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

bool has_placeholder(std::string_view token) { return token.find(kPlaceholder) != std::string_view::npos; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

std::optional<ParameterMask> match_template(const Template& tmpl, std::string_view message) {
  try {
    Alignment a = align_template(CharSequence::from_utf8(message), tmpl);
    if (a.empty_placeholders != 0) return std::nullopt;
    return std::move(a.mask);
  } catch (const AlignmentError&) {
    return std::nullopt;
  }
}

ParseCache::ParseCache() = default;
ParseCache::~ParseCache() = default;
ParseCache::ParseCache(ParseCache&&) noexcept = default;
ParseCache& ParseCache::operator=(ParseCache&&) noexcept = default;

bool ParseCache::insert(const Template& tmpl) {
  const auto tokens = tokenize(tmpl.text);
  auto& root = roots_[tokens.size()];
  if (!root) root = std::make_unique<Node>();
  Node* node = root.get();
  for (std::size_t level = 0; level < std::min(kKeyedTokens, tokens.size()); ++level) {
    const std::string& tok = tokens[level];
    std::unique_ptr<Node>* child = nullptr;
    if (has_placeholder(tok)) {
      child = &node->wildcard;
    } else {
      child = &node->literal[tok];
    }
    if (!*child) *child = std::make_unique<Node>();
    node = child->get();
  }
  const bool present = std::any_of(node->leaf.begin(), node->leaf.end(),
                                   [&](const Entry& e) { return e.tmpl == tmpl; });
  if (present) return false;
  node->leaf.push_back({templates_.size(), tmpl});
  templates_.push_back(tmpl);
  return true;
}

std::optional<CacheHit> ParseCache::lookup(std::string_view message) const {
  const auto tokens = tokenize(message);
  const auto root = roots_.find(tokens.size());
  if (root == roots_.end()) return std::nullopt;

  std::vector<const Node*> frontier{root->second.get()};
  std::vector<const Node*> next;
  for (std::size_t level = 0; level < std::min(kKeyedTokens, tokens.size()); ++level) {
    next.clear();
    for (const Node* node : frontier) {
      const auto it = node->literal.find(tokens[level]);
      if (it != node->literal.end()) next.push_back(it->second.get());
      if (node->wildcard) next.push_back(node->wildcard.get());
    }
    frontier.swap(next);
    if (frontier.empty()) return std::nullopt;
  }

  std::vector<const Entry*> candidates;
  for (const Node* node : frontier) {
    for (const auto& e : node->leaf) candidates.push_back(&e);
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Entry* a, const Entry* b) { return a->seq < b->seq; });

  std::optional<CacheHit> hit;
  for (const Entry* e : candidates) {
    auto mask = match_template(e->tmpl, message);
    if (!mask) continue;
    if (hit) {
      ++hit->matching_candidates;
    } else {
      hit = CacheHit{e->tmpl, std::move(*mask), 1};
    }
  }
  return hit;
}

void ParseCache::dump(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("io", "cannot write cache dump '" + path.string() + "'");
  for (const auto& t : templates_) out << t.text << '\n';
}

ParseCache ParseCache::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot read cache dump '" + path.string() + "'");
  ParseCache cache;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) cache.insert(Template{line});
  }
  return cache;
}

}  // namespace bcdlog
