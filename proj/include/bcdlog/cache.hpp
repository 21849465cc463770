#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bcdlog/mask_codec.hpp"

namespace bcdlog {

// Splits on runs of whitespace.
std::vector<std::string> tokenize(std::string_view text);

// A cache hit requires the template to align with the message using only
// non-empty placeholder matches, so the returned mask always renders the
// template back exactly.
std::optional<ParameterMask> match_template(const Template& tmpl, std::string_view message);

struct CacheHit {
  Template tmpl;
  ParameterMask mask;
  // How many stored candidates matched; > 1 means the cache is ambiguous for
  // this message and the earliest-inserted template was returned.
  std::size_t matching_candidates = 1;
};

// Fixed-depth template tree: token count -> first token -> second token ->
// leaf. Template tokens containing a placeholder are routed to the wildcard
// branch of their level. Lookups are const and may run concurrently; insert
// needs exclusive access.
class ParseCache {
 public:
  ParseCache();
  ~ParseCache();
  ParseCache(ParseCache&&) noexcept;
  ParseCache& operator=(ParseCache&&) noexcept;

  std::optional<CacheHit> lookup(std::string_view message) const;

  // Returns false if the template was already stored.
  bool insert(const Template& tmpl);

  std::size_t size() const noexcept { return templates_.size(); }
  // Stored templates in insertion order.
  const std::vector<Template>& templates() const noexcept { return templates_; }

  // One template per line (warm starts, inspection).
  void dump(const std::filesystem::path& path) const;
  static ParseCache load(const std::filesystem::path& path);

 private:
  struct Entry {
    std::size_t seq;
    Template tmpl;
  };
  struct Node {
    std::map<std::string, std::unique_ptr<Node>, std::less<>> literal;
    std::unique_ptr<Node> wildcard;
    std::vector<Entry> leaf;
  };

  std::map<std::size_t, std::unique_ptr<Node>> roots_;
  std::vector<Template> templates_;
};

}  // namespace bcdlog
