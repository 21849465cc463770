#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bcdlog/mask_codec.hpp"

namespace bcdlog {

using MessageId = std::int64_t;

struct ParsedEntry {
  MessageId id = 0;
  std::string message;
  std::string template_text;
};

// Parsed (or ground-truth) corpus with a template -> message-id index.
// Duplicate ids are rejected with bcdlog::Error("duplicate_id").
class ParsedCorpus {
 public:
  ParsedCorpus() = default;
  explicit ParsedCorpus(std::vector<ParsedEntry> entries);

  const std::vector<ParsedEntry>& entries() const noexcept { return entries_; }
  const std::map<std::string, std::set<MessageId>>& template_index() const noexcept {
    return index_;
  }
  std::size_t size() const noexcept { return entries_.size(); }
  const ParsedEntry* find(MessageId id) const;

 private:
  std::vector<ParsedEntry> entries_;
  std::map<MessageId, std::size_t> by_id_;
  std::map<std::string, std::set<MessageId>> index_;
};

// Both corpora must hold exactly the same message ids; otherwise
// bcdlog::Error("id_mismatch") is thrown.
double parsing_accuracy(const ParsedCorpus& pred, const ParsedCorpus& gt);

struct TemplateF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t correct = 0;
};

// A predicted template is correct when its text equals a ground-truth
// template and, unless `string_only`, it covers exactly the same messages.
TemplateF1 template_f1(const ParsedCorpus& pred, const ParsedCorpus& gt, bool string_only = false);

struct MaskAgreement {
  double pma = 0.0;       // messages whose mask matches at every position
  double per_char = 0.0;  // matching positions over all positions
};

// Pairs must have equal lengths (LengthMismatchError otherwise).
MaskAgreement parameter_mask_agreement(std::span<const ParameterMask> pred,
                                       std::span<const ParameterMask> gt);

struct EvalCounts {
  std::size_t messages = 0;
  std::size_t gt_templates = 0;
  std::size_t predicted_templates = 0;
  std::size_t alignment_failures = 0;
};

struct EvalReport {
  double pa = 0.0;
  TemplateF1 fta;
  MaskAgreement mask;
  EvalCounts counts;
  // Ground-truth lines whose template could not be aligned; excluded from
  // the mask metrics.
  std::vector<MessageId> failed_ids;
};

struct EvalOptions {
  bool fta_string_only = false;
};

// Predicted masks are taken from `pred_masks` when given (keyed by message
// id), otherwise derived from the predicted template. Ground-truth masks are
// always derived from the ground-truth templates.
EvalReport build_report(const ParsedCorpus& pred, const ParsedCorpus& gt,
                        const std::map<MessageId, ParameterMask>* pred_masks = nullptr,
                        const EvalOptions& options = {});

void write_report_table(std::ostream& out, const EvalReport& report);
std::string report_csv_header();
std::string report_csv_row(const EvalReport& report);

}  // namespace bcdlog
