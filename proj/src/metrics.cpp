#include "bcdlog/metrics.hpp"

#include <iomanip>
#include <sstream>

#include "bcdlog/errors.hpp"

namespace bcdlog {
namespace {

void require_same_ids(const ParsedCorpus& pred, const ParsedCorpus& gt) {
  if (pred.size() != gt.size()) {
    throw Error("id_mismatch", "predicted corpus has " + std::to_string(pred.size()) +
                                   " messages, ground truth has " + std::to_string(gt.size()));
  }
  for (const auto& e : gt.entries()) {
    if (pred.find(e.id) == nullptr) {
      throw Error("id_mismatch", "message id " + std::to_string(e.id) + " missing from prediction");
    }
  }
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ParsedCorpus::ParsedCorpus(std::vector<ParsedEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (!by_id_.emplace(e.id, i).second) {
      throw Error("duplicate_id", "duplicate message id " + std::to_string(e.id));
    }
    index_[e.template_text].insert(e.id);
  }
}

const ParsedEntry* ParsedCorpus::find(MessageId id) const {
  const auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &entries_[it->second];
}

double parsing_accuracy(const ParsedCorpus& pred, const ParsedCorpus& gt) {
  require_same_ids(pred, gt);
  std::size_t exact = 0;
  for (const auto& e : gt.entries()) {
    if (pred.find(e.id)->template_text == e.template_text) ++exact;
  }
  return ratio(exact, gt.size());
}

TemplateF1 template_f1(const ParsedCorpus& pred, const ParsedCorpus& gt, bool string_only) {
  require_same_ids(pred, gt);
  TemplateF1 out;
  const auto& gt_index = gt.template_index();
  for (const auto& [text, ids] : pred.template_index()) {
    const auto it = gt_index.find(text);
    if (it != gt_index.end() && (string_only || it->second == ids)) ++out.correct;
  }
  out.precision = ratio(out.correct, pred.template_index().size());
  out.recall = ratio(out.correct, gt_index.size());
  const double sum = out.precision + out.recall;
  out.f1 = sum == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / sum;
  return out;
}

MaskAgreement parameter_mask_agreement(std::span<const ParameterMask> pred,
                                       std::span<const ParameterMask> gt) {
  if (pred.size() != gt.size()) {
    throw LengthMismatchError("mask lists differ in length");
  }
  std::size_t exact = 0;
  std::size_t positions = 0;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (pred[i].size() != gt[i].size()) {
      throw LengthMismatchError("mask " + std::to_string(i) + " has length " +
                                std::to_string(pred[i].size()) + ", expected " +
                                std::to_string(gt[i].size()));
    }
    std::size_t same = 0;
    for (std::size_t j = 0; j < gt[i].size(); ++j) same += pred[i].bits[j] == gt[i].bits[j];
    agree += same;
    positions += gt[i].size();
    if (same == gt[i].size()) ++exact;
  }
  MaskAgreement out;
  out.pma = ratio(exact, gt.size());
  // An all-empty corpus agrees trivially.
  out.per_char = positions == 0 ? (gt.empty() ? 0.0 : 1.0) : ratio(agree, positions);
  return out;
}

EvalReport build_report(const ParsedCorpus& pred, const ParsedCorpus& gt,
                        const std::map<MessageId, ParameterMask>* pred_masks,
                        const EvalOptions& options) {
  EvalReport report;
  report.pa = parsing_accuracy(pred, gt);
  report.fta = template_f1(pred, gt, options.fta_string_only);
  report.counts.messages = gt.size();
  report.counts.gt_templates = gt.template_index().size();
  report.counts.predicted_templates = pred.template_index().size();

  std::vector<ParameterMask> pm;
  std::vector<ParameterMask> gm;
  for (const auto& e : gt.entries()) {
    const CharSequence msg = CharSequence::from_utf8(e.message);
    ParameterMask gt_mask;
    try {
      gt_mask = derive_ground_truth_mask(msg, Template{e.template_text});
    } catch (const AlignmentError&) {
      report.failed_ids.push_back(e.id);
      continue;
    }
    ParameterMask p;
    const auto* given = pred_masks != nullptr ? &*pred_masks : nullptr;
    if (given != nullptr && given->contains(e.id)) {
      p = given->at(e.id);
    } else {
      // An unalignable prediction counts as all-static.
      try {
        p = derive_ground_truth_mask(msg, Template{pred.find(e.id)->template_text});
      } catch (const AlignmentError&) {
        p.bits.assign(msg.size(), 0);
      }
    }
    if (p.size() != gt_mask.size()) {
      throw LengthMismatchError("predicted mask for id " + std::to_string(e.id) +
                                " does not match the message length");
    }
    pm.push_back(std::move(p));
    gm.push_back(std::move(gt_mask));
  }
  report.counts.alignment_failures = report.failed_ids.size();
  report.mask = parameter_mask_agreement(pm, gm);
  return report;
}

void write_report_table(std::ostream& out, const EvalReport& r) {
  const auto old_flags = out.flags();
  const auto old_precision = out.precision();
  out << std::fixed << std::setprecision(4);
  out << "metric               value\n"
      << "PA                   " << r.pa << "\n"
      << "FTA precision        " << r.fta.precision << "\n"
      << "FTA recall           " << r.fta.recall << "\n"
      << "FTA                  " << r.fta.f1 << "\n"
      << "PMA                  " << r.mask.pma << "\n"
      << "per-char agreement   " << r.mask.per_char << "\n"
      << "messages             " << r.counts.messages << "\n"
      << "gt templates         " << r.counts.gt_templates << "\n"
      << "predicted templates  " << r.counts.predicted_templates << "\n"
      << "alignment failures   " << r.counts.alignment_failures << "\n";
  out.flags(old_flags);
  out.precision(old_precision);
}

std::string report_csv_header() {
  return "pa,fta_precision,fta_recall,fta,pma,per_char,messages,gt_templates,predicted_templates,"
         "alignment_failures";
}

std::string report_csv_row(const EvalReport& r) {
  std::ostringstream out;
  out << std::setprecision(6) << r.pa << ',' << r.fta.precision << ',' << r.fta.recall << ','
      << r.fta.f1 << ',' << r.mask.pma << ',' << r.mask.per_char << ',' << r.counts.messages << ','
      << r.counts.gt_templates << ',' << r.counts.predicted_templates << ','
      << r.counts.alignment_failures;
  return out.str();
}

}  // namespace bcdlog
