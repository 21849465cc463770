#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bcdlog {

// One row of a Loghub structured CSV (`Content`, `EventTemplate`, and
// optionally `LineId`; other columns are ignored). Files written by
// `bcdlog parse` also carry a `ParameterMask` column.
struct LoghubRecord {
  std::int64_t line_id = 0;
  std::string content;
  std::optional<std::string> event_template;
  std::optional<std::string> parameter_mask;
};

enum class TemplateColumn { kOptional, kRequired };

// RFC 4180: quoted fields may contain commas, doubled quotes and newlines.
// Accepts LF or CRLF line endings and a leading UTF-8 BOM.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

std::string csv_escape(std::string_view field);

// Header-driven; rows are returned in file order. Without a `LineId` column
// the 1-based row number is used. Throws bcdlog::Error("csv") on a missing
// `Content` column, a missing `EventTemplate` column when required, or a
// malformed row.
std::vector<LoghubRecord> ingest_csv(const std::filesystem::path& path,
                                     TemplateColumn templates = TemplateColumn::kOptional);
std::vector<LoghubRecord> ingest_csv_text(std::string_view text,
                                          TemplateColumn templates = TemplateColumn::kOptional);

}  // namespace bcdlog
