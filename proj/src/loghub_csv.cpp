#include "bcdlog/loghub_csv.hpp"

#include <charconv>
#include <fstream>
#include <iterator>

#include "bcdlog/errors.hpp"

namespace bcdlog {

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t i = 0;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };
  while (i < text.size()) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          i += 2;
          continue;
        }
        quoted = false;
      } else {
        field.push_back(c);
      }
      ++i;
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n' || c == '\r') {
      end_row();
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
    } else {
      field.push_back(c);
      field_started = true;
    }
    ++i;
  }
  if (quoted) throw Error("csv", "unterminated quoted field");
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos && !field.empty() &&
      field.front() != ' ' && field.back() != ' ') {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<LoghubRecord> ingest_csv_text(std::string_view text, TemplateColumn templates) {
  auto rows = parse_csv(text);
  if (rows.empty()) throw Error("csv", "CSV input has no header row");
  const auto& header = rows.front();
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  const auto content = column("Content");
  const auto tmpl = column("EventTemplate");
  const auto line_id = column("LineId");
  const auto mask = column("ParameterMask");
  if (!content) throw Error("csv", "CSV header has no 'Content' column");
  if (!tmpl && templates == TemplateColumn::kRequired) {
    throw Error("csv", "CSV header has no 'EventTemplate' column");
  }

  std::vector<LoghubRecord> records;
  records.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    auto& row = rows[r];
    if (row.size() == 1 && row[0].empty()) continue;  // blank line
    if (row.size() != header.size()) {
      throw Error("csv", "row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                             " fields, header has " + std::to_string(header.size()));
    }
    LoghubRecord rec;
    rec.line_id = static_cast<std::int64_t>(records.size() + 1);
    if (line_id) {
      const std::string& s = row[*line_id];
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), rec.line_id);
      if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error("csv", "row " + std::to_string(r + 1) + " has a non-integer LineId '" + s + "'");
      }
    }
    rec.content = std::move(row[*content]);
    if (tmpl) rec.event_template = std::move(row[*tmpl]);
    if (mask) rec.parameter_mask = std::move(row[*mask]);
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<LoghubRecord> ingest_csv(const std::filesystem::path& path, TemplateColumn templates) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open '" + path.string() + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return ingest_csv_text(text, templates);
}

}  // namespace bcdlog
