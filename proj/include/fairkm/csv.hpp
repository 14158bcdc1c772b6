#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fairkm/dataset.hpp"
#include "fairkm/error.hpp"

namespace fairkm {

namespace csv {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line on which the record starts
};

// RFC-4180 tokenizer: quoted fields, doubled quotes, embedded separators and
// newlines inside quotes, LF or CRLF line endings. Blank lines are skipped.
inline std::vector<Record> parse(std::string_view text) {
  std::vector<Record> out;
  Record cur;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool record_has_content = false;
  std::size_t line = 1;
  cur.line = 1;

  auto end_field = [&] {
    cur.fields.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    if (record_has_content || !cur.fields.empty()) {
      end_field();
      out.push_back(std::move(cur));
    }
    cur = Record{};
    field.clear();
    field_was_quoted = false;
    record_has_content = false;
  };

  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted) {
          throw ParseError("unexpected quote inside unquoted field", line,
                           cur.fields.size() + 1);
        }
        in_quotes = true;
        field_was_quoted = true;
        record_has_content = true;
        break;
      case ',':
        end_field();
        record_has_content = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        cur.line = line;
        break;
      default:
        if (field_was_quoted) {
          throw ParseError("text after closing quote", line,
                           cur.fields.size() + 1);
        }
        field.push_back(c);
        record_has_content = true;
    }
  }
  if (in_quotes) {
    throw ParseError("unterminated quoted field", line, cur.fields.size() + 1);
  }
  end_record();
  return out;
}

inline std::vector<Record> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

inline std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Empty cells, "?" and "NA" count as missing.
inline bool is_missing(std::string_view cell) noexcept {
  const auto t = trim(cell);
  return t.empty() || t == "?" || t == "NA";
}

inline std::optional<double> parse_number(std::string_view cell) noexcept {
  auto t = trim(cell);
  if (!t.empty() && t.front() == '+') t.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

}  // namespace csv

struct CsvOptions {
  std::string sensitive_column;
  std::optional<std::string> id_column;
};

// Loads a CSV into a Dataset.
//
// Column roles: the sensitive column becomes dense group labels in order of
// first appearance; the optional id column becomes point ids; every other
// column is a feature. A feature column whose cells are all numeric is kept
// as is. A column with no numeric cell is categorical and is one-hot encoded
// (levels in order of first appearance, named "column=level"). A column that
// mixes numeric and non-numeric cells is a parse error at the first cell
// that disagrees with the column's first value. Rows with any missing cell
// are dropped and counted in metadata().dropped_rows.
inline Dataset load_csv(const std::filesystem::path& path,
                        const CsvOptions& options) {
  const auto records = csv::read_file(path);
  if (records.empty()) throw SchemaError("missing header row: " + path.string());
  const auto& header = records.front().fields;

  auto find_column = [&](const std::string& name) -> std::size_t {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (csv::trim(header[c]) == name) return c;
    }
    throw SchemaError("column not found: '" + name + "' in " + path.string());
  };
  const std::size_t sens_col = find_column(options.sensitive_column);
  std::optional<std::size_t> id_col;
  if (options.id_column) id_col = find_column(*options.id_column);

  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != sens_col && (!id_col || c != *id_col)) feature_cols.push_back(c);
  }
  if (feature_cols.empty()) throw SchemaError("no feature columns in " + path.string());

  // Keep complete rows only.
  std::vector<const csv::Record*> rows;
  std::size_t dropped = 0;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) +
                           " fields, found " + std::to_string(rec.fields.size()),
                       rec.line, std::min(rec.fields.size(), header.size()) + 1);
    }
    bool missing = false;
    for (const auto& f : rec.fields) missing = missing || csv::is_missing(f);
    if (missing) {
      ++dropped;
      continue;
    }
    rows.push_back(&rec);
  }

  // Decide numeric vs categorical per feature column from its first value.
  struct ColumnPlan {
    std::size_t source;
    bool numeric;
    std::vector<std::string> levels;
    std::unordered_map<std::string, std::size_t> level_index;
  };
  std::vector<ColumnPlan> plans;
  for (std::size_t c : feature_cols) {
    ColumnPlan plan{c, true, {}, {}};
    if (!rows.empty()) {
      plan.numeric = csv::parse_number(rows.front()->fields[c]).has_value();
    }
    for (const auto* rec : rows) {
      const auto& cell = rec->fields[c];
      const auto value = csv::parse_number(cell);
      if (plan.numeric) {
        if (!value) {
          throw ParseError("cannot parse '" + cell + "' as a number in column '" +
                               header[c] + "'",
                           rec->line, c + 1);
        }
        if (!std::isfinite(*value)) {
          throw ParseError("non-finite value '" + cell + "' in column '" +
                               header[c] + "'",
                           rec->line, c + 1);
        }
      } else {
        if (value) {
          throw ParseError("numeric value '" + cell +
                               "' in categorical column '" + header[c] + "'",
                           rec->line, c + 1);
        }
        std::string level(csv::trim(cell));
        if (plan.level_index.emplace(level, plan.levels.size()).second) {
          plan.levels.push_back(std::move(level));
        }
      }
    }
    plans.push_back(std::move(plan));
  }

  Dataset::Metadata meta;
  meta.dropped_rows = dropped;
  for (const auto& plan : plans) {
    if (plan.numeric) {
      meta.feature_names.emplace_back(csv::trim(header[plan.source]));
    } else {
      for (const auto& level : plan.levels) {
        meta.feature_names.push_back(std::string(csv::trim(header[plan.source])) +
                                     "=" + level);
      }
    }
  }
  const std::size_t d = meta.feature_names.size();

  std::vector<double> features;
  features.reserve(rows.size() * d);
  std::vector<GroupId> labels;
  labels.reserve(rows.size());
  std::unordered_map<std::string, GroupId> group_index;
  std::optional<std::vector<std::string>> ids;
  if (id_col) ids.emplace();

  for (const auto* rec : rows) {
    for (const auto& plan : plans) {
      const auto& cell = rec->fields[plan.source];
      if (plan.numeric) {
        features.push_back(*csv::parse_number(cell));
      } else {
        const std::size_t hot = plan.level_index.at(std::string(csv::trim(cell)));
        for (std::size_t l = 0; l < plan.levels.size(); ++l) {
          features.push_back(l == hot ? 1.0 : 0.0);
        }
      }
    }
    std::string group(csv::trim(rec->fields[sens_col]));
    auto [it, inserted] = group_index.emplace(group, meta.group_names.size());
    if (inserted) meta.group_names.push_back(group);
    labels.push_back(it->second);
    if (ids) ids->push_back(rec->fields[*id_col]);
  }

  if (rows.size() < 2) {
    throw ValidityError(path.string() + ": fewer than 2 complete rows (" +
                        std::to_string(dropped) + " dropped for missing cells)");
  }
  if (meta.group_names.size() < 2) {
    throw ValidityError(path.string() + ": sensitive column '" +
                        options.sensitive_column +
                        "' has fewer than 2 distinct values");
  }
  const std::size_t groups = meta.group_names.size();
  return Dataset(std::move(features), d, std::move(labels), groups,
                 std::move(ids), std::move(meta));
}

}  // namespace fairkm
