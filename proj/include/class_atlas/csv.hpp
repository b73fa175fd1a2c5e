// Copyright 2026 The class-atlas Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cmath>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "class_atlas/error.hpp"

namespace class_atlas::csv {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Splits one CSV record. Double-quoted cells may contain commas and
/// doubled quotes; embedded newlines are not supported.
inline std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(ch);
      }
    } else if (ch == '"' && trim(cell).empty()) {
      cell.clear();
      quoted = true;
    } else if (ch == ',') {
      cells.emplace_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(ch);
    }
  }
  if (quoted) throw Error(ErrorCode::MalformedRow, "unterminated quoted cell");
  cells.emplace_back(trim(cell));
  return cells;
}

/// Reads the next non-empty line; returns false at end of stream.
inline bool next_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return true;
    }
  }
  return false;
}

/// Locale-independent number parse; '.' is the only decimal separator.
inline std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ptr != text.data() + text.size()) return std::nullopt;
  if (ec == std::errc::result_out_of_range) {
    // from_chars leaves value untouched here; tell overflow from underflow.
    const bool negative = text.front() == '-';
    std::string_view body = negative ? text.substr(1) : text;
    const auto exp_pos = body.find_first_of("eE");
    const bool underflow = exp_pos != std::string_view::npos
                               ? (exp_pos + 1 < body.size() && body[exp_pos + 1] == '-')
                               : (body.front() == '0' || body.front() == '.');
    if (underflow) return negative ? -0.0 : 0.0;
    return negative ? -HUGE_VAL : HUGE_VAL;
  }
  if (ec != std::errc()) return std::nullopt;
  return value;
}

inline std::string quote(std::string_view cell) {
  if (cell.find_first_of(",\"") == std::string_view::npos) return std::string(cell);
  std::string out = "\"";
  for (char ch : cell) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

/// Shortest round-trip decimal form of a double.
inline std::string format_number(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

}  // namespace class_atlas::csv
