// Copyright 2026 The class-atlas Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "class_atlas/csv.hpp"
#include "class_atlas/error.hpp"
#include "class_atlas/matrix.hpp"

namespace class_atlas {

enum class ScoreKind { Logit, Probability, Rank };

constexpr std::string_view to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::Logit: return "logit";
    case ScoreKind::Probability: return "probability";
    case ScoreKind::Rank: return "rank";
  }
  return "logit";
}

inline std::optional<ScoreKind> parse_score_kind(std::string_view text) {
  if (text == "logit") return ScoreKind::Logit;
  if (text == "probability") return ScoreKind::Probability;
  if (text == "rank") return ScoreKind::Rank;
  return std::nullopt;
}

/// Prediction scores of n samples over m classes. Column j holds the score
/// variable of class j across the sample set.
struct ScoreMatrix {
  std::vector<std::string> class_names;
  std::vector<std::string> sample_ids;
  Matrix values;  // n_samples x n_classes
  ScoreKind kind = ScoreKind::Logit;

  std::size_t n_samples() const noexcept { return values.rows(); }
  std::size_t n_classes() const noexcept { return values.cols(); }

  friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;
};

inline constexpr double kProbabilityRowSumTolerance = 1e-6;

inline std::vector<std::string> default_sample_ids(std::size_t n) {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  return ids;
}

/// Throws the matching ingest error if any ScoreMatrix invariant fails.
inline void check_invariants(const ScoreMatrix& scores) {
  const std::size_t n = scores.n_samples();
  const std::size_t m = scores.n_classes();
  if (scores.class_names.size() != m) {
    throw Error(ErrorCode::SizeMismatch, "class name count does not match matrix width");
  }
  if (scores.sample_ids.size() != n) {
    throw Error(ErrorCode::SizeMismatch, "sample id count does not match matrix height");
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& name : scores.class_names) {
    if (name.empty()) throw Error(ErrorCode::JSONSchemaError, "empty class name");
    if (!seen.insert(name).second) throw Error(ErrorCode::DuplicateClassName, name);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = scores.values.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      if (!std::isfinite(row[j])) {
        throw Error(ErrorCode::NonFiniteValue,
                    "row " + std::to_string(i) + " column " + std::to_string(j));
      }
    }
    if (scores.kind == ScoreKind::Probability) {
      double sum = 0.0;
      for (double v : row) {
        if (v < 0.0 || v > 1.0) {
          throw Error(ErrorCode::RowSumViolation,
                      "row " + std::to_string(i) + " has a probability outside [0,1]");
        }
        sum += v;
      }
      if (std::abs(sum - 1.0) > kProbabilityRowSumTolerance) {
        throw Error(ErrorCode::RowSumViolation,
                    "row " + std::to_string(i) + " sums to " + csv::format_number(sum));
      }
    } else if (scores.kind == ScoreKind::Rank) {
      double sum = 0.0;
      for (double v : row) sum += v;
      const double expected = static_cast<double>(m) * static_cast<double>(m + 1) / 2.0;
      if (sum != expected) {
        throw Error(ErrorCode::RowSumViolation,
                    "rank row " + std::to_string(i) + " sums to " + csv::format_number(sum));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// CSV scores

inline ScoreMatrix parse_scores_csv(std::istream& in, ScoreKind kind) {
  std::string line;
  if (!csv::next_line(in, line)) throw Error(ErrorCode::MalformedRow, "missing header row");
  auto header = csv::split_record(line);
  const bool has_ids = !header.empty() && header.front() == "sample_id";
  const std::size_t offset = has_ids ? 1 : 0;

  ScoreMatrix out;
  out.kind = kind;
  out.class_names.assign(header.begin() + static_cast<std::ptrdiff_t>(offset), header.end());
  {
    std::unordered_set<std::string_view> seen;
    for (const auto& name : out.class_names) {
      if (name.empty()) throw Error(ErrorCode::MalformedRow, "empty class name in header");
      if (!seen.insert(name).second) throw Error(ErrorCode::DuplicateClassName, name);
    }
  }
  const std::size_t m = out.class_names.size();
  if (m == 0) throw Error(ErrorCode::MalformedRow, "header names no classes");

  std::vector<double> values;
  std::size_t row_index = 0;
  while (csv::next_line(in, line)) {
    const auto cells = csv::split_record(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::RaggedRow, "row " + std::to_string(row_index) + " has " +
                                            std::to_string(cells.size()) + " cells, expected " +
                                            std::to_string(header.size()));
    }
    if (has_ids) out.sample_ids.push_back(cells.front());
    for (std::size_t j = 0; j < m; ++j) {
      const auto parsed = csv::parse_number(cells[offset + j]);
      if (!parsed) {
        throw Error(ErrorCode::NonNumericCell, "row " + std::to_string(row_index) + " cell '" +
                                                   cells[offset + j] + "'");
      }
      if (!std::isfinite(*parsed)) {
        throw Error(ErrorCode::NonFiniteValue, "row " + std::to_string(row_index) + " column " +
                                                   out.class_names[j]);
      }
      values.push_back(*parsed);
    }
    ++row_index;
  }
  if (!has_ids) out.sample_ids = default_sample_ids(row_index);
  out.values = Matrix(row_index, m, std::move(values));
  check_invariants(out);
  return out;
}

inline void write_scores_csv(std::ostream& out, const ScoreMatrix& scores) {
  out << "sample_id";
  for (const auto& name : scores.class_names) out << ',' << csv::quote(name);
  out << '\n';
  for (std::size_t i = 0; i < scores.n_samples(); ++i) {
    out << csv::quote(scores.sample_ids[i]);
    for (double v : scores.values.row(i)) out << ',' << csv::format_number(v);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// BSM1 binary container: one JSON header line, 0x0A, then little-endian
// row-major values.

enum class Dtype { F32, F64 };

namespace bsm1 {

inline constexpr std::string_view kMagic = "BSM1";

struct Container {
  nlohmann::ordered_json header;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
};

inline void put_le(std::string& out, std::uint64_t bits, int bytes) {
  for (int b = 0; b < bytes; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
}

inline std::uint64_t get_le(const unsigned char* p, int bytes) {
  std::uint64_t bits = 0;
  for (int b = 0; b < bytes; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return bits;
}

/// Serializes header + payload. The header must already hold every field
/// except dtype, which is filled in here.
inline std::string encode(nlohmann::ordered_json header, std::span<const double> values,
                          Dtype dtype) {
  header["dtype"] = dtype == Dtype::F64 ? "f64" : "f32";
  std::string out = header.dump();
  out.push_back('\n');
  const int width = dtype == Dtype::F64 ? 8 : 4;
  out.reserve(out.size() + values.size() * static_cast<std::size_t>(width));
  for (double v : values) {
    if (dtype == Dtype::F64) {
      put_le(out, std::bit_cast<std::uint64_t>(v), 8);
    } else {
      put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4);
    }
  }
  return out;
}

inline std::size_t require_count(const nlohmann::ordered_json& header, const char* key) {
  if (!header.contains(key) || !header[key].is_number_unsigned()) {
    throw Error(ErrorCode::JSONSchemaError, std::string("header field '") + key +
                                                "' must be a non-negative integer");
  }
  return header[key].get<std::size_t>();
}

inline Container decode(std::string_view bytes) {
  const auto newline = bytes.find('\n');
  if (newline == std::string_view::npos || bytes.substr(0, 1) != "{") {
    throw Error(ErrorCode::BadMagic, "stream does not start with a JSON header line");
  }
  Container c;
  try {
    c.header = nlohmann::ordered_json::parse(bytes.substr(0, newline));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::JSONSchemaError, e.what());
  }
  if (!c.header.is_object()) throw Error(ErrorCode::JSONSchemaError, "header is not an object");
  if (!c.header.contains("magic") || c.header["magic"] != kMagic) {
    throw Error(ErrorCode::BadMagic, "magic is not BSM1");
  }
  c.rows = require_count(c.header, "n");
  c.cols = require_count(c.header, "m");
  if (!c.header.contains("dtype") || !c.header["dtype"].is_string()) {
    throw Error(ErrorCode::JSONSchemaError, "missing dtype");
  }
  const auto dtype = c.header["dtype"].get<std::string>();
  int width = 0;
  if (dtype == "f64") {
    width = 8;
  } else if (dtype == "f32") {
    width = 4;
  } else {
    throw Error(ErrorCode::JSONSchemaError, "dtype must be f32 or f64");
  }
  const auto payload = bytes.substr(newline + 1);
  const std::size_t count = c.rows * c.cols;
  const std::size_t expected = count * static_cast<std::size_t>(width);
  if (payload.size() < expected) {
    throw Error(ErrorCode::TruncatedPayload, "expected " + std::to_string(expected) +
                                                 " payload bytes, found " +
                                                 std::to_string(payload.size()));
  }
  if (payload.size() > expected) {
    throw Error(ErrorCode::TruncatedPayload, "payload has " +
                                                 std::to_string(payload.size() - expected) +
                                                 " unexpected trailing bytes");
  }
  c.values.resize(count);
  const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
  for (std::size_t k = 0; k < count; ++k, p += width) {
    const double v = width == 8 ? std::bit_cast<double>(get_le(p, 8))
                                : static_cast<double>(std::bit_cast<float>(
                                      static_cast<std::uint32_t>(get_le(p, 4))));
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::NonFiniteValue, "payload value " + std::to_string(k));
    }
    c.values[k] = v;
  }
  return c;
}

inline std::vector<std::string> string_list(const nlohmann::ordered_json& header, const char* key,
                                            std::size_t expected) {
  if (!header.contains(key) || !header[key].is_array()) {
    throw Error(ErrorCode::JSONSchemaError, std::string("header field '") + key +
                                                "' must be an array of strings");
  }
  std::vector<std::string> out;
  for (const auto& item : header[key]) {
    if (!item.is_string()) {
      throw Error(ErrorCode::JSONSchemaError, std::string("'") + key + "' holds a non-string");
    }
    out.push_back(item.get<std::string>());
  }
  if (out.size() != expected) {
    throw Error(ErrorCode::JSONSchemaError, std::string("'") + key + "' has " +
                                                std::to_string(out.size()) + " entries, expected " +
                                                std::to_string(expected));
  }
  return out;
}

}  // namespace bsm1

inline std::string read_all(std::istream& in) {
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline ScoreMatrix parse_scores_binary(std::string_view bytes) {
  auto c = bsm1::decode(bytes);
  ScoreMatrix out;
  const auto& header = c.header;
  if (!header.contains("kind") || !header["kind"].is_string()) {
    throw Error(ErrorCode::JSONSchemaError, "missing kind");
  }
  const auto kind = parse_score_kind(header["kind"].get<std::string>());
  if (!kind) throw Error(ErrorCode::JSONSchemaError, "kind must be logit, probability or rank");
  out.kind = *kind;
  out.class_names = bsm1::string_list(header, "classes", c.cols);
  out.sample_ids = header.contains("sample_ids") ? bsm1::string_list(header, "sample_ids", c.rows)
                                                 : default_sample_ids(c.rows);
  out.values = Matrix(c.rows, c.cols, std::move(c.values));
  check_invariants(out);
  return out;
}

inline ScoreMatrix parse_scores_binary(std::istream& in) { return parse_scores_binary(read_all(in)); }

inline std::string write_scores_binary(const ScoreMatrix& scores, Dtype dtype = Dtype::F64) {
  nlohmann::ordered_json header;
  header["magic"] = bsm1::kMagic;
  header["n"] = scores.n_samples();
  header["m"] = scores.n_classes();
  header["dtype"] = nullptr;
  header["kind"] = to_string(scores.kind);
  header["classes"] = scores.class_names;
  header["sample_ids"] = scores.sample_ids;
  return bsm1::encode(std::move(header), scores.values.data(), dtype);
}

/// Dispatches on the first byte: '{' is a BSM1 container, anything else CSV.
inline ScoreMatrix parse_scores(std::istream& in, ScoreKind csv_kind) {
  const std::string bytes = read_all(in);
  if (!bytes.empty() && bytes.front() == '{') return parse_scores_binary(bytes);
  std::istringstream text(bytes);
  return parse_scores_csv(text, csv_kind);
}

// ---------------------------------------------------------------------------
// Labels

struct LabelData {
  std::vector<std::string> sample_ids;
  std::vector<std::vector<std::string>> labels;  // deduplicated, first-appearance order

  std::size_t size() const noexcept { return sample_ids.size(); }
};

inline LabelData parse_labels(std::istream& in) {
  std::string line;
  if (!csv::next_line(in, line)) throw Error(ErrorCode::MalformedRow, "missing header row");
  const auto header = csv::split_record(line);
  if (header.size() != 2 || header[0] != "sample_id" || header[1] != "labels") {
    throw Error(ErrorCode::MalformedRow, "header must be 'sample_id,labels'");
  }
  LabelData out;
  std::size_t row_index = 0;
  while (csv::next_line(in, line)) {
    const auto cells = csv::split_record(line);
    if (cells.size() != 2 || cells[0].empty()) {
      throw Error(ErrorCode::MalformedRow, "row " + std::to_string(row_index));
    }
    std::vector<std::string> set;
    std::string_view rest = cells[1];
    while (true) {
      const auto bar = rest.find('|');
      const auto label = csv::trim(rest.substr(0, bar));
      if (!label.empty() && std::find(set.begin(), set.end(), label) == set.end()) {
        set.emplace_back(label);
      }
      if (bar == std::string_view::npos) break;
      rest.remove_prefix(bar + 1);
    }
    if (set.empty()) throw Error(ErrorCode::EmptyLabelSet, "sample " + cells[0]);
    out.sample_ids.push_back(cells[0]);
    out.labels.push_back(std::move(set));
    ++row_index;
  }
  return out;
}

inline void write_labels(std::ostream& out, const LabelData& data) {
  out << "sample_id,labels\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::string joined;
    for (const auto& label : data.labels[i]) {
      if (!joined.empty()) joined.push_back('|');
      joined += label;
    }
    out << csv::quote(data.sample_ids[i]) << ',' << csv::quote(joined) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Taxonomy

struct TaxonomyNode {
  std::string name;
  std::vector<TaxonomyNode> children;

  bool is_leaf() const noexcept { return children.empty(); }
  friend bool operator==(const TaxonomyNode&, const TaxonomyNode&) = default;
};

struct Taxonomy {
  TaxonomyNode root;

  /// Leaf names in depth-first order, children in file order.
  std::vector<std::string> leaves() const {
    std::vector<std::string> out;
    collect(root, out);
    return out;
  }

 private:
  static void collect(const TaxonomyNode& node, std::vector<std::string>& out) {
    if (node.is_leaf()) {
      out.push_back(node.name);
      return;
    }
    for (const auto& child : node.children) collect(child, out);
  }
};

namespace detail {
inline TaxonomyNode taxonomy_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::JSONSchemaError, "taxonomy node must be an object");
  if (!j.contains("name") || !j["name"].is_string()) {
    throw Error(ErrorCode::JSONSchemaError, "taxonomy node needs a string 'name'");
  }
  TaxonomyNode node{j["name"].get<std::string>(), {}};
  if (j.contains("children")) {
    const auto& kids = j["children"];
    if (!kids.is_array() || kids.empty()) {
      throw Error(ErrorCode::JSONSchemaError,
                  "'children' of '" + node.name + "' must be a non-empty array");
    }
    for (const auto& kid : kids) node.children.push_back(taxonomy_from_json(kid));
  }
  return node;
}

inline nlohmann::ordered_json taxonomy_to_json(const TaxonomyNode& node) {
  nlohmann::ordered_json j;
  j["name"] = node.name;
  if (!node.is_leaf()) {
    j["children"] = nlohmann::ordered_json::array();
    for (const auto& kid : node.children) j["children"].push_back(taxonomy_to_json(kid));
  }
  return j;
}
}  // namespace detail

inline Taxonomy parse_taxonomy(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::JSONSchemaError, e.what());
  }
  Taxonomy tax{detail::taxonomy_from_json(j)};
  std::unordered_set<std::string> seen;
  for (const auto& leaf : tax.leaves()) {
    if (!seen.insert(leaf).second) throw Error(ErrorCode::DuplicateLeaf, leaf);
  }
  return tax;
}

inline std::string write_taxonomy(const Taxonomy& tax) {
  return detail::taxonomy_to_json(tax.root).dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Alignment

struct ValidationReport {
  std::vector<std::string> unknown_classes;       // named by labels/taxonomy but not scored
  std::vector<std::string> missing_classes;       // scored but absent from the taxonomy
  std::vector<std::string> sample_id_mismatches;  // present in only one of scores/labels

  bool ok() const noexcept {
    return unknown_classes.empty() && missing_classes.empty() && sample_id_mismatches.empty();
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["ok"] = ok();
    j["unknown_classes"] = unknown_classes;
    j["missing_classes"] = missing_classes;
    j["sample_id_mismatches"] = sample_id_mismatches;
    return j;
  }
};

inline ValidationReport validate_alignment(const ScoreMatrix& scores, const LabelData* labels,
                                           const Taxonomy* taxonomy) {
  ValidationReport report;
  const std::unordered_set<std::string> classes(scores.class_names.begin(),
                                                scores.class_names.end());
  std::unordered_set<std::string> reported;
  auto note_unknown = [&](const std::string& name) {
    if (!classes.count(name) && reported.insert(name).second) {
      report.unknown_classes.push_back(name);
    }
  };
  if (labels) {
    for (const auto& set : labels->labels) {
      for (const auto& label : set) note_unknown(label);
    }
    const std::unordered_set<std::string> score_ids(scores.sample_ids.begin(),
                                                    scores.sample_ids.end());
    const std::unordered_set<std::string> label_ids(labels->sample_ids.begin(),
                                                    labels->sample_ids.end());
    for (const auto& id : labels->sample_ids) {
      if (!score_ids.count(id)) report.sample_id_mismatches.push_back(id);
    }
    for (const auto& id : scores.sample_ids) {
      if (!label_ids.count(id)) report.sample_id_mismatches.push_back(id);
    }
  }
  if (taxonomy) {
    const auto leaves = taxonomy->leaves();
    for (const auto& leaf : leaves) note_unknown(leaf);
    const std::unordered_set<std::string> leaf_set(leaves.begin(), leaves.end());
    for (const auto& name : scores.class_names) {
      if (!leaf_set.count(name)) report.missing_classes.push_back(name);
    }
  }
  return report;
}

}  // namespace class_atlas
