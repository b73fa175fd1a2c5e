// Copyright 2026 The class-atlas Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "class_atlas/error.hpp"
#include "class_atlas/ingest.hpp"
#include "class_atlas/matrix.hpp"
#include "class_atlas/parallel.hpp"

namespace class_atlas {

enum class Measure { Pearson, Spearman };

constexpr std::string_view to_string(Measure measure) {
  return measure == Measure::Pearson ? "pearson" : "spearman";
}

inline std::optional<Measure> parse_measure(std::string_view text) {
  if (text == "pearson") return Measure::Pearson;
  if (text == "spearman") return Measure::Spearman;
  return std::nullopt;
}

/// Symmetric m x m class-similarity matrix. Classes whose score column has
/// zero variance are listed in degenerate_classes; their row and column are 0.
struct SimilarityMatrix {
  std::vector<std::string> class_names;
  Matrix values;
  Measure measure = Measure::Pearson;
  ScoreKind source_kind = ScoreKind::Logit;
  std::vector<std::size_t> degenerate_classes;  // ascending

  std::size_t n_classes() const noexcept { return values.rows(); }

  bool is_degenerate(std::size_t j) const {
    return std::binary_search(degenerate_classes.begin(), degenerate_classes.end(), j);
  }

  friend bool operator==(const SimilarityMatrix&, const SimilarityMatrix&) = default;
};

enum class CountKind { Cooccurrence, Confusion };

constexpr std::string_view to_string(CountKind kind) {
  return kind == CountKind::Cooccurrence ? "cooccurrence" : "confusion";
}

struct CountMatrix {
  std::vector<std::string> class_names;
  std::vector<std::int64_t> counts;  // row-major m x m
  CountKind kind = CountKind::Cooccurrence;

  std::size_t n_classes() const noexcept { return class_names.size(); }
  std::int64_t at(std::size_t a, std::size_t b) const { return counts[a * n_classes() + b]; }
  std::int64_t& at(std::size_t a, std::size_t b) { return counts[a * n_classes() + b]; }

  Matrix to_matrix() const {
    const std::size_t m = n_classes();
    Matrix out(m, m);
    for (std::size_t k = 0; k < counts.size(); ++k) out.data()[k] = static_cast<double>(counts[k]);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Transforms

/// Numerically stable per-row softmax of a logit matrix.
inline ScoreMatrix softmax_rows(const ScoreMatrix& scores) {
  if (scores.kind != ScoreKind::Logit) {
    throw Error(ErrorCode::WrongKind, "softmax expects logits, got " +
                                          std::string(to_string(scores.kind)));
  }
  ScoreMatrix out = scores;
  out.kind = ScoreKind::Probability;
  for (std::size_t i = 0; i < out.n_samples(); ++i) {
    auto row = out.values.row(i);
    const double peak = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double& v : row) {
      v = std::exp(v - peak);
      total += v;
    }
    for (double& v : row) v /= total;
  }
  return out;
}

/// Ascending ranks of each row's values in [1, m]; ties share the average
/// of their rank span.
inline ScoreMatrix rank_rows(const ScoreMatrix& scores) {
  ScoreMatrix out = scores;
  out.kind = ScoreKind::Rank;
  const std::size_t m = scores.n_classes();
  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < scores.n_samples(); ++i) {
    const auto src = scores.values.row(i);
    auto dst = out.values.row(i);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return src[a] < src[b]; });
    for (std::size_t start = 0; start < m;) {
      std::size_t stop = start + 1;
      while (stop < m && src[idx[stop]] == src[idx[start]]) ++stop;
      // Ranks start+1 .. stop averaged.
      const double rank = (static_cast<double>(start + 1) + static_cast<double>(stop)) / 2.0;
      for (std::size_t k = start; k < stop; ++k) dst[idx[k]] = rank;
      start = stop;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Correlation

namespace detail {

/// Correlation of per-class score columns. Each pair reduces over samples
/// in ascending order, so the result does not depend on the worker count.
inline SimilarityMatrix correlate_columns(const ScoreMatrix& scores, Measure measure,
                                          ScoreKind source_kind) {
  const std::size_t n = scores.n_samples();
  const std::size_t m = scores.n_classes();
  if (n < 2) {
    throw Error(ErrorCode::TooFewSamples, "need at least 2 samples, got " + std::to_string(n));
  }

  // Centered columns, stored class-major for contiguous pair reductions.
  std::vector<double> centered(m * n);
  std::vector<double> sum_sq(m, 0.0);
  std::vector<char> degenerate(m, 0);
  parallel_for(m, [&](std::size_t j) {
    double lo = scores.values(0, j);
    double hi = lo;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = scores.values(i, j);
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    degenerate[j] = lo == hi;
    const double mean = sum / static_cast<double>(n);
    double* col = centered.data() + j * n;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      col[i] = scores.values(i, j) - mean;
      ss += col[i] * col[i];
    }
    sum_sq[j] = ss;
  });

  SimilarityMatrix out;
  out.class_names = scores.class_names;
  out.values = Matrix(m, m, 0.0);
  out.measure = measure;
  out.source_kind = source_kind;
  for (std::size_t j = 0; j < m; ++j) {
    if (degenerate[j]) out.degenerate_classes.push_back(j);
  }

  parallel_for(m, [&](std::size_t a) {
    if (degenerate[a]) return;
    out.values(a, a) = 1.0;
    const double* col_a = centered.data() + a * n;
    for (std::size_t b = a + 1; b < m; ++b) {
      if (degenerate[b]) continue;
      const double* col_b = centered.data() + b * n;
      double cov = 0.0;
      for (std::size_t i = 0; i < n; ++i) cov += col_a[i] * col_b[i];
      // one sqrt of the product keeps identical columns at exactly 1
      const double prod = sum_sq[a] * sum_sq[b];
      const double denom = std::isnormal(prod) ? std::sqrt(prod) : std::sqrt(sum_sq[a]) * std::sqrt(sum_sq[b]);
      const double rho = cov / denom;
      out.values(a, b) = std::clamp(rho, -1.0, 1.0);
    }
  });
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) out.values(b, a) = out.values(a, b);
  }
  return out;
}

}  // namespace detail

/// Pearson correlation between every pair of class score columns, with
/// expectations taken as means over the sample set.
inline SimilarityMatrix pearson_similarity(const ScoreMatrix& scores) {
  return detail::correlate_columns(scores, Measure::Pearson, scores.kind);
}

/// Pearson correlation of the per-sample ranks. source_kind records the kind
/// of the scores that were ranked.
inline SimilarityMatrix spearman_similarity(const ScoreMatrix& scores) {
  return detail::correlate_columns(rank_rows(scores), Measure::Spearman, scores.kind);
}

// ---------------------------------------------------------------------------
// Count baselines

namespace detail {
inline std::unordered_map<std::string, std::size_t> index_classes(
    const std::vector<std::string>& class_names) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < class_names.size(); ++j) index.emplace(class_names[j], j);
  return index;
}
}  // namespace detail

inline CountMatrix cooccurrence_matrix(const LabelData& labels,
                                       const std::vector<std::string>& class_names) {
  const auto index = detail::index_classes(class_names);
  const std::size_t m = class_names.size();
  CountMatrix out{class_names, std::vector<std::int64_t>(m * m, 0), CountKind::Cooccurrence};
  std::vector<std::size_t> members;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    members.clear();
    for (const auto& label : labels.labels[s]) {
      const auto it = index.find(label);
      if (it == index.end()) {
        throw Error(ErrorCode::UnknownLabel, "'" + label + "' on sample " + labels.sample_ids[s]);
      }
      members.push_back(it->second);
    }
    for (std::size_t a : members) {
      for (std::size_t b : members) ++out.at(a, b);
    }
  }
  return out;
}

/// Confusion counts counts[true][predicted], predicted = row argmax with
/// ties to the lowest class index. Only labeled samples contribute.
inline CountMatrix confusion_matrix(const ScoreMatrix& scores, const LabelData& labels) {
  const auto index = detail::index_classes(scores.class_names);
  std::unordered_map<std::string, std::size_t> rows;
  for (std::size_t i = 0; i < scores.n_samples(); ++i) rows.emplace(scores.sample_ids[i], i);
  const std::size_t m = scores.n_classes();
  CountMatrix out{scores.class_names, std::vector<std::int64_t>(m * m, 0), CountKind::Confusion};
  for (std::size_t s = 0; s < labels.size(); ++s) {
    if (labels.labels[s].size() != 1) {
      throw Error(ErrorCode::MultiLabelInput,
                  "sample " + labels.sample_ids[s] + " carries " +
                      std::to_string(labels.labels[s].size()) +
                      " labels; confusion counts need exactly one");
    }
  }
  for (std::size_t s = 0; s < labels.size(); ++s) {
    const auto& label = labels.labels[s].front();
    const auto truth = index.find(label);
    if (truth == index.end()) {
      throw Error(ErrorCode::UnknownLabel, "'" + label + "' on sample " + labels.sample_ids[s]);
    }
    const auto row = rows.find(labels.sample_ids[s]);
    if (row == rows.end()) {
      throw Error(ErrorCode::UnknownSample, "labeled sample " + labels.sample_ids[s] +
                                                " has no score row");
    }
    const auto values = scores.values.row(row->second);
    const auto predicted =
        static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
    ++out.at(truth->second, predicted);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Distribution diagnostics

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

struct DistributionStats {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<HistogramBin> histogram;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["count"] = count;
    j["mean"] = mean;
    j["std"] = std;
    j["skewness"] = skewness;
    j["excess_kurtosis"] = excess_kurtosis;
    j["min"] = min;
    j["max"] = max;
    j["histogram"] = nlohmann::ordered_json::array();
    for (const auto& bin : histogram) {
      j["histogram"].push_back({{"lo", bin.lo}, {"hi", bin.hi}, {"count", bin.count}});
    }
    return j;
  }
};

/// Population moments (1/n), Fisher-Pearson skewness g1 = m3 / m2^1.5,
/// excess kurtosis m4 / m2^2 - 3, and an equal-width histogram over
/// [min, max] whose last bin is closed.
inline DistributionStats distribution_stats(std::span<const double> values, std::size_t n_bins) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "no values to summarize");
  if (n_bins == 0) throw Error(ErrorCode::ConfigInvalid, "histogram needs at least one bin");
  DistributionStats s;
  s.count = values.size();
  const double n = static_cast<double>(values.size());
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  s.std = std::sqrt(m2);
  if (s.min == s.max || m2 == 0.0) {
    s.std = 0.0;
  } else {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }

  if (s.min == s.max) {
    s.histogram.push_back({s.min, s.max, s.count});
    return s;
  }
  const double width = (s.max - s.min) / static_cast<double>(n_bins);
  s.histogram.resize(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    s.histogram[b].lo = s.min + width * static_cast<double>(b);
    s.histogram[b].hi = b + 1 == n_bins ? s.max : s.min + width * static_cast<double>(b + 1);
  }
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - s.min) / width);
    b = std::min(b, n_bins - 1);
    ++s.histogram[b].count;
  }
  return s;
}

/// Strict upper triangle, row-major, skipping degenerate classes.
inline std::vector<double> offdiagonal_values(const SimilarityMatrix& sim) {
  std::vector<double> out;
  const std::size_t m = sim.n_classes();
  for (std::size_t a = 0; a < m; ++a) {
    if (sim.is_degenerate(a)) continue;
    for (std::size_t b = a + 1; b < m; ++b) {
      if (!sim.is_degenerate(b)) out.push_back(sim.values(a, b));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline std::string write_similarity_binary(const SimilarityMatrix& sim, Dtype dtype = Dtype::F64) {
  nlohmann::ordered_json header;
  header["magic"] = bsm1::kMagic;
  header["n"] = sim.n_classes();
  header["m"] = sim.n_classes();
  header["dtype"] = nullptr;
  header["kind"] = "similarity";
  header["measure"] = to_string(sim.measure);
  header["source_kind"] = to_string(sim.source_kind);
  header["classes"] = sim.class_names;
  header["degenerate"] = sim.degenerate_classes;
  return bsm1::encode(std::move(header), sim.values.data(), dtype);
}

inline SimilarityMatrix parse_similarity_binary(std::string_view bytes) {
  auto c = bsm1::decode(bytes);
  const auto& h = c.header;
  if (h.value("kind", "") != "similarity") {
    throw Error(ErrorCode::JSONSchemaError, "container does not hold a similarity matrix");
  }
  if (c.rows != c.cols) throw Error(ErrorCode::JSONSchemaError, "similarity matrix is not square");
  SimilarityMatrix sim;
  const auto measure = parse_measure(h.value("measure", ""));
  const auto source = parse_score_kind(h.value("source_kind", ""));
  if (!measure || !source) throw Error(ErrorCode::JSONSchemaError, "bad measure or source_kind");
  sim.measure = *measure;
  sim.source_kind = *source;
  sim.class_names = bsm1::string_list(h, "classes", c.cols);
  if (h.contains("degenerate")) {
    if (!h["degenerate"].is_array()) throw Error(ErrorCode::JSONSchemaError, "bad degenerate");
    for (const auto& d : h["degenerate"]) {
      if (!d.is_number_unsigned() || d.get<std::size_t>() >= c.cols) {
        throw Error(ErrorCode::JSONSchemaError, "bad degenerate class index");
      }
      sim.degenerate_classes.push_back(d.get<std::size_t>());
    }
    std::sort(sim.degenerate_classes.begin(), sim.degenerate_classes.end());
  }
  sim.values = Matrix(c.rows, c.cols, std::move(c.values));
  return sim;
}

inline std::string write_counts_binary(const CountMatrix& counts) {
  nlohmann::ordered_json header;
  header["magic"] = bsm1::kMagic;
  header["n"] = counts.n_classes();
  header["m"] = counts.n_classes();
  header["dtype"] = nullptr;
  header["kind"] = to_string(counts.kind);
  header["classes"] = counts.class_names;
  return bsm1::encode(std::move(header), counts.to_matrix().data(), Dtype::F64);
}

inline CountMatrix parse_counts_binary(std::string_view bytes) {
  auto c = bsm1::decode(bytes);
  const auto kind = c.header.value("kind", "");
  CountMatrix out;
  if (kind == "cooccurrence") {
    out.kind = CountKind::Cooccurrence;
  } else if (kind == "confusion") {
    out.kind = CountKind::Confusion;
  } else {
    throw Error(ErrorCode::JSONSchemaError, "container does not hold a count matrix");
  }
  if (c.rows != c.cols) throw Error(ErrorCode::JSONSchemaError, "count matrix is not square");
  out.class_names = bsm1::string_list(c.header, "classes", c.cols);
  out.counts.reserve(c.values.size());
  for (double v : c.values) {
    if (v < 0 || v != std::floor(v)) throw Error(ErrorCode::JSONSchemaError, "non-integral count");
    out.counts.push_back(static_cast<std::int64_t>(v));
  }
  return out;
}

/// A square labeled matrix of any BSM1 kind, for consumers that only need
/// values and names (rendering).
struct LabeledMatrix {
  std::vector<std::string> class_names;
  Matrix values;
  std::string kind;
};

inline LabeledMatrix parse_labeled_binary(std::string_view bytes) {
  auto c = bsm1::decode(bytes);
  if (c.rows != c.cols) throw Error(ErrorCode::JSONSchemaError, "matrix is not square");
  LabeledMatrix out;
  out.kind = c.header.value("kind", "");
  out.class_names = bsm1::string_list(c.header, "classes", c.cols);
  out.values = Matrix(c.rows, c.cols, std::move(c.values));
  return out;
}

/// CSV with a leading "class" column: one row per class.
inline void write_square_csv(std::ostream& out, const std::vector<std::string>& class_names,
                             const Matrix& values) {
  out << "class";
  for (const auto& name : class_names) out << ',' << csv::quote(name);
  out << '\n';
  for (std::size_t a = 0; a < values.rows(); ++a) {
    out << csv::quote(class_names[a]);
    for (double v : values.row(a)) out << ',' << csv::format_number(v);
    out << '\n';
  }
}

}  // namespace class_atlas
