// Copyright 2026 The class-atlas Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "class_atlas/error.hpp"
#include "class_atlas/ingest.hpp"
#include "class_atlas/random.hpp"
#include "class_atlas/seriation.hpp"

namespace class_atlas {

/// Planted-hierarchy score generator: the classes are the leaves of a
/// complete b-ary tree of depth L, and a sample of true class c scores
/// class j with alpha * depth(lca(c, j)) / L + beta * [j == c] + noise.
struct SynthConfig {
  std::size_t depth = 2;
  std::size_t branching = 3;
  std::size_t samples_per_class = 40;
  double alpha = 4.0;
  double beta = 2.0;
  double sigma = 1.0;
  std::uint64_t seed = 0;

  static constexpr std::size_t kMaxClasses = 100000;

  std::size_t n_classes() const {
    std::size_t m = 1;
    for (std::size_t l = 0; l < depth; ++l) m *= branching;
    return m;
  }

  void validate() const {
    if (depth < 1) throw Error(ErrorCode::ConfigInvalid, "depth must be at least 1");
    if (branching < 2) throw Error(ErrorCode::ConfigInvalid, "branching must be at least 2");
    if (samples_per_class < 1) {
      throw Error(ErrorCode::ConfigInvalid, "samples_per_class must be at least 1");
    }
    if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(sigma)) {
      throw Error(ErrorCode::ConfigInvalid, "alpha, beta and sigma must be finite");
    }
    if (sigma < 0.0) throw Error(ErrorCode::ConfigInvalid, "sigma must be non-negative");
    double m = 1.0;
    for (std::size_t l = 0; l < depth; ++l) m *= static_cast<double>(branching);
    if (m > static_cast<double>(kMaxClasses)) {
      throw Error(ErrorCode::ConfigInvalid, "branching^depth exceeds " +
                                                std::to_string(kMaxClasses) + " classes");
    }
  }
};

struct SynthData {
  ScoreMatrix scores;               // kind = logit
  Taxonomy taxonomy;
  LabelData labels;                 // each sample's true class
  std::vector<Partition> planted;   // planted[l - 1] groups classes by their depth-l ancestor
};

namespace detail {
inline std::vector<std::size_t> leaf_digits(std::size_t index, std::size_t b, std::size_t depth) {
  std::vector<std::size_t> digits(depth);
  for (std::size_t l = depth; l-- > 0;) {
    digits[l] = index % b;
    index /= b;
  }
  return digits;
}

inline std::string path_name(char prefix, const std::vector<std::size_t>& digits, std::size_t len) {
  std::string name(1, prefix);
  for (std::size_t l = 0; l < len; ++l) {
    if (l) name.push_back('.');
    name += std::to_string(digits[l]);
  }
  return name;
}

inline TaxonomyNode build_tree(std::vector<std::size_t>& prefix, std::size_t b, std::size_t depth) {
  if (prefix.size() == depth) return {path_name('c', prefix, depth), {}};
  TaxonomyNode node{prefix.empty() ? "root" : path_name('n', prefix, prefix.size()), {}};
  for (std::size_t k = 0; k < b; ++k) {
    prefix.push_back(k);
    node.children.push_back(build_tree(prefix, b, depth));
    prefix.pop_back();
  }
  return node;
}
}  // namespace detail

inline SynthData synth_scores(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t m = cfg.n_classes();
  const std::size_t L = cfg.depth;
  const std::size_t b = cfg.branching;
  const std::size_t n = m * cfg.samples_per_class;

  std::vector<std::vector<std::size_t>> digits(m);
  for (std::size_t j = 0; j < m; ++j) digits[j] = detail::leaf_digits(j, b, L);

  // signal[c][j] = alpha * depth(lca) / L + beta * [c == j]
  Matrix signal(m, m);
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t j = 0; j < m; ++j) {
      std::size_t shared = 0;
      while (shared < L && digits[c][shared] == digits[j][shared]) ++shared;
      signal(c, j) = cfg.alpha * static_cast<double>(shared) / static_cast<double>(L) +
                     (c == j ? cfg.beta : 0.0);
    }
  }

  SynthData out;
  out.scores.kind = ScoreKind::Logit;
  for (std::size_t j = 0; j < m; ++j) out.scores.class_names.push_back(detail::path_name('c', digits[j], L));
  out.scores.values = Matrix(n, m);
  Rng rng(cfg.seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t truth = i / cfg.samples_per_class;
    std::string id = "s" + std::to_string(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double noise = cfg.sigma > 0.0 ? cfg.sigma * rng.normal() : 0.0;
      out.scores.values(i, j) = signal(truth, j) + noise;
    }
    out.labels.sample_ids.push_back(id);
    out.labels.labels.push_back({out.scores.class_names[truth]});
    out.scores.sample_ids.push_back(std::move(id));
  }

  std::vector<std::size_t> prefix;
  out.taxonomy.root = detail::build_tree(prefix, b, L);

  std::size_t block_size = m;
  for (std::size_t level = 1; level <= L; ++level) {
    block_size /= b;
    Partition part;
    part.n_blocks = m / block_size;
    part.assignment.resize(m);
    for (std::size_t j = 0; j < m; ++j) part.assignment[j] = j / block_size;
    out.planted.push_back(std::move(part));
  }
  return out;
}

/// Adjusted Rand index between two labelings of the same items.
inline double adjusted_rand_index(const std::vector<std::size_t>& a,
                                  const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::SizeMismatch, "labelings differ in length");
  const double n = static_cast<double>(a.size());
  auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
  std::map<std::pair<std::size_t, std::size_t>, double> joint;
  std::map<std::size_t, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, count] : joint) index += choose2(count);
  for (const auto& [key, count] : rows) sum_rows += choose2(count);
  for (const auto& [key, count] : cols) sum_cols += choose2(count);
  const double expected = n > 1.0 ? sum_rows * sum_cols / choose2(n) : 0.0;
  const double maximum = (sum_rows + sum_cols) / 2.0;
  if (maximum == expected) return 1.0;  // both labelings trivial and identical in shape
  return (index - expected) / (maximum - expected);
}

}  // namespace class_atlas
