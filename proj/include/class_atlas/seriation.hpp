// Copyright 2026 The class-atlas Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "class_atlas/error.hpp"
#include "class_atlas/ingest.hpp"
#include "class_atlas/matrix.hpp"
#include "class_atlas/similarity.hpp"

namespace class_atlas {

/// d = 1 - similarity; range [0, 2]. Degenerate classes keep a zero
/// diagonal so the result is a valid clustering input.
inline Matrix to_dissimilarity(const SimilarityMatrix& sim) {
  const std::size_t m = sim.n_classes();
  Matrix d(m, m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) d(a, b) = a == b ? 0.0 : 1.0 - sim.values(a, b);
  }
  return d;
}

struct Merge {
  std::size_t left = 0;   // smaller cluster id
  std::size_t right = 0;  // larger cluster id
  double height = 0.0;

  friend bool operator==(const Merge&, const Merge&) = default;
};

/// Binary merge tree over n_leaves leaves. Ids below n_leaves are leaves;
/// merge k creates cluster n_leaves + k.
struct Dendrogram {
  std::size_t n_leaves = 0;
  std::vector<Merge> merges;

  friend bool operator==(const Dendrogram&, const Dendrogram&) = default;
};

using Ordering = std::vector<std::size_t>;  // display position -> class index

struct Partition {
  std::vector<std::size_t> assignment;  // class index -> block id
  std::size_t n_blocks = 0;

  friend bool operator==(const Partition&, const Partition&) = default;
};

// ---------------------------------------------------------------------------
// Complete-linkage agglomeration

namespace detail {
inline void check_dissimilarity(const Matrix& d) {
  if (!d.square()) throw Error(ErrorCode::SizeMismatch, "dissimilarity must be square");
  if (d.rows() < 2) throw Error(ErrorCode::TooFewClasses, "need at least 2 classes");
  for (std::size_t a = 0; a < d.rows(); ++a) {
    if (d(a, a) != 0.0) {
      throw Error(ErrorCode::NonZeroDiagonal, "entry (" + std::to_string(a) + "," +
                                                  std::to_string(a) + ") is nonzero");
    }
    for (std::size_t b = a + 1; b < d.cols(); ++b) {
      if (!std::isfinite(d(a, b))) throw Error(ErrorCode::NonFiniteValue, "dissimilarity entry");
      if (d(a, b) != d(b, a)) {
        throw Error(ErrorCode::AsymmetricInput, "entries (" + std::to_string(a) + "," +
                                                    std::to_string(b) + ") differ");
      }
    }
  }
}
}  // namespace detail

/// Agglomerative clustering with complete linkage. Each step merges the
/// active pair with the smallest max-pairwise distance; ties go to the
/// lexicographically smallest (min id, max id) pair.
///
/// Keeps a nearest-neighbour per active cluster. Complete-linkage distances
/// never shrink after a merge, so only clusters whose neighbour was consumed
/// need a rescan, giving O(m^2) amortized work per merge in the worst case
/// and far less in practice.
inline Dendrogram hclust_complete(const Matrix& dissimilarity) {
  detail::check_dissimilarity(dissimilarity);
  const std::size_t m = dissimilarity.rows();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Slot s holds cluster id[s]; leaves start in slots of the same index.
  Matrix dist = dissimilarity;
  std::vector<std::size_t> id(m);
  std::iota(id.begin(), id.end(), std::size_t{0});
  std::vector<char> active(m, 1);
  std::vector<std::size_t> nearest(m, 0);
  std::vector<double> nearest_dist(m, kInf);

  // Neighbour of slot s: minimal distance, ties to the smallest cluster id.
  // For a fixed s, ordering candidates by id is the same as ordering the
  // pairs (min, max) lexicographically.
  auto rescan = [&](std::size_t s) {
    double best = kInf;
    std::size_t best_slot = s;
    for (std::size_t t = 0; t < m; ++t) {
      if (t == s || !active[t]) continue;
      const double v = dist(s, t);
      if (v < best || (v == best && best_slot != s && id[t] < id[best_slot])) {
        best = v;
        best_slot = t;
      }
    }
    nearest[s] = best_slot;
    nearest_dist[s] = best;
  };
  for (std::size_t s = 0; s < m; ++s) rescan(s);

  Dendrogram dend;
  dend.n_leaves = m;
  dend.merges.reserve(m - 1);
  for (std::size_t step = 0; step + 1 < m; ++step) {
    std::size_t best = m;
    std::pair<std::size_t, std::size_t> best_key{};
    for (std::size_t s = 0; s < m; ++s) {
      if (!active[s]) continue;
      const std::size_t t = nearest[s];
      const std::pair key{std::min(id[s], id[t]), std::max(id[s], id[t])};
      if (best == m || nearest_dist[s] < nearest_dist[best] ||
          (nearest_dist[s] == nearest_dist[best] && key < best_key)) {
        best = s;
        best_key = key;
      }
    }
    std::size_t keep = best;
    std::size_t drop = nearest[best];
    if (drop < keep) std::swap(keep, drop);
    dend.merges.push_back({best_key.first, best_key.second, nearest_dist[best]});

    // Merged cluster lives in slot `keep`.
    active[drop] = 0;
    id[keep] = m + step;
    for (std::size_t t = 0; t < m; ++t) {
      if (!active[t] || t == keep) continue;
      const double v = std::max(dist(keep, t), dist(drop, t));
      dist(keep, t) = v;
      dist(t, keep) = v;
    }
    for (std::size_t t = 0; t < m; ++t) {
      if (!active[t]) continue;
      if (t == keep || nearest[t] == keep || nearest[t] == drop) {
        rescan(t);
      } else if (dist(t, keep) < nearest_dist[t]) {
        // Not reachable for complete linkage (distances only grow), kept so
        // the neighbour table stays exact for any input.
        nearest[t] = keep;
        nearest_dist[t] = dist(t, keep);
      }
    }
  }
  return dend;
}

namespace detail {
/// Leaf sets of every cluster id, leaves first.
inline std::vector<std::vector<std::size_t>> cluster_members(const Dendrogram& dend) {
  std::vector<std::vector<std::size_t>> members(dend.n_leaves + dend.merges.size());
  for (std::size_t k = 0; k < dend.n_leaves; ++k) members[k] = {k};
  for (std::size_t k = 0; k < dend.merges.size(); ++k) {
    auto& into = members[dend.n_leaves + k];
    into = members[dend.merges[k].left];
    into.insert(into.end(), members[dend.merges[k].right].begin(),
                members[dend.merges[k].right].end());
  }
  return members;
}
}  // namespace detail

/// Height of the first merge joining each pair of leaves.
inline Matrix cophenetic(const Dendrogram& dend) {
  const std::size_t m = dend.n_leaves;
  Matrix out(m, m, 0.0);
  const auto members = detail::cluster_members(dend);
  for (const auto& merge : dend.merges) {
    for (std::size_t a : members[merge.left]) {
      for (std::size_t b : members[merge.right]) {
        out(a, b) = merge.height;
        out(b, a) = merge.height;
      }
    }
  }
  return out;
}

/// Left-to-right leaf reading; at each merge the child holding the smaller
/// leaf index goes first.
inline Ordering leaf_order(const Dendrogram& dend) {
  const std::size_t m = dend.n_leaves;
  if (m == 0) return {};
  if (dend.merges.empty()) return {0};
  std::vector<std::size_t> min_leaf(m + dend.merges.size());
  std::iota(min_leaf.begin(), min_leaf.begin() + static_cast<std::ptrdiff_t>(m), std::size_t{0});
  for (std::size_t k = 0; k < dend.merges.size(); ++k) {
    min_leaf[m + k] = std::min(min_leaf[dend.merges[k].left], min_leaf[dend.merges[k].right]);
  }
  Ordering out;
  out.reserve(m);
  std::vector<std::size_t> stack{m + dend.merges.size() - 1};
  while (!stack.empty()) {
    const std::size_t node = stack.back();
    stack.pop_back();
    if (node < m) {
      out.push_back(node);
      continue;
    }
    std::size_t first = dend.merges[node - m].left;
    std::size_t second = dend.merges[node - m].right;
    if (min_leaf[second] < min_leaf[first]) std::swap(first, second);
    stack.push_back(second);
    stack.push_back(first);
  }
  return out;
}

/// Depth-first taxonomy leaf order mapped onto class indices.
inline Ordering taxonomy_order(const Taxonomy& tax, const std::vector<std::string>& class_names) {
  const auto leaves = tax.leaves();
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < class_names.size(); ++j) index.emplace(class_names[j], j);
  if (leaves.size() != class_names.size()) {
    throw Error(ErrorCode::LeafMismatch, "taxonomy has " + std::to_string(leaves.size()) +
                                             " leaves for " + std::to_string(class_names.size()) +
                                             " classes");
  }
  Ordering out;
  std::vector<char> used(class_names.size(), 0);
  for (const auto& leaf : leaves) {
    const auto it = index.find(leaf);
    if (it == index.end() || used[it->second]) {
      throw Error(ErrorCode::LeafMismatch, "leaf '" + leaf + "' is not a distinct class");
    }
    used[it->second] = 1;
    out.push_back(it->second);
  }
  return out;
}

inline bool is_permutation(const Ordering& ord, std::size_t m) {
  if (ord.size() != m) return false;
  std::vector<char> seen(m, 0);
  for (std::size_t v : ord) {
    if (v >= m || seen[v]) return false;
    seen[v] = 1;
  }
  return true;
}

inline Ordering inverse(const Ordering& ord) {
  Ordering inv(ord.size());
  for (std::size_t i = 0; i < ord.size(); ++i) inv[ord[i]] = i;
  return inv;
}

/// out(i, j) = in(ord[i], ord[j]).
inline Matrix permute(const Matrix& in, const Ordering& ord) {
  if (!in.square() || !is_permutation(ord, in.rows())) {
    throw Error(ErrorCode::SizeMismatch, "ordering does not match the matrix");
  }
  const std::size_t m = in.rows();
  Matrix out(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) out(i, j) = in(ord[i], ord[j]);
  }
  return out;
}

template <typename T>
std::vector<T> permute_labels(const std::vector<T>& labels, const Ordering& ord) {
  if (!is_permutation(ord, labels.size())) {
    throw Error(ErrorCode::SizeMismatch, "ordering does not match the label list");
  }
  std::vector<T> out;
  out.reserve(labels.size());
  for (std::size_t i : ord) out.push_back(labels[i]);
  return out;
}

/// Undoes the last k - 1 merges. Block ids follow first appearance along
/// leaf_order(dend).
inline Partition cut_dendrogram(const Dendrogram& dend, std::size_t k) {
  const std::size_t m = dend.n_leaves;
  if (k < 1 || k > m) {
    throw Error(ErrorCode::KOutOfRange, "k=" + std::to_string(k) + " outside [1, " +
                                            std::to_string(m) + "]");
  }
  // Union the first m - k merges.
  std::vector<std::size_t> root(m + dend.merges.size());
  std::iota(root.begin(), root.end(), std::size_t{0});
  for (std::size_t step = 0; step < m - k; ++step) {
    const auto& merge = dend.merges[step];
    root[m + step] = m + step;
    root[merge.left] = m + step;
    root[merge.right] = m + step;
  }
  auto find = [&](std::size_t node) {
    while (root[node] != node) node = root[node];
    return node;
  };
  Partition part;
  part.assignment.assign(m, 0);
  std::unordered_map<std::size_t, std::size_t> block_of_root;
  for (std::size_t leaf : leaf_order(dend)) {
    const auto [it, inserted] = block_of_root.emplace(find(leaf), block_of_root.size());
    part.assignment[leaf] = it->second;
  }
  part.n_blocks = block_of_root.size();
  return part;
}

struct Span {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive

  friend bool operator==(const Span&, const Span&) = default;
};

/// Half-open display spans of each block, in display order.
inline std::vector<Span> block_spans(const Partition& part, const Ordering& ord) {
  const std::size_t m = ord.size();
  if (!is_permutation(ord, part.assignment.size())) {
    throw Error(ErrorCode::SizeMismatch, "ordering does not match the partition");
  }
  std::vector<Span> spans;
  std::vector<char> seen(part.n_blocks, 0);
  for (std::size_t pos = 0; pos < m; ++pos) {
    const std::size_t block = part.assignment[ord[pos]];
    if (!spans.empty() && part.assignment[ord[spans.back().start]] == block) {
      spans.back().end = pos + 1;
      continue;
    }
    if (block >= part.n_blocks || seen[block]) {
      throw Error(ErrorCode::NonContiguousPartition,
                  "block " + std::to_string(block) + " is split under the ordering");
    }
    seen[block] = 1;
    spans.push_back({pos, pos + 1});
  }
  return spans;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json to_json(const Dendrogram& dend) {
  nlohmann::ordered_json j;
  j["n_leaves"] = dend.n_leaves;
  j["merges"] = nlohmann::ordered_json::array();
  for (const auto& merge : dend.merges) {
    j["merges"].push_back({{"left", merge.left}, {"right", merge.right}, {"height", merge.height}});
  }
  return j;
}

inline Dendrogram dendrogram_from_json(const nlohmann::json& j) {
  try {
    Dendrogram dend;
    dend.n_leaves = j.at("n_leaves").get<std::size_t>();
    for (const auto& rec : j.at("merges")) {
      dend.merges.push_back({rec.at("left").get<std::size_t>(), rec.at("right").get<std::size_t>(),
                             rec.at("height").get<double>()});
    }
    if (dend.n_leaves == 0 || dend.merges.size() + 1 != dend.n_leaves) {
      throw Error(ErrorCode::JSONSchemaError, "dendrogram needs n_leaves - 1 merges");
    }
    std::vector<char> used(2 * dend.n_leaves - 1, 0);
    for (std::size_t k = 0; k < dend.merges.size(); ++k) {
      for (std::size_t child : {dend.merges[k].left, dend.merges[k].right}) {
        if (child >= dend.n_leaves + k || used[child]) {
          throw Error(ErrorCode::JSONSchemaError, "merge " + std::to_string(k) +
                                                      " has an invalid child");
        }
        used[child] = 1;
      }
    }
    return dend;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::JSONSchemaError, e.what());
  }
}

inline Ordering ordering_from_json(const nlohmann::json& j) {
  try {
    return j.get<Ordering>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::JSONSchemaError, e.what());
  }
}

inline Partition partition_from_json(const nlohmann::json& j) {
  Partition part;
  try {
    part.assignment = j.get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::JSONSchemaError, e.what());
  }
  std::vector<char> seen;
  for (std::size_t b : part.assignment) {
    if (b >= seen.size()) seen.resize(b + 1, 0);
    seen[b] = 1;
  }
  part.n_blocks = seen.size();
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw Error(ErrorCode::JSONSchemaError, "block ids must be contiguous from 0");
  }
  return part;
}

}  // namespace class_atlas
