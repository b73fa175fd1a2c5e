// Copyright 2026 The class-atlas Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Reference implementations and fixtures shared by the unit and acceptance
// tests. The oracles are written for clarity, not speed, and share no code
// with the library beyond its data types.

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "class_atlas/class_atlas.hpp"

namespace class_atlas::fixture {

inline ScoreMatrix random_scores(Rng& rng, std::size_t n, std::size_t m, double scale = 3.0) {
  ScoreMatrix s;
  s.kind = ScoreKind::Logit;
  s.values = Matrix(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) s.values(i, j) = scale * rng.normal();
  }
  for (std::size_t j = 0; j < m; ++j) s.class_names.push_back("k" + std::to_string(j));
  s.sample_ids = default_sample_ids(n);
  return s;
}

// Two-pass Pearson per pair, straight from the definition.
inline double oracle_pearson(const Matrix& x, std::size_t a, std::size_t b) {
  const std::size_t n = x.rows();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += x(i, a);
    mb += x(i, b);
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = x(i, a) - ma, db = x(i, b) - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  return sab / std::sqrt(saa * sbb);
}

inline double relative_error(double got, double want) {
  const double scale = std::max(1.0, std::abs(want));
  return std::abs(got - want) / scale;
}

// Symmetric, zero diagonal, all off-diagonal entries distinct.
inline Matrix random_dissimilarity(Rng& rng, std::size_t m) {
  Matrix d(m, m);
  std::set<double> used;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      double v;
      do v = rng.uniform_open() * 2.0; while (!used.insert(v).second);
      d(i, j) = d(j, i) = v;
    }
  }
  return d;
}

// O(m^4) complete linkage: every step rescans every cluster pair over its
// member pairs. Ties go to the lexicographically smallest (min id, max id).
inline Dendrogram brute_force_complete(const Matrix& d) {
  const std::size_t m = d.rows();
  struct Cluster {
    std::size_t id;
    std::vector<std::size_t> members;
  };
  std::vector<Cluster> active;
  for (std::size_t i = 0; i < m; ++i) active.push_back({i, {i}});
  Dendrogram out{m, {}};
  for (std::size_t step = 0; step + 1 < m; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> best_ids{0, 0};
    std::size_t bx = 0, by = 0;
    for (std::size_t x = 0; x < active.size(); ++x) {
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        double link = 0.0;
        for (auto a : active[x].members) {
          for (auto b : active[y].members) link = std::max(link, d(a, b));
        }
        const auto ids = std::minmax(active[x].id, active[y].id);
        const std::pair<std::size_t, std::size_t> key{ids.first, ids.second};
        if (link < best || (link == best && key < best_ids)) {
          best = link;
          best_ids = key;
          bx = x;
          by = y;
        }
      }
    }
    out.merges.push_back({best_ids.first, best_ids.second, best});
    Cluster merged{m + step, active[bx].members};
    merged.members.insert(merged.members.end(), active[by].members.begin(), active[by].members.end());
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(by));
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bx));
    active.push_back(std::move(merged));
  }
  return out;
}

// Two diagonal blocks (intra 0.8, inter 0) and a set S with members in both
// blocks whose cross-block pairs are raised to 0.6. Off-diagonal entries get
// symmetric uniform noise of half-width `noise`.
struct PlantedOverlap {
  Matrix sim;
  std::vector<std::size_t> overlap;  // S, ascending
  Partition blocks;
};

inline PlantedOverlap planted_overlap(std::uint64_t seed, std::size_t block = 10,
                                      std::size_t per_block = 3, double noise = 0.02) {
  const std::size_t m = 2 * block;
  PlantedOverlap p;
  p.sim = Matrix(m, m);
  p.blocks.n_blocks = 2;
  p.blocks.assignment.resize(m);
  std::vector<bool> in_s(m, false);
  for (std::size_t i = 0; i < m; ++i) p.blocks.assignment[i] = i / block;
  for (std::size_t k = 0; k < per_block; ++k) {
    in_s[k] = in_s[block + k] = true;
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (in_s[i]) p.overlap.push_back(i);
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < m; ++i) {
    p.sim(i, i) = 1.0;
    for (std::size_t j = i + 1; j < m; ++j) {
      double v = p.blocks.assignment[i] == p.blocks.assignment[j] ? 0.8 : 0.0;
      if (in_s[i] && in_s[j] && v < 0.6) v = 0.6;
      v += noise * (2.0 * rng.uniform() - 1.0);
      p.sim(i, j) = p.sim(j, i) = std::clamp(v, -1.0, 1.0);
    }
  }
  return p;
}

// Best fraction of S holding weight >= threshold in one cluster whose |S|
// top-weighted members lie in S up to one outside class.
inline double overlap_coverage(const Memberships& mem, const std::vector<std::size_t>& overlap,
                               double threshold) {
  const std::size_t m = mem.n_classes();
  std::vector<bool> in_s(m, false);
  for (auto i : overlap) in_s[i] = true;
  double best = 0.0;
  for (std::size_t k = 0; k < mem.n_clusters(); ++k) {
    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return mem.weights(a, k) > mem.weights(b, k);
    });
    std::size_t outside = 0;
    for (std::size_t r = 0; r < overlap.size(); ++r) outside += in_s[idx[r]] ? 0 : 1;
    if (outside > 1) continue;
    std::size_t hit = 0;
    for (auto i : overlap) hit += mem.weights(i, k) >= threshold ? 1 : 0;
    best = std::max(best, static_cast<double>(hit) / static_cast<double>(overlap.size()));
  }
  return best;
}

// The frozen 4x4 heatmap fixture: two blocks {0,1} and {2,3}.
inline Matrix golden_matrix() {
  Matrix v(4, 4);
  const double vals[16] = {1.0,  0.8,  0.1, -0.2,  //
                           0.8,  1.0,  0.0, -0.1,  //
                           0.1,  0.0,  1.0, 0.6,   //
                           -0.2, -0.1, 0.6, 1.0};
  std::copy(vals, vals + 16, v.data().begin());
  return v;
}

inline std::string golden_heatmap_svg() {
  const auto v = golden_matrix();
  RenderSpec spec;
  spec.cell_px = 10;
  const Ordering ord{0, 1, 2, 3};
  spec.annotations.blocks = block_spans(Partition{{0, 0, 1, 1}, 2}, ord);
  return render_heatmap(v, ord, spec);
}

}  // namespace class_atlas::fixture
