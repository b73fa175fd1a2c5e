// Copyright 2026 The class-atlas Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "class_atlas/error.hpp"
#include "class_atlas/matrix.hpp"
#include "class_atlas/parallel.hpp"
#include "class_atlas/random.hpp"
#include "class_atlas/seriation.hpp"
#include "class_atlas/similarity.hpp"

namespace class_atlas {

/// Soft assignment of m classes to c clusters; rows sum to 1.
struct Memberships {
  Matrix weights;  // m x c

  std::size_t n_classes() const noexcept { return weights.rows(); }
  std::size_t n_clusters() const noexcept { return weights.cols(); }

  friend bool operator==(const Memberships&, const Memberships&) = default;
};

struct FuzzyOptions {
  std::size_t clusters = 2;
  double fuzzifier = 2.0;
  double tolerance = 1e-6;
  std::size_t max_iter = 300;
  std::uint64_t seed = 0;
};

struct FuzzyResult {
  Memberships memberships;
  Matrix centroids;                // c x d
  std::vector<double> objective;   // J after each iteration's weight update
  std::size_t iterations = 0;
  bool converged = false;
};

/// Called after every iteration with the iteration number (from 1), the
/// objective and the current memberships.
using FuzzyObserver = std::function<void(std::size_t, double, const Memberships&)>;

namespace detail {
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

inline double fuzzy_objective(const Matrix& x, const Matrix& w, const Matrix& v, double f) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t k = 0; k < w.cols(); ++k) {
      total += std::pow(w(i, k), f) * squared_distance(x.row(i), v.row(k));
    }
  }
  return total;
}
}  // namespace detail

/// Standard fuzzy c-means on the rows of `features` with Euclidean distance.
/// Memberships start from seeded uniform draws normalized per row, then
/// centroids and memberships are updated alternately until the largest
/// membership change drops below the tolerance.
inline FuzzyResult fuzzy_cmeans(const Matrix& features, const FuzzyOptions& opt,
                                const FuzzyObserver& observer = {}) {
  const std::size_t m = features.rows();
  const std::size_t dim = features.cols();
  const std::size_t c = opt.clusters;
  if (c < 1 || c > m) {
    throw Error(ErrorCode::BadClusterCount, "cluster count " + std::to_string(c) +
                                                " outside [1, " + std::to_string(m) + "]");
  }
  if (!(opt.fuzzifier > 1.0) || !std::isfinite(opt.fuzzifier)) {
    throw Error(ErrorCode::BadFuzzifier, "fuzzifier must be a finite value > 1");
  }
  const double f = opt.fuzzifier;
  const double exponent = 1.0 / (f - 1.0);  // applied to squared-distance ratios

  FuzzyResult result;
  Matrix w(m, c);
  {
    Rng rng(opt.seed);
    for (std::size_t i = 0; i < m; ++i) {
      double total = 0.0;
      for (std::size_t k = 0; k < c; ++k) {
        w(i, k) = rng.uniform_open();
        total += w(i, k);
      }
      for (std::size_t k = 0; k < c; ++k) w(i, k) /= total;
    }
  }
  Matrix v(c, dim, 0.0);
  Matrix next(m, c);

  for (std::size_t iter = 1; iter <= opt.max_iter; ++iter) {
    parallel_for(c, [&](std::size_t k) {
      double denom = 0.0;
      std::vector<double> acc(dim, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        const double wf = std::pow(w(i, k), f);
        denom += wf;
        const auto xi = features.row(i);
        for (std::size_t d = 0; d < dim; ++d) acc[d] += wf * xi[d];
      }
      if (denom > 0.0) {
        for (std::size_t d = 0; d < dim; ++d) v(k, d) = acc[d] / denom;
      }
    });

    parallel_for(m, [&](std::size_t i) {
      std::vector<double> dist(c);
      std::size_t coincident = c;
      for (std::size_t k = 0; k < c; ++k) {
        dist[k] = detail::squared_distance(features.row(i), v.row(k));
        if (dist[k] == 0.0 && coincident == c) coincident = k;
      }
      if (coincident != c) {
        for (std::size_t k = 0; k < c; ++k) next(i, k) = k == coincident ? 1.0 : 0.0;
        return;
      }
      for (std::size_t k = 0; k < c; ++k) {
        double sum = 0.0;
        for (std::size_t l = 0; l < c; ++l) sum += std::pow(dist[k] / dist[l], exponent);
        next(i, k) = 1.0 / sum;
      }
    });

    double delta = 0.0;
    for (std::size_t k = 0; k < next.data().size(); ++k) {
      delta = std::max(delta, std::abs(next.data()[k] - w.data()[k]));
    }
    std::swap(w, next);
    result.iterations = iter;
    result.objective.push_back(detail::fuzzy_objective(features, w, v, f));
    if (observer) observer(iter, result.objective.back(), Memberships{w});
    if (delta < opt.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.memberships = Memberships{std::move(w)};
  result.centroids = std::move(v);
  return result;
}

// ---------------------------------------------------------------------------
// Groups

enum class GroupKind { Hierarchical, Recovered, SplitPair, Star };

constexpr std::string_view to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::Hierarchical: return "hierarchical";
    case GroupKind::Recovered: return "recovered";
    case GroupKind::SplitPair: return "split_pair";
    case GroupKind::Star: return "star";
  }
  return "recovered";
}

inline std::optional<GroupKind> parse_group_kind(std::string_view text) {
  if (text == "hierarchical") return GroupKind::Hierarchical;
  if (text == "recovered") return GroupKind::Recovered;
  if (text == "split_pair") return GroupKind::SplitPair;
  if (text == "star") return GroupKind::Star;
  return std::nullopt;
}

struct Group {
  std::vector<std::size_t> members;  // ascending class indices
  GroupKind kind = GroupKind::Recovered;
  double score = 0.0;
  std::string provenance;

  friend bool operator==(const Group&, const Group&) = default;
};

using GroupSet = std::vector<Group>;

/// Diagonal blocks of a dendrogram cut; score is the mean off-diagonal
/// similarity inside the block (1 for singletons).
inline GroupSet hierarchical_groups(const SimilarityMatrix& sim, const Partition& part) {
  GroupSet out(part.n_blocks);
  for (std::size_t j = 0; j < part.assignment.size(); ++j) {
    out[part.assignment[j]].members.push_back(j);
  }
  for (std::size_t b = 0; b < out.size(); ++b) {
    auto& g = out[b];
    g.kind = GroupKind::Hierarchical;
    g.provenance = "dendrogram block " + std::to_string(b);
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t x : g.members) {
      for (std::size_t y : g.members) {
        if (x == y) continue;
        sum += sim.values(x, y);
        ++pairs;
      }
    }
    g.score = pairs ? sum / static_cast<double>(pairs) : 1.0;
  }
  return out;
}

/// One group per cluster: classes whose membership reaches the threshold.
inline GroupSet recovered_groups(const Memberships& mem, double threshold) {
  GroupSet out;
  for (std::size_t k = 0; k < mem.n_clusters(); ++k) {
    Group g;
    g.kind = GroupKind::Recovered;
    g.provenance = "fuzzy cluster " + std::to_string(k);
    double sum = 0.0;
    for (std::size_t i = 0; i < mem.n_classes(); ++i) {
      if (mem.weights(i, k) >= threshold) {
        g.members.push_back(i);
        sum += mem.weights(i, k);
      }
    }
    if (g.members.empty()) continue;
    g.score = sum / static_cast<double>(g.members.size());
    out.push_back(std::move(g));
  }
  return out;
}

/// Linear-interpolation quantile of sorted data (the R type 7 rule).
inline double quantile_type7(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

/// Block pairs whose mean cross similarity lies strictly above the given
/// quantile of all block-pair means.
inline GroupSet split_groups(const SimilarityMatrix& sim, const Partition& part, double quantile) {
  if (part.n_blocks < 2) throw Error(ErrorCode::SingleBlock, "need at least two blocks");
  if (!(quantile > 0.0 && quantile < 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, "split quantile must lie in (0, 1)");
  }
  if (part.assignment.size() != sim.n_classes()) {
    throw Error(ErrorCode::SizeMismatch, "partition does not match the similarity matrix");
  }
  const std::size_t nb = part.n_blocks;
  std::vector<std::vector<std::size_t>> blocks(nb);
  for (std::size_t j = 0; j < part.assignment.size(); ++j) blocks[part.assignment[j]].push_back(j);

  struct Candidate {
    std::size_t a, b;
    double inter;
  };
  std::vector<Candidate> candidates;
  std::vector<double> means;
  for (std::size_t a = 0; a < nb; ++a) {
    for (std::size_t b = a + 1; b < nb; ++b) {
      double sum = 0.0;
      for (std::size_t x : blocks[a]) {
        for (std::size_t y : blocks[b]) sum += sim.values(x, y);
      }
      const double inter = sum / static_cast<double>(blocks[a].size() * blocks[b].size());
      candidates.push_back({a, b, inter});
      means.push_back(inter);
    }
  }
  const double cut = quantile_type7(means, quantile);
  GroupSet out;
  for (const auto& cand : candidates) {
    if (!(cand.inter > cut)) continue;
    Group g;
    g.kind = GroupKind::SplitPair;
    g.score = cand.inter;
    g.members = blocks[cand.a];
    g.members.insert(g.members.end(), blocks[cand.b].begin(), blocks[cand.b].end());
    std::sort(g.members.begin(), g.members.end());
    g.provenance = "blocks " + std::to_string(cand.a) + "+" + std::to_string(cand.b);
    out.push_back(std::move(g));
  }
  return out;
}

/// (distinct blocks occupied - 1) / (|g| - 1); 0 for groups of one.
inline double dispersion(const Group& g, const Partition& part) {
  if (g.members.size() < 2) return 0.0;
  std::set<std::size_t> blocks;
  for (std::size_t j : g.members) blocks.insert(part.assignment.at(j));
  return static_cast<double>(blocks.size() - 1) / static_cast<double>(g.members.size() - 1);
}

/// Recovered groups that the partition scatters across blocks.
inline GroupSet failed_groups(const GroupSet& recovered, const Partition& part,
                              double dispersion_threshold) {
  GroupSet out;
  for (const auto& g : recovered) {
    if (dispersion(g, part) >= dispersion_threshold) {
      Group tagged = g;
      tagged.provenance = "failed";
      out.push_back(std::move(tagged));
    }
  }
  return out;
}

/// Classes that co-occur with at least breadth_threshold of all other classes.
inline GroupSet star_classes(const CountMatrix& counts, double breadth_threshold) {
  const std::size_t m = counts.n_classes();
  GroupSet out;
  if (m < 2) return out;
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t partners = 0;
    for (std::size_t k = 0; k < m; ++k) {
      if (k != j && counts.at(j, k) > 0) ++partners;
    }
    const double breadth = static_cast<double>(partners) / static_cast<double>(m - 1);
    if (breadth >= breadth_threshold) {
      out.push_back({{j}, GroupKind::Star, breadth, "co-occurrence breadth"});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Group& a, const Group& b) { return a.score > b.score; });
  return out;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json to_json(const GroupSet& groups,
                                      const std::vector<std::string>& class_names) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& g : groups) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(g.kind);
    j["members"] = nlohmann::ordered_json::array();
    for (std::size_t idx : g.members) j["members"].push_back(class_names.at(idx));
    j["score"] = g.score;
    j["provenance"] = g.provenance;
    out.push_back(std::move(j));
  }
  return out;
}

inline GroupSet groups_from_json(const nlohmann::json& j,
                                 const std::vector<std::string>& class_names) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < class_names.size(); ++k) index.emplace(class_names[k], k);
  GroupSet out;
  try {
    for (const auto& item : j) {
      Group g;
      const auto kind = parse_group_kind(item.at("kind").get<std::string>());
      if (!kind) throw Error(ErrorCode::JSONSchemaError, "unknown group kind");
      g.kind = *kind;
      for (const auto& name : item.at("members")) {
        const auto it = index.find(name.get<std::string>());
        if (it == index.end()) {
          throw Error(ErrorCode::UnknownLabel, "group member " + name.get<std::string>());
        }
        g.members.push_back(it->second);
      }
      if (g.members.empty()) throw Error(ErrorCode::JSONSchemaError, "empty group");
      std::sort(g.members.begin(), g.members.end());
      g.score = item.at("score").get<double>();
      g.provenance = item.value("provenance", "");
      out.push_back(std::move(g));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::JSONSchemaError, e.what());
  }
  return out;
}

}  // namespace class_atlas
