// Copyright 2026 The class-atlas Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <sys/resource.h>
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "support.hpp"

using namespace class_atlas;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  Outcome o;
  const auto t0 = Clock::now();
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.2fs", seconds_since(t0));
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " " << name << ": " << o.detail
            << " [" << secs << "]" << std::endl;
  if (!o.pass) ++failures;
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

// 1 -------------------------------------------------------------------------
Outcome correlation_oracle() {
  const auto t0 = Clock::now();
  Rng rng(1001);
  double worst = 0.0;
  bool spearman_exact = true;
  for (int t = 0; t < 200; ++t) {
    const auto n = 2 + rng.next_u64() % 49, m = 1 + rng.next_u64() % 10;
    const auto s = fixture::random_scores(rng, n, m);
    const auto p = pearson_similarity(s);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b)
        worst = std::max(worst, fixture::relative_error(p.values(a, b), fixture::oracle_pearson(s.values, a, b)));
    spearman_exact &= spearman_similarity(s).values == pearson_similarity(rank_rows(s)).values;
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && spearman_exact && secs < 5.0,
          "max rel err " + fmt(worst) + ", spearman==pearson(rank) " + (spearman_exact ? "yes" : "no") +
              ", " + fmt(secs) + "s < 5s"};
}

// 2 -------------------------------------------------------------------------
Outcome monotone_invariance() {
  Rng rng(1002);
  int equal = 0;
  for (int t = 0; t < 50; ++t) {
    const auto l = fixture::random_scores(rng, 5 + rng.next_u64() % 60, 2 + rng.next_u64() % 12);
    const auto a = spearman_similarity(softmax_rows(l)).values.data();
    const auto b = spearman_similarity(l).values.data();
    equal += std::equal(a.begin(), a.end(), b.begin(), b.end(),
                        [](double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; });
  }
  return {equal == 50, std::to_string(equal) + "/50 bitwise equal"};
}

// 3 -------------------------------------------------------------------------
Outcome affine_invariance() {
  Rng rng(1003);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto n = 3 + rng.next_u64() % 60, m = 2 + rng.next_u64() % 12;
    const auto s = fixture::random_scores(rng, n, m);
    auto moved = s;
    for (std::size_t j = 0; j < m; ++j) {
      const double a = std::exp(4.0 * rng.uniform() - 2.0), b = 20.0 * rng.uniform() - 10.0;
      for (std::size_t i = 0; i < n; ++i) moved.values(i, j) = a * s.values(i, j) + b;
    }
    const auto x = pearson_similarity(s), y = pearson_similarity(moved);
    for (std::size_t k = 0; k < m * m; ++k) {
      worst = std::max(worst, std::abs(x.values.data()[k] - y.values.data()[k]));
    }
  }
  return {worst <= 1e-9, "max abs diff " + fmt(worst) + " <= 1e-9"};
}

// 4 -------------------------------------------------------------------------
Outcome clustering_oracle() {
  const auto t0 = Clock::now();
  Rng rng(1004);
  int equal = 0;
  bool monotone = true, dominant = true;
  auto check = [&](const Matrix& d, const Dendrogram& dend) {
    for (std::size_t k = 1; k < dend.merges.size(); ++k) monotone &= dend.merges[k - 1].height <= dend.merges[k].height;
    const auto c = cophenetic(dend);
    for (std::size_t a = 0; a < d.rows(); ++a)
      for (std::size_t b = 0; b < d.rows(); ++b) dominant &= c(a, b) >= d(a, b);
  };
  for (int t = 0; t < 1000; ++t) {
    const std::size_t m = 2 + rng.next_u64() % 7;
    const auto d = fixture::random_dissimilarity(rng, m);
    const auto dend = hclust_complete(d);
    equal += dend == fixture::brute_force_complete(d);
    check(d, dend);
  }
  // heights and dominance on inputs with ties and on larger inputs
  for (int t = 0; t < 200; ++t) {
    const std::size_t m = 2 + rng.next_u64() % 40;
    Matrix d(m, m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) d(i, j) = d(j, i) = static_cast<double>(rng.next_u64() % 4);
    check(d, hclust_complete(d));
  }
  const double secs = seconds_since(t0);
  return {equal == 1000 && monotone && dominant && secs < 10.0,
          std::to_string(equal) + "/1000 merge sequences equal, monotone " + (monotone ? "yes" : "no") +
              ", cophenetic dominance " + (dominant ? "yes" : "no") + ", " + fmt(secs) + "s < 10s"};
}

// 5, 6 ----------------------------------------------------------------------
SynthConfig fixed_synth(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.depth = 3;
  cfg.branching = 3;
  cfg.samples_per_class = 40;
  cfg.alpha = 4.0;
  cfg.beta = 2.0;
  cfg.sigma = 1.0;
  cfg.seed = seed;
  return cfg;
}

Outcome planted_blocks() {
  const auto t0 = Clock::now();
  int good = 0;
  double worst = 1.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto data = synth_scores(fixed_synth(seed));
    const auto dend = hclust_complete(to_dissimilarity(pearson_similarity(data.scores)));
    const double a3 = adjusted_rand_index(cut_dendrogram(dend, 3).assignment, data.planted[0].assignment);
    const double a9 = adjusted_rand_index(cut_dendrogram(dend, 9).assignment, data.planted[1].assignment);
    worst = std::min({worst, a3, a9});
    good += a3 >= 0.95 && a9 >= 0.95;
  }
  const double secs = seconds_since(t0);
  return {good >= 18 && secs < 60.0, std::to_string(good) + "/20 seeds with ARI >= 0.95 at k=3 and k=9 (min " +
                                         fmt(worst) + "), " + fmt(secs) + "s < 60s"};
}

Outcome skewness_ordering() {
  int good = 0;
  double p_sum = 0, l_sum = 0, r_sum = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto logits = synth_scores(fixed_synth(seed)).scores;
    const auto prob = softmax_rows(logits);
    auto skew = [](const SimilarityMatrix& s) { return distribution_stats(offdiagonal_values(s), 20).skewness; };
    const double p = skew(pearson_similarity(prob));
    const double l = skew(pearson_similarity(logits));
    const double r = skew(spearman_similarity(prob));
    p_sum += p;
    l_sum += l;
    r_sum += r;
    good += p > l && p > r;
  }
  return {good >= 18, std::to_string(good) + "/20 seeds; mean skewness prob-pearson " + fmt(p_sum / 20) +
                          ", logit-pearson " + fmt(l_sum / 20) + ", rank-spearman " + fmt(r_sum / 20)};
}

// 7 -------------------------------------------------------------------------
Outcome overlap_recovery() {
  double coverage = 0.0;
  bool monotone = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = fixture::planted_overlap(seed);
    double previous = std::numeric_limits<double>::infinity();
    auto observer = [&](std::size_t, double j, const Memberships&) {
      monotone &= j <= previous * (1.0 + 1e-12);
      previous = j;
    };
    const auto r = fuzzy_cmeans(p.sim, {3, 2.0, 1e-6, 300, seed}, observer);
    coverage += fixture::overlap_coverage(r.memberships, p.overlap, 0.2);
  }
  coverage /= 20.0;
  return {coverage >= 0.8 && monotone, "mean coverage of S " + fmt(coverage) + " (need >= 0.8), objective monotone " +
                                           (monotone ? "yes" : "no")};
}

// 8 -------------------------------------------------------------------------
Outcome multilabel_path() {
  LabelData l;
  l.sample_ids = {"0", "1", "2"};
  l.labels = {{"a", "b"}, {"a"}, {"b", "c"}};
  const auto co = cooccurrence_matrix(l, {"a", "b", "c"});
  const bool co_ok = co.counts == std::vector<std::int64_t>{2, 1, 0, 1, 2, 1, 0, 1, 1};

  ScoreMatrix s;
  s.class_names = {"a", "b"};
  s.sample_ids = {"0", "1", "2"};
  s.values = Matrix(3, 2);
  s.values(0, 0) = 2;  // a -> a
  s.values(1, 1) = 3;  // a -> b
  s.values(2, 1) = 1;  // b -> b
  LabelData single;
  single.sample_ids = s.sample_ids;
  single.labels = {{"a"}, {"a"}, {"b"}};
  const bool conf_ok = confusion_matrix(s, single).counts == std::vector<std::int64_t>{1, 1, 0, 1};

  bool rejected = false;
  try {
    confusion_matrix(s, l);
  } catch (const Error& e) {
    rejected = e.code() == ErrorCode::MultiLabelInput;
  }
  return {co_ok && conf_ok && rejected, std::string("co-occurrence ") + (co_ok ? "exact" : "wrong") +
                                            ", confusion " + (conf_ok ? "exact" : "wrong") + ", multi-label " +
                                            (rejected ? "rejected" : "accepted")};
}

// 9 -------------------------------------------------------------------------
Outcome rendering_determinism() {
  std::ifstream in(std::string(CLASS_ATLAS_GOLDEN_DIR) + "/heatmap_4x4_v1.svg", std::ios::binary);
  std::ostringstream golden;
  golden << in.rdbuf();
  set_worker_count(1);
  const auto a = fixture::golden_heatmap_svg();
  const auto b = fixture::golden_heatmap_svg();
  set_worker_count(8);
  const auto c = fixture::golden_heatmap_svg();
  set_worker_count(0);
  const bool same = !golden.str().empty() && a == golden.str() && b == a && c == a;
  const RenderSpec spec;
  const bool colors = value_to_color(-1.0, spec).hex() == "#313695" && value_to_color(0.0, spec).hex() == "#FFFFFF" &&
                      value_to_color(1.0, spec).hex() == "#A50026";
  return {same && colors, std::string("golden SVG ") + (same ? "byte-identical" : "differs") +
                              " (2 runs, 1 and 8 threads), stop colors " + (colors ? "exact" : "wrong")};
}

// 10 ------------------------------------------------------------------------
int run_cli(const std::vector<std::string>& args) {
  const pid_t pid = fork();
  if (pid == 0) {
    std::vector<char*> argv;
    std::string exe = CLASS_ATLAS_CLI;
    argv.push_back(exe.data());
    std::vector<std::string> copy = args;
    for (auto& a : copy) argv.push_back(a.data());
    argv.push_back(nullptr);
    execv(exe.c_str(), argv.data());
    _exit(127);
  }
  int status = 0;
  waitpid(pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : 128;
}

Outcome end_to_end() {
  const fs::path dir = fs::temp_directory_path() / ("class_atlas_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  const auto at = [&](const char* leaf) { return (dir / leaf).string(); };
  const std::vector<std::vector<std::string>> steps = {
      {"synth", "--depth", "1", "--branching", "365", "--samples-per-class", "100", "--seed", "7", "--out-dir",
       dir.string()},
      {"sim", "--scores", at("scores.bsm"), "--out", at("sim.bsm")},
      {"order", "--sim", at("sim.bsm"), "--out", at("ordering.json"), "--dendrogram", at("dendrogram.json")},
      {"cut", "--dendrogram", at("dendrogram.json"), "--k", "8", "--out", at("partition.json")},
      {"groups", "--sim", at("sim.bsm"), "--partition", at("partition.json"), "--out", at("groups.json")},
      {"render", "--matrix", at("sim.bsm"), "--ordering", at("ordering.json"), "--partition", at("partition.json"),
       "--groups", at("groups.json"), "--out", at("heatmap.svg"), "--dendrogram", at("dendrogram.json"),
       "--dendrogram-out", at("dendrogram.svg")},
      {"report", "--heatmap", at("heatmap.svg"), "--dendrogram", at("dendrogram.svg"), "--groups",
       at("groups.json"), "--out", at("report.html")},
  };
  const auto t0 = Clock::now();
  for (const auto& step : steps) {
    const int code = run_cli(step);
    if (code != 0) return {false, step.front() + " exited " + std::to_string(code)};
  }
  const double secs = seconds_since(t0);
  rusage usage{};
  getrusage(RUSAGE_CHILDREN, &usage);
  const double peak_mb = static_cast<double>(usage.ru_maxrss) / 1024.0;
  const bool report_ok = fs::exists(dir / "report.html");
  fs::remove_all(dir);
  return {report_ok && secs < 120.0 && peak_mb < 2048.0,
          "m=365 x 100 samples: 7 stages exit 0 in " + fmt(secs) + "s < 120s, peak RSS " + fmt(peak_mb) +
              " MB < 2048 MB"};
}

}  // namespace

int main() {
  report(1, "correlation oracle", correlation_oracle);
  report(2, "monotone invariance", monotone_invariance);
  report(3, "affine invariance", affine_invariance);
  report(4, "clustering oracle", clustering_oracle);
  report(5, "planted-block recovery", planted_blocks);
  report(6, "skewness ordering", skewness_ordering);
  report(7, "overlap recovery", overlap_recovery);
  report(8, "multi-label path", multilabel_path);
  report(9, "rendering determinism", rendering_determinism);
  report(10, "end-to-end CLI", end_to_end);
  std::cout << (failures ? "FAILED " : "ALL PASSED ") << 10 - failures << "/10" << std::endl;
  return failures ? 1 : 0;
}
