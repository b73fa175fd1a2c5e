// Copyright 2026 The class-atlas Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "support.hpp"

using namespace class_atlas;

namespace {

ScoreMatrix columns(std::vector<std::vector<double>> cols, ScoreKind kind = ScoreKind::Logit) {
  ScoreMatrix s;
  s.kind = kind;
  const std::size_t n = cols.front().size();
  s.values = Matrix(n, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) s.values(i, j) = cols[j][i];
    s.class_names.push_back(std::string(1, static_cast<char>('a' + j)));
  }
  s.sample_ids = default_sample_ids(n);
  return s;
}

ScoreMatrix rows(std::vector<std::vector<double>> r, ScoreKind kind = ScoreKind::Logit) {
  ScoreMatrix s;
  s.kind = kind;
  s.values = Matrix(r.size(), r.front().size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = 0; j < r[i].size(); ++j) s.values(i, j) = r[i][j];
  }
  for (std::size_t j = 0; j < r.front().size(); ++j) s.class_names.push_back("k" + std::to_string(j));
  s.sample_ids = default_sample_ids(r.size());
  return s;
}

std::vector<double> row_of(const Matrix& m, std::size_t i) {
  const auto r = m.row(i);
  return {r.begin(), r.end()};
}

LabelData labels(std::vector<std::vector<std::string>> sets) {
  LabelData l;
  for (std::size_t i = 0; i < sets.size(); ++i) l.sample_ids.push_back(std::to_string(i));
  l.labels = std::move(sets);
  return l;
}

}  // namespace

TEST(Softmax, ClosedForms) {
  const auto p = softmax_rows(rows({{0, 0}, {1000, 1000}, {0, std::log(3.0)}}));
  EXPECT_EQ(p.kind, ScoreKind::Probability);
  EXPECT_EQ(p.values(0, 0), 0.5);
  EXPECT_EQ(p.values(1, 1), 0.5);
  EXPECT_NEAR(p.values(2, 0), 0.25, 1e-15);
  EXPECT_NEAR(p.values(2, 1), 0.75, 1e-15);
  EXPECT_THROW(softmax_rows(p), Error);
}

TEST(Softmax, RowsSumToOne) {
  Rng rng(2);
  const auto p = softmax_rows(fixture::random_scores(rng, 30, 12, 10.0));
  for (std::size_t i = 0; i < p.n_samples(); ++i) {
    const auto r = p.values.row(i);
    const double sum = std::accumulate(r.begin(), r.end(), 0.0);
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_NEAR(sum / 12.0, 1.0 / 12.0, 1e-12);
  }
}

TEST(Rank, AscendingAverageTies) {
  const auto r = rank_rows(rows({{0.1, 0.7, 0.2}, {0.5, 0.5, 0.1}}));
  EXPECT_EQ(r.kind, ScoreKind::Rank);
  EXPECT_EQ(row_of(r.values, 0), (std::vector<double>{1, 3, 2}));
  EXPECT_EQ(row_of(r.values, 1), (std::vector<double>{2.5, 2.5, 1}));
}

TEST(Rank, SoftmaxInvariant) {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const auto l = fixture::random_scores(rng, 10, 6);
    EXPECT_EQ(rank_rows(softmax_rows(l)).values, rank_rows(l).values);
  }
}

TEST(Pearson, HandExamples) {
  const auto same = pearson_similarity(columns({{0.1, 0.5, 0.9}, {0.1, 0.5, 0.9}}));
  EXPECT_EQ(same.values(0, 1), 1.0);
  const auto anti = pearson_similarity(columns({{1, 2, 3}, {3, 2, 1}}));
  EXPECT_EQ(anti.values(0, 1), -1.0);
  const auto r = pearson_similarity(columns({{1, 2, 3, 4}, {1, 3, 2, 4}}));
  EXPECT_NEAR(r.values(0, 1), 0.8, 1e-15);
  EXPECT_EQ(r.measure, Measure::Pearson);
}

TEST(Pearson, TooFewSamples) {
  try {
    pearson_similarity(columns({{1}, {2}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewSamples);
  }
}

TEST(Pearson, DegenerateColumn) {
  const auto s = pearson_similarity(columns({{1, 2, 3}, {5, 5, 5}, {2, 1, 4}}));
  EXPECT_EQ(s.degenerate_classes, (std::vector<std::size_t>{1}));
  EXPECT_EQ(s.values(1, 1), 0.0);
  EXPECT_EQ(s.values(0, 1), 0.0);
  EXPECT_EQ(s.values(2, 2), 1.0);
  EXPECT_EQ(offdiagonal_values(s).size(), 1u);
}

TEST(Pearson, InvariantsOnRandomInputs) {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    const auto n = 2 + rng.next_u64() % 40, m = 1 + rng.next_u64() % 10;
    const auto s = pearson_similarity(fixture::random_scores(rng, n, m));
    for (std::size_t a = 0; a < m; ++a) {
      EXPECT_EQ(s.values(a, a), 1.0);
      for (std::size_t b = 0; b < m; ++b) {
        EXPECT_EQ(s.values(a, b), s.values(b, a));
        EXPECT_LE(std::abs(s.values(a, b)), 1.0);
      }
    }
  }
}

TEST(Pearson, MatchesOracle) {
  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    const auto n = 2 + rng.next_u64() % 49, m = 1 + rng.next_u64() % 10;
    const auto sc = fixture::random_scores(rng, n, m);
    const auto s = pearson_similarity(sc);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        EXPECT_LE(fixture::relative_error(s.values(a, b), fixture::oracle_pearson(sc.values, a, b)), 1e-12);
      }
    }
  }
}

TEST(Pearson, SampleOrderInvariant) {
  Rng rng(12);
  auto s = fixture::random_scores(rng, 25, 5);
  const auto before = pearson_similarity(s);
  ScoreMatrix shuffled = s;
  for (std::size_t i = 0; i < 25; ++i) {
    const auto src = 24 - i;
    for (std::size_t j = 0; j < 5; ++j) shuffled.values(i, j) = s.values(src, j);
  }
  const auto after = pearson_similarity(shuffled);
  for (std::size_t k = 0; k < 25; ++k) {
    EXPECT_NEAR(before.values.data()[k], after.values.data()[k], 1e-12);
  }
}

TEST(Pearson, ThreadCountDoesNotChangeBits) {
  Rng rng(13);
  const auto s = fixture::random_scores(rng, 200, 40);
  set_worker_count(1);
  const auto one = pearson_similarity(s);
  set_worker_count(8);
  const auto eight = pearson_similarity(s);
  set_worker_count(0);
  EXPECT_EQ(one.values, eight.values);
}

TEST(Spearman, IsPearsonOfRanks) {
  Rng rng(14);
  const auto s = fixture::random_scores(rng, 30, 7);
  const auto sp = spearman_similarity(s);
  EXPECT_EQ(sp.values, pearson_similarity(rank_rows(s)).values);
  EXPECT_EQ(sp.measure, Measure::Spearman);
  EXPECT_EQ(sp.source_kind, ScoreKind::Logit);
  EXPECT_EQ(spearman_similarity(softmax_rows(s)).values, sp.values);
}

TEST(Spearman, IdenticalRankColumns) {
  const auto s = spearman_similarity(rows({{1, 2}, {1, 2}, {2, 1}, {1, 2}}));
  EXPECT_EQ(s.values(0, 1), -1.0);  // ranks within each sample are complementary
  const auto t = pearson_similarity(columns({{1, 2, 1, 2}, {1, 2, 1, 2}}, ScoreKind::Rank));
  EXPECT_EQ(t.values(0, 1), 1.0);
}

TEST(Cooccurrence, HandCounts) {
  const auto c = cooccurrence_matrix(labels({{"a", "b"}, {"a"}, {"b", "c"}}), {"a", "b", "c"});
  EXPECT_EQ(c.counts, (std::vector<std::int64_t>{2, 1, 0, 1, 2, 1, 0, 1, 1}));
  EXPECT_EQ(c.kind, CountKind::Cooccurrence);
}

TEST(Cooccurrence, Degenerate) {
  const auto single = cooccurrence_matrix(labels({{"a"}, {"b"}, {"a"}}), {"a", "b"});
  EXPECT_EQ(single.counts, (std::vector<std::int64_t>{2, 0, 0, 1}));
  const auto empty = cooccurrence_matrix(LabelData{}, {"a", "b"});
  EXPECT_EQ(empty.counts, (std::vector<std::int64_t>(4, 0)));
  EXPECT_THROW(cooccurrence_matrix(labels({{"z"}}), {"a"}), Error);
}

TEST(Confusion, HandCounts) {
  auto s = rows({{2, 1}, {0, 3}, {0, 1}});
  s.class_names = {"a", "b"};
  const auto c = confusion_matrix(s, labels({{"a"}, {"a"}, {"b"}}));
  EXPECT_EQ(c.counts, (std::vector<std::int64_t>{1, 1, 0, 1}));
  EXPECT_EQ(c.kind, CountKind::Confusion);
}

TEST(Confusion, TiesPickLowestIndex) {
  auto s = rows({{1, 1}});
  s.class_names = {"a", "b"};
  EXPECT_EQ(confusion_matrix(s, labels({{"b"}})).at(1, 0), 1);
}

TEST(Confusion, RejectsMultiLabel) {
  auto s = rows({{1, 0}, {0, 1}});
  s.class_names = {"a", "b"};
  try {
    confusion_matrix(s, labels({{"a", "b"}, {"b"}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MultiLabelInput);
  }
  try {
    confusion_matrix(s, labels({{"a"}, {"q"}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownLabel);
  }
}

TEST(Stats, Moments) {
  const std::vector<double> sym{-1, 0, 1};
  EXPECT_EQ(distribution_stats(sym, 4).skewness, 0.0);
  const std::vector<double> skew{0, 0, 0, 1};
  EXPECT_NEAR(distribution_stats(skew, 4).skewness, 2.0 / std::sqrt(3.0), 1e-12);
  const std::vector<double> flat{5, 5};
  const auto d = distribution_stats(flat, 10);
  EXPECT_EQ(d.std, 0.0);
  EXPECT_EQ(d.skewness, 0.0);
  EXPECT_EQ(d.excess_kurtosis, 0.0);
  EXPECT_EQ(d.histogram.size(), 1u);
  EXPECT_THROW(distribution_stats(std::vector<double>{}, 3), Error);
}

TEST(Stats, HistogramCoversRange) {
  Rng rng(21);
  std::vector<double> v(500);
  for (auto& x : v) x = rng.normal();
  const auto d = distribution_stats(v, 17);
  ASSERT_EQ(d.histogram.size(), 17u);
  std::size_t total = 0;
  for (std::size_t b = 0; b < d.histogram.size(); ++b) {
    total += d.histogram[b].count;
    if (b) {
      EXPECT_EQ(d.histogram[b].lo, d.histogram[b - 1].hi);
    }
  }
  EXPECT_EQ(total, v.size());
  EXPECT_EQ(d.histogram.front().lo, *std::min_element(v.begin(), v.end()));
  EXPECT_EQ(d.histogram.back().hi, *std::max_element(v.begin(), v.end()));
}

TEST(Stats, OffDiagonal) {
  auto s = pearson_similarity(columns({{1, 2, 3}, {1, 3, 2}}));
  EXPECT_EQ(offdiagonal_values(s), (std::vector<double>{s.values(0, 1)}));
}

TEST(Serialization, SimilarityAndCountsRoundTrip) {
  Rng rng(22);
  const auto s = pearson_similarity(fixture::random_scores(rng, 20, 6));
  const auto bytes = write_similarity_binary(s);
  const auto back = parse_similarity_binary(bytes);
  EXPECT_EQ(back.values, s.values);
  EXPECT_EQ(back.class_names, s.class_names);
  EXPECT_EQ(back.measure, s.measure);
  EXPECT_EQ(write_similarity_binary(back), bytes);

  const auto c = cooccurrence_matrix(labels({{"k0", "k1"}, {"k2"}}), {"k0", "k1", "k2"});
  const auto cb = parse_counts_binary(write_counts_binary(c));
  EXPECT_EQ(cb.counts, c.counts);
  EXPECT_EQ(cb.kind, c.kind);
  EXPECT_THROW(parse_similarity_binary(write_counts_binary(c)), Error);
}
