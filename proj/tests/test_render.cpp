// Copyright 2026 The class-atlas Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace class_atlas;

namespace {

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto at = hay.find(needle); at != std::string::npos; at = hay.find(needle, at + 1)) ++n;
  return n;
}

std::string read_golden(const std::string& name) {
  std::ifstream in(std::string(CLASS_ATLAS_GOLDEN_DIR) + "/" + name, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::uint32_t be32(const std::string& s, std::size_t at) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v = (v << 8) | static_cast<unsigned char>(s[at + k]);
  return v;
}

}  // namespace

TEST(Colormap, Stops) {
  const RenderSpec spec;
  EXPECT_EQ(value_to_color(0.0, spec).hex(), "#FFFFFF");
  EXPECT_EQ(value_to_color(1.0, spec).hex(), "#A50026");
  EXPECT_EQ(value_to_color(-1.0, spec).hex(), "#313695");
  EXPECT_EQ(value_to_color(0.5, spec).hex(), "#D28093");
  EXPECT_EQ(value_to_color(7.0, spec), value_to_color(1.0, spec));
  EXPECT_EQ(value_to_color(-7.0, spec), value_to_color(-1.0, spec));
  RenderSpec seq;
  seq.colormap = Colormap::Sequential;
  seq.clip_lo = 0.0;
  EXPECT_EQ(value_to_color(0.0, seq).hex(), "#FFFFFF");
  EXPECT_EQ(value_to_color(1.0, seq).hex(), "#A50026");
}

TEST(Colormap, Monotone) {
  const RenderSpec spec;
  int last_r = -1;
  for (int k = -100; k <= 0; ++k) {  // low half: red climbs to white
    const auto c = value_to_color(k / 100.0, spec);
    EXPECT_GE(c.r, last_r);
    last_r = c.r;
  }
  int last_g = 256;
  for (int k = 0; k <= 100; ++k) {  // high half: green falls to zero
    const auto c = value_to_color(k / 100.0, spec);
    EXPECT_LE(c.g, last_g);
    last_g = c.g;
  }
}

TEST(Spec, Validation) {
  RenderSpec bad;
  bad.clip_lo = 1.0;
  bad.clip_hi = 1.0;
  EXPECT_THROW(bad.validate(), Error);
  RenderSpec zero;
  zero.cell_px = 0;
  EXPECT_THROW(zero.validate(), Error);
}

TEST(Heatmap, SingleWhiteCell) {
  Matrix v(1, 1);
  const auto svg = render_heatmap(v, {0}, RenderSpec{});
  EXPECT_EQ(count(svg, "<rect"), 1u);
  EXPECT_EQ(count(svg, "fill=\"#FFFFFF\""), 1u);
  EXPECT_TRUE(svg.starts_with("<?xml"));
}

TEST(Heatmap, GoldenFixture) {
  const auto want = read_golden("heatmap_4x4_v1.svg");
  ASSERT_FALSE(want.empty());
  EXPECT_EQ(fixture::golden_heatmap_svg(), want);
  set_worker_count(8);
  EXPECT_EQ(fixture::golden_heatmap_svg(), want);
  set_worker_count(0);
}

TEST(Heatmap, PermutationApplied) {
  Matrix v(2, 2);
  v(0, 1) = v(1, 0) = 1.0;
  v(0, 0) = -1.0;
  const auto a = render_heatmap(v, {1, 0}, RenderSpec{});
  // first cell drawn is (1,1) = 0 -> white
  const auto first = a.find("<rect");
  EXPECT_NE(a.substr(first, 100).find("#FFFFFF"), std::string::npos);
}

TEST(Heatmap, Errors) {
  Matrix v(3, 3);
  EXPECT_THROW(render_heatmap(v, {0, 1}, RenderSpec{}), Error);
  EXPECT_THROW(render_heatmap(Matrix(2, 3), {0, 1}, RenderSpec{}), Error);
  RenderSpec spec;
  spec.annotations.blocks = {{0, 4}};
  EXPECT_THROW(render_heatmap(v, {0, 1, 2}, spec), Error);
}

TEST(Heatmap, Overlays) {
  Matrix v(4, 4);
  const GroupSet groups{{{0, 1}, GroupKind::SplitPair, 0.5, ""}, {{2}, GroupKind::Star, 1.0, ""}};
  RenderSpec spec;
  spec.annotations.flagged_classes = {3};
  const auto svg = render_heatmap(v, {0, 1, 2, 3}, spec, groups);
  EXPECT_EQ(count(svg, "<path"), 1u);
  EXPECT_EQ(count(svg, "fill=\"#2166AC\""), 1u);
  EXPECT_EQ(render_heatmap(v, {0, 1, 2, 3}, spec, groups), svg);
}

TEST(Heatmap, PngDimensions) {
  Rng rng(1);
  Matrix v(100, 100);
  for (auto& x : v.data()) x = 2.0 * rng.uniform() - 1.0;
  Ordering ord(100);
  for (std::size_t i = 0; i < 100; ++i) ord[i] = i;
  RenderSpec spec;
  spec.format = ImageFormat::Png;
  spec.cell_px = 4;
  const auto png = render_heatmap(v, ord, spec);
  ASSERT_GT(png.size(), 33u);
  EXPECT_EQ(png.substr(1, 3), "PNG");
  EXPECT_EQ(png.substr(12, 4), "IHDR");
  EXPECT_EQ(be32(png, 16), 400u + 20u);
  EXPECT_EQ(be32(png, 20), 400u + 20u);
  EXPECT_EQ(png, render_heatmap(v, ord, spec));
}

TEST(Heatmap, LargeMatricesArePooled) {
  const std::size_t m = 9;
  Matrix v(m, m);
  v(8, 8) = 1.0;
  Ordering ord(m);
  for (std::size_t i = 0; i < m; ++i) ord[i] = i;
  RenderSpec spec;
  spec.max_cells = 4;
  const auto svg = render_heatmap(v, ord, spec);
  EXPECT_EQ(count(svg, "<rect"), 9u);  // ceil(9/3) = 3 cells per side
  EXPECT_EQ(count(svg, "#A50026"), 1u);
}

TEST(Dendrogram, Brackets) {
  const auto two = hclust_complete([] {
    Matrix d(2, 2);
    d(0, 1) = d(1, 0) = 0.4;
    return d;
  }());
  EXPECT_EQ(count(render_dendrogram(two, {0, 1}, RenderSpec{}), "<path"), 1u);

  Matrix d(3, 3);
  d(0, 1) = d(1, 0) = 1;
  d(0, 2) = d(2, 0) = 5;
  d(1, 2) = d(2, 1) = 4;
  const auto dend = hclust_complete(d);
  const auto svg = render_dendrogram(dend, leaf_order(dend), RenderSpec{});
  EXPECT_EQ(count(svg, "<path"), 2u);
  // heights 1 and 5 on a 160 px strip whose root sits at x = 10
  EXPECT_NE(svg.find("H 138.000000"), std::string::npos);
  EXPECT_NE(svg.find("H 10.000000"), std::string::npos);
  EXPECT_EQ(svg, render_dendrogram(dend, leaf_order(dend), RenderSpec{}));
  try {
    render_dendrogram(dend, {2, 1, 0}, RenderSpec{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OrderingMismatch);
  }
}

TEST(Histogram, Captions) {
  const auto single = distribution_stats(std::vector<double>{3, 3, 3}, 5);
  const auto one = render_histogram(single, RenderSpec{});
  EXPECT_EQ(count(one, "<rect"), 1u);
  EXPECT_NE(one.find("width=\"400.000000\" height=\"200.000000\""), std::string::npos);

  const auto sym = distribution_stats(std::vector<double>{-2, -1, -1, 0, 0, 0, 1, 1, 2}, 5);
  const auto svg = render_histogram(sym, RenderSpec{}, "symmetric");
  EXPECT_NE(svg.find("skewness=0.000"), std::string::npos);
  EXPECT_EQ(svg, render_histogram(sym, RenderSpec{}, "symmetric"));
}

TEST(Report, Sections) {
  ReportInputs in;
  EXPECT_THROW(render_report(in), Error);
  in.heatmaps.push_back({"heat", fixture::golden_heatmap_svg()});
  in.metadata["measure"] = "pearson</script>";
  const auto html = render_report(in);
  EXPECT_EQ(count(html, "<section class=\"heatmap\""), 1u);
  EXPECT_EQ(count(html, "<section"), 1u);
  EXPECT_EQ(html.find("http://"), html.find("http://www.w3.org/2000/svg"));
  EXPECT_EQ(count(html, "</script>"), 1u);
  EXPECT_EQ(html, render_report(in));
}
