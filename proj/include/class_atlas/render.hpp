// Copyright 2026 The class-atlas Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "json.hpp"

#include "class_atlas/error.hpp"
#include "class_atlas/groups.hpp"
#include "class_atlas/matrix.hpp"
#include "class_atlas/seriation.hpp"
#include "class_atlas/similarity.hpp"

namespace class_atlas {

enum class Colormap { Diverging, Sequential };
enum class ImageFormat { Svg, Png };

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;

  std::string hex() const {
    static constexpr char kDigits[] = "0123456789ABCDEF";
    std::string out = "#";
    for (std::uint8_t c : {r, g, b}) {
      out.push_back(kDigits[c >> 4]);
      out.push_back(kDigits[c & 0xF]);
    }
    return out;
  }

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct RenderAnnotations {
  std::vector<Span> blocks;                   // display-order spans outlined on the diagonal
  std::vector<std::size_t> flagged_classes;   // class indices ticked in an extra right column
};

struct RenderSpec {
  double clip_lo = -1.0;
  double clip_hi = 1.0;
  Colormap colormap = Colormap::Diverging;
  std::size_t cell_px = 4;
  ImageFormat format = ImageFormat::Svg;
  RenderAnnotations annotations;
  std::size_t max_cells = 4000;  // larger matrices are max-pooled down to at most this many cells

  void validate() const {
    if (!(clip_lo < clip_hi) || !std::isfinite(clip_lo) || !std::isfinite(clip_hi)) {
      throw Error(ErrorCode::BadRenderSpec, "clip needs finite lo < hi");
    }
    if (cell_px < 1) throw Error(ErrorCode::BadRenderSpec, "cell_px must be at least 1");
    if (max_cells < 1) throw Error(ErrorCode::BadRenderSpec, "max_cells must be at least 1");
  }
};

inline constexpr Rgb kLowStop{0x31, 0x36, 0x95};
inline constexpr Rgb kMidStop{0xFF, 0xFF, 0xFF};
inline constexpr Rgb kHighStop{0xA5, 0x00, 0x26};

namespace detail {
inline std::uint8_t lerp_channel(std::uint8_t a, std::uint8_t b, double s) {
  const double v = static_cast<double>(a) + (static_cast<double>(b) - static_cast<double>(a)) * s;
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

inline Rgb lerp(const Rgb& a, const Rgb& b, double s) {
  return {lerp_channel(a.r, b.r, s), lerp_channel(a.g, b.g, s), lerp_channel(a.b, b.b, s)};
}
}  // namespace detail

inline Rgb value_to_color(double v, const RenderSpec& spec) {
  const double clamped = std::clamp(v, spec.clip_lo, spec.clip_hi);
  const double t = (clamped - spec.clip_lo) / (spec.clip_hi - spec.clip_lo);
  if (spec.colormap == Colormap::Sequential) return detail::lerp(kMidStop, kHighStop, t);
  if (t <= 0.5) return detail::lerp(kLowStop, kMidStop, t / 0.5);
  return detail::lerp(kMidStop, kHighStop, (t - 0.5) / 0.5);
}

// ---------------------------------------------------------------------------
// SVG helpers

namespace svg {

/// Fixed 6-decimal coordinate text; never prints "-0".
inline std::string num(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v + 0.0, std::chars_format::fixed, 6);
  std::string out(buf, ptr);
  if (out == "-0.000000") out = "0.000000";
  return out;
}

inline std::string fixed(double v, int digits) {
  char buf[64];
  const auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof buf, v + 0.0, std::chars_format::fixed, digits);
  std::string out(buf, ptr);
  if (!out.empty() && out.front() == '-' &&
      out.find_first_not_of("-0.") == std::string::npos) {
    out.erase(0, 1);
  }
  return out;
}

inline std::string escape(std::string_view text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(ch);
    }
  }
  return out;
}

inline std::string open(double width, double height) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         num(width) + "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " +
         num(height) + "\">\n";
}

inline std::string rect(double x, double y, double w, double h, std::string_view fill,
                        std::string_view extra = {}) {
  std::string out = "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
                    "\" height=\"" + num(h) + "\" fill=\"" + std::string(fill) + "\"";
  if (!extra.empty()) {
    out.push_back(' ');
    out += extra;
  }
  return out + "/>\n";
}

inline std::string line(double x1, double y1, double x2, double y2, std::string_view stroke) {
  return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
         num(y2) + "\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"1.000000\"/>\n";
}

inline std::string text(double x, double y, std::string_view content, std::string_view anchor) {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) +
         "\" font-family=\"sans-serif\" font-size=\"10.000000\" text-anchor=\"" +
         std::string(anchor) + "\">" + escape(content) + "</text>\n";
}

inline constexpr std::string_view kClose = "</svg>\n";

}  // namespace svg

// ---------------------------------------------------------------------------
// PNG (truecolor 8-bit, filter 0, zlib level 6)

struct RasterImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;  // row-major RGB triples

  RasterImage(std::size_t w, std::size_t h) : width(w), height(h), rgb(w * h * 3, 0xFF) {}

  void fill(std::size_t x0, std::size_t y0, std::size_t w, std::size_t h, Rgb c) {
    for (std::size_t y = y0; y < std::min(height, y0 + h); ++y) {
      for (std::size_t x = x0; x < std::min(width, x0 + w); ++x) {
        auto* p = &rgb[(y * width + x) * 3];
        p[0] = c.r;
        p[1] = c.g;
        p[2] = c.b;
      }
    }
  }

  void outline(std::size_t x0, std::size_t y0, std::size_t w, std::size_t h, Rgb c) {
    if (w == 0 || h == 0) return;
    fill(x0, y0, w, 1, c);
    fill(x0, y0 + h - 1, w, 1, c);
    fill(x0, y0, 1, h, c);
    fill(x0 + w - 1, y0, 1, h, c);
  }
};

namespace detail {
inline void put_be32(std::string& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<char>((v >> s) & 0xFF));
}

inline void png_chunk(std::string& out, std::string_view type, std::string_view data) {
  put_be32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t start = out.size();
  out.append(type);
  out.append(data);
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(out.data() + start),
                         static_cast<uInt>(out.size() - start));
  put_be32(out, static_cast<std::uint32_t>(crc));
}
}  // namespace detail

inline std::string encode_png(const RasterImage& img) {
  std::string raw;
  raw.reserve((img.width * 3 + 1) * img.height);
  for (std::size_t y = 0; y < img.height; ++y) {
    raw.push_back('\0');
    raw.append(reinterpret_cast<const char*>(&img.rgb[y * img.width * 3]), img.width * 3);
  }
  uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
  std::string packed(packed_size, '\0');
  if (compress2(reinterpret_cast<Bytef*>(packed.data()), &packed_size,
                reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                6) != Z_OK) {
    throw Error(ErrorCode::Internal, "zlib compression failed");
  }
  packed.resize(packed_size);

  std::string out = "\x89PNG\r\n\x1a\n";
  std::string ihdr;
  detail::put_be32(ihdr, static_cast<std::uint32_t>(img.width));
  detail::put_be32(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr += std::string("\x08\x02\x00\x00\x00", 5);  // 8-bit, truecolor, deflate, filter 0, no interlace
  detail::png_chunk(out, "IHDR", ihdr);
  detail::png_chunk(out, "IDAT", packed);
  detail::png_chunk(out, "IEND", {});
  return out;
}

// ---------------------------------------------------------------------------
// Heatmap

inline constexpr double kMargin = 10.0;
inline constexpr double kBracketLane = 6.0;
inline constexpr double kColumnGap = 4.0;
inline constexpr std::string_view kOutlineColor = "#000000";
inline constexpr std::string_view kBracketColor = "#1B7837";
inline constexpr std::string_view kFlagColor = "#2166AC";

/// Geometry shared by the SVG and PNG heatmap writers.
struct HeatmapLayout {
  std::size_t classes = 0;
  std::size_t pool = 1;       // classes per display cell
  std::size_t cells = 0;      // display cells per side
  double cell = 1.0;
  std::size_t bracket_lanes = 0;
  std::size_t flag_columns = 0;
  double column_width = 4.0;

  double x0() const { return kMargin + kBracketLane * static_cast<double>(bracket_lanes); }
  double y0() const { return kMargin; }
  double side() const { return cell * static_cast<double>(cells); }
  double column_x(std::size_t k) const {
    return x0() + side() + kColumnGap + (column_width + 2.0) * static_cast<double>(k);
  }
  double width() const {
    const double right = flag_columns ? kColumnGap + (column_width + 2.0) *
                                                         static_cast<double>(flag_columns)
                                      : 0.0;
    return x0() + side() + right + kMargin;
  }
  double height() const { return 2.0 * kMargin + side(); }
  double row_y(std::size_t pos) const {
    return y0() + cell * static_cast<double>(pos / pool);
  }
};

namespace detail {
inline bool is_bracket(const Group& g) {
  return g.kind == GroupKind::Hierarchical || g.kind == GroupKind::SplitPair;
}

inline HeatmapLayout heatmap_layout(std::size_t m, const RenderSpec& spec, const GroupSet& groups) {
  HeatmapLayout lay;
  lay.classes = m;
  lay.pool = m > spec.max_cells ? (m + spec.max_cells - 1) / spec.max_cells : 1;
  lay.cells = (m + lay.pool - 1) / lay.pool;
  lay.cell = static_cast<double>(spec.cell_px);
  lay.column_width = std::max(4.0, lay.cell);
  for (const auto& g : groups) (is_bracket(g) ? lay.bracket_lanes : lay.flag_columns)++;
  if (!spec.annotations.flagged_classes.empty()) ++lay.flag_columns;
  return lay;
}

/// Permuted matrix, max-pooled when the layout pools.
inline Matrix display_values(const Matrix& matrix, const Ordering& ord, const HeatmapLayout& lay) {
  Matrix out(lay.cells, lay.cells, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < lay.classes; ++i) {
    for (std::size_t j = 0; j < lay.classes; ++j) {
      double& cell = out(i / lay.pool, j / lay.pool);
      cell = std::max(cell, matrix(ord[i], ord[j]));
    }
  }
  return out;
}

/// Display positions of a group's members, ascending.
inline std::vector<std::size_t> member_positions(const Group& g, const Ordering& inv) {
  std::vector<std::size_t> pos;
  for (std::size_t j : g.members) pos.push_back(inv.at(j));
  std::sort(pos.begin(), pos.end());
  return pos;
}

inline void check_heatmap_inputs(const Matrix& matrix, const Ordering& ord, const RenderSpec& spec,
                                 const GroupSet& groups) {
  spec.validate();
  if (!matrix.square() || !is_permutation(ord, matrix.rows())) {
    throw Error(ErrorCode::SizeMismatch, "ordering does not match the matrix");
  }
  const std::size_t m = matrix.rows();
  for (const auto& span : spec.annotations.blocks) {
    if (span.start >= span.end || span.end > m) {
      throw Error(ErrorCode::SizeMismatch, "block span outside the matrix");
    }
  }
  for (std::size_t j : spec.annotations.flagged_classes) {
    if (j >= m) throw Error(ErrorCode::SizeMismatch, "flagged class outside the matrix");
  }
  for (const auto& g : groups) {
    for (std::size_t j : g.members) {
      if (j >= m) throw Error(ErrorCode::SizeMismatch, "group member outside the matrix");
    }
  }
}
}  // namespace detail

namespace detail {
inline std::string heatmap_svg(const Matrix& matrix, const Ordering& ord, const RenderSpec& spec,
                               const GroupSet& groups) {
  const auto lay = heatmap_layout(matrix.rows(), spec, groups);
  const auto shown = display_values(matrix, ord, lay);
  const auto inv = inverse(ord);
  std::string out = svg::open(lay.width(), lay.height());
  out.reserve(out.size() + lay.cells * lay.cells * 96);
  for (std::size_t i = 0; i < lay.cells; ++i) {
    for (std::size_t j = 0; j < lay.cells; ++j) {
      out += svg::rect(lay.x0() + lay.cell * static_cast<double>(j),
                       lay.y0() + lay.cell * static_cast<double>(i), lay.cell, lay.cell,
                       value_to_color(shown(i, j), spec).hex());
    }
  }
  for (const auto& span : spec.annotations.blocks) {
    const double a = lay.row_y(span.start) - lay.y0();
    const double b = lay.row_y(span.end - 1) - lay.y0() + lay.cell;
    out += svg::rect(lay.x0() + a, lay.y0() + a, b - a, b - a, "none",
                     "stroke=\"" + std::string(kOutlineColor) + "\" stroke-width=\"1.000000\"");
  }
  std::size_t lane = 0;
  std::size_t column = 0;
  for (const auto& g : groups) {
    const auto pos = member_positions(g, inv);
    if (is_bracket(g)) {
      const double x = kMargin + kBracketLane * static_cast<double>(lane) + kBracketLane / 2.0;
      const double top = lay.row_y(pos.front());
      const double bottom = lay.row_y(pos.back()) + lay.cell;
      std::string d = "M " + svg::num(x) + " " + svg::num(top) + " V " + svg::num(bottom);
      for (std::size_t p : pos) {
        const double y = lay.row_y(p) + lay.cell / 2.0;
        d += " M " + svg::num(x) + " " + svg::num(y) + " H " + svg::num(x + kBracketLane / 2.0);
      }
      out += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + std::string(kBracketColor) +
             "\" stroke-width=\"1.000000\"/>\n";
      ++lane;
    } else {
      const double x = lay.column_x(column);
      out += svg::rect(x, lay.y0(), lay.column_width, lay.side(), "none",
                       "stroke=\"#BBBBBB\" stroke-width=\"0.500000\"");
      for (std::size_t p : pos) {
        out += svg::rect(x, lay.row_y(p), lay.column_width, lay.cell, std::string(kFlagColor));
      }
      ++column;
    }
  }
  if (!spec.annotations.flagged_classes.empty()) {
    const double x = lay.column_x(column);
    for (std::size_t j : spec.annotations.flagged_classes) {
      out += svg::rect(x, lay.row_y(inv[j]), lay.column_width, lay.cell, std::string(kOutlineColor));
    }
  }
  out += svg::kClose;
  return out;
}

inline Rgb parse_hex(std::string_view hex) {
  auto byte = [&](std::size_t at) {
    return static_cast<std::uint8_t>(std::stoi(std::string(hex.substr(at, 2)), nullptr, 16));
  };
  return {byte(1), byte(3), byte(5)};
}

inline std::string heatmap_png(const Matrix& matrix, const Ordering& ord, const RenderSpec& spec,
                               const GroupSet& groups) {
  const auto lay = heatmap_layout(matrix.rows(), spec, groups);
  const auto shown = display_values(matrix, ord, lay);
  const auto inv = inverse(ord);
  const auto px = [](double v) { return static_cast<std::size_t>(std::lround(v)); };
  RasterImage img(px(lay.width()), px(lay.height()));
  const std::size_t c = spec.cell_px;
  for (std::size_t i = 0; i < lay.cells; ++i) {
    for (std::size_t j = 0; j < lay.cells; ++j) {
      img.fill(px(lay.x0()) + j * c, px(lay.y0()) + i * c, c, c, value_to_color(shown(i, j), spec));
    }
  }
  const Rgb black = parse_hex(kOutlineColor);
  for (const auto& span : spec.annotations.blocks) {
    const std::size_t a = px(lay.row_y(span.start) - lay.y0());
    const std::size_t b = px(lay.row_y(span.end - 1) - lay.y0() + lay.cell);
    img.outline(px(lay.x0()) + a, px(lay.y0()) + a, b - a, b - a, black);
  }
  std::size_t lane = 0;
  std::size_t column = 0;
  for (const auto& g : groups) {
    const auto pos = member_positions(g, inv);
    if (is_bracket(g)) {
      const std::size_t x = px(kMargin + kBracketLane * static_cast<double>(lane)) + 3;
      const std::size_t top = px(lay.row_y(pos.front()));
      const std::size_t bottom = px(lay.row_y(pos.back()) + lay.cell);
      img.fill(x, top, 1, bottom - top, parse_hex(kBracketColor));
      for (std::size_t p : pos) img.fill(x, px(lay.row_y(p)), 3, 1, parse_hex(kBracketColor));
      ++lane;
    } else {
      const std::size_t x = px(lay.column_x(column));
      for (std::size_t p : pos) {
        img.fill(x, px(lay.row_y(p)), px(lay.column_width), c, parse_hex(kFlagColor));
      }
      ++column;
    }
  }
  if (!spec.annotations.flagged_classes.empty()) {
    const std::size_t x = px(lay.column_x(column));
    for (std::size_t j : spec.annotations.flagged_classes) {
      img.fill(x, px(lay.row_y(inv[j])), px(lay.column_width), c, black);
    }
  }
  return encode_png(img);
}
}  // namespace detail

/// Heatmap of `matrix` with rows and columns in display order `ord`, row 0
/// on top. Hierarchical and split-pair groups become brackets on the left;
/// recovered and star groups become flag columns on the right.
inline std::string render_heatmap(const Matrix& matrix, const Ordering& ord, const RenderSpec& spec,
                                  const GroupSet& groups = {}) {
  detail::check_heatmap_inputs(matrix, ord, spec, groups);
  return spec.format == ImageFormat::Svg ? detail::heatmap_svg(matrix, ord, spec, groups)
                                         : detail::heatmap_png(matrix, ord, spec, groups);
}

// ---------------------------------------------------------------------------
// Dendrogram strip

inline constexpr double kDendrogramWidth = 160.0;

/// Orthogonal tree strip whose leaves line up with heatmap rows; merge
/// height grows to the left.
inline std::string render_dendrogram(const Dendrogram& dend, const Ordering& ord,
                                     const RenderSpec& spec) {
  spec.validate();
  if (ord != leaf_order(dend)) {
    throw Error(ErrorCode::OrderingMismatch, "ordering is not the dendrogram's leaf order");
  }
  const std::size_t m = dend.n_leaves;
  const std::size_t pool = m > spec.max_cells ? (m + spec.max_cells - 1) / spec.max_cells : 1;
  const double cell = static_cast<double>(spec.cell_px) / static_cast<double>(pool);
  double top = 0.0;
  for (const auto& merge : dend.merges) top = std::max(top, merge.height);
  const double right = kMargin + kDendrogramWidth;
  auto x_of = [&](double h) { return top > 0.0 ? right - kDendrogramWidth * h / top : right; };

  std::vector<double> node_x(m + dend.merges.size());
  std::vector<double> node_y(m + dend.merges.size());
  const auto inv = inverse(ord);
  for (std::size_t leaf = 0; leaf < m; ++leaf) {
    node_x[leaf] = right;
    node_y[leaf] = kMargin + (static_cast<double>(inv[leaf]) + 0.5) * cell;
  }
  const double height = 2.0 * kMargin + cell * static_cast<double>(m);
  std::string out = svg::open(right + kMargin, height);
  for (std::size_t k = 0; k < dend.merges.size(); ++k) {
    const auto& merge = dend.merges[k];
    std::size_t upper = merge.left;
    std::size_t lower = merge.right;
    if (node_y[lower] < node_y[upper]) std::swap(upper, lower);
    const double x = x_of(merge.height);
    node_x[m + k] = x;
    node_y[m + k] = (node_y[upper] + node_y[lower]) / 2.0;
    out += "<path d=\"M " + svg::num(node_x[upper]) + " " + svg::num(node_y[upper]) + " H " +
           svg::num(x) + " V " + svg::num(node_y[lower]) + " H " + svg::num(node_x[lower]) +
           "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.000000\"/>\n";
  }
  out += svg::kClose;
  return out;
}

// ---------------------------------------------------------------------------
// Histogram

inline constexpr double kHistogramWidth = 400.0;
inline constexpr double kHistogramHeight = 200.0;

inline std::string render_histogram(const DistributionStats& stats, const RenderSpec& spec,
                                    std::string_view title = {}) {
  spec.validate();
  std::size_t tallest = 0;
  for (const auto& bin : stats.histogram) tallest = std::max(tallest, bin.count);
  const double plot_top = kMargin + (title.empty() ? 0.0 : 14.0);
  const double width = 2.0 * kMargin + kHistogramWidth;
  const double height = plot_top + kHistogramHeight + 34.0 + kMargin;
  std::string out = svg::open(width, height);
  if (!title.empty()) out += svg::text(width / 2.0, kMargin + 10.0, title, "middle");
  const double bar_w = kHistogramWidth / static_cast<double>(std::max<std::size_t>(1, stats.histogram.size()));
  for (std::size_t b = 0; b < stats.histogram.size(); ++b) {
    const double frac = tallest ? static_cast<double>(stats.histogram[b].count) /
                                      static_cast<double>(tallest)
                                : 0.0;
    const double h = kHistogramHeight * frac;
    out += svg::rect(kMargin + bar_w * static_cast<double>(b), plot_top + kHistogramHeight - h,
                     bar_w, h, "#4575B4", "stroke=\"#FFFFFF\" stroke-width=\"0.500000\"");
  }
  const double axis_y = plot_top + kHistogramHeight;
  out += svg::line(kMargin, axis_y, kMargin + kHistogramWidth, axis_y, "#000000");
  out += svg::text(kMargin, axis_y + 12.0, svg::fixed(stats.min, 3), "start");
  out += svg::text(kMargin + kHistogramWidth, axis_y + 12.0, svg::fixed(stats.max, 3), "end");
  out += svg::text(width / 2.0, axis_y + 28.0,
                   "n=" + std::to_string(stats.count) + " mean=" + svg::fixed(stats.mean, 3) +
                       " skewness=" + svg::fixed(stats.skewness, 3),
                   "middle");
  out += svg::kClose;
  return out;
}

// ---------------------------------------------------------------------------
// HTML report

struct ReportFigure {
  std::string title;
  std::string svg;
};

struct ReportGroupTable {
  std::string title;
  nlohmann::ordered_json groups;  // GroupSet JSON
};

struct ReportInputs {
  std::vector<ReportFigure> heatmaps;
  std::optional<ReportFigure> dendrogram;
  std::vector<ReportFigure> histograms;
  std::vector<ReportGroupTable> group_tables;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
};

namespace detail {
inline std::string inline_svg(std::string_view svg) {
  if (svg.starts_with("<?xml")) {
    const auto nl = svg.find('\n');
    svg.remove_prefix(nl == std::string_view::npos ? svg.size() : nl + 1);
  }
  return std::string(svg);
}

inline void figure_section(std::string& out, std::string_view kind, const ReportFigure& fig) {
  out += "<section class=\"" + std::string(kind) + "\">\n<h2>" + svg::escape(fig.title) +
         "</h2>\n<figure>\n" + inline_svg(fig.svg) + "</figure>\n</section>\n";
}
}  // namespace detail

/// Single self-contained HTML page; no external resources.
inline std::string render_report(const ReportInputs& in) {
  if (in.heatmaps.empty() && !in.dendrogram && in.histograms.empty() && in.group_tables.empty()) {
    throw Error(ErrorCode::EmptyReport, "report needs at least one artifact");
  }
  std::string out =
      "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n"
      "<title>Class similarity report</title>\n<style>\n"
      "body{font-family:sans-serif;margin:24px;}\n"
      "table{border-collapse:collapse;}\n"
      "td,th{border:1px solid #ccc;padding:2px 6px;text-align:left;vertical-align:top;}\n"
      "</style>\n</head>\n<body>\n<h1>Class similarity report</h1>\n";
  std::string meta = in.metadata.dump(2);
  // Keep "</script>" out of the JSON block.
  for (std::size_t at = meta.find("</"); at != std::string::npos; at = meta.find("</", at + 3)) {
    meta.replace(at, 2, "<\\/");
  }
  out += "<script type=\"application/json\" id=\"metadata\">\n" + meta + "\n</script>\n";
  for (const auto& fig : in.heatmaps) detail::figure_section(out, "heatmap", fig);
  if (in.dendrogram) detail::figure_section(out, "dendrogram", *in.dendrogram);
  for (const auto& fig : in.histograms) detail::figure_section(out, "histogram", fig);
  for (const auto& table : in.group_tables) {
    out += "<section class=\"groups\">\n<h2>" + svg::escape(table.title) +
           "</h2>\n<table>\n<tr><th>kind</th><th>score</th><th>provenance</th><th>members</th></tr>\n";
    for (const auto& g : table.groups) {
      std::string members;
      for (const auto& name : g.at("members")) {
        if (!members.empty()) members += ", ";
        members += name.get<std::string>();
      }
      out += "<tr><td>" + svg::escape(g.at("kind").get<std::string>()) + "</td><td>" +
             svg::fixed(g.at("score").get<double>(), 4) + "</td><td>" +
             svg::escape(g.value("provenance", "")) + "</td><td>" + svg::escape(members) +
             "</td></tr>\n";
    }
    out += "</table>\n</section>\n";
  }
  out += "</body>\n</html>\n";
  return out;
}

}  // namespace class_atlas
