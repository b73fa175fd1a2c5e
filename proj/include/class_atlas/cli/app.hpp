// Copyright 2026 The class-atlas Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "class_atlas/cli/stages.hpp"

namespace class_atlas::cli {

namespace detail {

template <class Enum, class Parse>
Enum parse_choice(const std::string& text, Parse parse, const char* what) {
  const auto v = parse(text);
  if (!v) throw Error(ErrorCode::ConfigInvalid, std::string("unknown ") + what + " '" + text + "'");
  return *v;
}

inline std::pair<double, double> parse_clip(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::BadRenderSpec, "--clip expects lo:hi");
  const auto lo = csv::parse_number(text.substr(0, colon));
  const auto hi = csv::parse_number(text.substr(colon + 1));
  if (!lo || !hi) throw Error(ErrorCode::BadRenderSpec, "--clip expects two numbers, got '" + text + "'");
  return {*lo, *hi};
}

inline std::optional<Colormap> parse_colormap(std::string_view text) {
  if (text == "diverging") return Colormap::Diverging;
  if (text == "sequential") return Colormap::Sequential;
  return std::nullopt;
}

inline std::optional<ImageFormat> parse_format(std::string_view text) {
  if (text == "svg") return ImageFormat::Svg;
  if (text == "png") return ImageFormat::Png;
  return std::nullopt;
}

inline std::optional<OrderMethod> parse_method(std::string_view text) {
  if (text == "hclust") return OrderMethod::Hclust;
  if (text == "taxonomy") return OrderMethod::Taxonomy;
  return std::nullopt;
}

inline std::optional<fs::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

// Flat `key = value` config. Each key becomes `--key value` unless the flag
// is already on the command line. Boolean flags take true/false.
inline std::vector<std::string> expand_config(const std::vector<std::string>& args, CLI::App& app) {
  std::size_t sub_pos = args.size();
  CLI::App* sub = nullptr;
  for (std::size_t i = 0; i < args.size(); ++i) {
    for (auto* s : app.get_subcommands({})) {
      if (s->get_name() == args[i]) {
        sub = s;
        sub_pos = i;
        break;
      }
    }
    if (sub) break;
  }
  if (!sub) return args;

  std::vector<std::string> rest;
  std::optional<std::string> config_path;
  for (std::size_t i = sub_pos + 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[++i];
    } else if (args[i].starts_with("--config=")) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!config_path) return args;

  auto present = [&](const std::string& flag) {
    return std::any_of(rest.begin(), rest.end(), [&](const std::string& a) {
      return a == flag || a.starts_with(flag + "=");
    });
  };

  std::ifstream in(*config_path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file " + *config_path);
  std::vector<std::string> extra;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto body = csv::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::ConfigInvalid,
                  *config_path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key(csv::trim(body.substr(0, eq)));
    const std::string value(csv::trim(body.substr(eq + 1)));
    if (key.starts_with("--")) key.erase(0, 2);
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string flag = "--" + key;
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (!opt) {
      throw Error(ErrorCode::ConfigInvalid, *config_path + ": unknown key '" + key + "' for " + sub->get_name());
    }
    if (present(flag)) continue;
    if (opt->get_expected_max() == 0) {
      if (value == "true" || value == "1") {
        extra.push_back(flag);
      } else if (value != "false" && value != "0") {
        throw Error(ErrorCode::ConfigInvalid, *config_path + ": '" + key + "' takes true or false");
      }
    } else if (opt->get_expected_max() > 1) {
      // list-valued: whitespace separated
      std::istringstream items(value);
      for (std::string item; items >> item;) {
        extra.push_back(flag);
        extra.push_back(item);
      }
    } else {
      extra.push_back(flag);
      extra.push_back(value);
    }
  }
  std::vector<std::string> out(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1);
  out.insert(out.end(), rest.begin(), rest.end());
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

// String-valued mirrors of the typed parameters; converted after parsing.
struct Choices {
  std::string kind = "logit";
  std::string measure = "pearson";
  std::string transform = "none";
  std::string method = "hclust";
  std::string colormap;
  std::string format = "svg";
  std::string clip;
  std::string labels, taxonomy, csv, dendrogram_out, partition, groups, cooccurrence, memberships,
      sim, scores, dendrogram, svg_dir, out;
};

inline void add_kind(CLI::App* sub, Choices& c) {
  sub->add_option("--kind", c.kind, "score kind of a CSV input (logit|probability|rank)")
      ->check(CLI::IsMember({"logit", "probability", "rank"}));
}

inline void add_synth_flags(CLI::App* sub, SynthConfig& cfg) {
  sub->add_option("--depth", cfg.depth, "tree depth L");
  sub->add_option("--branching", cfg.branching, "branching factor b");
  sub->add_option("--samples-per-class", cfg.samples_per_class, "samples per class");
  sub->add_option("--alpha", cfg.alpha, "shared-ancestor signal strength");
  sub->add_option("--beta", cfg.beta, "own-class boost");
  sub->add_option("--sigma", cfg.sigma, "noise standard deviation");
}

inline void add_group_flags(CLI::App* sub, GroupsParams& g) {
  sub->add_option("--fuzzy-c", g.fuzzy_c, "fuzzy cluster count (0: number of blocks)");
  sub->add_option("--fuzzifier", g.fuzzifier, "fuzzifier f > 1");
  sub->add_option("--threshold", g.threshold, "membership threshold for recovered groups");
  sub->add_option("--tolerance", g.tolerance, "stop when max weight change falls below this");
  sub->add_option("--max-iter", g.max_iter, "fuzzy iteration cap");
  sub->add_option("--split-quantile", g.split_quantile, "quantile of inter-block means for split pairs");
  sub->add_option("--dispersion-threshold", g.dispersion_threshold, "dispersion at which a group is failed");
  sub->add_option("--star-threshold", g.star_threshold, "co-occurrence breadth for star classes");
}

inline void add_render_flags(CLI::App* sub, RenderParams& r, Choices& c) {
  sub->add_option("--clip", c.clip, "value range lo:hi (default -1:1, counts 0:max)");
  sub->add_option("--colormap", c.colormap, "diverging|sequential (default by matrix kind)")
      ->check(CLI::IsMember({"diverging", "sequential"}));
  sub->add_option("--cell-px", r.cell_px, "pixels per cell");
  sub->add_option("--format", c.format, "svg|png")->check(CLI::IsMember({"svg", "png"}));
}

inline void apply_render_choices(RenderParams& r, const Choices& c) {
  if (!c.clip.empty()) r.clip = parse_clip(c.clip);
  if (!c.colormap.empty()) r.colormap = parse_colormap(c.colormap);
  r.format = parse_choice<ImageFormat>(c.format, parse_format, "format");
}

}  // namespace detail

/// Runs one command line (without the program name). Returns the exit code.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Class similarity analysis: score matrices to seriated heatmaps and group reports",
               "class_atlas"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  detail::Choices c;
  SynthParams synth;
  ValidateParams validate;
  SimParams sim;
  OrderParams order;
  CutParams cut;
  GroupsParams groups;
  RenderParams render;
  StatsParams stats;
  ReportParams report;
  ConfusionParams confusion;
  CooccurParams cooccur;
  PipelineConfig pipeline;
  std::string out_dir;
  std::vector<std::string> heatmaps, histograms, group_files, meta;
  std::string overlays = "recovered,split_pair,star";

  auto config_flag = [](CLI::App* sub) {
    sub->add_option("--config", "flat key = value file mirroring the flags; flags win");
  };

  auto* s_synth = app.add_subcommand("synth", "generate planted-hierarchy logits, labels and taxonomy");
  detail::add_synth_flags(s_synth, synth.config);
  s_synth->add_option("--seed", synth.config.seed, "generator seed");
  s_synth->add_option("--out-dir", out_dir, "output directory")->required();
  config_flag(s_synth);

  auto* s_validate = app.add_subcommand("validate", "parse inputs and report their alignment");
  s_validate->add_option("--scores", c.scores, "score matrix (CSV or BSM1)")->required();
  detail::add_kind(s_validate, c);
  s_validate->add_option("--labels", c.labels, "labels CSV");
  s_validate->add_option("--taxonomy", c.taxonomy, "taxonomy JSON");
  s_validate->add_option("--out", c.out, "write the report here instead of stdout");
  config_flag(s_validate);

  auto* s_sim = app.add_subcommand("sim", "class similarity matrix");
  s_sim->add_option("--scores", c.scores, "score matrix (CSV or BSM1)")->required();
  detail::add_kind(s_sim, c);
  s_sim->add_option("--measure", c.measure, "pearson|spearman")->check(CLI::IsMember({"pearson", "spearman"}));
  s_sim->add_option("--transform", c.transform, "none|softmax|rank")
      ->check(CLI::IsMember({"none", "softmax", "rank"}));
  s_sim->add_option("--out", c.out, "similarity BSM1 output")->required();
  s_sim->add_option("--csv", c.csv, "also write a CSV copy");
  config_flag(s_sim);

  auto* s_order = app.add_subcommand("order", "seriation ordering");
  s_order->add_option("--sim", c.sim, "similarity BSM1")->required();
  s_order->add_option("--method", c.method, "hclust|taxonomy")->check(CLI::IsMember({"hclust", "taxonomy"}));
  s_order->add_option("--taxonomy", c.taxonomy, "taxonomy JSON (method taxonomy)");
  s_order->add_option("--out", c.out, "ordering JSON output")->required();
  s_order->add_option("--dendrogram", c.dendrogram_out, "dendrogram JSON output (method hclust)");
  config_flag(s_order);

  auto* s_cut = app.add_subcommand("cut", "cut a dendrogram into k blocks");
  s_cut->add_option("--dendrogram", c.dendrogram, "dendrogram JSON")->required();
  s_cut->add_option("--k", cut.k, "number of blocks");
  s_cut->add_option("--out", c.out, "partition JSON output")->required();
  config_flag(s_cut);

  auto* s_groups = app.add_subcommand("groups", "recovered, failed, split-pair and star groups");
  s_groups->add_option("--sim", c.sim, "similarity BSM1")->required();
  s_groups->add_option("--partition", c.partition, "partition JSON")->required();
  detail::add_group_flags(s_groups, groups);
  s_groups->add_option("--seed", groups.seed, "fuzzy initialisation seed");
  s_groups->add_option("--cooccurrence", c.cooccurrence, "co-occurrence BSM1 (enables star classes)");
  s_groups->add_option("--out", c.out, "groups JSON output")->required();
  s_groups->add_option("--memberships", c.memberships, "memberships JSON output");
  config_flag(s_groups);

  auto* s_render = app.add_subcommand("render", "heatmap and dendrogram strip");
  s_render->add_option("--matrix", c.sim, "similarity or count BSM1")->required();
  s_render->add_option("--ordering", c.out, "ordering JSON")->required();
  s_render->add_option("--partition", c.partition, "partition JSON (block outlines)");
  s_render->add_option("--groups", c.groups, "groups JSON (overlays)");
  s_render->add_option("--overlays", overlays, "comma-separated group kinds to overlay");
  detail::add_render_flags(s_render, render, c);
  s_render->add_option("--out", c.csv, "image output")->required();
  s_render->add_option("--dendrogram", c.dendrogram, "dendrogram JSON");
  s_render->add_option("--dendrogram-out", c.dendrogram_out, "dendrogram strip SVG output");
  config_flag(s_render);

  auto* s_report = app.add_subcommand("report", "single-file HTML report");
  s_report->add_option("--heatmap", heatmaps, "heatmap SVG (repeatable)");
  s_report->add_option("--dendrogram", c.dendrogram, "dendrogram SVG");
  s_report->add_option("--histogram", histograms, "histogram SVG (repeatable)");
  s_report->add_option("--groups", group_files, "groups JSON (repeatable)");
  s_report->add_option("--meta", meta, "metadata key=value (repeatable)");
  s_report->add_option("--out", c.out, "HTML output")->required();
  config_flag(s_report);

  auto* s_conf = app.add_subcommand("confusion", "confusion matrix of argmax predictions");
  s_conf->add_option("--scores", c.scores, "score matrix (CSV or BSM1)")->required();
  detail::add_kind(s_conf, c);
  s_conf->add_option("--labels", c.labels, "single-label CSV")->required();
  s_conf->add_option("--out", c.out, "count BSM1 output")->required();
  s_conf->add_option("--csv", c.csv, "also write a CSV copy");
  config_flag(s_conf);

  auto* s_cooc = app.add_subcommand("cooccur", "label co-occurrence counts");
  s_cooc->add_option("--labels", c.labels, "labels CSV")->required();
  s_cooc->add_option("--classes-from", c.scores, "score or similarity file naming the classes")->required();
  detail::add_kind(s_cooc, c);
  s_cooc->add_option("--out", c.out, "count BSM1 output")->required();
  s_cooc->add_option("--csv", c.csv, "also write a CSV copy");
  config_flag(s_cooc);

  auto* s_stats = app.add_subcommand("stats", "off-diagonal similarity distribution diagnostics");
  s_stats->add_option("--sim", c.sim, "similarity BSM1");
  s_stats->add_option("--scores", c.scores, "logits: compare probability, logit and rank variants");
  detail::add_kind(s_stats, c);
  s_stats->add_option("--bins", stats.bins, "histogram bins");
  s_stats->add_option("--out", c.out, "summary JSON output")->required();
  s_stats->add_option("--svg-dir", c.svg_dir, "write one histogram SVG per variant here");
  config_flag(s_stats);

  auto* s_pipe = app.add_subcommand("pipeline", "every stage in order, intermediates kept on disk");
  s_pipe->add_option("--scores", c.scores, "score matrix; omitted: synthesise one");
  detail::add_kind(s_pipe, c);
  s_pipe->add_option("--labels", c.labels, "labels CSV");
  s_pipe->add_option("--taxonomy", c.taxonomy, "taxonomy JSON");
  detail::add_synth_flags(s_pipe, pipeline.synth);
  s_pipe->add_option("--measure", c.measure, "pearson|spearman")->check(CLI::IsMember({"pearson", "spearman"}));
  s_pipe->add_option("--transform", c.transform, "none|softmax|rank")
      ->check(CLI::IsMember({"none", "softmax", "rank"}));
  s_pipe->add_option("--method", c.method, "hclust|taxonomy (taxonomy adds a second heatmap)")
      ->check(CLI::IsMember({"hclust", "taxonomy"}));
  s_pipe->add_option("--k", pipeline.k, "number of blocks");
  detail::add_group_flags(s_pipe, pipeline.groups);
  detail::add_render_flags(s_pipe, pipeline.render, c);
  s_pipe->add_option("--bins", pipeline.bins, "histogram bins");
  s_pipe->add_option("--seed", pipeline.synth.seed, "seed for synthesis and fuzzy initialisation");
  s_pipe->add_option("--out-dir", out_dir, "output directory")->required();
  config_flag(s_pipe);

  try {
    args = detail::expand_config(args, app);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 3;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.category());
  }

  try {
    const auto kind = detail::parse_choice<ScoreKind>(c.kind, parse_score_kind, "kind");
    if (*s_synth) {
      synth.out_dir = out_dir;
      stage_synth(synth);
    } else if (*s_validate) {
      validate = {c.scores, kind, detail::opt_path(c.labels), detail::opt_path(c.taxonomy)};
      const auto rep = stage_validate(validate);
      const auto text = json_text(rep.to_json());
      if (c.out.empty()) {
        out << text;
      } else {
        write_file(c.out, text);
      }
      if (!rep.ok()) {
        err << "error: inputs are misaligned\n";
        return static_cast<int>(ErrorCategory::Input);
      }
    } else if (*s_sim) {
      sim = {c.scores, kind, detail::parse_choice<Measure>(c.measure, parse_measure, "measure"),
             detail::parse_choice<Transform>(c.transform, parse_transform, "transform"), c.out,
             detail::opt_path(c.csv)};
      stage_sim(sim);
    } else if (*s_order) {
      order = {c.sim, detail::parse_choice<OrderMethod>(c.method, detail::parse_method, "method"),
               detail::opt_path(c.taxonomy), c.out, detail::opt_path(c.dendrogram_out)};
      stage_order(order);
    } else if (*s_cut) {
      cut.dendrogram = c.dendrogram;
      cut.out = c.out;
      stage_cut(cut);
    } else if (*s_groups) {
      groups.sim = c.sim;
      groups.partition = c.partition;
      groups.cooccurrence = detail::opt_path(c.cooccurrence);
      groups.out = c.out;
      groups.memberships_out = detail::opt_path(c.memberships);
      stage_groups(groups);
    } else if (*s_render) {
      render.matrix = c.sim;
      render.ordering = c.out;
      render.partition = detail::opt_path(c.partition);
      render.groups = detail::opt_path(c.groups);
      render.overlay_kinds.clear();
      for (const auto& kind_name : csv::split_record(overlays)) {
        if (!parse_group_kind(kind_name)) {
          throw Error(ErrorCode::ConfigInvalid, "unknown overlay kind '" + kind_name + "'");
        }
        render.overlay_kinds.push_back(kind_name);
      }
      detail::apply_render_choices(render, c);
      render.out = c.csv;
      render.dendrogram = detail::opt_path(c.dendrogram);
      render.dendrogram_out = detail::opt_path(c.dendrogram_out);
      if (render.dendrogram.has_value() != render.dendrogram_out.has_value()) {
        throw Error(ErrorCode::ConfigInvalid, "--dendrogram and --dendrogram-out go together");
      }
      stage_render(render);
    } else if (*s_report) {
      for (const auto& p : heatmaps) report.heatmaps.emplace_back(p);
      for (const auto& p : histograms) report.histograms.emplace_back(p);
      for (const auto& p : group_files) report.groups.emplace_back(p);
      report.dendrogram = detail::opt_path(c.dendrogram);
      for (const auto& kv : meta) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::ConfigInvalid, "--meta expects key=value");
        report.metadata.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
      }
      report.out = c.out;
      stage_report(report);
    } else if (*s_conf) {
      confusion = {c.scores, kind, c.labels, c.out, detail::opt_path(c.csv)};
      stage_confusion(confusion);
    } else if (*s_cooc) {
      cooccur = {c.labels, c.scores, kind, c.out, detail::opt_path(c.csv)};
      stage_cooccur(cooccur);
    } else if (*s_stats) {
      stats.sim = detail::opt_path(c.sim);
      stats.scores = detail::opt_path(c.scores);
      stats.kind = kind;
      stats.out = c.out;
      stats.svg_dir = detail::opt_path(c.svg_dir);
      stage_stats(stats);
    } else if (*s_pipe) {
      pipeline.scores = detail::opt_path(c.scores);
      pipeline.kind = kind;
      pipeline.labels = detail::opt_path(c.labels);
      pipeline.taxonomy = detail::opt_path(c.taxonomy);
      pipeline.measure = detail::parse_choice<Measure>(c.measure, parse_measure, "measure");
      pipeline.transform = detail::parse_choice<Transform>(c.transform, parse_transform, "transform");
      pipeline.method = detail::parse_choice<OrderMethod>(c.method, detail::parse_method, "method");
      pipeline.groups.seed = pipeline.synth.seed;
      detail::apply_render_choices(pipeline.render, c);
      pipeline.out_dir = out_dir;
      run_pipeline(pipeline);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorCategory::Input);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return static_cast<int>(ErrorCategory::Internal);
  }
  return 0;
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args));
}

}  // namespace class_atlas::cli
