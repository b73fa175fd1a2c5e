// Copyright 2026 The class-atlas Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Pipeline stages shared by the individual subcommands and `pipeline`.
// Every stage reads its inputs from disk and writes its outputs to disk, so
// a staged run and a pipeline run produce the same bytes.

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "class_atlas/class_atlas.hpp"

namespace class_atlas::cli {

namespace fs = std::filesystem;

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open input file " + path.string());
  return read_all(in);
}

inline void write_file(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

inline nlohmann::json read_json(const fs::path& path) {
  const auto text = read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::JSONSchemaError, path.string() + ": " + e.what());
  }
}

inline std::string json_text(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

// Parse errors get the offending path appended.
template <class F>
auto parsing(const fs::path& path, F&& parse) {
  const auto bytes = read_file(path);
  try {
    return parse(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), e.message() + " (" + path.string() + ")");
  }
}

inline ScoreMatrix load_scores(const fs::path& path, ScoreKind csv_kind) {
  return parsing(path, [&](const std::string& bytes) {
    std::istringstream in(bytes);
    return parse_scores(in, csv_kind);
  });
}

inline LabelData load_labels(const fs::path& path) {
  return parsing(path, [](const std::string& bytes) {
    std::istringstream in(bytes);
    return parse_labels(in);
  });
}

inline Taxonomy load_taxonomy(const fs::path& path) {
  return parsing(path, [](const std::string& bytes) {
    std::istringstream in(bytes);
    return parse_taxonomy(in);
  });
}

inline SimilarityMatrix load_similarity(const fs::path& path) {
  return parsing(path, [](const std::string& bytes) { return parse_similarity_binary(bytes); });
}

// ---------------------------------------------------------------------------

struct SynthParams {
  SynthConfig config;
  fs::path out_dir;
};

/// Writes scores.bsm, labels.csv, taxonomy.json and planted.json.
inline void stage_synth(const SynthParams& p) {
  const auto data = synth_scores(p.config);
  write_file(p.out_dir / "scores.bsm", write_scores_binary(data.scores, Dtype::F64));
  std::ostringstream labels;
  write_labels(labels, data.labels);
  write_file(p.out_dir / "labels.csv", labels.str());
  write_file(p.out_dir / "taxonomy.json", write_taxonomy(data.taxonomy));
  nlohmann::ordered_json planted;
  planted["levels"] = nlohmann::ordered_json::array();
  for (const auto& part : data.planted) planted["levels"].push_back(part.assignment);
  write_file(p.out_dir / "planted.json", json_text(planted));
}

struct ValidateParams {
  fs::path scores;
  ScoreKind kind = ScoreKind::Logit;
  std::optional<fs::path> labels;
  std::optional<fs::path> taxonomy;
};

inline ValidationReport stage_validate(const ValidateParams& p) {
  const auto scores = load_scores(p.scores, p.kind);
  std::optional<LabelData> labels;
  std::optional<Taxonomy> tax;
  if (p.labels) labels = load_labels(*p.labels);
  if (p.taxonomy) tax = load_taxonomy(*p.taxonomy);
  return validate_alignment(scores, labels ? &*labels : nullptr, tax ? &*tax : nullptr);
}

enum class Transform { None, Softmax, Rank };

inline std::optional<Transform> parse_transform(std::string_view text) {
  if (text == "none") return Transform::None;
  if (text == "softmax") return Transform::Softmax;
  if (text == "rank") return Transform::Rank;
  return std::nullopt;
}

constexpr std::string_view to_string(Transform t) {
  switch (t) {
    case Transform::None: return "none";
    case Transform::Softmax: return "softmax";
    case Transform::Rank: return "rank";
  }
  return "none";
}

inline ScoreMatrix apply_transform(const ScoreMatrix& scores, Transform t) {
  switch (t) {
    case Transform::None: return scores;
    case Transform::Softmax: return softmax_rows(scores);
    case Transform::Rank: return rank_rows(scores);
  }
  return scores;
}

inline SimilarityMatrix compute_similarity(const ScoreMatrix& scores, Measure measure, Transform t) {
  const auto input = apply_transform(scores, t);
  return measure == Measure::Pearson ? pearson_similarity(input) : spearman_similarity(input);
}

struct SimParams {
  fs::path scores;
  ScoreKind kind = ScoreKind::Logit;
  Measure measure = Measure::Pearson;
  Transform transform = Transform::None;
  fs::path out;
  std::optional<fs::path> csv;
};

inline SimilarityMatrix stage_sim(const SimParams& p) {
  auto sim = compute_similarity(load_scores(p.scores, p.kind), p.measure, p.transform);
  write_file(p.out, write_similarity_binary(sim));
  if (p.csv) {
    std::ostringstream text;
    write_square_csv(text, sim.class_names, sim.values);
    write_file(*p.csv, text.str());
  }
  return sim;
}

enum class OrderMethod { Hclust, Taxonomy };

struct OrderParams {
  fs::path sim;
  OrderMethod method = OrderMethod::Hclust;
  std::optional<fs::path> taxonomy;
  fs::path out;                             // ordering.json
  std::optional<fs::path> dendrogram_out;   // hclust only
};

inline Ordering stage_order(const OrderParams& p) {
  const auto sim = load_similarity(p.sim);
  Ordering ord;
  if (p.method == OrderMethod::Hclust) {
    const auto dend = hclust_complete(to_dissimilarity(sim));
    ord = leaf_order(dend);
    if (p.dendrogram_out) write_file(*p.dendrogram_out, json_text(to_json(dend)));
  } else {
    if (!p.taxonomy) throw Error(ErrorCode::ConfigInvalid, "--method taxonomy needs --taxonomy");
    ord = taxonomy_order(load_taxonomy(*p.taxonomy), sim.class_names);
  }
  write_file(p.out, json_text(nlohmann::ordered_json(ord)));
  return ord;
}

struct CutParams {
  fs::path dendrogram;
  std::size_t k = 2;
  fs::path out;
};

inline Partition stage_cut(const CutParams& p) {
  const auto part = cut_dendrogram(dendrogram_from_json(read_json(p.dendrogram)), p.k);
  write_file(p.out, json_text(nlohmann::ordered_json(part.assignment)));
  return part;
}

struct GroupsParams {
  fs::path sim;
  fs::path partition;
  std::size_t fuzzy_c = 0;  // 0: number of partition blocks
  double fuzzifier = 2.0;
  double threshold = 0.2;
  double tolerance = 1e-6;
  std::size_t max_iter = 300;
  std::uint64_t seed = 0;
  double split_quantile = 0.95;
  double dispersion_threshold = 0.5;
  std::optional<fs::path> cooccurrence;
  double star_threshold = 0.5;
  fs::path out;
  std::optional<fs::path> memberships_out;
};

/// Hierarchical blocks, fuzzy recovered groups (failed ones tagged),
/// split pairs and, given a co-occurrence matrix, star classes.
inline GroupSet stage_groups(const GroupsParams& p) {
  const auto sim = load_similarity(p.sim);
  const auto part = partition_from_json(read_json(p.partition));
  if (part.assignment.size() != sim.n_classes()) {
    throw Error(ErrorCode::SizeMismatch, "partition does not match the similarity matrix");
  }
  if (!(p.threshold > 0.0 && p.threshold <= 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, "membership threshold must lie in (0, 1]");
  }
  if (!(p.dispersion_threshold > 0.0 && p.dispersion_threshold <= 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, "dispersion threshold must lie in (0, 1]");
  }
  GroupSet all = hierarchical_groups(sim, part);

  FuzzyOptions opt;
  opt.clusters = p.fuzzy_c ? p.fuzzy_c : part.n_blocks;
  opt.fuzzifier = p.fuzzifier;
  opt.tolerance = p.tolerance;
  opt.max_iter = p.max_iter;
  opt.seed = p.seed;
  const auto fuzzy = fuzzy_cmeans(sim.values, opt);
  auto recovered = recovered_groups(fuzzy.memberships, p.threshold);
  for (auto& g : recovered) {
    if (dispersion(g, part) >= p.dispersion_threshold) g.provenance = "failed";
  }
  all.insert(all.end(), recovered.begin(), recovered.end());

  if (part.n_blocks >= 2) {
    const auto split = split_groups(sim, part, p.split_quantile);
    all.insert(all.end(), split.begin(), split.end());
  }
  if (p.cooccurrence) {
    if (!(p.star_threshold > 0.0 && p.star_threshold <= 1.0)) {
      throw Error(ErrorCode::ConfigInvalid, "star threshold must lie in (0, 1]");
    }
    const auto counts = parse_counts_binary(read_file(*p.cooccurrence));
    if (counts.class_names != sim.class_names) {
      throw Error(ErrorCode::SizeMismatch, "co-occurrence classes differ from the similarity classes");
    }
    const auto stars = star_classes(counts, p.star_threshold);
    all.insert(all.end(), stars.begin(), stars.end());
  }
  write_file(p.out, json_text(to_json(all, sim.class_names)));
  if (p.memberships_out) {
    nlohmann::ordered_json j;
    j["classes"] = sim.class_names;
    j["iterations"] = fuzzy.iterations;
    j["converged"] = fuzzy.converged;
    j["objective"] = fuzzy.objective;
    j["weights"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < fuzzy.memberships.n_classes(); ++i) {
      const auto row = fuzzy.memberships.weights.row(i);
      j["weights"].push_back(std::vector<double>(row.begin(), row.end()));
    }
    write_file(*p.memberships_out, json_text(j));
  }
  return all;
}

struct RenderParams {
  fs::path matrix;
  fs::path ordering;
  std::optional<fs::path> partition;
  std::optional<fs::path> groups;
  std::vector<std::string> overlay_kinds{"recovered", "split_pair", "star"};
  std::optional<std::pair<double, double>> clip;  // default: (-1, 1), or (0, max) for counts
  std::optional<Colormap> colormap;               // default: diverging, or sequential for counts
  std::size_t cell_px = 4;
  ImageFormat format = ImageFormat::Svg;
  fs::path out;
  std::optional<fs::path> dendrogram;
  std::optional<fs::path> dendrogram_out;
};

inline void stage_render(const RenderParams& p) {
  const auto mat = parse_labeled_binary(read_file(p.matrix));
  const auto ord = ordering_from_json(read_json(p.ordering));
  const bool counts = mat.kind == "cooccurrence" || mat.kind == "confusion";
  RenderSpec spec;
  spec.cell_px = p.cell_px;
  spec.format = p.format;
  if (p.clip) {
    spec.clip_lo = p.clip->first;
    spec.clip_hi = p.clip->second;
  } else if (counts) {
    spec.clip_lo = 0.0;
    spec.clip_hi = std::max(1.0, *std::max_element(mat.values.data().begin(), mat.values.data().end()));
  }
  spec.colormap = p.colormap.value_or(counts ? Colormap::Sequential : Colormap::Diverging);
  if (p.partition) {
    spec.annotations.blocks = block_spans(partition_from_json(read_json(*p.partition)), ord);
  }
  GroupSet overlays;
  if (p.groups) {
    for (auto& g : groups_from_json(read_json(*p.groups), mat.class_names)) {
      const auto kind = std::string(to_string(g.kind));
      if (std::find(p.overlay_kinds.begin(), p.overlay_kinds.end(), kind) != p.overlay_kinds.end()) {
        overlays.push_back(std::move(g));
      }
    }
  }
  write_file(p.out, render_heatmap(mat.values, ord, spec, overlays));
  if (p.dendrogram && p.dendrogram_out) {
    const auto dend = dendrogram_from_json(read_json(*p.dendrogram));
    write_file(*p.dendrogram_out, render_dendrogram(dend, ord, spec));
  }
}

struct StatsParams {
  std::optional<fs::path> sim;
  std::optional<fs::path> scores;  // logits; enables the probability/logit/rank comparison
  ScoreKind kind = ScoreKind::Logit;
  std::size_t bins = 20;
  fs::path out;                    // JSON summary
  std::optional<fs::path> svg_dir;
};

struct StatsVariant {
  std::string name;
  std::string title;
  DistributionStats stats;
};

inline std::vector<StatsVariant> compute_stats_variants(const StatsParams& p) {
  std::vector<StatsVariant> out;
  if (p.sim) {
    const auto sim = load_similarity(*p.sim);
    out.push_back({"similarity",
                   std::string(to_string(sim.measure)) + " on " + std::string(to_string(sim.source_kind)),
                   distribution_stats(offdiagonal_values(sim), p.bins)});
  }
  if (p.scores) {
    const auto scores = load_scores(*p.scores, p.kind);
    if (scores.kind != ScoreKind::Logit) {
      throw Error(ErrorCode::WrongKind, "the score comparison needs logits");
    }
    const auto prob = softmax_rows(scores);
    out.push_back({"probability_pearson", "pearson on probabilities",
                   distribution_stats(offdiagonal_values(pearson_similarity(prob)), p.bins)});
    out.push_back({"logit_pearson", "pearson on logits",
                   distribution_stats(offdiagonal_values(pearson_similarity(scores)), p.bins)});
    out.push_back({"probability_spearman", "spearman on probabilities",
                   distribution_stats(offdiagonal_values(spearman_similarity(prob)), p.bins)});
  }
  if (out.empty()) throw Error(ErrorCode::ConfigInvalid, "stats needs --sim or --scores");
  return out;
}

inline std::vector<StatsVariant> stage_stats(const StatsParams& p) {
  auto variants = compute_stats_variants(p);
  nlohmann::ordered_json summary;
  for (const auto& v : variants) {
    summary[v.name] = v.stats.to_json();
    if (p.svg_dir) {
      write_file(*p.svg_dir / ("histogram_" + v.name + ".svg"),
                 render_histogram(v.stats, RenderSpec{}, v.title));
    }
  }
  write_file(p.out, json_text(summary));
  return variants;
}

struct ReportParams {
  std::vector<fs::path> heatmaps;
  std::optional<fs::path> dendrogram;
  std::vector<fs::path> histograms;
  std::vector<fs::path> groups;
  std::vector<std::pair<std::string, std::string>> metadata;
  fs::path out;
};

inline void stage_report(const ReportParams& p) {
  ReportInputs in;
  for (const auto& path : p.heatmaps) in.heatmaps.push_back({path.filename().string(), read_file(path)});
  if (p.dendrogram) in.dendrogram = ReportFigure{p.dendrogram->filename().string(), read_file(*p.dendrogram)};
  for (const auto& path : p.histograms) {
    in.histograms.push_back({path.filename().string(), read_file(path)});
  }
  for (const auto& path : p.groups) {
    const auto j = read_json(path);
    if (!j.is_array()) throw Error(ErrorCode::JSONSchemaError, path.string() + " is not a group list");
    in.group_tables.push_back({path.filename().string(), nlohmann::ordered_json::parse(j.dump())});
  }
  for (const auto& [key, value] : p.metadata) in.metadata[key] = value;
  write_file(p.out, render_report(in));
}

struct ConfusionParams {
  fs::path scores;
  ScoreKind kind = ScoreKind::Logit;
  fs::path labels;
  fs::path out;
  std::optional<fs::path> csv;
};

inline void write_counts(const CountMatrix& counts, const fs::path& out,
                         const std::optional<fs::path>& csv) {
  write_file(out, write_counts_binary(counts));
  if (csv) {
    std::ostringstream text;
    write_square_csv(text, counts.class_names, counts.to_matrix());
    write_file(*csv, text.str());
  }
}

inline CountMatrix stage_confusion(const ConfusionParams& p) {
  const auto counts = confusion_matrix(load_scores(p.scores, p.kind), load_labels(p.labels));
  write_counts(counts, p.out, p.csv);
  return counts;
}

struct CooccurParams {
  fs::path labels;
  fs::path classes_from;  // any score file or similarity container naming the classes
  ScoreKind kind = ScoreKind::Logit;
  fs::path out;
  std::optional<fs::path> csv;
};

inline std::vector<std::string> load_class_names(const fs::path& path, ScoreKind kind) {
  const auto bytes = read_file(path);
  if (!bytes.empty() && bytes.front() == '{') {
    auto c = bsm1::decode(bytes);
    return bsm1::string_list(c.header, "classes", c.cols);
  }
  std::istringstream in(bytes);
  return parse_scores_csv(in, kind).class_names;
}

inline CountMatrix stage_cooccur(const CooccurParams& p) {
  const auto counts = cooccurrence_matrix(load_labels(p.labels), load_class_names(p.classes_from, p.kind));
  write_counts(counts, p.out, p.csv);
  return counts;
}

// ---------------------------------------------------------------------------
// Full pipeline

struct PipelineConfig {
  std::optional<fs::path> scores;         // absent: generate with `synth`
  ScoreKind kind = ScoreKind::Logit;
  SynthConfig synth;
  std::optional<fs::path> labels;
  std::optional<fs::path> taxonomy;
  Measure measure = Measure::Pearson;
  Transform transform = Transform::None;
  OrderMethod method = OrderMethod::Hclust;
  std::size_t k = 2;
  GroupsParams groups;                    // sim/partition/out paths are filled in by the pipeline
  RenderParams render;                    // same
  std::size_t bins = 20;
  fs::path out_dir;
};

/// Runs every stage in order, writing each intermediate under out_dir.
inline void run_pipeline(const PipelineConfig& cfg) {
  const fs::path& dir = cfg.out_dir;
  fs::create_directories(dir);
  fs::path scores = dir / "scores.bsm";
  std::optional<fs::path> labels = cfg.labels;
  std::optional<fs::path> taxonomy = cfg.taxonomy;
  if (cfg.scores) {
    scores = *cfg.scores;
  } else {
    stage_synth({cfg.synth, dir});
    if (!labels) labels = dir / "labels.csv";
    if (!taxonomy) taxonomy = dir / "taxonomy.json";
  }

  const auto report = stage_validate({scores, cfg.kind, labels, taxonomy});
  write_file(dir / "validation.json", json_text(report.to_json()));
  if (!report.ok()) {
    throw Error(ErrorCode::LeafMismatch, "inputs are misaligned; see " + (dir / "validation.json").string());
  }

  const auto sim = stage_sim({scores, cfg.kind, cfg.measure, cfg.transform, dir / "sim.bsm", {}});
  const auto ord = stage_order({dir / "sim.bsm", OrderMethod::Hclust, {}, dir / "ordering.json",
                                dir / "dendrogram.json"});
  if (cfg.method == OrderMethod::Taxonomy) {
    stage_order({dir / "sim.bsm", OrderMethod::Taxonomy, taxonomy, dir / "ordering_taxonomy.json", {}});
  }
  stage_cut({dir / "dendrogram.json", cfg.k, dir / "partition.json"});

  std::optional<fs::path> cooccur;
  if (labels) {
    cooccur = dir / "cooccurrence.bsm";
    stage_cooccur({*labels, scores, cfg.kind, *cooccur, {}});
  }
  GroupsParams gp = cfg.groups;
  gp.sim = dir / "sim.bsm";
  gp.partition = dir / "partition.json";
  gp.out = dir / "groups.json";
  gp.memberships_out = dir / "memberships.json";
  if (!gp.cooccurrence) gp.cooccurrence = cooccur;
  stage_groups(gp);

  RenderParams rp = cfg.render;
  rp.matrix = dir / "sim.bsm";
  rp.ordering = dir / "ordering.json";
  rp.partition = dir / "partition.json";
  rp.groups = dir / "groups.json";
  rp.out = dir / (rp.format == ImageFormat::Svg ? "heatmap.svg" : "heatmap.png");
  rp.dendrogram = dir / "dendrogram.json";
  rp.dendrogram_out = dir / "dendrogram.svg";
  stage_render(rp);

  std::vector<fs::path> heatmaps;
  if (rp.format == ImageFormat::Svg) heatmaps.push_back(rp.out);
  if (cfg.method == OrderMethod::Taxonomy) {
    RenderParams tp = cfg.render;
    tp.format = ImageFormat::Svg;
    tp.matrix = dir / "sim.bsm";
    tp.ordering = dir / "ordering_taxonomy.json";
    tp.out = dir / "heatmap_taxonomy.svg";
    stage_render(tp);
    heatmaps.push_back(tp.out);
  }

  StatsParams sp;
  sp.sim = dir / "sim.bsm";
  const auto scored_kind = load_scores(scores, cfg.kind).kind;
  if (scored_kind == ScoreKind::Logit) sp.scores = scores;
  sp.kind = cfg.kind;
  sp.bins = cfg.bins;
  sp.out = dir / "stats.json";
  sp.svg_dir = dir;
  const auto variants = stage_stats(sp);

  ReportParams rep;
  rep.heatmaps = heatmaps;
  rep.dendrogram = dir / "dendrogram.svg";
  for (const auto& v : variants) rep.histograms.push_back(dir / ("histogram_" + v.name + ".svg"));
  rep.groups = {dir / "groups.json"};
  rep.metadata = {
      {"measure", std::string(to_string(cfg.measure))},
      {"transform", std::string(to_string(cfg.transform))},
      {"source_kind", std::string(to_string(sim.source_kind))},
      {"ordering", cfg.method == OrderMethod::Hclust ? "hclust (complete linkage)" : "hclust + taxonomy"},
      {"classes", std::to_string(sim.n_classes())},
      {"k", std::to_string(cfg.k)},
      {"fuzzy_c", std::to_string(gp.fuzzy_c ? gp.fuzzy_c : cfg.k)},
      {"fuzzifier", csv::format_number(gp.fuzzifier)},
      {"membership_threshold", csv::format_number(gp.threshold)},
      {"seed", std::to_string(gp.seed)},
  };
  rep.out = dir / "report.html";
  stage_report(rep);
  (void)ord;
}

}  // namespace class_atlas::cli
