#include "labelset/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "labelset/collage.hpp"
#include "labelset/error.hpp"
#include "labelset/features.hpp"
#include "labelset/lsh.hpp"
#include "labelset/raster.hpp"
#include "labelset/segmenter.hpp"
#include "text_util.hpp"

namespace labelset {

namespace fs = std::filesystem;

namespace {

std::string path_safe(std::string_view text) {
  std::string out;
  for (const char c : text) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    out += ok ? c : '_';
  }
  return out;
}

Corpus require_corpus(const Workspace& ws) {
  Workspace::require(ws.manifest(), "ingest or synth");
  return load_manifest(ws.manifest());
}

FeatureTable require_region_features(const Workspace& ws) {
  Workspace::require(ws.region_features(), "features");
  Workspace::require(ws.region_feature_ids(), "features");
  return read_feature_store(ws.region_features(), ws.region_feature_ids());
}

FeatureMap require_global_features(const Workspace& ws) {
  Workspace::require(ws.global_features(), "features");
  Workspace::require(ws.global_feature_ids(), "features");
  return read_feature_store(ws.global_features(), ws.global_feature_ids()).to_map();
}

std::vector<TrainingSet> require_trainsets(const Workspace& ws) {
  Workspace::require(ws.trainsets(), "assemble");
  return read_training_sets(ws.trainsets());
}

ProtocolConfig protocol_config(const PipelineConfig& config) {
  ProtocolConfig p;
  p.annotator = config.annotator;
  p.negative_ratio = config.negative_ratio;
  p.exclude_candidates = config.exclude_candidates;
  p.seeds.clear();
  for (std::size_t i = 0; i < config.evaluation_runs; ++i)
    p.seeds.push_back(detail::derive_seed(config.seed, "run-" + std::to_string(i)));
  return p;
}

}  // namespace

Workspace::Workspace(fs::path root) : root_(std::move(root)) {}

fs::path Workspace::session_dir(const std::string& label) const { return sessions_dir() / path_safe(label); }

void Workspace::require(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path)) throw MissingArtifact(path.string(), producer);
}

std::vector<std::string> Workspace::session_labels() const {
  std::vector<std::string> out;
  if (!fs::is_directory(sessions_dir())) return out;
  for (const auto& entry : fs::directory_iterator(sessions_dir())) {
    const auto spec = entry.path() / "session.json";
    if (fs::exists(spec)) out.push_back(load_session_spec(spec).label);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Corpus ingest(const Workspace& ws, const fs::path& manifest_path) {
  const Corpus source = load_manifest(manifest_path);
  fs::create_directories(ws.root());
  const fs::path root = fs::absolute(ws.root());
  std::vector<ImageRecord> records = source.records();
  for (auto& rec : records) {
    const fs::path resolved = fs::absolute(source.resolve_path(rec));
    rec.path = resolved.lexically_relative(root).generic_string();
  }
  Corpus corpus(std::move(records), ws.root());
  write_manifest(corpus, ws.manifest());
  spdlog::info("ingested {} records", corpus.size());
  return corpus;
}

Corpus synthesize(const Workspace& ws, const PipelineConfig& config) {
  Corpus corpus = generate_synthetic(config.synth, config.seed, ws.root());
  spdlog::info("generated {} synthetic images", corpus.size());
  return corpus;
}

std::size_t segment_corpus(const Workspace& ws, const PipelineConfig& config) {
  const Corpus corpus = require_corpus(ws);
  const auto segmenter = make_segmenter(config.segmenter);
  std::vector<Region> all;
  for (const auto& rec : corpus.records()) {
    const Raster image = load_image(corpus.resolve_path(rec));
    auto regions = segmenter->segment(image, rec.image_id);
    std::move(regions.begin(), regions.end(), std::back_inserter(all));
  }
  write_region_table(all, ws.regions());
  spdlog::info("segmented {} images into {} regions", corpus.size(), all.size());
  return all.size();
}

void extract_features(const Workspace& ws, const PipelineConfig& config) {
  const Corpus corpus = require_corpus(ws);
  Workspace::require(ws.regions(), "segment");
  const auto table = read_region_table(ws.regions());
  std::unordered_map<std::string, std::vector<std::string>> expected;
  for (const auto& r : table) expected[r.image_id].push_back(r.region_id);

  // The region table keeps geometry only, so masks come from re-running the
  // configured segmenter; the ids must line up with the table.
  const auto segmenter = make_segmenter(config.segmenter);
  FeatureTable regions{kRegionFeatureDim, {}, {}, {}};
  FeatureTable globals{kGlobalFeatureDim, {}, {}, {}};
  for (const auto& rec : corpus.records()) {
    const Raster image = load_image(corpus.resolve_path(rec));
    const auto segs = segmenter->segment(image, rec.image_id);
    std::vector<std::string> ids;
    for (const auto& r : segs) ids.push_back(r.region_id);
    if (ids != expected[rec.image_id])
      throw Error("region table is stale for image " + rec.image_id + "; rerun 'segment'");
    for (const auto& r : segs) {
      const auto f = region_features(image, r);
      regions.append(f.region_id, rec.image_id, f.values);
    }
    const auto g = global_features(image, rec.image_id, config.features);
    globals.append(g.image_id, g.image_id, g.values);
  }
  write_feature_store(regions, ws.region_features(), ws.region_feature_ids());
  write_feature_store(globals, ws.global_features(), ws.global_feature_ids());
  spdlog::info("extracted {} region and {} global features", regions.count(), globals.count());
}

std::vector<std::string> candidate_labels(const Corpus& corpus) {
  std::vector<std::string> out;
  for (const auto& label : corpus.label_vocabulary())
    if (!candidate_images(corpus, label).empty()) out.push_back(label);
  return out;
}

ConstructionSummary construct(const Workspace& ws, const PipelineConfig& config, const std::string& label,
                              bool oracle) {
  const Corpus corpus = require_corpus(ws);
  Workspace::require(ws.regions(), "segment");
  const FeatureTable region_table = require_region_features(ws);
  const FeatureMap globals = require_global_features(ws);

  ConstructionSummary summary;
  summary.label = label;
  const auto candidates = candidate_images(corpus, label);
  summary.candidates = candidates.size();
  const std::set<std::string_view> candidate_set(candidates.begin(), candidates.end());

  std::vector<RegionFeature> candidate_regions;
  FeatureMap region_map;
  RegionOwners owners;
  for (std::size_t i = 0; i < region_table.count(); ++i) {
    if (!candidate_set.contains(region_table.owners[i])) continue;
    const auto row = region_table.row(i);
    FeatureVector v(row.begin(), row.end());
    candidate_regions.push_back({region_table.ids[i], v});
    region_map.emplace(region_table.ids[i], std::move(v));
    owners.emplace(region_table.ids[i], region_table.owners[i]);
  }

  HasherConfig hasher_config = config.lsh;
  hasher_config.dim = kRegionFeatureDim;
  hasher_config.seed = detail::derive_seed(config.seed, "lsh");
  const Hasher hasher = build_hasher(hasher_config);
  auto bins = bucketize(hasher, candidate_regions);
  summary.bins_total = bins.size();
  std::vector<Bin> selected = candidates.empty() ? std::vector<Bin>{} : select_bins(std::move(bins), candidates.size());
  summary.bins_selected = selected.size();

  RefineConfig refine{config.ap, config.kmeans_k, detail::derive_seed(config.seed, "kmeans")};
  auto clusters = refine_bins(selected, region_map, globals, owners, refine);
  summary.clusters = clusters.size();

  const fs::path dir = ws.session_dir(label);
  fs::remove_all(dir);
  fs::create_directories(dir / "collages");
  write_bin_table(selected, dir / "bins.tsv");
  write_cluster_table(clusters, dir / "clusters.tsv");

  const CollageRenderer render = [&](const std::string& subject, std::span<const std::string> regions) {
    const std::string ref = "collages/" + path_safe(subject) + ".png";
    write_collage(make_collage(regions, owners, corpus, config.collage), dir / ref);
    return ref;
  };
  Session session = start_session(label, label, std::move(selected), std::move(clusters), render);
  save_session_spec(session.spec(), dir / "session.json");

  if (oracle) oracle_approve(session, corpus, owners, config.oracle);
  {
    std::ofstream log(dir / "decisions.ndjson", std::ios::trunc);
    if (!log) throw Error("cannot write " + (dir / "decisions.ndjson").string());
    write_decision_log(session.decision_log(), log);
  }
  summary.items = session.items().size();
  summary.approvals = session.approval_count();
  summary.bin_decisions = session.approval_count(ItemKind::bin_background);
  summary.cluster_decisions = session.approval_count(ItemKind::cluster_relevance);
  spdlog::info("label '{}': {} candidates, {}/{} bins, {} clusters, {} decisions", label, summary.candidates,
               summary.bins_selected, summary.bins_total, summary.clusters, summary.approvals);
  return summary;
}

Session load_session(const Workspace& ws, const std::string& label) {
  const fs::path dir = ws.session_dir(label);
  Workspace::require(dir / "session.json", "construct " + label);
  return Session::replay(load_session_spec(dir / "session.json"), read_decision_log(dir / "decisions.ndjson"));
}

void load_sessions(const Workspace& ws, ApprovalService& service) {
  for (const auto& label : ws.session_labels()) {
    const fs::path dir = ws.session_dir(label);
    service.add_session(load_session(ws, label), {dir / "decisions.ndjson", dir});
  }
}

std::vector<TrainingSet> assemble(const Workspace& ws, const PipelineConfig& config) {
  const Corpus corpus = require_corpus(ws);
  Workspace::require(ws.regions(), "segment");
  const RegionOwners owners = region_owners(read_region_table(ws.regions()));
  const auto labels = ws.session_labels();
  if (labels.empty()) throw MissingArtifact(ws.sessions_dir().string(), "construct");

  std::vector<TrainingSet> sets;
  for (const auto& label : labels) {
    const Session session = load_session(ws, label);
    if (!session.complete()) {
      spdlog::warn("session '{}' has {} pending items; skipped", label, session.pending_count());
      continue;
    }
    const auto approved = session.approved_clusters();
    TrainingSet set;
    set.label = label;
    set.positive_ids = assemble_positives(approved, owners);
    const auto n_neg =
        static_cast<std::size_t>(std::llround(static_cast<double>(set.positive_ids.size()) * config.negative_ratio));
    set.negative_ids = sample_negatives(corpus, set.positive_ids, label, n_neg,
                                        detail::derive_seed(config.seed, "trainset-" + label),
                                        config.exclude_candidates);
    for (const auto& c : approved) set.provenance.cluster_ids.push_back(c.cluster_id);
    set.provenance.approvals_used = session.approval_count();
    set.provenance.construction_rate = construction_metrics(set, candidate_images(corpus, label), corpus).construction_rate;
    sets.push_back(std::move(set));
  }
  write_training_sets(sets, ws.trainsets());
  return sets;
}

ScoreTable annotate(const Workspace& ws, const PipelineConfig& config) {
  const Corpus corpus = require_corpus(ws);
  const FeatureMap globals = require_global_features(ws);
  ScoreTable table;
  for (const auto& set : require_trainsets(ws)) {
    if (set.positive_ids.empty()) spdlog::warn("label '{}' has no positives; all scores are 0", set.label);
    table[set.label] = score_label(set, corpus, globals, config.annotator);
  }
  write_score_table(table, ws.scores());
  return table;
}

EvaluationResult evaluate(const Workspace& ws) {
  const Corpus corpus = require_corpus(ws);
  Workspace::require(ws.scores(), "annotate");
  const auto result = evaluate_run(read_score_table(ws.scores()), corpus);
  write_evaluation(result, ws.evaluation());
  return result;
}

Report make_report(const Workspace& ws, const PipelineConfig& config) {
  const Corpus corpus = require_corpus(ws);
  const FeatureMap globals = require_global_features(ws);
  const auto protocol = protocol_config(config);
  std::vector<LabelComparison> rows;
  for (const auto& set : require_trainsets(ws)) rows.push_back(compare_label(set, corpus, globals, protocol));

  auto header = config_echo(config);
  std::size_t correct = 0;
  for (const auto& rec : corpus.records())
    if (rec.truth_labels && rec.tags == *rec.truth_labels) ++correct;
  header.emplace_back("corpus.images", std::to_string(corpus.size()));
  if (corpus.size() > 0)
    header.emplace_back("corpus.tag_precision",
                        detail::format_fixed(static_cast<double>(correct) / static_cast<double>(corpus.size()), 6));
  const Report report = build_report(std::move(rows), std::move(header));
  write_report(report, ws.report());
  return report;
}

PipelineRun run_synthetic_pipeline(const Workspace& ws, const PipelineConfig& config) {
  PipelineRun run;
  fs::create_directories(ws.root());
  const Corpus corpus = synthesize(ws, config);
  segment_corpus(ws, config);
  extract_features(ws, config);
  for (const auto& label : candidate_labels(corpus)) run.constructions.push_back(construct(ws, config, label, true));
  run.training_sets = assemble(ws, config);
  annotate(ws, config);
  run.evaluation = evaluate(ws);
  run.report = make_report(ws, config);
  return run;
}

}  // namespace labelset
