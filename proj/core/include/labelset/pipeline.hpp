#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "labelset/annotator.hpp"
#include "labelset/approval.hpp"
#include "labelset/approval_service.hpp"
#include "labelset/config.hpp"
#include "labelset/corpus.hpp"
#include "labelset/trainset.hpp"

namespace labelset {

/// File layout of one pipeline run. Stages talk to each other only through
/// these artifacts.
class Workspace {
 public:
  explicit Workspace(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path manifest() const { return root_ / "manifest.tsv"; }
  std::filesystem::path regions() const { return root_ / "regions.tsv"; }
  std::filesystem::path region_features() const { return root_ / "region_features.bin"; }
  std::filesystem::path region_feature_ids() const { return root_ / "region_features.tsv"; }
  std::filesystem::path global_features() const { return root_ / "global_features.bin"; }
  std::filesystem::path global_feature_ids() const { return root_ / "global_features.tsv"; }
  std::filesystem::path sessions_dir() const { return root_ / "sessions"; }
  std::filesystem::path session_dir(const std::string& label) const;
  std::filesystem::path trainsets() const { return root_ / "trainsets.ndjson"; }
  std::filesystem::path scores() const { return root_ / "scores.tsv"; }
  std::filesystem::path evaluation() const { return root_ / "evaluation.tsv"; }
  std::filesystem::path report() const { return root_ / "report.tsv"; }

  /// Throws MissingArtifact naming `producer` when `path` does not exist.
  static void require(const std::filesystem::path& path, const std::string& producer);

  /// Labels with a session directory, sorted.
  std::vector<std::string> session_labels() const;

 private:
  std::filesystem::path root_;
};

Corpus ingest(const Workspace& ws, const std::filesystem::path& manifest_path);
Corpus synthesize(const Workspace& ws, const PipelineConfig& config);
std::size_t segment_corpus(const Workspace& ws, const PipelineConfig& config);
void extract_features(const Workspace& ws, const PipelineConfig& config);

struct ConstructionSummary {
  std::string label;
  std::size_t candidates = 0;
  std::size_t bins_total = 0;
  std::size_t bins_selected = 0;
  std::size_t clusters = 0;  ///< stage-2 clusters
  std::size_t items = 0;     ///< review items after background removal
  std::size_t approvals = 0;
  std::size_t bin_decisions = 0;
  std::size_t cluster_decisions = 0;
};

/// Bins, clusters, collages and the review session for one label. With
/// `oracle` the session is decided headlessly.
ConstructionSummary construct(const Workspace& ws, const PipelineConfig& config, const std::string& label,
                              bool oracle);

/// Labels of the corpus that have at least one candidate image.
std::vector<std::string> candidate_labels(const Corpus& corpus);

/// Rebuilds a label's session from its spec and decision log.
Session load_session(const Workspace& ws, const std::string& label);

/// Registers every stored session with the service.
void load_sessions(const Workspace& ws, ApprovalService& service);

std::vector<TrainingSet> assemble(const Workspace& ws, const PipelineConfig& config);
ScoreTable annotate(const Workspace& ws, const PipelineConfig& config);
EvaluationResult evaluate(const Workspace& ws);
Report make_report(const Workspace& ws, const PipelineConfig& config);

/// synthesize -> segment -> features -> construct --oracle (all labels)
/// -> assemble -> annotate -> evaluate -> report.
struct PipelineRun {
  std::vector<ConstructionSummary> constructions;
  std::vector<TrainingSet> training_sets;
  EvaluationResult evaluation;
  Report report;
};
PipelineRun run_synthetic_pipeline(const Workspace& ws, const PipelineConfig& config);

}  // namespace labelset
