#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "labelset/corpus.hpp"
#include "labelset/trainset.hpp"
#include "labelset/types.hpp"

namespace labelset {

struct AnnotatorConfig {
  std::size_t k = 25;
};

/// Fraction of positives among the k nearest training images (Euclidean on
/// global features, ties broken by image id). When the training set holds
/// fewer than k images, all of them vote.
double knn_score(std::span<const double> test_feature, const TrainingSet& training_set,
                 const FeatureMap& global_features, const AnnotatorConfig& config);

using RankedScores = std::vector<std::pair<std::string, double>>;

/// Non-interpolated AP; ranking is by descending score, ties by image id.
double average_precision(RankedScores scores, const std::set<std::string>& relevant);

/// label -> (test image id, score)
using ScoreTable = std::map<std::string, RankedScores>;

/// Scores every test image of the corpus for one label. An empty training
/// set scores everything 0.
RankedScores score_label(const TrainingSet& training_set, const Corpus& corpus, const FeatureMap& global_features,
                         const AnnotatorConfig& config);

struct EvaluationResult {
  std::map<std::string, std::optional<double>> ap;  ///< absent: no relevant test image
  std::optional<double> map;
};

EvaluationResult evaluate_run(const ScoreTable& scores, const Corpus& corpus);

/// TSV `label<TAB>image_id<TAB>score`.
void write_score_table(const ScoreTable& scores, const std::filesystem::path& path);
ScoreTable read_score_table(const std::filesystem::path& path);
/// TSV `label<TAB>ap` plus a final `MAP` row.
void write_evaluation(const EvaluationResult& result, const std::filesystem::path& path);

/// Per-label outcome of the averaged constructed-vs-baseline protocol.
struct LabelComparison {
  std::string label;
  std::optional<double> ap_constructed;
  std::optional<double> ap_baseline;
  std::size_t n_pos = 0;
  std::size_t approvals = 0;
  std::optional<double> construction_rate;
  std::optional<double> precision_before;
  std::optional<double> precision_after;
};

struct ProtocolConfig {
  AnnotatorConfig annotator;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  double negative_ratio = 1.0;  ///< |negatives| / |positives|
  bool exclude_candidates = true;
};

/// Baseline arm: per seed, n_pos uniformly sampled candidates plus sampled
/// negatives. Returns the AP averaged over the seeds; absent when the label
/// has no relevant test image. n_pos above the candidate count is capped.
std::optional<double> run_baseline(std::string_view label, std::span<const std::string> candidates,
                                   std::size_t n_pos, const Corpus& corpus, const FeatureMap& global_features,
                                   const ProtocolConfig& config);

/// Constructed arm: fixed positives, negatives resampled per seed.
std::optional<double> run_constructed(std::string_view label, std::span<const std::string> positives,
                                      const Corpus& corpus, const FeatureMap& global_features,
                                      const ProtocolConfig& config);

LabelComparison compare_label(const TrainingSet& constructed, const Corpus& corpus,
                              const FeatureMap& global_features, const ProtocolConfig& config);

struct Report {
  std::vector<std::pair<std::string, std::string>> header;  ///< echoed configuration
  std::vector<LabelComparison> rows;
  std::optional<double> map_constructed;
  std::optional<double> map_baseline;
};

Report build_report(std::vector<LabelComparison> rows,
                    std::vector<std::pair<std::string, std::string>> header = {});
void write_report(const Report& report, std::ostream& out);
void write_report(const Report& report, const std::filesystem::path& path);

}  // namespace labelset
