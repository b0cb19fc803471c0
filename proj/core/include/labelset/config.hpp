#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "labelset/annotator.hpp"
#include "labelset/approval.hpp"
#include "labelset/clustering.hpp"
#include "labelset/collage.hpp"
#include "labelset/features.hpp"
#include "labelset/lsh.hpp"
#include "labelset/segmenter.hpp"
#include "labelset/synthetic.hpp"

namespace labelset {

/// Every tunable constant of the pipeline. Files use `[section]` headers
/// and `key = value` lines; keys left out keep their defaults.
struct PipelineConfig {
  std::uint64_t seed = 7;
  SyntheticConfig synth;
  SegmenterConfig segmenter;
  FeatureConfig features;
  HasherConfig lsh;
  APConfig ap;
  std::size_t kmeans_k = 3;
  OracleConfig oracle;
  CollageConfig collage;
  double negative_ratio = 1.0;
  bool exclude_candidates = true;
  AnnotatorConfig annotator;
  std::size_t evaluation_runs = 3;
};

PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& text, const std::string& source_name = "<config>");

/// Flattened `section.key` / value pairs, in file order, for report headers.
std::vector<std::pair<std::string, std::string>> config_echo(const PipelineConfig& config);

}  // namespace labelset
