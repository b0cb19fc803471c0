#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "labelset/clustering.hpp"
#include "labelset/corpus.hpp"
#include "labelset/types.hpp"

namespace labelset {

struct Provenance {
  std::vector<std::string> cluster_ids;
  std::size_t approvals_used = 0;
  std::optional<double> construction_rate;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct TrainingSet {
  std::string label;
  std::vector<std::string> positive_ids;  ///< sorted
  std::vector<std::string> negative_ids;  ///< sorted
  Provenance provenance;

  friend bool operator==(const TrainingSet&, const TrainingSet&) = default;
};

/// Parent images of every member region of the approved clusters.
std::vector<std::string> assemble_positives(std::span<const Cluster> approved, const RegionOwners& owners);

/// Uniform sample without replacement from development images outside
/// `positives`. With `exclude_candidates` the images tagged with `label`
/// are also left out of the pool. The result is sorted.
std::vector<std::string> sample_negatives(const Corpus& corpus, std::span<const std::string> positives,
                                          std::string_view label, std::size_t n, std::uint64_t seed,
                                          bool exclude_candidates = true);

/// Uniform sample of `n` ids (capped at the pool size), returned sorted.
std::vector<std::string> sample_ids(std::span<const std::string> pool, std::size_t n, std::uint64_t seed);

/// Fraction of `image_ids` whose truth contains `label`; absent when empty.
std::optional<double> label_precision(std::span<const std::string> image_ids, const Corpus& corpus,
                                      std::string_view label);

struct ConstructionMetrics {
  std::optional<double> construction_rate;
  std::optional<double> label_precision;
};

ConstructionMetrics construction_metrics(const TrainingSet& set, std::span<const std::string> candidates,
                                         const Corpus& corpus);

std::string training_set_to_json(const TrainingSet& set);
TrainingSet training_set_from_json(std::string_view line);
void write_training_sets(std::span<const TrainingSet> sets, std::ostream& out);
void write_training_sets(std::span<const TrainingSet> sets, const std::filesystem::path& path);
std::vector<TrainingSet> read_training_sets(std::istream& in, const std::string& source_name);
std::vector<TrainingSet> read_training_sets(const std::filesystem::path& path);

}  // namespace labelset
