#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "labelset/lsh.hpp"
#include "labelset/types.hpp"

namespace labelset {

enum class ClusterStage { ap, kmeans_sub };

std::string_view to_string(ClusterStage stage);

struct Cluster {
  std::string cluster_id;
  std::vector<std::string> member_region_ids;  ///< sorted, non-empty
  std::optional<std::string> exemplar_region_id;
  HashKey parent_bin_key;
  ClusterStage stage = ClusterStage::kmeans_sub;

  friend bool operator==(const Cluster&, const Cluster&) = default;
};

struct APConfig {
  double damping = 0.9;
  int max_iterations = 500;
  int convergence_window = 50;
  std::optional<double> preference;  ///< nullopt: median off-diagonal similarity
};

struct APResult {
  std::vector<std::size_t> exemplars;   ///< ascending point indices
  std::vector<std::size_t> assignment;  ///< exemplar point index per point
  double preference = 0.0;
  int iterations = 0;
  bool converged = false;

  /// Member indices grouped by exemplar, in exemplar order.
  std::vector<std::vector<std::size_t>> groups() const;
};

/// Affinity propagation on s(i,k) = -||x_i - x_k||^2 with damped
/// responsibility/availability messages. After convergence each cluster's
/// exemplar is refined to the member with the highest in-cluster similarity
/// and points are reassigned once. If no point ever qualifies as an exemplar
/// (e.g. all points identical) the result is a single cluster around the
/// point with the largest similarity column sum. Ties go to the lowest index.
APResult affinity_propagation(std::span<const FeatureVector> points, const APConfig& config = {});

/// Net similarity of an exemplar assignment: sum of s(i, exemplar(i)) over
/// non-exemplars plus preference per exemplar.
double ap_net_similarity(std::span<const FeatureVector> points, std::span<const std::size_t> assignment,
                         double preference);

/// Median of the off-diagonal similarities; 0 for fewer than two points.
double median_similarity(std::span<const FeatureVector> points);

struct KMeansResult {
  std::vector<std::vector<std::size_t>> clusters;  ///< non-empty, in center order
  std::vector<FeatureVector> centroids;            ///< one per returned cluster
  std::vector<double> inertia_history;             ///< after each assignment step
  int iterations = 0;
};

/// Lloyd's algorithm from farthest-point seeding (first center drawn from
/// `seed`). Stops at an assignment fixpoint or after 100 iterations. Empty
/// clusters are dropped, so coincident points share one cluster.
KMeansResult kmeans(std::span<const FeatureVector> points, std::size_t k, std::uint64_t seed);

struct RefineConfig {
  APConfig ap;
  std::size_t kmeans_k = 3;
  std::uint64_t seed = 0;
};

/// Stage 1: affinity propagation per bin on region features. Stage 2: each
/// AP cluster split by k-means where every region stands in for its parent
/// image's global feature. Returns the stage-2 clusters.
std::vector<Cluster> refine_bins(std::span<const Bin> bins, const FeatureMap& region_features,
                                 const FeatureMap& global_features, const RegionOwners& owners,
                                 const RefineConfig& config);

/// `cluster_id  parent_bin_key  stage  exemplar_or_dash  member_region_ids`
void write_cluster_table(const std::vector<Cluster>& clusters, std::ostream& out);
void write_cluster_table(const std::vector<Cluster>& clusters, const std::filesystem::path& path);
std::vector<Cluster> read_cluster_table(std::istream& in, const std::string& source_name);
std::vector<Cluster> read_cluster_table(const std::filesystem::path& path);

}  // namespace labelset
