#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "labelset/features.hpp"

namespace labelset {

struct HasherConfig {
  std::size_t dim = kRegionFeatureDim;
  int k_h = 8;      ///< concatenated hash functions per key
  double w = 0.25;  ///< bucket width
  std::uint64_t seed = 0;
};

using HashKey = std::vector<std::int64_t>;

/// p-stable (Gaussian) locality-sensitive hash with a single table:
/// key_j = floor((a_j . x + b_j) / w).
class Hasher {
 public:
  explicit Hasher(const HasherConfig& config);

  const HasherConfig& config() const noexcept { return config_; }
  /// Row-major k_h x dim.
  const std::vector<double>& projections() const noexcept { return projections_; }
  const std::vector<double>& offsets() const noexcept { return offsets_; }

  HashKey hash(std::span<const double> x) const;

 private:
  HasherConfig config_;
  std::vector<double> projections_;
  std::vector<double> offsets_;
};

Hasher build_hasher(const HasherConfig& config);
HashKey hash_region(const Hasher& hasher, const RegionFeature& feature);

struct Bin {
  HashKey key;
  std::vector<std::string> region_ids;  ///< sorted
  double variance = 0.0;                ///< mean per-dimension variance of members

  std::size_t size() const noexcept { return region_ids.size(); }

  friend bool operator==(const Bin&, const Bin&) = default;
};

/// Partitions regions by key. Bins come back in key order.
std::vector<Bin> bucketize(const Hasher& hasher, std::span<const RegionFeature> regions);

/// Largest-first ordering: size desc, variance asc, key lexicographic.
bool bin_rank_less(const Bin& a, const Bin& b);

/// Shortest prefix of the ranked bins whose region count strictly exceeds
/// 2 * n_candidates; every bin when the total never gets there.
std::vector<Bin> select_bins(std::vector<Bin> bins, std::size_t n_candidates);

std::string format_key(const HashKey& key);
HashKey parse_key(std::string_view text);

/// `key  size  variance  region_id,region_id,...`
void write_bin_table(const std::vector<Bin>& bins, std::ostream& out);
void write_bin_table(const std::vector<Bin>& bins, const std::filesystem::path& path);
std::vector<Bin> read_bin_table(std::istream& in, const std::string& source_name);
std::vector<Bin> read_bin_table(const std::filesystem::path& path);

}  // namespace labelset
