#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "labelset/raster.hpp"
#include "labelset/segmenter.hpp"
#include "labelset/types.hpp"

namespace labelset {

// Region feature layout: autocorrelogram | color moments | shape | position.
inline constexpr std::size_t kCorrelogramColors = 8;
inline constexpr std::size_t kCorrelogramDistances = 4;
inline constexpr std::array<int, kCorrelogramDistances> kCorrelogramDistanceValues{1, 3, 5, 7};
inline constexpr std::size_t kCorrelogramOffset = 0;
inline constexpr std::size_t kMomentsOffset = kCorrelogramColors * kCorrelogramDistances;  // 32
inline constexpr std::size_t kShapeOffset = kMomentsOffset + 9;                               // 41
inline constexpr std::size_t kPositionOffset = kShapeOffset + 3;                              // 44
inline constexpr std::size_t kRegionFeatureDim = kPositionOffset + 2;                         // 46

// Global feature layout: 4x4x4 RGB histogram | 18 edge-direction bins + no-edge bin.
inline constexpr std::size_t kColorHistogramBins = 64;
inline constexpr std::size_t kEdgeDirectionBins = 18;
inline constexpr std::size_t kEdgeOffset = kColorHistogramBins;
inline constexpr std::size_t kNoEdgeBin = kEdgeOffset + kEdgeDirectionBins;
inline constexpr std::size_t kGlobalFeatureDim = kNoEdgeBin + 1;  // 83

struct FeatureConfig {
  double edge_threshold = 0.1;  ///< gradient magnitude on [0,1] luminance
};

struct RegionFeature {
  std::string region_id;
  FeatureVector values;
};

struct GlobalFeature {
  std::string image_id;
  FeatureVector values;
};

/// 1 bit per channel: index = r<<2 | g<<1 | b.
inline int quantize_color_1bit(Rgb c) noexcept {
  return ((c.r >= 128) << 2) | ((c.g >= 128) << 1) | (c.b >= 128);
}

/// 2 bits per channel: index = r*16 + g*4 + b.
inline int quantize_color_2bit(Rgb c) noexcept { return (c.r >> 6) * 16 + (c.g >> 6) * 4 + (c.b >> 6); }

RegionFeature region_features(const Raster& image, const Region& region);
GlobalFeature global_features(const Raster& image, std::string_view image_id,
                              const FeatureConfig& config = {});

/// Rows of float32 features plus the id/owner of each row.
struct FeatureTable {
  std::size_t dim = 0;
  std::vector<std::string> ids;
  std::vector<std::string> owners;  ///< image id owning each row
  std::vector<float> data;

  std::size_t count() const noexcept { return ids.size(); }
  std::span<const float> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
  void append(const std::string& id, const std::string& owner, std::span<const double> values);
  FeatureMap to_map() const;
};

/// Binary store: header line `dim=<D> count=<N>\n`, then N*D little-endian
/// float32 values, row-major. Sidecar TSV: `row  id  image_id`.
void write_feature_store(const FeatureTable& table, const std::filesystem::path& bin_path,
                         const std::filesystem::path& sidecar_path);
FeatureTable read_feature_store(const std::filesystem::path& bin_path,
                                const std::filesystem::path& sidecar_path);

}  // namespace labelset
