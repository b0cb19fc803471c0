#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "labelset/raster.hpp"
#include "labelset/types.hpp"

namespace labelset {

/// Half-open pixel rectangle [x0,x1) x [y0,y1).
struct BoundingBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const noexcept { return x1 - x0; }
  int height() const noexcept { return y1 - y0; }
  std::size_t area() const noexcept { return static_cast<std::size_t>(width()) * height(); }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// One segment of an image. The mask is bbox-aligned and row-major.
struct Region {
  std::string region_id;
  std::string image_id;
  BoundingBox bbox;
  std::vector<std::uint8_t> mask;
  double area_fraction = 0.0;
  double cx = 0.0;  ///< centroid, normalized to [0,1]
  double cy = 0.0;

  bool contains(int x, int y) const noexcept {
    if (x < bbox.x0 || x >= bbox.x1 || y < bbox.y0 || y >= bbox.y1) return false;
    return mask[static_cast<std::size_t>(y - bbox.y0) * bbox.width() + (x - bbox.x0)] != 0;
  }
  std::size_t pixel_count() const noexcept;
};

struct SegmenterConfig {
  std::string strategy = "grid";
  int grid = 4;
};

/// Pluggable partition of an image into disjoint, covering regions.
class SegmentationStrategy {
 public:
  virtual ~SegmentationStrategy() = default;
  virtual std::vector<Region> segment(const Raster& image, std::string_view image_id) const = 0;
};

/// G x G rectangles; the last row and column absorb the remainder pixels.
class GridSegmenter final : public SegmentationStrategy {
 public:
  explicit GridSegmenter(int grid);
  std::vector<Region> segment(const Raster& image, std::string_view image_id) const override;

 private:
  int grid_;
};

std::unique_ptr<SegmentationStrategy> make_segmenter(const SegmenterConfig& config);

std::vector<Region> segment(const Raster& image, std::string_view image_id,
                            const SegmenterConfig& config = {});

/// `<image_id>/r<index>` with the index zero-padded so ids sort in index order.
std::string make_region_id(std::string_view image_id, std::size_t index, std::size_t count);

/// Region table row: `region_id  image_id  x0,y0,x1,y1  area_fraction  cx,cy`.
/// Masks are not persisted; rows read back carry a full-bbox mask.
void write_region_table(const std::vector<Region>& regions, std::ostream& out);
void write_region_table(const std::vector<Region>& regions, const std::filesystem::path& path);
std::vector<Region> read_region_table(std::istream& in, const std::string& source_name);
std::vector<Region> read_region_table(const std::filesystem::path& path);

RegionOwners region_owners(const std::vector<Region>& regions);

}  // namespace labelset
