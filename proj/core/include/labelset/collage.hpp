#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "labelset/corpus.hpp"
#include "labelset/raster.hpp"
#include "labelset/types.hpp"

namespace labelset {

struct CollageConfig {
  std::size_t max_tiles = 25;
  int tile_px = 128;
};

struct Collage {
  Raster image;
  std::vector<std::string> legend;  ///< tile index -> image id
  std::vector<std::string> skipped; ///< images that could not be loaded
};

/// Returns nullopt when the image cannot be loaded.
using ImageLoader = std::function<std::optional<Raster>(const std::string& image_id)>;

/// Montage of the whole parent images behind a set of regions: distinct
/// images in id order, capped at max_tiles, each letterboxed into a
/// tile_px square, row-major in ceil(sqrt(t)) columns. Unloadable images
/// are skipped; throws only when nothing could be placed.
Collage make_collage(std::span<const std::string> member_region_ids, const RegionOwners& owners,
                     const ImageLoader& load, const CollageConfig& config = {});

/// Loads images from the corpus' files.
Collage make_collage(std::span<const std::string> member_region_ids, const RegionOwners& owners,
                     const Corpus& corpus, const CollageConfig& config = {});

/// Writes the PNG and its `<stem>.legend.tsv` sidecar (`tile_index  image_id`).
void write_collage(const Collage& collage, const std::filesystem::path& png_path);

std::filesystem::path legend_path_for(const std::filesystem::path& png_path);

}  // namespace labelset
