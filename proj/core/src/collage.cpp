#include "labelset/collage.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <spdlog/spdlog.h>

#include "labelset/error.hpp"

namespace labelset {

Collage make_collage(std::span<const std::string> member_region_ids, const RegionOwners& owners,
                     const ImageLoader& load, const CollageConfig& config) {
  if (member_region_ids.empty()) throw Error("collage needs at least one member region");
  if (config.max_tiles == 0) throw Error("collage max_tiles must be positive");

  std::vector<std::string> images;
  for (const auto& region : member_region_ids) {
    const auto it = owners.find(region);
    if (it == owners.end()) throw Error("unknown region " + region);
    images.push_back(it->second);
  }
  std::sort(images.begin(), images.end());
  images.erase(std::unique(images.begin(), images.end()), images.end());

  Collage out;
  std::vector<Raster> tiles;
  for (const auto& id : images) {
    if (tiles.size() == config.max_tiles) break;
    auto raster = load(id);
    if (!raster || raster->empty()) {
      spdlog::warn("collage: skipping unloadable image {}", id);
      out.skipped.push_back(id);
      continue;
    }
    tiles.push_back(resize_letterbox(*raster, config.tile_px));
    out.legend.push_back(id);
  }
  if (tiles.empty()) throw Error("collage: none of the " + std::to_string(images.size()) + " images could be loaded");

  const auto t = tiles.size();
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(t))));
  const auto rows = (t + cols - 1) / cols;
  out.image = Raster(static_cast<int>(cols) * config.tile_px, static_cast<int>(rows) * config.tile_px);
  for (std::size_t i = 0; i < t; ++i) {
    const int ox = static_cast<int>(i % cols) * config.tile_px;
    const int oy = static_cast<int>(i / cols) * config.tile_px;
    for (int y = 0; y < config.tile_px; ++y)
      for (int x = 0; x < config.tile_px; ++x) out.image.set(ox + x, oy + y, tiles[i].at(x, y));
  }
  return out;
}

Collage make_collage(std::span<const std::string> member_region_ids, const RegionOwners& owners,
                     const Corpus& corpus, const CollageConfig& config) {
  const ImageLoader loader = [&corpus](const std::string& id) -> std::optional<Raster> {
    const auto* record = corpus.find(id);
    if (!record) return std::nullopt;
    try {
      return load_image(corpus.resolve_path(*record));
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  return make_collage(member_region_ids, owners, loader, config);
}

std::filesystem::path legend_path_for(const std::filesystem::path& png_path) {
  auto p = png_path;
  p.replace_extension(".legend.tsv");
  return p;
}

void write_collage(const Collage& collage, const std::filesystem::path& png_path) {
  save_png(collage.image, png_path);
  std::ofstream legend(legend_path_for(png_path), std::ios::trunc);
  if (!legend) throw Error("cannot write collage legend for " + png_path.string());
  for (std::size_t i = 0; i < collage.legend.size(); ++i) legend << i << '\t' << collage.legend[i] << '\n';
}

}  // namespace labelset
