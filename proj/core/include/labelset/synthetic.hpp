#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "labelset/corpus.hpp"
#include "labelset/raster.hpp"

namespace labelset {

/// Desk-scale stand-in for a tagged web photo collection.
///
/// Every image shows one label-specific striped object on a cluttered
/// background. Two kinds of shot are rendered:
///  - close-ups (probability 1 - noise): tagged with their true label;
///  - snapshots (probability noise): the same object under a uniform sky
///    strip, carrying a wrong substituted tag. Snapshots are what makes the
///    shared "sky" bins that reviewers screen out as background.
/// Initial tag precision is therefore close to 1 - noise.
struct SyntheticConfig {
  int labels = 8;
  int dev_per_label = 200;
  int test_per_label = 100;
  double noise = 0.45;
  int background_textures = 6;
  int image_size = 48;
  int clutter_min = 30;  ///< per-image clutter half width, drawn from [min, max]
  int clutter_max = 60;
};

struct SyntheticImage {
  Raster pixels;
  std::vector<std::string> truth;
  bool snapshot = false;
};

std::vector<std::string> synthetic_label_names(int count);

/// Renders one image of `label_index`; exposed for tests.
SyntheticImage render_synthetic_image(const SyntheticConfig& config, int label_index, bool snapshot,
                                      std::uint64_t image_seed);

/// Writes `images/*.png` and `manifest.tsv` under out_dir and returns the
/// loaded corpus. Deterministic in (config, seed).
Corpus generate_synthetic(const SyntheticConfig& config, std::uint64_t seed,
                          const std::filesystem::path& out_dir);

}  // namespace labelset
