#include "labelset/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <random>

#include "labelset/error.hpp"

namespace labelset {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Saturated colors sit far from the 1-bit quantization threshold, so object
// regions always land on the same correlogram bins.
Rgb corner_color(int index) {
  constexpr std::uint8_t lo = 40;
  constexpr std::uint8_t hi = 215;
  return {(index & 4) ? hi : lo, (index & 2) ? hi : lo, (index & 1) ? hi : lo};
}

struct ObjectStyle {
  Rgb first;
  Rgb second;
  int period;
  bool vertical;
};

ObjectStyle object_style(int label_index) {
  // Pairs of distinct corner colors, ordered so the first few labels differ
  // in both colors.
  static constexpr std::array<std::array<int, 2>, 28> kPairs{{
      {1, 6}, {2, 5}, {3, 4}, {0, 7}, {1, 2}, {4, 6}, {3, 5}, {0, 6}, {1, 4}, {2, 7},
      {0, 3}, {5, 6}, {1, 7}, {0, 2}, {4, 5}, {3, 6}, {0, 1}, {2, 3}, {4, 7}, {5, 7},
      {0, 4}, {1, 3}, {2, 6}, {6, 7}, {0, 5}, {1, 5}, {2, 4}, {3, 7},
  }};
  const auto& pair = kPairs[static_cast<std::size_t>(label_index) % kPairs.size()];
  return {corner_color(pair[0]), corner_color(pair[1]), 2 + label_index % 3, label_index % 2 == 0};
}

constexpr Rgb kSky{135, 190, 235};

std::uint8_t clamp_channel(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

}  // namespace

std::vector<std::string> synthetic_label_names(int count) {
  static constexpr std::array<const char*, 16> kNames{
      "tiger", "flowers", "boat",  "car",   "bird",  "horse",    "plane", "bear",
      "fox",   "train",   "whale", "zebra", "tower", "lighthouse", "owl", "deer"};
  std::vector<std::string> out;
  for (int i = 0; i < count; ++i) {
    if (static_cast<std::size_t>(i) < kNames.size()) {
      out.emplace_back(kNames[static_cast<std::size_t>(i)]);
    } else {
      char buf[32];
      std::snprintf(buf, sizeof buf, "label%03d", i);
      out.emplace_back(buf);
    }
  }
  return out;
}

SyntheticImage render_synthetic_image(const SyntheticConfig& config, int label_index, bool snapshot,
                                      std::uint64_t image_seed) {
  const int s = config.image_size;
  if (s < 8) throw Error("synthetic image_size must be at least 8");
  if (config.clutter_min < 0 || config.clutter_max < config.clutter_min)
    throw Error("synthetic clutter range must satisfy 0 <= min <= max");
  std::mt19937_64 rng(image_seed);

  // Clutter: per-pixel uniform noise inside a per-image color box drawn
  // around one of the shared background textures.
  const int textures = std::max(1, config.background_textures);
  const int texture = std::uniform_int_distribution<int>(0, textures - 1)(rng);
  std::mt19937_64 texture_rng(splitmix64(0xC1077E5ULL + static_cast<std::uint64_t>(texture)));
  std::uniform_int_distribution<int> center_dist(70, 185);
  std::array<int, 3> center{center_dist(texture_rng), center_dist(texture_rng), center_dist(texture_rng)};
  std::uniform_int_distribution<int> jitter(-25, 25);
  for (auto& c : center) c += jitter(rng);
  const int half_width = std::uniform_int_distribution<int>(config.clutter_min, config.clutter_max)(rng);

  SyntheticImage out;
  out.pixels = Raster(s, s);
  out.snapshot = snapshot;
  std::uniform_int_distribution<int> spread(-half_width, half_width);
  for (int y = 0; y < s; ++y)
    for (int x = 0; x < s; ++x)
      out.pixels.set(x, y, {clamp_channel(center[0] + spread(rng)), clamp_channel(center[1] + spread(rng)),
                            clamp_channel(center[2] + spread(rng))});

  const int cell = s / 4;
  // Object fills grid cells (row 1, cols 1-2).
  const ObjectStyle style = object_style(label_index);
  for (int y = cell; y < 2 * cell; ++y)
    for (int x = cell; x < 3 * cell; ++x) {
      const int phase = style.vertical ? (x - cell) : (y - cell);
      out.pixels.set(x, y, (phase / style.period) % 2 == 0 ? style.first : style.second);
    }
  if (snapshot) out.pixels.fill_rect(cell, 0, 3 * cell, cell, kSky);

  out.truth = {synthetic_label_names(config.labels)[static_cast<std::size_t>(label_index)]};
  return out;
}

Corpus generate_synthetic(const SyntheticConfig& config, std::uint64_t seed,
                          const std::filesystem::path& out_dir) {
  if (config.labels < 2) throw Error("synthetic corpus needs at least 2 labels");
  if (config.noise < 0.0 || config.noise >= 1.0) throw Error("noise must lie in [0,1)");
  if (config.dev_per_label < 0 || config.test_per_label < 0)
    throw Error("images per label must be non-negative");

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "images", ec);
  if (ec) throw Error("cannot create output directory " + out_dir.string() + ": " + ec.message());

  const auto names = synthetic_label_names(config.labels);
  std::mt19937_64 rng(splitmix64(seed));
  std::bernoulli_distribution noisy(config.noise);
  std::uniform_int_distribution<int> other_label(0, config.labels - 2);

  std::vector<ImageRecord> records;
  int counter = 0;
  for (int label = 0; label < config.labels; ++label) {
    const int total = config.dev_per_label + config.test_per_label;
    for (int j = 0; j < total; ++j) {
      const bool is_snapshot = noisy(rng);
      int tag_label = label;
      if (is_snapshot) {
        tag_label = other_label(rng);
        if (tag_label >= label) ++tag_label;
      }
      const std::uint64_t image_seed = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(counter) + 1));
      auto image = render_synthetic_image(config, label, is_snapshot, image_seed);

      char id[32];
      std::snprintf(id, sizeof id, "img%06d", counter++);
      ImageRecord rec;
      rec.image_id = id;
      rec.path = "images/" + rec.image_id + ".png";
      rec.split = j < config.dev_per_label ? Split::development : Split::testing;
      rec.tags = {names[static_cast<std::size_t>(tag_label)]};
      rec.truth_labels = image.truth;
      save_png(image.pixels, out_dir / rec.path);
      records.push_back(std::move(rec));
    }
  }
  Corpus corpus(std::move(records), out_dir);
  write_manifest(corpus, out_dir / "manifest.tsv");
  return corpus;
}

}  // namespace labelset
