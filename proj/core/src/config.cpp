#include "labelset/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "labelset/error.hpp"
#include "text_util.hpp"

namespace labelset {

namespace pt = boost::property_tree;

namespace {

const std::set<std::string> kKnownKeys{
    "pipeline.seed",
    "synth.labels", "synth.dev_per_label", "synth.test_per_label", "synth.noise", "synth.background_textures",
    "synth.image_size", "synth.clutter_min", "synth.clutter_max",
    "segmenter.strategy", "segmenter.grid",
    "features.edge_threshold",
    "lsh.k_h", "lsh.w",
    "ap.damping", "ap.max_iterations", "ap.convergence_window", "ap.preference",
    "kmeans.k",
    "oracle.theta", "oracle.background_min_labels",
    "collage.max_tiles", "collage.tile_px",
    "trainset.negative_ratio", "trainset.exclude_candidates",
    "annotator.k", "annotator.runs",
};

template <typename T>
void read(const pt::ptree& tree, const std::string& key, T& target, const std::string& source) {
  const auto node = tree.get_optional<std::string>(key);
  if (!node) return;
  const auto parsed = detail::parse_number<T>(*node);
  if (!parsed) throw Error(source + ": invalid value for " + key + ": '" + *node + "'");
  target = *parsed;
}

void read_bool(const pt::ptree& tree, const std::string& key, bool& target, const std::string& source) {
  const auto node = tree.get_optional<std::string>(key);
  if (!node) return;
  const std::string v(detail::trim(*node));
  if (v == "true" || v == "1") target = true;
  else if (v == "false" || v == "0") target = false;
  else throw Error(source + ": invalid value for " + key + ": '" + v + "'");
}

void validate(const PipelineConfig& c, const std::string& source) {
  auto fail = [&](const std::string& what) { throw Error(source + ": " + what); };
  if (c.synth.labels < 1) fail("synth.labels must be positive");
  if (c.synth.noise < 0.0 || c.synth.noise >= 1.0) fail("synth.noise must lie in [0,1)");
  if (c.segmenter.grid < 1) fail("segmenter.grid must be positive");
  if (c.lsh.k_h < 1) fail("lsh.k_h must be positive");
  if (!(c.lsh.w > 0.0)) fail("lsh.w must be positive");
  if (!(c.ap.damping >= 0.5 && c.ap.damping < 1.0)) fail("ap.damping must lie in [0.5,1)");
  if (c.kmeans_k < 1) fail("kmeans.k must be positive");
  if (c.oracle.theta <= 0.0 || c.oracle.theta > 1.0) fail("oracle.theta must lie in (0,1]");
  if (c.annotator.k < 1) fail("annotator.k must be positive");
  if (c.evaluation_runs < 1) fail("annotator.runs must be positive");
  if (c.collage.max_tiles < 1 || c.collage.tile_px < 1) fail("collage sizes must be positive");
}

}  // namespace

PipelineConfig parse_config(const std::string& text, const std::string& source_name) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(source_name, e.line(), e.message());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw Error(source_name + ": key '" + section + "' outside a section");
    for (const auto& [key, value] : body)
      if (!kKnownKeys.contains(section + "." + key)) throw Error(source_name + ": unknown key " + section + "." + key);
  }

  PipelineConfig c;
  const auto& s = source_name;
  read(tree, "pipeline.seed", c.seed, s);
  read(tree, "synth.labels", c.synth.labels, s);
  read(tree, "synth.dev_per_label", c.synth.dev_per_label, s);
  read(tree, "synth.test_per_label", c.synth.test_per_label, s);
  read(tree, "synth.noise", c.synth.noise, s);
  read(tree, "synth.background_textures", c.synth.background_textures, s);
  read(tree, "synth.image_size", c.synth.image_size, s);
  read(tree, "synth.clutter_min", c.synth.clutter_min, s);
  read(tree, "synth.clutter_max", c.synth.clutter_max, s);
  if (const auto v = tree.get_optional<std::string>("segmenter.strategy")) c.segmenter.strategy = detail::trim(*v);
  read(tree, "segmenter.grid", c.segmenter.grid, s);
  read(tree, "features.edge_threshold", c.features.edge_threshold, s);
  read(tree, "lsh.k_h", c.lsh.k_h, s);
  read(tree, "lsh.w", c.lsh.w, s);
  read(tree, "ap.damping", c.ap.damping, s);
  read(tree, "ap.max_iterations", c.ap.max_iterations, s);
  read(tree, "ap.convergence_window", c.ap.convergence_window, s);
  if (const auto v = tree.get_optional<std::string>("ap.preference"); v && detail::trim(*v) != "median") {
    double p = 0.0;
    read(tree, "ap.preference", p, s);
    c.ap.preference = p;
  }
  read(tree, "kmeans.k", c.kmeans_k, s);
  read(tree, "oracle.theta", c.oracle.theta, s);
  read(tree, "oracle.background_min_labels", c.oracle.background_min_labels, s);
  read(tree, "collage.max_tiles", c.collage.max_tiles, s);
  read(tree, "collage.tile_px", c.collage.tile_px, s);
  read(tree, "trainset.negative_ratio", c.negative_ratio, s);
  read_bool(tree, "trainset.exclude_candidates", c.exclude_candidates, s);
  read(tree, "annotator.k", c.annotator.k, s);
  read(tree, "annotator.runs", c.evaluation_runs, s);
  validate(c, s);
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

std::vector<std::pair<std::string, std::string>> config_echo(const PipelineConfig& c) {
  using detail::format_double;
  auto num = [](auto v) { return std::to_string(v); };
  return {
      {"pipeline.seed", num(c.seed)},
      {"synth.labels", num(c.synth.labels)},
      {"synth.dev_per_label", num(c.synth.dev_per_label)},
      {"synth.test_per_label", num(c.synth.test_per_label)},
      {"synth.noise", format_double(c.synth.noise)},
      {"synth.background_textures", num(c.synth.background_textures)},
      {"synth.image_size", num(c.synth.image_size)},
      {"synth.clutter_min", num(c.synth.clutter_min)},
      {"synth.clutter_max", num(c.synth.clutter_max)},
      {"segmenter.strategy", c.segmenter.strategy},
      {"segmenter.grid", num(c.segmenter.grid)},
      {"features.region_dim", num(kRegionFeatureDim)},
      {"features.global_dim", num(kGlobalFeatureDim)},
      {"features.edge_threshold", format_double(c.features.edge_threshold)},
      {"lsh.k_h", num(c.lsh.k_h)},
      {"lsh.w", format_double(c.lsh.w)},
      {"ap.damping", format_double(c.ap.damping)},
      {"ap.max_iterations", num(c.ap.max_iterations)},
      {"ap.convergence_window", num(c.ap.convergence_window)},
      {"ap.preference", c.ap.preference ? format_double(*c.ap.preference) : "median"},
      {"kmeans.k", num(c.kmeans_k)},
      {"oracle.theta", format_double(c.oracle.theta)},
      {"oracle.background_min_labels", num(c.oracle.background_min_labels)},
      {"collage.max_tiles", num(c.collage.max_tiles)},
      {"collage.tile_px", num(c.collage.tile_px)},
      {"trainset.negative_ratio", format_double(c.negative_ratio)},
      {"trainset.exclude_candidates", c.exclude_candidates ? "true" : "false"},
      {"annotator.k", num(c.annotator.k)},
      {"annotator.distance", "euclidean"},
      {"annotator.runs", num(c.evaluation_runs)},
  };
}

}  // namespace labelset
