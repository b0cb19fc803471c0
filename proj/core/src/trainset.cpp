#include "labelset/trainset.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>

#include <json.hpp>

#include "labelset/error.hpp"
#include "text_util.hpp"

namespace labelset {

using nlohmann::json;

std::vector<std::string> assemble_positives(std::span<const Cluster> approved, const RegionOwners& owners) {
  std::set<std::string> images;
  for (const auto& cluster : approved) {
    for (const auto& region : cluster.member_region_ids) {
      const auto it = owners.find(region);
      if (it == owners.end()) throw Error("unknown region " + region);
      images.insert(it->second);
    }
  }
  return {images.begin(), images.end()};
}

std::vector<std::string> sample_ids(std::span<const std::string> pool, std::size_t n, std::uint64_t seed) {
  std::vector<std::string> sorted(pool.begin(), pool.end());
  std::sort(sorted.begin(), sorted.end());
  if (n >= sorted.size()) return sorted;
  std::vector<std::string> out;
  out.reserve(n);
  std::mt19937_64 rng(seed);
  std::sample(sorted.begin(), sorted.end(), std::back_inserter(out), n, rng);
  return out;
}

std::vector<std::string> sample_negatives(const Corpus& corpus, std::span<const std::string> positives,
                                          std::string_view label, std::size_t n, std::uint64_t seed,
                                          bool exclude_candidates) {
  if (n == 0) return {};
  const std::set<std::string_view> excluded(positives.begin(), positives.end());
  std::vector<std::string> pool;
  for (const auto& rec : corpus.records()) {
    if (rec.split != Split::development || excluded.contains(rec.image_id)) continue;
    if (exclude_candidates && rec.has_tag(label)) continue;
    pool.push_back(rec.image_id);
  }
  return sample_ids(pool, n, seed);
}

std::optional<double> label_precision(std::span<const std::string> image_ids, const Corpus& corpus,
                                      std::string_view label) {
  if (image_ids.empty()) return std::nullopt;
  std::size_t hits = 0;
  for (const auto& id : image_ids) {
    const auto& rec = corpus.at(id);
    if (!rec.truth_labels) throw Error("missing truth_labels for image " + id);
    if (rec.has_truth(label)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(image_ids.size());
}

ConstructionMetrics construction_metrics(const TrainingSet& set, std::span<const std::string> candidates,
                                         const Corpus& corpus) {
  ConstructionMetrics m;
  if (!candidates.empty())
    m.construction_rate = static_cast<double>(set.positive_ids.size()) / static_cast<double>(candidates.size());
  m.label_precision = label_precision(set.positive_ids, corpus, set.label);
  return m;
}

std::string training_set_to_json(const TrainingSet& set) {
  json prov{{"cluster_ids", set.provenance.cluster_ids}, {"approvals_used", set.provenance.approvals_used}};
  prov["construction_rate"] =
      set.provenance.construction_rate ? json(*set.provenance.construction_rate) : json(nullptr);
  json j{{"label", set.label},
         {"positive_ids", set.positive_ids},
         {"negative_ids", set.negative_ids},
         {"provenance", std::move(prov)}};
  return j.dump();
}

TrainingSet training_set_from_json(std::string_view line) {
  const json j = json::parse(line);
  TrainingSet set;
  set.label = j.at("label").get<std::string>();
  set.positive_ids = j.at("positive_ids").get<std::vector<std::string>>();
  set.negative_ids = j.at("negative_ids").get<std::vector<std::string>>();
  const json& prov = j.at("provenance");
  set.provenance.cluster_ids = prov.at("cluster_ids").get<std::vector<std::string>>();
  set.provenance.approvals_used = prov.at("approvals_used").get<std::size_t>();
  if (!prov.at("construction_rate").is_null())
    set.provenance.construction_rate = prov.at("construction_rate").get<double>();
  return set;
}

void write_training_sets(std::span<const TrainingSet> sets, std::ostream& out) {
  for (const auto& s : sets) out << training_set_to_json(s) << '\n';
}

void write_training_sets(std::span<const TrainingSet> sets, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  write_training_sets(sets, out);
}

std::vector<TrainingSet> read_training_sets(std::istream& in, const std::string& source_name) {
  std::vector<TrainingSet> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    try {
      out.push_back(training_set_from_json(line));
    } catch (const std::exception& e) {
      throw ParseError(source_name, line_no, e.what());
    }
  }
  return out;
}

std::vector<TrainingSet> read_training_sets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_training_sets(in, path.string());
}

}  // namespace labelset
