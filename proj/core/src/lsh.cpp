#include "labelset/lsh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>

#include "labelset/error.hpp"
#include "text_util.hpp"

namespace labelset {

Hasher::Hasher(const HasherConfig& config) : config_(config) {
  if (config.k_h < 1) throw Error("k_h must be at least 1");
  if (!(config.w > 0.0)) throw Error("bucket width w must be positive");
  if (config.dim == 0) throw Error("hasher dimension must be positive");
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, config.w);
  const auto k = static_cast<std::size_t>(config.k_h);
  projections_.resize(k * config.dim);
  for (auto& a : projections_) a = gauss(rng);
  offsets_.resize(k);
  for (auto& b : offsets_) b = uniform(rng);
}

HashKey Hasher::hash(std::span<const double> x) const {
  if (x.size() != config_.dim)
    throw Error("feature dimension " + std::to_string(x.size()) + " does not match hasher dimension " +
                std::to_string(config_.dim));
  HashKey key(static_cast<std::size_t>(config_.k_h));
  for (std::size_t j = 0; j < key.size(); ++j) {
    const double* a = projections_.data() + j * config_.dim;
    double dot = offsets_[j];
    for (std::size_t i = 0; i < config_.dim; ++i) dot += a[i] * x[i];
    key[j] = static_cast<std::int64_t>(std::floor(dot / config_.w));
  }
  return key;
}

Hasher build_hasher(const HasherConfig& config) { return Hasher(config); }

HashKey hash_region(const Hasher& hasher, const RegionFeature& feature) {
  return hasher.hash(feature.values);
}

std::vector<Bin> bucketize(const Hasher& hasher, std::span<const RegionFeature> regions) {
  std::map<HashKey, std::vector<const RegionFeature*>> buckets;
  for (const auto& r : regions) buckets[hasher.hash(r.values)].push_back(&r);

  std::vector<Bin> bins;
  bins.reserve(buckets.size());
  const std::size_t dim = hasher.config().dim;
  for (auto& [key, members] : buckets) {
    std::sort(members.begin(), members.end(),
              [](const RegionFeature* a, const RegionFeature* b) { return a->region_id < b->region_id; });
    Bin bin;
    bin.key = key;
    bin.region_ids.reserve(members.size());
    // Running mean, exact when all members coincide.
    std::vector<double> mean(members.front()->values.begin(), members.front()->values.end());
    double count = 0.0;
    for (const auto* m : members) {
      bin.region_ids.push_back(m->region_id);
      count += 1.0;
      for (std::size_t i = 0; i < dim; ++i) mean[i] += (m->values[i] - mean[i]) / count;
    }
    const double n = count;
    double var = 0.0;
    for (const auto* m : members)
      for (std::size_t i = 0; i < dim; ++i) {
        const double d = m->values[i] - mean[i];
        var += d * d;
      }
    bin.variance = var / n / static_cast<double>(dim);
    bins.push_back(std::move(bin));
  }
  return bins;
}

bool bin_rank_less(const Bin& a, const Bin& b) {
  if (a.size() != b.size()) return a.size() > b.size();
  if (a.variance != b.variance) return a.variance < b.variance;
  return a.key < b.key;
}

std::vector<Bin> select_bins(std::vector<Bin> bins, std::size_t n_candidates) {
  if (n_candidates < 1) throw Error("select_bins needs at least one candidate image");
  std::sort(bins.begin(), bins.end(), bin_rank_less);
  const std::size_t limit = 2 * n_candidates;
  std::size_t cumulative = 0;
  std::size_t take = 0;
  while (take < bins.size() && cumulative <= limit) cumulative += bins[take++].size();
  bins.resize(take);
  return bins;
}

std::string format_key(const HashKey& key) {
  std::string out;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(key[i]);
  }
  return out;
}

HashKey parse_key(std::string_view text) {
  HashKey key;
  for (const auto& part : detail::split(text, ',')) {
    const auto v = detail::parse_number<std::int64_t>(part);
    if (!v) throw Error("malformed hash key '" + std::string(text) + "'");
    key.push_back(*v);
  }
  return key;
}

void write_bin_table(const std::vector<Bin>& bins, std::ostream& out) {
  for (const auto& b : bins)
    out << format_key(b.key) << '\t' << b.size() << '\t' << detail::format_double(b.variance) << '\t'
        << detail::join(b.region_ids, ",") << '\n';
}

void write_bin_table(const std::vector<Bin>& bins, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write bin table " + path.string());
  write_bin_table(bins, out);
}

std::vector<Bin> read_bin_table(std::istream& in, const std::string& source_name) {
  std::vector<Bin> bins;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(line, '\t');
    if (f.size() != 4) throw ParseError(source_name, line_no, "expected 4 fields");
    Bin b;
    try {
      b.key = parse_key(f[0]);
    } catch (const Error& e) {
      throw ParseError(source_name, line_no, e.what());
    }
    const auto size = detail::parse_number<std::size_t>(f[1]);
    const auto var = detail::parse_number<double>(f[2]);
    if (!size || !var) throw ParseError(source_name, line_no, "bad number");
    b.variance = *var;
    b.region_ids = detail::split(f[3], ',');
    if (b.region_ids.size() != *size) throw ParseError(source_name, line_no, "size does not match members");
    bins.push_back(std::move(b));
  }
  return bins;
}

std::vector<Bin> read_bin_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open bin table " + path.string());
  return read_bin_table(in, path.string());
}

}  // namespace labelset
