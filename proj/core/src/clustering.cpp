#include "labelset/clustering.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>

#include "labelset/error.hpp"
#include "text_util.hpp"

namespace labelset {

namespace {

double squared_distance(const FeatureVector& a, const FeatureVector& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

std::vector<double> similarity_matrix(std::span<const FeatureVector> points, double preference) {
  const std::size_t n = points.size();
  std::vector<double> s(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i * n + i] = preference;
    for (std::size_t k = i + 1; k < n; ++k) {
      const double v = -squared_distance(points[i], points[k]);
      s[i * n + k] = v;
      s[k * n + i] = v;
    }
  }
  return s;
}

// Nearest exemplar by similarity; exemplars map to themselves.
std::vector<std::size_t> assign_to_exemplars(const std::vector<double>& s, std::size_t n,
                                             const std::vector<std::size_t>& exemplars) {
  std::vector<std::size_t> assignment(n);
  std::vector<bool> is_exemplar(n, false);
  for (auto e : exemplars) is_exemplar[e] = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_exemplar[i]) {
      assignment[i] = i;
      continue;
    }
    std::size_t best = exemplars.front();
    for (auto e : exemplars)
      if (s[i * n + e] > s[i * n + best]) best = e;
    assignment[i] = best;
  }
  return assignment;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = seed ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xc2b2ae3d27d4eb4fULL);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::string_view to_string(ClusterStage stage) { return stage == ClusterStage::ap ? "ap" : "kmeans-sub"; }

std::vector<std::vector<std::size_t>> APResult::groups() const {
  std::vector<std::vector<std::size_t>> out(exemplars.size());
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const auto it = std::lower_bound(exemplars.begin(), exemplars.end(), assignment[i]);
    out[static_cast<std::size_t>(it - exemplars.begin())].push_back(i);
  }
  return out;
}

double median_similarity(std::span<const FeatureVector> points) {
  const std::size_t n = points.size();
  if (n < 2) return 0.0;
  std::vector<double> values;
  values.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k) values.push_back(-squared_distance(points[i], points[k]));
  // Each unordered pair appears twice among the off-diagonal entries, so the
  // median over pairs equals the median over all n(n-1) entries.
  const std::size_t m = values.size();
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(m / 2), values.end());
  const double upper = values[m / 2];
  if (m % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(m / 2));
  return 0.5 * (lower + upper);
}

APResult affinity_propagation(std::span<const FeatureVector> points, const APConfig& config) {
  if (points.empty()) throw Error("affinity propagation needs at least one point");
  if (config.damping < 0.5 || config.damping >= 1.0) throw Error("damping must lie in [0.5, 1)");
  const std::size_t n = points.size();
  APResult result;
  result.preference = config.preference.value_or(median_similarity(points));
  if (n == 1) {
    result.exemplars = {0};
    result.assignment = {0};
    result.converged = true;
    return result;
  }

  const std::vector<double> s = similarity_matrix(points, result.preference);
  std::vector<double> r(n * n, 0.0);
  std::vector<double> a(n * n, 0.0);
  const double lambda = config.damping;
  std::vector<std::size_t> previous;
  int stable = 0;

  for (int it = 1; it <= config.max_iterations; ++it) {
    result.iterations = it;
    for (std::size_t i = 0; i < n; ++i) {
      double max1 = -std::numeric_limits<double>::infinity();
      double max2 = max1;
      std::size_t arg1 = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const double v = a[i * n + k] + s[i * n + k];
        if (v > max1) {
          max2 = max1;
          max1 = v;
          arg1 = k;
        } else if (v > max2) {
          max2 = v;
        }
      }
      for (std::size_t k = 0; k < n; ++k) {
        const double fresh = s[i * n + k] - (k == arg1 ? max2 : max1);
        r[i * n + k] = lambda * r[i * n + k] + (1.0 - lambda) * fresh;
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      double positive_sum = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (i != k) positive_sum += std::max(0.0, r[i * n + k]);
      const double rkk = r[k * n + k];
      for (std::size_t i = 0; i < n; ++i) {
        const double fresh = i == k ? positive_sum
                                    : std::min(0.0, rkk + positive_sum - std::max(0.0, r[i * n + k]));
        a[i * n + k] = lambda * a[i * n + k] + (1.0 - lambda) * fresh;
      }
    }
    std::vector<std::size_t> exemplars;
    for (std::size_t k = 0; k < n; ++k)
      if (a[k * n + k] + r[k * n + k] > 0.0) exemplars.push_back(k);
    if (it > 1 && exemplars == previous) {
      ++stable;
    } else {
      stable = 0;
    }
    previous = std::move(exemplars);
    if (!previous.empty() && stable + 1 >= config.convergence_window) {
      result.converged = true;
      break;
    }
  }

  if (previous.empty()) {
    std::size_t best = 0;
    double best_sum = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) sum += s[i * n + k];
      if (sum > best_sum) {
        best_sum = sum;
        best = k;
      }
    }
    result.exemplars = {best};
    result.assignment.assign(n, best);
    return result;
  }

  // Refine: move each exemplar to the member maximizing in-cluster similarity.
  auto assignment = assign_to_exemplars(s, n, previous);
  std::vector<std::size_t> refined;
  for (auto e : previous) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (assignment[i] == e) members.push_back(i);
    std::size_t best = members.front();
    double best_sum = -std::numeric_limits<double>::infinity();
    for (auto j : members) {
      double sum = 0.0;
      for (auto i : members) sum += s[i * n + j];
      if (sum > best_sum) {
        best_sum = sum;
        best = j;
      }
    }
    refined.push_back(best);
  }
  std::sort(refined.begin(), refined.end());
  refined.erase(std::unique(refined.begin(), refined.end()), refined.end());
  result.exemplars = refined;
  result.assignment = assign_to_exemplars(s, n, refined);
  return result;
}

double ap_net_similarity(std::span<const FeatureVector> points, std::span<const std::size_t> assignment,
                         double preference) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (assignment[i] == i)
      total += preference;
    else
      total -= squared_distance(points[i], points[assignment[i]]);
  }
  return total;
}

KMeansResult kmeans(std::span<const FeatureVector> points, std::size_t k, std::uint64_t seed) {
  if (k < 1) throw Error("k-means needs k >= 1");
  KMeansResult result;
  const std::size_t n = points.size();
  if (n == 0) return result;
  std::mt19937_64 rng(seed);
  std::vector<FeatureVector> centers;
  centers.push_back(points[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (centers.size() < k) {
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points[i], centers.back()));
      if (nearest[i] > far_d) {
        far_d = nearest[i];
        far = i;
      }
    }
    centers.push_back(points[far]);
  }

  const std::size_t dim = points.front().size();
  std::vector<std::size_t> assignment(n, 0);
  std::vector<std::size_t> previous;
  for (int it = 1; it <= 100; ++it) {
    result.iterations = it;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = squared_distance(points[i], centers[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = squared_distance(points[i], centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      assignment[i] = best;
      inertia += best_d;
    }
    result.inertia_history.push_back(inertia);
    if (assignment == previous) break;
    previous = assignment;

    std::vector<FeatureVector> sums(k, FeatureVector(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[assignment[i]];
      for (std::size_t d = 0; d < dim; ++d) sums[assignment[i]][d] += points[i][d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t d = 0; d < dim; ++d) centers[c][d] = sums[c][d] / static_cast<double>(counts[c]);
    }
  }

  std::vector<std::vector<std::size_t>> groups(k);
  for (std::size_t i = 0; i < n; ++i) groups[assignment[i]].push_back(i);
  for (std::size_t c = 0; c < k; ++c) {
    if (groups[c].empty()) continue;
    result.clusters.push_back(std::move(groups[c]));
    result.centroids.push_back(centers[c]);
  }
  return result;
}

std::vector<Cluster> refine_bins(std::span<const Bin> bins, const FeatureMap& region_features,
                                 const FeatureMap& global_features, const RegionOwners& owners,
                                 const RefineConfig& config) {
  std::vector<Cluster> out;
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const Bin& bin = bins[b];
    std::vector<FeatureVector> region_points;
    region_points.reserve(bin.size());
    for (const auto& id : bin.region_ids) {
      const auto it = region_features.find(id);
      if (it == region_features.end()) throw Error("missing region feature for region " + id);
      region_points.push_back(it->second);
    }
    const APResult ap = affinity_propagation(region_points, config.ap);
    const auto groups = ap.groups();
    for (std::size_t a = 0; a < groups.size(); ++a) {
      std::vector<FeatureVector> image_points;
      image_points.reserve(groups[a].size());
      for (auto idx : groups[a]) {
        const auto& region_id = bin.region_ids[idx];
        const auto owner = owners.find(region_id);
        if (owner == owners.end()) throw Error("missing owning image for region " + region_id);
        const auto g = global_features.find(owner->second);
        if (g == global_features.end())
          throw Error("missing global feature for image " + owner->second + " (region " + region_id + ")");
        image_points.push_back(g->second);
      }
      const KMeansResult km = kmeans(image_points, config.kmeans_k, mix_seed(config.seed, b, a));
      for (std::size_t j = 0; j < km.clusters.size(); ++j) {
        Cluster c;
        char id[48];
        std::snprintf(id, sizeof id, "c%03zu-%03zu-%zu", b, a, j);
        c.cluster_id = id;
        c.parent_bin_key = bin.key;
        c.stage = ClusterStage::kmeans_sub;
        for (auto local : km.clusters[j]) c.member_region_ids.push_back(bin.region_ids[groups[a][local]]);
        std::sort(c.member_region_ids.begin(), c.member_region_ids.end());
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

void write_cluster_table(const std::vector<Cluster>& clusters, std::ostream& out) {
  for (const auto& c : clusters)
    out << c.cluster_id << '\t' << format_key(c.parent_bin_key) << '\t' << to_string(c.stage) << '\t'
        << c.exemplar_region_id.value_or("-") << '\t' << detail::join(c.member_region_ids, ",") << '\n';
}

void write_cluster_table(const std::vector<Cluster>& clusters, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write cluster table " + path.string());
  write_cluster_table(clusters, out);
}

std::vector<Cluster> read_cluster_table(std::istream& in, const std::string& source_name) {
  std::vector<Cluster> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(line, '\t');
    if (f.size() != 5) throw ParseError(source_name, line_no, "expected 5 fields");
    Cluster c;
    c.cluster_id = f[0];
    try {
      c.parent_bin_key = parse_key(f[1]);
    } catch (const Error& e) {
      throw ParseError(source_name, line_no, e.what());
    }
    if (f[2] == "ap")
      c.stage = ClusterStage::ap;
    else if (f[2] == "kmeans-sub")
      c.stage = ClusterStage::kmeans_sub;
    else
      throw ParseError(source_name, line_no, "unknown stage '" + f[2] + "'");
    if (f[3] != "-") c.exemplar_region_id = f[3];
    c.member_region_ids = detail::split(f[4], ',');
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Cluster> read_cluster_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open cluster table " + path.string());
  return read_cluster_table(in, path.string());
}

}  // namespace labelset
