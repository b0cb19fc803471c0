#pragma once

// Brute-force reference implementations shared by the unit and acceptance
// suites. Each one is written from the definition, independently of the
// library code it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "labelset/lsh.hpp"

namespace labelset::oracle {

// ---- bin selection -------------------------------------------------------

/// True iff `selected` is the ranked prefix demanded by the stopping rule:
/// rank by (size desc, variance asc, key asc), then keep the shortest prefix
/// whose region count strictly exceeds 2 * n_candidates, or everything.
inline bool selection_conforms(std::vector<Bin> input, const std::vector<Bin>& selected, std::size_t n_candidates) {
  // Insertion sort with the ranking spelled out field by field.
  for (std::size_t i = 1; i < input.size(); ++i)
    for (std::size_t j = i; j > 0; --j) {
      const Bin& a = input[j - 1];
      const Bin& b = input[j];
      const auto ka = std::make_tuple(-static_cast<long long>(a.region_ids.size()), a.variance, a.key);
      const auto kb = std::make_tuple(-static_cast<long long>(b.region_ids.size()), b.variance, b.key);
      if (kb < ka) std::swap(input[j - 1], input[j]);
      else break;
    }
  if (selected.size() > input.size()) return false;
  for (std::size_t i = 0; i < selected.size(); ++i)
    if (selected[i].key != input[i].key || selected[i].region_ids != input[i].region_ids) return false;

  std::size_t total = 0;
  for (const auto& b : input) total += b.region_ids.size();
  std::size_t cumulative = 0;
  for (const auto& b : selected) cumulative += b.region_ids.size();
  const std::size_t limit = 2 * n_candidates;
  if (total <= limit) return selected.size() == input.size();
  if (selected.empty() || cumulative <= limit) return false;
  return cumulative - selected.back().region_ids.size() <= limit;
}

// ---- affinity propagation ------------------------------------------------

inline double negative_squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return -d;
}

/// Net similarity of an exemplar set: each non-exemplar joins its most
/// similar exemplar, each exemplar contributes the preference.
inline double exemplar_set_objective(const std::vector<std::vector<double>>& points,
                                     const std::vector<std::size_t>& exemplars, double preference) {
  double total = preference * static_cast<double>(exemplars.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (std::find(exemplars.begin(), exemplars.end(), i) != exemplars.end()) continue;
    double best = -std::numeric_limits<double>::infinity();
    for (auto e : exemplars) best = std::max(best, negative_squared_distance(points[i], points[e]));
    total += best;
  }
  return total;
}

/// Maximum objective over all 2^n - 1 non-empty exemplar subsets.
inline double exhaustive_exemplar_optimum(const std::vector<std::vector<double>>& points, double preference) {
  const std::size_t n = points.size();
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<std::size_t> exemplars;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) exemplars.push_back(i);
    best = std::max(best, exemplar_set_objective(points, exemplars, preference));
  }
  return best;
}

/// Median of the n(n-1) off-diagonal similarities, straight from a full sort.
inline double median_off_diagonal(const std::vector<std::vector<double>>& points) {
  std::vector<double> v;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t k = 0; k < points.size(); ++k)
      if (i != k) v.push_back(negative_squared_distance(points[i], points[k]));
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

// ---- average precision ---------------------------------------------------

struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline Fraction add(Fraction a, Fraction b) {
  Fraction r{a.num * b.den + b.num * a.den, a.den * b.den};
  const auto g = std::gcd(r.num, r.den);
  if (g) {
    r.num /= g;
    r.den /= g;
  }
  return r;
}

/// AP of a relevance sequence in rank order, in exact rational arithmetic:
/// for each relevant rank r, count relevant items in the top-r slice.
inline Fraction average_precision_exact(const std::vector<bool>& relevant_in_rank_order) {
  Fraction sum;
  std::int64_t n_relevant = 0;
  for (std::size_t r = 0; r < relevant_in_rank_order.size(); ++r) {
    if (!relevant_in_rank_order[r]) continue;
    ++n_relevant;
    std::int64_t hits = 0;
    for (std::size_t j = 0; j <= r; ++j) hits += relevant_in_rank_order[j] ? 1 : 0;
    sum = add(sum, Fraction{hits, static_cast<std::int64_t>(r + 1)});
  }
  if (n_relevant == 0) return {};
  return Fraction{sum.num, sum.den * n_relevant};
}

// ---- LSH collision curve -------------------------------------------------

struct CollisionBin {
  double lo = 0, hi = 0;
  std::size_t pairs = 0;
  std::size_t collisions = 0;
  double p() const { return pairs ? static_cast<double>(collisions) / static_cast<double>(pairs) : 0.0; }
  double standard_error() const {
    return pairs ? std::sqrt(p() * (1.0 - p()) / static_cast<double>(pairs)) : 0.0;
  }
};

/// Monte-Carlo collision counter: random base points in [0,1]^dim, partners
/// at a uniform distance in [0, max_distance) along a random direction,
/// bucketed into equal-width distance bins.
inline std::vector<CollisionBin> collision_curve(const Hasher& hasher, std::size_t pairs, std::size_t bins,
                                                 double max_distance, std::uint64_t seed) {
  const std::size_t dim = hasher.config().dim;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<CollisionBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lo = max_distance * static_cast<double>(b) / static_cast<double>(bins);
    out[b].hi = max_distance * static_cast<double>(b + 1) / static_cast<double>(bins);
  }
  for (std::size_t p = 0; p < pairs; ++p) {
    std::vector<double> x(dim), dir(dim), y(dim);
    for (auto& v : x) v = unit(rng);
    double norm = 0.0;
    for (auto& v : dir) {
      v = gauss(rng);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    const double distance = unit(rng) * max_distance;
    for (std::size_t i = 0; i < dim; ++i) y[i] = x[i] + distance * dir[i] / norm;
    auto& bin = out[std::min(bins - 1, static_cast<std::size_t>(distance / max_distance * static_cast<double>(bins)))];
    ++bin.pairs;
    if (hasher.hash(x) == hasher.hash(y)) ++bin.collisions;
  }
  return out;
}

/// Adjacent-bin check: p[b+1] may exceed p[b] by at most one standard error
/// of the difference.
inline bool collision_curve_non_increasing(const std::vector<CollisionBin>& curve) {
  for (std::size_t b = 0; b + 1 < curve.size(); ++b) {
    const double se = std::hypot(curve[b].standard_error(), curve[b + 1].standard_error());
    if (curve[b + 1].p() > curve[b].p() + se) return false;
  }
  return true;
}

}  // namespace labelset::oracle
