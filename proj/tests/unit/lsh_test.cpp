#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "labelset/error.hpp"
#include "labelset/lsh.hpp"
#include "oracles.hpp"

namespace labelset {
namespace {

RegionFeature feature(std::string id, std::vector<double> v) { return {std::move(id), std::move(v)}; }

Bin bin_of(std::size_t size, double variance, HashKey key) {
  Bin b;
  b.key = std::move(key);
  for (std::size_t i = 0; i < size; ++i) b.region_ids.push_back("r" + std::to_string(i));
  b.variance = variance;
  return b;
}

std::vector<std::size_t> sizes_of(const std::vector<Bin>& bins) {
  std::vector<std::size_t> out;
  for (const auto& b : bins) out.push_back(b.size());
  return out;
}

TEST(Hasher, SameConfigGivesSameKeys) {
  const HasherConfig cfg{46, 8, 0.25, 7};
  const Hasher a = build_hasher(cfg);
  const Hasher b = build_hasher(cfg);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x(46);
    for (auto& v : x) v = u(rng);
    EXPECT_EQ(a.hash(x), b.hash(x));
  }
}

TEST(Hasher, ProjectionChecksumIsStable) {
  // Regenerating the seed-7 hasher reproduces the projection matrix exactly.
  const Hasher a = build_hasher({46, 8, 0.25, 7});
  const Hasher b = build_hasher({46, 8, 0.25, 7});
  ASSERT_EQ(a.projections().size(), 8u * 46u);
  EXPECT_EQ(a.projections(), b.projections());
  EXPECT_EQ(a.offsets(), b.offsets());
  for (double o : a.offsets()) {
    EXPECT_GE(o, 0.0);
    EXPECT_LT(o, 0.25);
  }
  const Hasher c = build_hasher({46, 8, 0.25, 8});
  EXPECT_NE(a.projections(), c.projections());
}

TEST(Hasher, HugeWidthPutsUnitVectorsTogether) {
  const Hasher h = build_hasher({5, 1, 1e6, 3});
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0, 1);
  std::set<HashKey> keys;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x(5);
    double n = 0;
    for (auto& v : x) {
      v = g(rng);
      n += v * v;
    }
    for (auto& v : x) v /= std::sqrt(n);
    keys.insert(h.hash(x));
  }
  EXPECT_EQ(keys.size(), 1u);
}

TEST(Hasher, KeyIsFloorOfShiftedProjection) {
  const Hasher h = build_hasher({3, 4, 0.5, 11});
  const std::vector<double> x{0.3, -1.2, 2.0};
  const auto key = h.hash(x);
  for (std::size_t j = 0; j < 4; ++j) {
    double dot = h.offsets()[j];
    for (std::size_t i = 0; i < 3; ++i) dot += h.projections()[j * 3 + i] * x[i];
    EXPECT_EQ(key[j], static_cast<std::int64_t>(std::floor(dot / 0.5)));
  }
}

TEST(Hasher, IdenticalAndNearbyVectors) {
  const Hasher h = build_hasher({4, 8, 0.25, 5});
  const std::vector<double> x{0.1, 0.2, 0.3, 0.4};
  EXPECT_EQ(h.hash(x), h.hash(std::vector<double>(x)));
  auto y = x;
  y[0] += 1e-12;
  // Off quantization boundaries a tiny perturbation keeps the key.
  EXPECT_EQ(h.hash(x), h.hash(y));
  EXPECT_EQ(hash_region(h, feature("r", x)), h.hash(x));
}

TEST(Hasher, RejectsDimensionMismatchAndBadConfig) {
  const Hasher h = build_hasher({4, 2, 0.25, 5});
  EXPECT_THROW(h.hash(std::vector<double>{1.0, 2.0}), Error);
  EXPECT_THROW(build_hasher({4, 0, 0.25, 5}), Error);
  EXPECT_THROW(build_hasher({4, 2, 0.0, 5}), Error);
}

TEST(Hasher, CollisionProbabilityFallsWithDistance) {
  const Hasher h = build_hasher({46, 8, 0.25, 7});
  const auto curve = oracle::collision_curve(h, 10000, 10, 0.2, 99);
  EXPECT_TRUE(oracle::collision_curve_non_increasing(curve));
  EXPECT_GT(curve.front().p(), curve.back().p());
}

TEST(Bucketize, EmptyInputGivesNoBins) {
  const Hasher h = build_hasher({2, 2, 0.25, 1});
  EXPECT_TRUE(bucketize(h, {}).empty());
}

TEST(Bucketize, IdenticalVectorsShareOneBin) {
  const Hasher h = build_hasher({3, 8, 0.25, 1});
  std::vector<RegionFeature> regions;
  for (int i = 9; i >= 0; --i) regions.push_back(feature("r" + std::to_string(i), {0.2, 0.5, 0.7}));
  const auto bins = bucketize(h, regions);
  ASSERT_EQ(bins.size(), 1u);
  EXPECT_EQ(bins[0].size(), 10u);
  EXPECT_DOUBLE_EQ(bins[0].variance, 0.0);
  EXPECT_TRUE(std::is_sorted(bins[0].region_ids.begin(), bins[0].region_ids.end()));
}

TEST(Bucketize, OutputIsAPartition) {
  const Hasher h = build_hasher({6, 3, 0.5, 4});
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<RegionFeature> regions;
  for (int i = 0; i < 300; ++i) {
    std::vector<double> v(6);
    for (auto& x : v) x = u(rng);
    regions.push_back(feature("r" + std::to_string(i), v));
  }
  std::multiset<std::string> seen;
  for (const auto& b : bucketize(h, regions)) {
    EXPECT_GE(b.size(), 1u);
    for (const auto& id : b.region_ids) {
      seen.insert(id);
      EXPECT_EQ(h.hash(regions[std::stoul(id.substr(1))].values), b.key);
    }
  }
  EXPECT_EQ(seen.size(), regions.size());
  EXPECT_EQ(std::set<std::string>(seen.begin(), seen.end()).size(), regions.size());
}

TEST(Bucketize, SeparatedBlobsLandInTopTwoBins) {
  // Two Gaussian blobs (sigma 0.01, centres 1.0 apart) of 200 points each.
  const std::size_t dim = 4;
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 0.01);
  std::vector<RegionFeature> regions;
  std::map<std::string, int> blob_of;
  for (int blob = 0; blob < 2; ++blob)
    for (int i = 0; i < 200; ++i) {
      std::vector<double> v(dim);
      for (auto& x : v) x = 0.5 + g(rng);
      v[0] += blob == 0 ? -0.5 : 0.5;
      const std::string id = "b" + std::to_string(blob) + "-" + std::to_string(1000 + i);
      blob_of[id] = blob;
      regions.push_back(feature(id, v));
    }
  const Hasher h = build_hasher({dim, 2, 0.75, 3});
  auto bins = select_bins(bucketize(h, regions), 1000);
  ASSERT_GE(bins.size(), 2u);

  // Label-aware pair counting over the two largest bins.
  std::size_t same_blob_pairs_together = 0;
  std::size_t cross_blob_pairs_together = 0;
  for (std::size_t b = 0; b < 2; ++b) {
    std::array<std::size_t, 2> count{};
    for (const auto& id : bins[b].region_ids) ++count[static_cast<std::size_t>(blob_of[id])];
    for (const std::size_t c : count) same_blob_pairs_together += c * (c - 1) / 2;
    cross_blob_pairs_together += count[0] * count[1];
  }
  const std::size_t same_blob_pairs = 2 * (200 * 199 / 2);
  EXPECT_GE(static_cast<double>(same_blob_pairs_together) / same_blob_pairs, 0.95);
  EXPECT_EQ(cross_blob_pairs_together, 0u);
}

TEST(SelectBins, PaperExample) {
  std::vector<Bin> bins{bin_of(40, 0, {4}), bin_of(90, 0, {1}), bin_of(50, 0, {3}), bin_of(80, 0, {2})};
  EXPECT_EQ(sizes_of(select_bins(bins, 100)), (std::vector<std::size_t>{90, 80, 50}));
}

TEST(SelectBins, SingleLargeBinSuffices) {
  EXPECT_EQ(sizes_of(select_bins({bin_of(300, 0, {1})}, 100)), (std::vector<std::size_t>{300}));
}

TEST(SelectBins, ExhaustionSelectsEverything) {
  EXPECT_EQ(sizes_of(select_bins({bin_of(10, 0, {1}), bin_of(10, 0, {2})}, 100)),
            (std::vector<std::size_t>{10, 10}));
  EXPECT_TRUE(select_bins({}, 5).empty());
  EXPECT_THROW(select_bins({bin_of(1, 0, {1})}, 0), Error);
}

TEST(SelectBins, ExactlyTwiceIsNotEnough) {
  // "Exceeds" is strict: a cumulative count of exactly 2n needs one more bin.
  const auto out = select_bins({bin_of(100, 0, {1}), bin_of(100, 0, {2}), bin_of(5, 0, {3})}, 100);
  EXPECT_EQ(sizes_of(out), (std::vector<std::size_t>{100, 100, 5}));
}

TEST(SelectBins, TiesBreakOnVarianceThenKey) {
  const auto out = select_bins({bin_of(5, 0.3, {1}), bin_of(5, 0.1, {9}), bin_of(5, 0.1, {2})}, 100);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].key, HashKey{2});
  EXPECT_EQ(out[1].key, HashKey{9});
  EXPECT_EQ(out[2].key, HashKey{1});
}

TEST(SelectBins, RandomProfilesConformToBruteForce) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 200; ++t) {
    const std::size_t count = std::uniform_int_distribution<std::size_t>(0, 30)(rng);
    std::vector<Bin> bins;
    for (std::size_t i = 0; i < count; ++i)
      bins.push_back(bin_of(std::uniform_int_distribution<std::size_t>(1, 40)(rng),
                            std::uniform_int_distribution<int>(0, 3)(rng) * 0.25,
                            {std::uniform_int_distribution<std::int64_t>(-5, 5)(rng), static_cast<std::int64_t>(i)}));
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 200)(rng);
    EXPECT_TRUE(oracle::selection_conforms(bins, select_bins(bins, n), n)) << "profile " << t;
  }
}

TEST(BinTable, RoundTrips) {
  std::vector<Bin> bins{bin_of(3, 0.125, {-1, 2, 3}), bin_of(1, 0.0, {0, 0, 0})};
  std::stringstream buf;
  write_bin_table(bins, buf);
  const auto loaded = read_bin_table(buf, "bins.tsv");
  ASSERT_EQ(loaded.size(), 2u);
  EXPECT_EQ(loaded[0].key, bins[0].key);
  EXPECT_EQ(loaded[0].region_ids, bins[0].region_ids);
  EXPECT_DOUBLE_EQ(loaded[0].variance, 0.125);
  EXPECT_EQ(parse_key(format_key({-3, 0, 7})), (HashKey{-3, 0, 7}));
  EXPECT_THROW(parse_key("1,x"), Error);
}

}  // namespace
}  // namespace labelset
