#include "labelset/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "labelset/error.hpp"
#include "text_util.hpp"

namespace labelset {

namespace {

void autocorrelogram(const Raster& image, const Region& region, std::span<double> out) {
  const BoundingBox& b = region.bbox;
  const int w = b.width();
  const int h = b.height();
  // Quantized color per bbox pixel, -1 outside the mask.
  std::vector<int> color(static_cast<std::size_t>(w) * h, -1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (region.mask[static_cast<std::size_t>(y) * w + x])
        color[static_cast<std::size_t>(y) * w + x] = quantize_color_1bit(image.at(b.x0 + x, b.y0 + y));

  auto color_at = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= w || y >= h) return -1;
    return color[static_cast<std::size_t>(y) * w + x];
  };

  for (std::size_t di = 0; di < kCorrelogramDistances; ++di) {
    const int d = kCorrelogramDistanceValues[di];
    std::array<double, kCorrelogramColors> same{};
    std::array<double, kCorrelogramColors> total{};
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int c = color_at(x, y);
        if (c < 0) continue;
        auto visit = [&](int qx, int qy) {
          const int q = color_at(qx, qy);
          if (q < 0) return;
          total[static_cast<std::size_t>(c)] += 1.0;
          if (q == c) same[static_cast<std::size_t>(c)] += 1.0;
        };
        // Ring of pixels at exactly L-infinity distance d.
        for (int dx = -d; dx <= d; ++dx) {
          visit(x + dx, y - d);
          visit(x + dx, y + d);
        }
        for (int dy = -d + 1; dy <= d - 1; ++dy) {
          visit(x - d, y + dy);
          visit(x + d, y + dy);
        }
      }
    }
    std::array<double, kCorrelogramColors> prob{};
    double sum = 0.0;
    for (std::size_t c = 0; c < kCorrelogramColors; ++c) {
      prob[c] = total[c] > 0 ? same[c] / total[c] : 0.0;
      sum += prob[c];
    }
    for (std::size_t c = 0; c < kCorrelogramColors; ++c)
      out[di * kCorrelogramColors + c] = sum > 0 ? prob[c] / sum : 0.0;
  }
}

void color_moments(const Raster& image, const Region& region, std::span<double> out) {
  const BoundingBox& b = region.bbox;
  // Integer channel sums keep the mean exact, so a flat region has zero spread.
  std::array<std::int64_t, 3> sum{};
  std::int64_t n = 0;
  for (int y = b.y0; y < b.y1; ++y)
    for (int x = b.x0; x < b.x1; ++x) {
      if (!region.contains(x, y)) continue;
      const Rgb c = image.at(x, y);
      sum[0] += c.r;
      sum[1] += c.g;
      sum[2] += c.b;
      ++n;
    }
  std::array<double, 3> m2{};
  std::array<double, 3> m3{};
  for (int y = b.y0; y < b.y1; ++y)
    for (int x = b.x0; x < b.x1; ++x) {
      if (!region.contains(x, y)) continue;
      const Rgb c = image.at(x, y);
      const std::array<std::int64_t, 3> v{c.r, c.g, c.b};
      for (std::size_t ch = 0; ch < 3; ++ch) {
        const double dv = static_cast<double>(v[ch] * n - sum[ch]) / static_cast<double>(n) / 255.0;
        m2[ch] += dv * dv;
        m3[ch] += dv * dv * dv;
      }
    }
  for (std::size_t ch = 0; ch < 3; ++ch) {
    out[ch * 3] = static_cast<double>(sum[ch]) / static_cast<double>(n) / 255.0;
    out[ch * 3 + 1] = std::sqrt(m2[ch] / static_cast<double>(n));
    out[ch * 3 + 2] = std::cbrt(m3[ch] / static_cast<double>(n));
  }
}

}  // namespace

RegionFeature region_features(const Raster& image, const Region& region) {
  const std::size_t n = region.pixel_count();
  if (n == 0) throw Error("region " + region.region_id + " has an empty mask");
  if (region.bbox.x0 < 0 || region.bbox.y0 < 0 || region.bbox.x1 > image.width() ||
      region.bbox.y1 > image.height())
    throw Error("region " + region.region_id + " lies outside its image");

  RegionFeature f;
  f.region_id = region.region_id;
  f.values.assign(kRegionFeatureDim, 0.0);
  std::span<double> v(f.values);
  autocorrelogram(image, region, v.subspan(kCorrelogramOffset, kMomentsOffset));
  color_moments(image, region, v.subspan(kMomentsOffset, 9));

  const double aspect = static_cast<double>(region.bbox.width()) / region.bbox.height();
  v[kShapeOffset] = region.area_fraction;
  v[kShapeOffset + 1] = std::clamp(aspect, 0.0, 8.0) / 8.0;
  v[kShapeOffset + 2] = static_cast<double>(n) / static_cast<double>(region.bbox.area());
  v[kPositionOffset] = region.cx;
  v[kPositionOffset + 1] = region.cy;
  return f;
}

GlobalFeature global_features(const Raster& image, std::string_view image_id,
                              const FeatureConfig& config) {
  if (image.empty()) throw Error("cannot describe an empty image");
  GlobalFeature f;
  f.image_id = std::string(image_id);
  f.values.assign(kGlobalFeatureDim, 0.0);
  const int w = image.width();
  const int h = image.height();
  const double total = static_cast<double>(image.pixel_count());

  std::vector<double> luma(image.pixel_count());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const Rgb c = image.at(x, y);
      f.values[static_cast<std::size_t>(quantize_color_2bit(c))] += 1.0;
      luma[static_cast<std::size_t>(y) * w + x] = (0.299 * c.r + 0.587 * c.g + 0.114 * c.b) / 255.0;
    }

  auto L = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return luma[static_cast<std::size_t>(y) * w + x];
  };
  // Sobel operators scaled by 1/8, so a unit step yields magnitude 0.5.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = (L(x + 1, y - 1) + 2 * L(x + 1, y) + L(x + 1, y + 1) - L(x - 1, y - 1) -
                         2 * L(x - 1, y) - L(x - 1, y + 1)) / 8.0;
      const double gy = (L(x - 1, y + 1) + 2 * L(x, y + 1) + L(x + 1, y + 1) - L(x - 1, y - 1) -
                         2 * L(x, y - 1) - L(x + 1, y - 1)) / 8.0;
      const double magnitude = std::hypot(gx, gy);
      if (magnitude >= config.edge_threshold && magnitude > 0.0) {
        double angle = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
        if (angle < 0) angle += 180.0;
        if (angle >= 180.0) angle -= 180.0;
        const auto bin = std::min<std::size_t>(kEdgeDirectionBins - 1, static_cast<std::size_t>(angle / 10.0));
        f.values[kEdgeOffset + bin] += 1.0;
      } else {
        f.values[kNoEdgeBin] += 1.0;
      }
    }
  }
  for (auto& v : f.values) v /= total;
  return f;
}

void FeatureTable::append(const std::string& id, const std::string& owner, std::span<const double> values) {
  if (dim == 0) dim = values.size();
  if (values.size() != dim) throw Error("feature dimension mismatch for " + id);
  ids.push_back(id);
  owners.push_back(owner);
  for (double v : values) data.push_back(static_cast<float>(v));
}

FeatureMap FeatureTable::to_map() const {
  FeatureMap out;
  out.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto r = row(i);
    out.emplace(ids[i], FeatureVector(r.begin(), r.end()));
  }
  return out;
}

void write_feature_store(const FeatureTable& table, const std::filesystem::path& bin_path,
                         const std::filesystem::path& sidecar_path) {
  std::ofstream bin(bin_path, std::ios::binary | std::ios::trunc);
  if (!bin) throw Error("cannot write feature store " + bin_path.string());
  bin << "dim=" << table.dim << " count=" << table.count() << '\n';
  std::vector<char> bytes(table.data.size() * 4);
  for (std::size_t i = 0; i < table.data.size(); ++i) {
    const auto u = std::bit_cast<std::uint32_t>(table.data[i]);
    for (int k = 0; k < 4; ++k) bytes[i * 4 + static_cast<std::size_t>(k)] = static_cast<char>((u >> (8 * k)) & 0xFF);
  }
  bin.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!bin) throw Error("write failed: " + bin_path.string());

  std::ofstream side(sidecar_path, std::ios::trunc);
  if (!side) throw Error("cannot write " + sidecar_path.string());
  for (std::size_t i = 0; i < table.count(); ++i)
    side << i << '\t' << table.ids[i] << '\t' << table.owners[i] << '\n';
}

FeatureTable read_feature_store(const std::filesystem::path& bin_path,
                                const std::filesystem::path& sidecar_path) {
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw Error("cannot open feature store " + bin_path.string());
  std::string header;
  std::getline(bin, header);
  std::size_t dim = 0, count = 0;
  {
    std::istringstream hs(header);
    std::string a, b;
    hs >> a >> b;
    if (a.rfind("dim=", 0) != 0 || b.rfind("count=", 0) != 0)
      throw ParseError(bin_path.string(), 1, "bad feature store header");
    const auto d = detail::parse_number<std::size_t>(std::string_view(a).substr(4));
    const auto c = detail::parse_number<std::size_t>(std::string_view(b).substr(6));
    if (!d || !c) throw ParseError(bin_path.string(), 1, "bad feature store header");
    dim = *d;
    count = *c;
  }
  FeatureTable table;
  table.dim = dim;
  std::vector<char> bytes(dim * count * 4);
  bin.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(bin.gcount()) != bytes.size())
    throw Error("truncated feature store " + bin_path.string());
  table.data.resize(dim * count);
  for (std::size_t i = 0; i < table.data.size(); ++i) {
    std::uint32_t u = 0;
    for (int k = 0; k < 4; ++k)
      u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + static_cast<std::size_t>(k)])) << (8 * k);
    table.data[i] = std::bit_cast<float>(u);
  }

  std::ifstream side(sidecar_path);
  if (!side) throw Error("cannot open " + sidecar_path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(side, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(line, '\t');
    if (f.size() != 3) throw ParseError(sidecar_path.string(), line_no, "expected 3 fields");
    const auto row = detail::parse_number<std::size_t>(f[0]);
    if (!row || *row != table.ids.size())
      throw ParseError(sidecar_path.string(), line_no, "row indices must be consecutive from 0");
    table.ids.push_back(f[1]);
    table.owners.push_back(f[2]);
  }
  if (table.ids.size() != count)
    throw Error("sidecar " + sidecar_path.string() + " has " + std::to_string(table.ids.size()) +
                " rows, store header says " + std::to_string(count));
  return table;
}

}  // namespace labelset
