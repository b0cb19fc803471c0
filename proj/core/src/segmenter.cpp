#include "labelset/segmenter.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "labelset/error.hpp"
#include "text_util.hpp"

namespace labelset {

std::size_t Region::pixel_count() const noexcept {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

std::string make_region_id(std::string_view image_id, std::size_t index, std::size_t count) {
  int digits = 1;
  for (std::size_t n = count > 0 ? count - 1 : 0; n >= 10; n /= 10) ++digits;
  digits = std::max(digits, 2);
  char buf[32];
  std::snprintf(buf, sizeof buf, "/r%0*zu", digits, index);
  return std::string(image_id) + buf;
}

GridSegmenter::GridSegmenter(int grid) : grid_(grid) {
  if (grid < 1) throw Error("grid size must be at least 1");
}

std::vector<Region> GridSegmenter::segment(const Raster& image, std::string_view image_id) const {
  if (image.empty()) throw Error("cannot segment an empty image");
  if (image.width() < grid_ || image.height() < grid_)
    throw Error("image " + std::string(image_id) + " (" + std::to_string(image.width()) + "x" +
                std::to_string(image.height()) + ") is smaller than the " + std::to_string(grid_) +
                "x" + std::to_string(grid_) + " grid");
  const int bw = image.width() / grid_;
  const int bh = image.height() / grid_;
  const double total = static_cast<double>(image.pixel_count());
  const auto count = static_cast<std::size_t>(grid_) * grid_;

  std::vector<Region> out;
  out.reserve(count);
  for (int gy = 0; gy < grid_; ++gy) {
    for (int gx = 0; gx < grid_; ++gx) {
      Region r;
      r.region_id = make_region_id(image_id, out.size(), count);
      r.image_id = std::string(image_id);
      r.bbox = {gx * bw, gy * bh, gx == grid_ - 1 ? image.width() : (gx + 1) * bw,
                gy == grid_ - 1 ? image.height() : (gy + 1) * bh};
      r.mask.assign(r.bbox.area(), 1);
      r.area_fraction = static_cast<double>(r.bbox.area()) / total;
      r.cx = (r.bbox.x0 + r.bbox.x1) / 2.0 / image.width();
      r.cy = (r.bbox.y0 + r.bbox.y1) / 2.0 / image.height();
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::unique_ptr<SegmentationStrategy> make_segmenter(const SegmenterConfig& config) {
  if (config.strategy == "grid") return std::make_unique<GridSegmenter>(config.grid);
  throw Error("unknown segmentation strategy '" + config.strategy + "'");
}

std::vector<Region> segment(const Raster& image, std::string_view image_id,
                            const SegmenterConfig& config) {
  return make_segmenter(config)->segment(image, image_id);
}

void write_region_table(const std::vector<Region>& regions, std::ostream& out) {
  for (const auto& r : regions) {
    out << r.region_id << '\t' << r.image_id << '\t' << r.bbox.x0 << ',' << r.bbox.y0 << ','
        << r.bbox.x1 << ',' << r.bbox.y1 << '\t' << detail::format_double(r.area_fraction) << '\t'
        << detail::format_double(r.cx) << ',' << detail::format_double(r.cy) << '\n';
  }
}

void write_region_table(const std::vector<Region>& regions, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write region table " + path.string());
  write_region_table(regions, out);
}

std::vector<Region> read_region_table(std::istream& in, const std::string& source_name) {
  std::vector<Region> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(line, '\t');
    if (f.size() != 5) throw ParseError(source_name, line_no, "expected 5 fields");
    const auto box = detail::split(f[2], ',');
    const auto centroid = detail::split(f[4], ',');
    if (box.size() != 4 || centroid.size() != 2)
      throw ParseError(source_name, line_no, "malformed bbox or centroid");
    Region r;
    r.region_id = f[0];
    r.image_id = f[1];
    int* coords[4] = {&r.bbox.x0, &r.bbox.y0, &r.bbox.x1, &r.bbox.y1};
    for (int i = 0; i < 4; ++i) {
      const auto v = detail::parse_number<int>(box[static_cast<std::size_t>(i)]);
      if (!v) throw ParseError(source_name, line_no, "bad bbox coordinate");
      *coords[i] = *v;
    }
    const auto area = detail::parse_number<double>(f[3]);
    const auto cx = detail::parse_number<double>(centroid[0]);
    const auto cy = detail::parse_number<double>(centroid[1]);
    if (!area || !cx || !cy) throw ParseError(source_name, line_no, "bad number");
    if (r.bbox.width() <= 0 || r.bbox.height() <= 0)
      throw ParseError(source_name, line_no, "empty bbox");
    r.area_fraction = *area;
    r.cx = *cx;
    r.cy = *cy;
    r.mask.assign(r.bbox.area(), 1);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Region> read_region_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open region table " + path.string());
  return read_region_table(in, path.string());
}

RegionOwners region_owners(const std::vector<Region>& regions) {
  RegionOwners owners;
  owners.reserve(regions.size());
  for (const auto& r : regions) owners.emplace(r.region_id, r.image_id);
  return owners;
}

}  // namespace labelset
