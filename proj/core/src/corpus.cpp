#include "labelset/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "labelset/error.hpp"
#include "text_util.hpp"

namespace labelset {

std::string_view to_string(Split split) {
  return split == Split::development ? "development" : "testing";
}

std::optional<Split> parse_split(std::string_view text) {
  if (text == "development" || text == "dev") return Split::development;
  if (text == "testing" || text == "test") return Split::testing;
  return std::nullopt;
}

bool ImageRecord::has_tag(std::string_view label) const {
  return std::binary_search(tags.begin(), tags.end(), label);
}

bool ImageRecord::has_truth(std::string_view label) const {
  return truth_labels && std::binary_search(truth_labels->begin(), truth_labels->end(), label);
}

std::vector<std::string> normalize_labels(std::vector<std::string> labels) {
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (auto& raw : labels) {
    std::string s(detail::trim(raw));
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (!s.empty()) out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Corpus::Corpus(std::vector<ImageRecord> records, std::filesystem::path base_dir)
    : records_(std::move(records)), base_dir_(std::move(base_dir)) {
  std::set<std::string> vocab;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    auto& r = records_[i];
    r.tags = normalize_labels(std::move(r.tags));
    if (r.truth_labels) {
      r.truth_labels = normalize_labels(std::move(*r.truth_labels));
      if (r.truth_labels->empty()) r.truth_labels.reset();
    }
    if (!index_.emplace(r.image_id, i).second) throw Error("duplicate image_id: " + r.image_id);
    vocab.insert(r.tags.begin(), r.tags.end());
    if (r.truth_labels) vocab.insert(r.truth_labels->begin(), r.truth_labels->end());
  }
  vocabulary_.assign(vocab.begin(), vocab.end());
}

const ImageRecord* Corpus::find(std::string_view image_id) const {
  const auto it = index_.find(std::string(image_id));
  return it == index_.end() ? nullptr : &records_[it->second];
}

const ImageRecord& Corpus::at(std::string_view image_id) const {
  if (const auto* r = find(image_id)) return *r;
  throw Error("unknown image_id: " + std::string(image_id));
}

std::filesystem::path Corpus::resolve_path(const ImageRecord& record) const {
  const std::filesystem::path p(record.path);
  return p.is_absolute() || base_dir_.empty() ? p : base_dir_ / p;
}

std::vector<std::string> Corpus::ids(Split split) const {
  std::vector<std::string> out;
  for (const auto& r : records_)
    if (r.split == split) out.push_back(r.image_id);
  std::sort(out.begin(), out.end());
  return out;
}

Corpus parse_manifest(std::istream& in, const std::string& source_name,
                      std::filesystem::path base_dir) {
  std::vector<ImageRecord> records;
  std::unordered_map<std::string, std::size_t> first_line;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split(line, '\t');
    if (fields.size() == 4) fields.emplace_back();
    if (fields.size() != 5)
      throw ParseError(source_name, line_no,
                       "expected 5 TAB-separated fields, got " + std::to_string(fields.size()));
    ImageRecord rec;
    rec.image_id = std::string(detail::trim(fields[0]));
    rec.path = std::string(detail::trim(fields[1]));
    if (rec.image_id.empty()) throw ParseError(source_name, line_no, "empty image_id");
    if (rec.path.empty()) throw ParseError(source_name, line_no, "empty path");
    const auto split = parse_split(detail::trim(fields[2]));
    if (!split) throw ParseError(source_name, line_no, "unknown split '" + fields[2] + "'");
    rec.split = *split;
    rec.tags = normalize_labels(detail::split(fields[3], ','));
    auto truth = normalize_labels(detail::split(fields[4], ','));
    if (!truth.empty()) rec.truth_labels = std::move(truth);
    if (auto [it, fresh] = first_line.emplace(rec.image_id, line_no); !fresh)
      throw ParseError(source_name, line_no,
                       "duplicate image_id " + rec.image_id + " (first seen on line " +
                           std::to_string(it->second) + ")");
    records.push_back(std::move(rec));
  }
  return Corpus(std::move(records), std::move(base_dir));
}

Corpus load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  return parse_manifest(in, path.string(), path.parent_path());
}

void write_manifest(const Corpus& corpus, std::ostream& out) {
  for (const auto& r : corpus.records()) {
    out << r.image_id << '\t' << r.path << '\t' << to_string(r.split) << '\t'
        << detail::join(r.tags, ",") << '\t'
        << (r.truth_labels ? detail::join(*r.truth_labels, ",") : std::string()) << '\n';
  }
}

void write_manifest(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write manifest " + path.string());
  write_manifest(corpus, out);
}

std::vector<std::string> candidate_images(const Corpus& corpus, std::string_view label) {
  std::vector<std::string> out;
  for (const auto& r : corpus.records())
    if (r.split == Split::development && r.has_tag(label)) out.push_back(r.image_id);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace labelset
