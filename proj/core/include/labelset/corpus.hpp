#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace labelset {

enum class Split { development, testing };

std::string_view to_string(Split split);
std::optional<Split> parse_split(std::string_view text);

/// One corpus image. Tags and truth labels are kept lowercase, trimmed,
/// sorted and unique. truth_labels is ground truth for the oracle and the
/// evaluator only; construction never reads it.
struct ImageRecord {
  std::string image_id;
  std::string path;
  std::vector<std::string> tags;
  Split split = Split::development;
  std::optional<std::vector<std::string>> truth_labels;

  bool has_tag(std::string_view label) const;
  bool has_truth(std::string_view label) const;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

/// Lowercases, trims, sorts and deduplicates; empty entries are dropped.
std::vector<std::string> normalize_labels(std::vector<std::string> labels);

/// Immutable after construction.
class Corpus {
 public:
  Corpus() = default;
  /// Throws Error on duplicate image ids.
  explicit Corpus(std::vector<ImageRecord> records, std::filesystem::path base_dir = {});

  const std::vector<ImageRecord>& records() const noexcept { return records_; }
  /// Sorted union of every tag and truth label in the corpus.
  const std::vector<std::string>& label_vocabulary() const noexcept { return vocabulary_; }
  const std::filesystem::path& base_dir() const noexcept { return base_dir_; }

  std::size_t size() const noexcept { return records_.size(); }
  const ImageRecord* find(std::string_view image_id) const;
  const ImageRecord& at(std::string_view image_id) const;

  /// Image path resolved against the manifest directory.
  std::filesystem::path resolve_path(const ImageRecord& record) const;

  std::vector<std::string> ids(Split split) const;

 private:
  std::vector<ImageRecord> records_;
  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, std::size_t> index_;
  std::filesystem::path base_dir_;
};

/// Manifest: one TAB-separated record per line,
/// `image_id  relative_path  split  tag1,tag2,...  truth1,truth2,...`.
/// Image files are not opened.
Corpus parse_manifest(std::istream& in, const std::string& source_name,
                      std::filesystem::path base_dir = {});
Corpus load_manifest(const std::filesystem::path& path);
void write_manifest(const Corpus& corpus, std::ostream& out);
void write_manifest(const Corpus& corpus, const std::filesystem::path& path);

/// Development images tagged with `label`, ordered by image id.
std::vector<std::string> candidate_images(const Corpus& corpus, std::string_view label);

}  // namespace labelset
