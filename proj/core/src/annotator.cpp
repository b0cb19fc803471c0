#include "labelset/annotator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include <spdlog/spdlog.h>

#include "labelset/error.hpp"
#include "text_util.hpp"

namespace labelset {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

const FeatureVector& feature_of(const FeatureMap& features, const std::string& id) {
  const auto it = features.find(id);
  if (it == features.end()) throw Error("no global feature for image " + id);
  return it->second;
}

std::optional<double> mean_of(const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values)
    if (v) {
      sum += *v;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::set<std::string> relevant_test_images(const Corpus& corpus, std::string_view label) {
  std::set<std::string> out;
  for (const auto& rec : corpus.records()) {
    if (rec.split != Split::testing) continue;
    if (!rec.truth_labels) throw Error("missing truth_labels for test image " + rec.image_id);
    if (rec.has_truth(label)) out.insert(rec.image_id);
  }
  return out;
}

std::optional<double> arm_ap(const TrainingSet& set, const Corpus& corpus, const FeatureMap& features,
                             const AnnotatorConfig& config) {
  const auto relevant = relevant_test_images(corpus, set.label);
  if (relevant.empty()) return std::nullopt;
  return average_precision(score_label(set, corpus, features, config), relevant);
}

std::size_t negative_count(std::size_t n_pos, double ratio) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(n_pos) * ratio));
}

std::string cell(const std::optional<double>& v) { return v ? detail::format_fixed(*v, 6) : "NA"; }

}  // namespace

double knn_score(std::span<const double> test_feature, const TrainingSet& training_set,
                 const FeatureMap& global_features, const AnnotatorConfig& config) {
  if (config.k < 1) throw Error("k must be at least 1");
  struct Neighbor {
    double distance;
    const std::string* id;
    bool positive;
  };
  std::vector<Neighbor> all;
  all.reserve(training_set.positive_ids.size() + training_set.negative_ids.size());
  for (const auto& id : training_set.positive_ids)
    all.push_back({squared_distance(test_feature, feature_of(global_features, id)), &id, true});
  for (const auto& id : training_set.negative_ids)
    all.push_back({squared_distance(test_feature, feature_of(global_features, id)), &id, false});
  if (all.empty()) throw Error("empty training set for label " + training_set.label);

  const std::size_t k = std::min(config.k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(),
                    [](const Neighbor& a, const Neighbor& b) {
                      if (a.distance != b.distance) return a.distance < b.distance;
                      return *a.id < *b.id;
                    });
  const auto hits = std::count_if(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k),
                                  [](const Neighbor& n) { return n.positive; });
  return static_cast<double>(hits) / static_cast<double>(k);
}

double average_precision(RankedScores scores, const std::set<std::string>& relevant) {
  std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t r = 0; r < scores.size(); ++r) {
    if (!relevant.contains(scores[r].first)) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
}

RankedScores score_label(const TrainingSet& training_set, const Corpus& corpus, const FeatureMap& global_features,
                         const AnnotatorConfig& config) {
  const bool empty = training_set.positive_ids.empty() && training_set.negative_ids.empty();
  RankedScores out;
  for (const auto& rec : corpus.records()) {
    if (rec.split != Split::testing) continue;
    const double s =
        empty ? 0.0 : knn_score(feature_of(global_features, rec.image_id), training_set, global_features, config);
    out.emplace_back(rec.image_id, s);
  }
  return out;
}

EvaluationResult evaluate_run(const ScoreTable& scores, const Corpus& corpus) {
  EvaluationResult result;
  std::vector<std::optional<double>> values;
  for (const auto& [label, ranked] : scores) {
    const auto relevant = relevant_test_images(corpus, label);
    std::optional<double> ap;
    if (relevant.empty())
      spdlog::warn("label '{}' has no relevant test images; excluded from MAP", label);
    else
      ap = average_precision(ranked, relevant);
    result.ap[label] = ap;
    values.push_back(ap);
  }
  result.map = mean_of(values);
  return result;
}

void write_score_table(const ScoreTable& scores, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& [label, ranked] : scores)
    for (const auto& [id, score] : ranked) out << label << '\t' << id << '\t' << detail::format_double(score) << '\n';
}

ScoreTable read_score_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  ScoreTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split(line, '\t');
    const auto score = fields.size() == 3 ? detail::parse_number<double>(fields[2]) : std::nullopt;
    if (!score) throw ParseError(path.string(), line_no, "expected label, image_id, score");
    table[fields[0]].emplace_back(fields[1], *score);
  }
  return table;
}

void write_evaluation(const EvaluationResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "label\tap\n";
  for (const auto& [label, ap] : result.ap) out << label << '\t' << cell(ap) << '\n';
  out << "MAP\t" << cell(result.map) << '\n';
}

std::optional<double> run_baseline(std::string_view label, std::span<const std::string> candidates,
                                   std::size_t n_pos, const Corpus& corpus, const FeatureMap& global_features,
                                   const ProtocolConfig& config) {
  if (n_pos > candidates.size()) {
    spdlog::warn("label '{}': n_pos {} exceeds {} candidates; capped", label, n_pos, candidates.size());
    n_pos = candidates.size();
  }
  std::vector<std::optional<double>> aps;
  for (const auto seed : config.seeds) {
    TrainingSet set;
    set.label = std::string(label);
    set.positive_ids = sample_ids(candidates, n_pos, detail::derive_seed(seed, "baseline-positives"));
    set.negative_ids = sample_negatives(corpus, set.positive_ids, label, negative_count(n_pos, config.negative_ratio),
                                        detail::derive_seed(seed, "negatives"), config.exclude_candidates);
    aps.push_back(arm_ap(set, corpus, global_features, config.annotator));
  }
  return mean_of(aps);
}

std::optional<double> run_constructed(std::string_view label, std::span<const std::string> positives,
                                      const Corpus& corpus, const FeatureMap& global_features,
                                      const ProtocolConfig& config) {
  std::vector<std::optional<double>> aps;
  for (const auto seed : config.seeds) {
    TrainingSet set;
    set.label = std::string(label);
    set.positive_ids.assign(positives.begin(), positives.end());
    set.negative_ids =
        sample_negatives(corpus, positives, label, negative_count(positives.size(), config.negative_ratio),
                         detail::derive_seed(seed, "negatives"), config.exclude_candidates);
    aps.push_back(arm_ap(set, corpus, global_features, config.annotator));
  }
  return mean_of(aps);
}

LabelComparison compare_label(const TrainingSet& constructed, const Corpus& corpus,
                              const FeatureMap& global_features, const ProtocolConfig& config) {
  const auto candidates = candidate_images(corpus, constructed.label);
  LabelComparison row;
  row.label = constructed.label;
  row.n_pos = constructed.positive_ids.size();
  row.approvals = constructed.provenance.approvals_used;
  const auto metrics = construction_metrics(constructed, candidates, corpus);
  row.construction_rate = metrics.construction_rate;
  row.precision_after = metrics.label_precision;
  row.precision_before = label_precision(candidates, corpus, constructed.label);
  row.ap_constructed = run_constructed(constructed.label, constructed.positive_ids, corpus, global_features, config);
  row.ap_baseline = run_baseline(constructed.label, candidates, row.n_pos, corpus, global_features, config);
  return row;
}

Report build_report(std::vector<LabelComparison> rows, std::vector<std::pair<std::string, std::string>> header) {
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
  Report report;
  report.header = std::move(header);
  std::vector<std::optional<double>> constructed;
  std::vector<std::optional<double>> baseline;
  for (const auto& r : rows) {
    // Only labels scored in both arms enter the MAP pair.
    if (!r.ap_constructed || !r.ap_baseline) continue;
    constructed.push_back(r.ap_constructed);
    baseline.push_back(r.ap_baseline);
  }
  report.map_constructed = mean_of(constructed);
  report.map_baseline = mean_of(baseline);
  report.rows = std::move(rows);
  return report;
}

void write_report(const Report& report, std::ostream& out) {
  for (const auto& [key, value] : report.header) out << "# " << key << '=' << value << '\n';
  out << "label\tap_constructed\tap_baseline\tn_pos\tapprovals\tconstruction_rate\tprecision_before\t"
         "precision_after\n";
  for (const auto& r : report.rows) {
    out << r.label << '\t' << cell(r.ap_constructed) << '\t' << cell(r.ap_baseline) << '\t' << r.n_pos << '\t'
        << r.approvals << '\t' << cell(r.construction_rate) << '\t' << cell(r.precision_before) << '\t'
        << cell(r.precision_after) << '\n';
  }
  out << "MAP\t" << cell(report.map_constructed) << '\t' << cell(report.map_baseline) << '\n';
}

void write_report(const Report& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  write_report(report, out);
}

}  // namespace labelset
