#include "labelset/approval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "text_util.hpp"

namespace labelset {

using nlohmann::json;

std::string_view to_string(ItemKind kind) {
  return kind == ItemKind::bin_background ? "bin_background" : "cluster_relevance";
}

std::string_view to_string(ItemStatus status) {
  switch (status) {
    case ItemStatus::pending: return "pending";
    case ItemStatus::approved: return "approved";
    case ItemStatus::rejected: return "rejected";
  }
  return "pending";
}

std::string_view to_string(Decider decider) { return decider == Decider::human ? "human" : "oracle"; }

std::optional<ItemKind> parse_item_kind(std::string_view text) {
  if (text == "bin_background") return ItemKind::bin_background;
  if (text == "cluster_relevance") return ItemKind::cluster_relevance;
  return std::nullopt;
}

std::optional<ItemStatus> parse_item_status(std::string_view text) {
  if (text == "pending") return ItemStatus::pending;
  if (text == "approved") return ItemStatus::approved;
  if (text == "rejected") return ItemStatus::rejected;
  return std::nullopt;
}

std::optional<Decider> parse_decider(std::string_view text) {
  if (text == "human") return Decider::human;
  if (text == "oracle") return Decider::oracle;
  return std::nullopt;
}

Session::Session(SessionSpec spec) : spec_(std::move(spec)) {
  for (std::size_t i = 0; i < spec_.bins.size(); ++i) {
    const Bin& bin = spec_.bins[i];
    ApprovalItem item;
    char id[32];
    std::snprintf(id, sizeof id, "bin-%03zu", i);
    item.item_id = id;
    item.kind = ItemKind::bin_background;
    item.label = spec_.label;
    item.subject_ref = format_key(bin.key);
    if (auto it = spec_.collage_refs.find(item.subject_ref); it != spec_.collage_refs.end())
      item.collage_ref = it->second;
    item.region_ids = bin.region_ids;
    items_.push_back(std::move(item));
  }
  if (spec_.bins.empty()) open_cluster_phase();
}

void Session::open_cluster_phase() {
  cluster_phase_open_ = true;
  std::unordered_set<std::string> background;
  for (const auto& item : items_)
    if (item.kind == ItemKind::bin_background && item.status == ItemStatus::approved)
      background.insert(item.region_ids.begin(), item.region_ids.end());
  for (const auto& cluster : spec_.clusters) {
    std::vector<std::string> surviving;
    for (const auto& r : cluster.member_region_ids)
      if (!background.contains(r)) surviving.push_back(r);
    if (surviving.empty()) continue;
    ApprovalItem item;
    item.item_id = "cluster-" + cluster.cluster_id;
    item.kind = ItemKind::cluster_relevance;
    item.label = spec_.label;
    item.subject_ref = cluster.cluster_id;
    if (auto it = spec_.collage_refs.find(item.subject_ref); it != spec_.collage_refs.end())
      item.collage_ref = it->second;
    item.region_ids = std::move(surviving);
    items_.push_back(std::move(item));
  }
}

Session Session::replay(SessionSpec spec, std::span<const DecisionRecord> log) {
  Session session(std::move(spec));
  for (const auto& rec : log) {
    const auto* item = session.find(rec.item_id);
    if (item && item->kind != rec.kind)
      throw Error("decision log kind mismatch for item " + rec.item_id);
    session.record_decision(rec.item_id, rec.decision, rec.decider, rec.timestamp);
  }
  return session;
}

const ApprovalItem* Session::find(std::string_view item_id) const {
  for (const auto& item : items_)
    if (item.item_id == item_id) return &item;
  return nullptr;
}

const ApprovalItem* Session::next_pending() const {
  for (const auto& item : items_)
    if (item.status == ItemStatus::pending) return &item;
  return nullptr;
}

std::size_t Session::pending_count() const {
  return static_cast<std::size_t>(std::count_if(items_.begin(), items_.end(),
                                                [](const ApprovalItem& i) { return i.status == ItemStatus::pending; }));
}

std::size_t Session::approval_count(ItemKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(log_.begin(), log_.end(), [kind](const DecisionRecord& r) { return r.kind == kind; }));
}

const ApprovalItem& Session::record_decision(std::string_view item_id, ItemStatus decision, Decider decider,
                                             std::int64_t timestamp) {
  if (decision == ItemStatus::pending) throw Error("a decision must be approved or rejected");
  auto it = std::find_if(items_.begin(), items_.end(), [&](const ApprovalItem& i) { return i.item_id == item_id; });
  if (it == items_.end()) throw UnknownItem("unknown item " + std::string(item_id));
  if (it->status != ItemStatus::pending) throw AlreadyDecided("item " + std::string(item_id) + " is already decided");
  it->status = decision;
  it->decided_at = timestamp;
  it->decider = decider;
  log_.push_back({it->item_id, it->kind, decision, decider, timestamp});
  const std::size_t index = static_cast<std::size_t>(it - items_.begin());

  if (!cluster_phase_open_) {
    const bool bins_done = std::none_of(items_.begin(), items_.end(), [](const ApprovalItem& i) {
      return i.kind == ItemKind::bin_background && i.status == ItemStatus::pending;
    });
    if (bins_done) open_cluster_phase();
  }
  return items_[index];
}

std::vector<Cluster> Session::approved_clusters() const {
  std::map<std::string, const Cluster*> by_id;
  for (const auto& c : spec_.clusters) by_id.emplace(c.cluster_id, &c);
  std::vector<Cluster> out;
  for (const auto& item : items_) {
    if (item.kind != ItemKind::cluster_relevance || item.status != ItemStatus::approved) continue;
    Cluster c = *by_id.at(item.subject_ref);
    c.member_region_ids = item.region_ids;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<HashKey> Session::background_bins() const {
  std::vector<HashKey> out;
  for (const auto& item : items_)
    if (item.kind == ItemKind::bin_background && item.status == ItemStatus::approved)
      out.push_back(parse_key(item.subject_ref));
  return out;
}

Session start_session(std::string session_id, std::string label, std::vector<Bin> bins,
                      std::vector<Cluster> clusters, const CollageRenderer& render) {
  if (bins.empty() && clusters.empty()) throw Error("nothing to review");
  SessionSpec spec{std::move(session_id), std::move(label), std::move(bins), std::move(clusters), {}};
  if (render) {
    for (const auto& b : spec.bins) {
      const auto subject = format_key(b.key);
      spec.collage_refs[subject] = render(subject, b.region_ids);
    }
    for (const auto& c : spec.clusters) spec.collage_refs[c.cluster_id] = render(c.cluster_id, c.member_region_ids);
  }
  return Session(std::move(spec));
}

namespace {

std::vector<std::string> distinct_images(std::span<const std::string> region_ids, const RegionOwners& owners) {
  std::set<std::string> images;
  for (const auto& r : region_ids) {
    const auto it = owners.find(r);
    if (it == owners.end()) throw Error("unknown region " + r);
    images.insert(it->second);
  }
  return {images.begin(), images.end()};
}

const std::vector<std::string>& truth_of(const Corpus& corpus, const std::string& image_id) {
  const auto& rec = corpus.at(image_id);
  if (!rec.truth_labels) throw Error("missing truth_labels for image " + image_id);
  return *rec.truth_labels;
}

}  // namespace

bool oracle_cluster_relevant(std::span<const std::string> image_ids, const Corpus& corpus, std::string_view label,
                             const OracleConfig& config) {
  if (image_ids.empty()) return false;
  std::size_t hits = 0;
  for (const auto& id : image_ids) {
    const auto& truth = truth_of(corpus, id);
    if (std::binary_search(truth.begin(), truth.end(), label)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(image_ids.size()) >= config.theta;
}

bool oracle_bin_background(std::span<const std::string> image_ids, const Corpus& corpus,
                           const OracleConfig& config) {
  if (image_ids.empty()) return false;
  std::map<std::string, std::size_t> counts;
  for (const auto& id : image_ids)
    for (const auto& l : truth_of(corpus, id)) ++counts[l];
  if (counts.size() < config.background_min_labels) return false;
  const double n = static_cast<double>(image_ids.size());
  return std::all_of(counts.begin(), counts.end(),
                     [&](const auto& kv) { return static_cast<double>(kv.second) / n < config.theta; });
}

std::int64_t system_clock_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

void oracle_approve(Session& session, const Corpus& corpus, const RegionOwners& owners, const OracleConfig& config,
                    const Clock& clock) {
  while (const ApprovalItem* item = session.next_pending()) {
    const auto images = distinct_images(item->region_ids, owners);
    const bool yes = item->kind == ItemKind::bin_background
                         ? oracle_bin_background(images, corpus, config)
                         : oracle_cluster_relevant(images, corpus, session.label(), config);
    const std::string id = item->item_id;
    session.record_decision(id, yes ? ItemStatus::approved : ItemStatus::rejected, Decider::oracle, clock());
  }
}

std::string decision_to_json(const DecisionRecord& record) {
  json j;
  j["item_id"] = record.item_id;
  j["kind"] = to_string(record.kind);
  j["decision"] = to_string(record.decision);
  j["decider"] = to_string(record.decider);
  j["timestamp"] = record.timestamp;
  return j.dump();
}

DecisionRecord decision_from_json(std::string_view line) {
  const json j = json::parse(line);
  DecisionRecord r;
  r.item_id = j.at("item_id").get<std::string>();
  const auto kind = parse_item_kind(j.at("kind").get<std::string>());
  const auto decision = parse_item_status(j.at("decision").get<std::string>());
  const auto decider = parse_decider(j.at("decider").get<std::string>());
  if (!kind || !decision || *decision == ItemStatus::pending || !decider)
    throw Error("malformed decision record");
  r.kind = *kind;
  r.decision = *decision;
  r.decider = *decider;
  r.timestamp = j.at("timestamp").get<std::int64_t>();
  return r;
}

void write_decision_log(std::span<const DecisionRecord> log, std::ostream& out) {
  for (const auto& r : log) out << decision_to_json(r) << '\n';
}

std::vector<DecisionRecord> read_decision_log(std::istream& in, const std::string& source_name) {
  std::vector<DecisionRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    try {
      out.push_back(decision_from_json(line));
    } catch (const std::exception& e) {
      throw ParseError(source_name, line_no, e.what());
    }
  }
  return out;
}

std::vector<DecisionRecord> read_decision_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return {};
  return read_decision_log(in, path.string());
}

void append_decision(const DecisionRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot append to decision log " + path.string());
  out << decision_to_json(record) << '\n';
  out.flush();
  if (!out) throw Error("write failed: " + path.string());
}

std::string item_to_json(const ApprovalItem& item) {
  json j;
  j["item_id"] = item.item_id;
  j["kind"] = to_string(item.kind);
  j["label"] = item.label;
  j["collage_ref"] = item.collage_ref;
  j["subject_ref"] = item.subject_ref;
  j["status"] = to_string(item.status);
  j["decided_at"] = item.decided_at ? json(*item.decided_at) : json(nullptr);
  j["decider"] = item.decider ? json(std::string(to_string(*item.decider))) : json(nullptr);
  j["region_count"] = item.region_ids.size();
  return j.dump();
}

void save_session_spec(const SessionSpec& spec, const std::filesystem::path& path) {
  json j;
  j["session_id"] = spec.session_id;
  j["label"] = spec.label;
  j["bins"] = json::array();
  for (const auto& b : spec.bins)
    j["bins"].push_back({{"key", b.key}, {"variance", b.variance}, {"region_ids", b.region_ids}});
  j["clusters"] = json::array();
  for (const auto& c : spec.clusters) {
    json jc{{"cluster_id", c.cluster_id},
            {"parent_bin_key", c.parent_bin_key},
            {"stage", std::string(to_string(c.stage))},
            {"member_region_ids", c.member_region_ids}};
    jc["exemplar_region_id"] = c.exemplar_region_id ? json(*c.exemplar_region_id) : json(nullptr);
    j["clusters"].push_back(std::move(jc));
  }
  j["collage_refs"] = spec.collage_refs;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write session " + path.string());
  out << j.dump(1) << '\n';
}

SessionSpec load_session_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open session " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const std::exception& e) {
    throw Error("malformed session file " + path.string() + ": " + e.what());
  }
  SessionSpec spec;
  spec.session_id = j.at("session_id").get<std::string>();
  spec.label = j.at("label").get<std::string>();
  for (const auto& jb : j.at("bins")) {
    Bin b;
    b.key = jb.at("key").get<HashKey>();
    b.variance = jb.at("variance").get<double>();
    b.region_ids = jb.at("region_ids").get<std::vector<std::string>>();
    spec.bins.push_back(std::move(b));
  }
  for (const auto& jc : j.at("clusters")) {
    Cluster c;
    c.cluster_id = jc.at("cluster_id").get<std::string>();
    c.parent_bin_key = jc.at("parent_bin_key").get<HashKey>();
    c.stage = jc.at("stage").get<std::string>() == "ap" ? ClusterStage::ap : ClusterStage::kmeans_sub;
    if (!jc.at("exemplar_region_id").is_null()) c.exemplar_region_id = jc.at("exemplar_region_id").get<std::string>();
    c.member_region_ids = jc.at("member_region_ids").get<std::vector<std::string>>();
    spec.clusters.push_back(std::move(c));
  }
  spec.collage_refs = j.at("collage_refs").get<std::map<std::string, std::string>>();
  return spec;
}

}  // namespace labelset
