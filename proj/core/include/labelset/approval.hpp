#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "labelset/clustering.hpp"
#include "labelset/corpus.hpp"
#include "labelset/error.hpp"
#include "labelset/lsh.hpp"
#include "labelset/types.hpp"

namespace labelset {

enum class ItemKind { bin_background, cluster_relevance };
enum class ItemStatus { pending, approved, rejected };
enum class Decider { human, oracle };

std::string_view to_string(ItemKind kind);
std::string_view to_string(ItemStatus status);
std::string_view to_string(Decider decider);
std::optional<ItemKind> parse_item_kind(std::string_view text);
std::optional<ItemStatus> parse_item_status(std::string_view text);
std::optional<Decider> parse_decider(std::string_view text);

/// One review question. For bin_background items "approved" means the
/// reviewer confirmed the bin is background.
struct ApprovalItem {
  std::string item_id;
  ItemKind kind = ItemKind::cluster_relevance;
  std::string label;
  std::string collage_ref;
  std::string subject_ref;  ///< bin key or cluster id
  ItemStatus status = ItemStatus::pending;
  std::optional<std::int64_t> decided_at;  ///< ms since epoch
  std::optional<Decider> decider;
  std::vector<std::string> region_ids;
};

struct DecisionRecord {
  std::string item_id;
  ItemKind kind = ItemKind::cluster_relevance;
  ItemStatus decision = ItemStatus::approved;
  Decider decider = Decider::human;
  std::int64_t timestamp = 0;

  friend bool operator==(const DecisionRecord&, const DecisionRecord&) = default;
};

class UnknownItem : public Error {
 public:
  using Error::Error;
};

class AlreadyDecided : public Error {
 public:
  using Error::Error;
};

/// Everything needed to rebuild a session before any decision is applied.
struct SessionSpec {
  std::string session_id;
  std::string label;
  std::vector<Bin> bins;
  std::vector<Cluster> clusters;
  std::map<std::string, std::string> collage_refs;  ///< subject_ref -> collage file
};

/// Two-phase review queue. Bin items come first; once every bin is decided
/// the cluster items are created for clusters that still have regions
/// outside the bins confirmed as background. State is derived from the
/// append-only decision log.
class Session {
 public:
  explicit Session(SessionSpec spec);

  /// Rebuilds a session by re-applying a persisted log.
  static Session replay(SessionSpec spec, std::span<const DecisionRecord> log);

  const SessionSpec& spec() const noexcept { return spec_; }
  const std::string& session_id() const noexcept { return spec_.session_id; }
  const std::string& label() const noexcept { return spec_.label; }
  const std::vector<ApprovalItem>& items() const noexcept { return items_; }
  const std::vector<DecisionRecord>& decision_log() const noexcept { return log_; }

  const ApprovalItem* find(std::string_view item_id) const;
  const ApprovalItem* next_pending() const;
  std::size_t pending_count() const;
  bool complete() const { return next_pending() == nullptr; }

  /// Decisions recorded so far; this is the "approvals by users" count.
  std::size_t approval_count() const noexcept { return log_.size(); }
  std::size_t approval_count(ItemKind kind) const;

  /// Throws UnknownItem or AlreadyDecided; `decision` must not be pending.
  const ApprovalItem& record_decision(std::string_view item_id, ItemStatus decision, Decider decider,
                                      std::int64_t timestamp);

  /// Approved clusters, restricted to their surviving (non-background) members.
  std::vector<Cluster> approved_clusters() const;
  std::vector<HashKey> background_bins() const;

 private:
  void open_cluster_phase();

  SessionSpec spec_;
  std::vector<ApprovalItem> items_;
  std::vector<DecisionRecord> log_;
  bool cluster_phase_open_ = false;
};

/// Renders the collage for one subject and returns its reference.
using CollageRenderer =
    std::function<std::string(const std::string& subject_ref, std::span<const std::string> region_ids)>;

/// Builds the review session; every bin and cluster collage is rendered up
/// front. Throws when there is nothing to review.
Session start_session(std::string session_id, std::string label, std::vector<Bin> bins,
                      std::vector<Cluster> clusters, const CollageRenderer& render = {});

struct OracleConfig {
  double theta = 0.5;
  std::size_t background_min_labels = 3;
};

/// Ground-truth stand-in for the human reviewer:
///  - cluster approved iff at least theta of its distinct images carry the label;
///  - bin confirmed as background iff its images span at least
///    background_min_labels truth labels and no label reaches theta.
bool oracle_cluster_relevant(std::span<const std::string> image_ids, const Corpus& corpus,
                             std::string_view label, const OracleConfig& config);
bool oracle_bin_background(std::span<const std::string> image_ids, const Corpus& corpus,
                           const OracleConfig& config);

using Clock = std::function<std::int64_t()>;
std::int64_t system_clock_ms();

/// Decides every pending item (including cluster items unlocked by the
/// bin phase) with decider = oracle.
void oracle_approve(Session& session, const Corpus& corpus, const RegionOwners& owners,
                    const OracleConfig& config = {}, const Clock& clock = system_clock_ms);

// Persistence: the spec as JSON, the log as newline-delimited JSON.
std::string decision_to_json(const DecisionRecord& record);
DecisionRecord decision_from_json(std::string_view line);
void write_decision_log(std::span<const DecisionRecord> log, std::ostream& out);
std::vector<DecisionRecord> read_decision_log(std::istream& in, const std::string& source_name);
void append_decision(const DecisionRecord& record, const std::filesystem::path& path);
std::vector<DecisionRecord> read_decision_log(const std::filesystem::path& path);

std::string item_to_json(const ApprovalItem& item);
void save_session_spec(const SessionSpec& spec, const std::filesystem::path& path);
SessionSpec load_session_spec(const std::filesystem::path& path);

}  // namespace labelset
