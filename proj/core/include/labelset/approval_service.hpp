#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "labelset/approval.hpp"

namespace labelset {

struct SessionSummary {
  std::string session_id;
  std::string label;
  std::size_t pending_count = 0;
  std::size_t total = 0;
};

/// Where a served session keeps its artifacts. An empty log path keeps
/// decisions in memory only; relative collage refs resolve against
/// collage_dir.
struct SessionStorage {
  std::filesystem::path log_path;
  std::filesystem::path collage_dir;
};

/// Thread-safe session store behind the review HTTP API. Readers run
/// concurrently; decisions are serialized and appended to the log before
/// they become visible.
class ApprovalService {
 public:
  explicit ApprovalService(Clock clock = system_clock_ms);
  ~ApprovalService();
  ApprovalService(const ApprovalService&) = delete;
  ApprovalService& operator=(const ApprovalService&) = delete;

  void add_session(Session session, SessionStorage storage = {});

  std::vector<SessionSummary> list_sessions() const;
  std::optional<ApprovalItem> next_item(const std::string& session_id) const;
  ApprovalItem decide(const std::string& session_id, const std::string& item_id, ItemStatus decision,
                      Decider decider = Decider::human);
  std::vector<DecisionRecord> export_log(const std::string& session_id) const;
  std::filesystem::path collage_path(const std::string& session_id, const std::string& item_id) const;

  /// Binds and serves until stop(); returns false if the bind fails.
  bool listen(const std::string& host, int port);
  /// Binds to an ephemeral port and returns it, or -1. Serve with listen_after_bind().
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class UnknownSession : public Error {
 public:
  using Error::Error;
};

}  // namespace labelset
