#include "labelset/approval_service.hpp"

#include <fstream>
#include <iterator>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <sstream>

#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

namespace labelset {

using nlohmann::json;

struct ApprovalService::Impl {
  struct Entry {
    Session session;
    SessionStorage storage;
  };

  explicit Impl(Clock c) : clock(std::move(c)) {}

  Entry& entry(const std::string& id) {
    const auto it = sessions.find(id);
    if (it == sessions.end()) throw UnknownSession("unknown session " + id);
    return it->second;
  }
  const Entry& entry(const std::string& id) const { return const_cast<Impl*>(this)->entry(id); }

  ApprovalItem decide(const std::string& session_id, const std::string& item_id, ItemStatus decision,
                      Decider decider) {
    if (decision == ItemStatus::pending) throw Error("a decision must be approved or rejected");
    std::unique_lock lock(mutex);
    Entry& e = entry(session_id);
    const ApprovalItem* item = e.session.find(item_id);
    if (!item) throw UnknownItem("unknown item " + item_id);
    if (item->status != ItemStatus::pending) throw AlreadyDecided("item " + item_id + " is already decided");
    const DecisionRecord rec{item_id, item->kind, decision, decider, clock()};
    if (!e.storage.log_path.empty()) append_decision(rec, e.storage.log_path);
    return e.session.record_decision(item_id, decision, decider, rec.timestamp);
  }

  void install_routes();

  Clock clock;
  mutable std::shared_mutex mutex;
  std::map<std::string, Entry> sessions;
  httplib::Server server;
};

namespace {

void send_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", message}}.dump(), "application/json");
}

}  // namespace

void ApprovalService::Impl::install_routes() {
  server.Get("/sessions", [this](const httplib::Request&, httplib::Response& res) {
    std::shared_lock lock(mutex);
    json out = json::array();
    for (const auto& [id, e] : sessions)
      out.push_back({{"session_id", id},
                     {"label", e.session.label()},
                     {"pending_count", e.session.pending_count()},
                     {"total", e.session.items().size()}});
    res.set_content(out.dump(), "application/json");
  });

  server.Get(R"(/sessions/([^/]+)/next)", [this](const httplib::Request& req, httplib::Response& res) {
    std::shared_lock lock(mutex);
    const auto it = sessions.find(req.matches[1]);
    if (it == sessions.end()) return send_error(res, 404, "unknown session");
    const ApprovalItem* item = it->second.session.next_pending();
    if (!item) return send_error(res, 404, "no pending item");
    res.set_content(item_to_json(*item), "application/json");
  });

  server.Get(R"(/sessions/([^/]+)/items/([^/]+)/collage)",
             [this](const httplib::Request& req, httplib::Response& res) {
               std::filesystem::path path;
               {
                 std::shared_lock lock(mutex);
                 const auto it = sessions.find(req.matches[1]);
                 if (it == sessions.end()) return send_error(res, 404, "unknown session");
                 const ApprovalItem* item = it->second.session.find(std::string(req.matches[2]));
                 if (!item) return send_error(res, 404, "unknown item");
                 path = item->collage_ref;
                 if (path.is_relative()) path = it->second.storage.collage_dir / path;
               }
               std::ifstream in(path, std::ios::binary);
               if (!in) return send_error(res, 404, "collage not found");
               std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
               res.set_content(std::move(bytes), "image/png");
             });

  server.Post(R"(/sessions/([^/]+)/items/([^/]+)/decision)",
              [this](const httplib::Request& req, httplib::Response& res) {
                std::optional<ItemStatus> decision;
                Decider decider = Decider::human;
                try {
                  const json body = json::parse(req.body);
                  decision = parse_item_status(body.at("decision").get<std::string>());
                  if (body.contains("decider")) {
                    const auto d = parse_decider(body.at("decider").get<std::string>());
                    if (!d) return send_error(res, 400, "decider must be human or oracle");
                    decider = *d;
                  }
                } catch (const std::exception&) {
                  return send_error(res, 400, "body must be {\"decision\": \"approved\"|\"rejected\"}");
                }
                if (!decision || *decision == ItemStatus::pending)
                  return send_error(res, 400, "decision must be approved or rejected");
                const std::string session_id = req.matches[1];
                const std::string item_id = req.matches[2];
                try {
                  res.set_content(item_to_json(decide(session_id, item_id, *decision, decider)), "application/json");
                } catch (const UnknownSession& e) {
                  send_error(res, 404, e.what());
                } catch (const UnknownItem& e) {
                  send_error(res, 404, e.what());
                } catch (const AlreadyDecided&) {
                  std::shared_lock lock(mutex);
                  res.status = 409;
                  res.set_content(item_to_json(*entry(session_id).session.find(item_id)), "application/json");
                }
              });

  server.Get(R"(/sessions/([^/]+)/export)", [this](const httplib::Request& req, httplib::Response& res) {
    std::shared_lock lock(mutex);
    const auto it = sessions.find(req.matches[1]);
    if (it == sessions.end()) return send_error(res, 404, "unknown session");
    std::ostringstream out;
    write_decision_log(it->second.session.decision_log(), out);
    res.set_content(out.str(), "application/x-ndjson");
  });

  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    } catch (...) {
      send_error(res, 500, "internal error");
    }
  });
}

ApprovalService::ApprovalService(Clock clock) : impl_(std::make_unique<Impl>(std::move(clock))) {
  impl_->install_routes();
}

ApprovalService::~ApprovalService() { impl_->server.stop(); }

void ApprovalService::add_session(Session session, SessionStorage storage) {
  std::unique_lock lock(impl_->mutex);
  const std::string id = session.session_id();
  if (!impl_->sessions.try_emplace(id, Impl::Entry{std::move(session), std::move(storage)}).second)
    throw Error("duplicate session id " + id);
}

std::vector<SessionSummary> ApprovalService::list_sessions() const {
  std::shared_lock lock(impl_->mutex);
  std::vector<SessionSummary> out;
  for (const auto& [id, e] : impl_->sessions)
    out.push_back({id, e.session.label(), e.session.pending_count(), e.session.items().size()});
  return out;
}

std::optional<ApprovalItem> ApprovalService::next_item(const std::string& session_id) const {
  std::shared_lock lock(impl_->mutex);
  const ApprovalItem* item = impl_->entry(session_id).session.next_pending();
  if (!item) return std::nullopt;
  return *item;
}

ApprovalItem ApprovalService::decide(const std::string& session_id, const std::string& item_id,
                                     ItemStatus decision, Decider decider) {
  return impl_->decide(session_id, item_id, decision, decider);
}

std::vector<DecisionRecord> ApprovalService::export_log(const std::string& session_id) const {
  std::shared_lock lock(impl_->mutex);
  return impl_->entry(session_id).session.decision_log();
}

std::filesystem::path ApprovalService::collage_path(const std::string& session_id,
                                                    const std::string& item_id) const {
  std::shared_lock lock(impl_->mutex);
  const auto& e = impl_->entry(session_id);
  const ApprovalItem* item = e.session.find(item_id);
  if (!item) throw UnknownItem("unknown item " + item_id);
  std::filesystem::path path = item->collage_ref;
  return path.is_relative() ? e.storage.collage_dir / path : path;
}

bool ApprovalService::listen(const std::string& host, int port) {
  spdlog::info("approval service listening on {}:{}", host, port);
  return impl_->server.listen(host, port);
}

int ApprovalService::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool ApprovalService::listen_after_bind() { return impl_->server.listen_after_bind(); }

void ApprovalService::wait_until_ready() const { impl_->server.wait_until_ready(); }

void ApprovalService::stop() { impl_->server.stop(); }

}  // namespace labelset
