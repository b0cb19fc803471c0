#include <gtest/gtest.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <sstream>
#include <thread>

#include "labelset/approval_service.hpp"
#include "labelset/raster.hpp"
#include "test_support.hpp"

namespace labelset {
namespace {

using nlohmann::json;

Cluster cluster_of(std::string id, std::string region) {
  return {std::move(id), {std::move(region)}, std::nullopt, {0}, ClusterStage::kmeans_sub};
}

Session demo_session() {
  Bin bin;
  bin.key = {5};
  bin.region_ids = {"a/r00", "b/r00"};
  std::vector<Cluster> clusters{cluster_of("C", "a/r00"), cluster_of("D", "c/r00"), cluster_of("E", "d/r00")};
  return start_session("tiger-session", "tiger", {bin}, clusters, [](const std::string& subject, auto) {
    return subject + ".png";
  });
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    save_png(Raster(4, 4, {1, 2, 3}), dir / "5.png");
    service = std::make_unique<ApprovalService>([this] { return clock++; });
    service->add_session(demo_session(), {dir / "decisions.ndjson", dir.path()});
    port = service->bind_any_port("127.0.0.1");
    ASSERT_GT(port, 0);
    server = std::thread([this] { service->listen_after_bind(); });
    service->wait_until_ready();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
  }
  void TearDown() override {
    service->stop();
    server.join();
  }

  httplib::Result post_decision(const std::string& item, const std::string& body) {
    return client->Post("/sessions/tiger-session/items/" + item + "/decision", body, "application/json");
  }

  testing::TempDir dir;
  std::atomic<std::int64_t> clock{1000};
  std::unique_ptr<ApprovalService> service;
  int port = 0;
  std::thread server;
  std::unique_ptr<httplib::Client> client;
};

TEST_F(ServiceTest, ListsSessions) {
  const auto res = client->Get("/sessions");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const auto body = json::parse(res->body);
  ASSERT_EQ(body.size(), 1u);
  EXPECT_EQ(body[0]["session_id"], "tiger-session");
  EXPECT_EQ(body[0]["label"], "tiger");
  EXPECT_EQ(body[0]["pending_count"], 1);
  EXPECT_EQ(body[0]["total"], 1);
}

TEST_F(ServiceTest, NextServesPendingItemsInOrder) {
  auto res = client->Get("/sessions/tiger-session/next");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  auto item = json::parse(res->body);
  EXPECT_EQ(item["item_id"], "bin-000");
  EXPECT_EQ(item["kind"], "bin_background");
  EXPECT_EQ(item["status"], "pending");

  ASSERT_EQ(post_decision("bin-000", R"({"decision":"approved"})")->status, 200);
  res = client->Get("/sessions/tiger-session/next");
  // Cluster C lost its only region to the background bin.
  EXPECT_EQ(json::parse(res->body)["item_id"], "cluster-D");
  ASSERT_EQ(post_decision("cluster-D", R"({"decision":"approved"})")->status, 200);
  ASSERT_EQ(post_decision("cluster-E", R"({"decision":"rejected"})")->status, 200);
  EXPECT_EQ(client->Get("/sessions/tiger-session/next")->status, 404);
  EXPECT_EQ(client->Get("/sessions/nope/next")->status, 404);
}

TEST_F(ServiceTest, ServesCollagePng) {
  const auto res = client->Get("/sessions/tiger-session/items/bin-000/collage");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Content-Type"), "image/png");
  EXPECT_EQ(res->body, testing::read_file(dir / "5.png"));
  EXPECT_EQ(client->Get("/sessions/tiger-session/items/nope/collage")->status, 404);
}

TEST_F(ServiceTest, DecisionStatusCodes) {
  auto res = post_decision("bin-000", R"({"decision":"rejected","decider":"oracle"})");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const auto item = json::parse(res->body);
  EXPECT_EQ(item["status"], "rejected");
  EXPECT_EQ(item["decider"], "oracle");
  EXPECT_EQ(item["decided_at"], 1000);

  EXPECT_EQ(post_decision("bin-000", R"({"decision":"approved"})")->status, 409);
  EXPECT_EQ(post_decision("cluster-C", R"({"decision":"maybe"})")->status, 400);
  EXPECT_EQ(post_decision("cluster-C", "not json")->status, 400);
  EXPECT_EQ(post_decision("cluster-C", R"({"decision":"pending"})")->status, 400);
  EXPECT_EQ(post_decision("cluster-Z", R"({"decision":"approved"})")->status, 404);
  EXPECT_EQ(client->Post("/sessions/none/items/bin-000/decision", R"({"decision":"approved"})", "application/json")->status,
            404);
}

TEST_F(ServiceTest, ExportMatchesDecisionSequenceAndLogFile) {
  ASSERT_EQ(post_decision("bin-000", R"({"decision":"rejected"})")->status, 200);
  ASSERT_EQ(post_decision("cluster-E", R"({"decision":"approved"})")->status, 200);
  ASSERT_EQ(post_decision("cluster-C", R"({"decision":"rejected"})")->status, 200);

  const auto res = client->Get("/sessions/tiger-session/export");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  std::istringstream lines(res->body);
  const auto exported = read_decision_log(lines, "export");
  ASSERT_EQ(exported.size(), 3u);
  EXPECT_EQ(exported[0].item_id, "bin-000");
  EXPECT_EQ(exported[1].item_id, "cluster-E");
  EXPECT_EQ(exported[2].item_id, "cluster-C");
  EXPECT_EQ(exported[1].decision, ItemStatus::approved);
  EXPECT_EQ(exported[2].timestamp, 1002);
  EXPECT_EQ(read_decision_log(dir / "decisions.ndjson"), exported);
  EXPECT_EQ(service->export_log("tiger-session"), exported);
}

TEST_F(ServiceTest, ConcurrentDecisionsOnOneItemSucceedOnce) {
  std::atomic<int> ok{0}, conflict{0};
  std::vector<std::thread> workers;
  for (int i = 0; i < 8; ++i)
    workers.emplace_back([&] {
      httplib::Client c("127.0.0.1", port);
      const auto r = c.Post("/sessions/tiger-session/items/bin-000/decision", R"({"decision":"rejected"})",
                            "application/json");
      if (r && r->status == 200) ++ok;
      if (r && r->status == 409) ++conflict;
    });
  for (auto& w : workers) w.join();
  EXPECT_EQ(ok, 1);
  EXPECT_EQ(conflict, 7);
  EXPECT_EQ(read_decision_log(dir / "decisions.ndjson").size(), 1u);
}

TEST(ApprovalService, DirectCallsWithoutHttp) {
  ApprovalService service([] { return std::int64_t{7}; });
  service.add_session(demo_session());
  EXPECT_THROW(service.add_session(demo_session()), Error);
  EXPECT_THROW(service.next_item("missing"), UnknownSession);
  const auto item = service.decide("tiger-session", "bin-000", ItemStatus::rejected);
  EXPECT_EQ(item.decided_at, 7);
  EXPECT_THROW(service.decide("tiger-session", "bin-000", ItemStatus::approved), AlreadyDecided);
  EXPECT_EQ(service.list_sessions()[0].total, 4u);
  EXPECT_EQ(service.list_sessions()[0].pending_count, 3u);
}

}  // namespace
}  // namespace labelset
