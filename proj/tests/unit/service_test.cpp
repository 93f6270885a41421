#include <gtest/gtest.h>
#include <httplib.h>

#include <thread>

#include "ganeye/image.hpp"
#include "ganeye/label_store.hpp"
#include "ganeye/service.hpp"
#include "support/helpers.hpp"

using namespace ganeye;
using testing_support::TempDir;

namespace {

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::filesystem::create_directories(dir_ / "images");
    std::filesystem::create_directories(dir_ / "ui");
    write_png(dir_ / "images" / "acc1.png", RgbImage(4, 4, {1, 2, 3}));
    testing_support::spit(dir_ / "images" / "acc2.jpg", "\xff\xd8\xff\xe0 not really");
    testing_support::spit(dir_ / "ui" / "index.html", "<html>ui</html>");
    store_ = std::make_unique<LabelStore>(std::vector<Candidate>{{"acc1", 0.004}, {"acc2", 0.001}, {"gone", 0.01}},
                                          dir_ / "labels.jsonl");
    service_ = std::make_unique<AnnotationService>(*store_, ServiceOptions{dir_ / "images", dir_ / "ui", 10});
    port_ = service_->bind("127.0.0.1", 0);
    thread_ = std::thread([this] { service_->listen(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    for (int i = 0; i < 100 && !service_->running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }

  void TearDown() override {
    service_->stop();
    thread_.join();
  }

  httplib::Result post_label(const nlohmann::json& body) {
    return client_->Post("/api/labels", body.dump(), "application/json");
  }

  TempDir dir_;
  std::unique_ptr<LabelStore> store_;
  std::unique_ptr<AnnotationService> service_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace

TEST_F(ServiceTest, Health) {
  auto r = client_->Get("/api/health");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(nlohmann::json::parse(r->body)["status"], "ok");
}

TEST_F(ServiceTest, QueueAscendingAndPerAnnotator) {
  auto r = client_->Get("/api/queue?annotator=ann1&k=2");
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200);
  const auto j = nlohmann::json::parse(r->body);
  ASSERT_EQ(j["candidates"].size(), 2u);
  EXPECT_EQ(j["candidates"][0]["image_id"], "acc2");
  EXPECT_EQ(j["candidates"][0]["image_url"], "/api/image/acc2");
  EXPECT_EQ(client_->Get("/api/queue")->status, 400);
  EXPECT_EQ(client_->Get("/api/queue?annotator=a&k=-1")->status, 400);
  EXPECT_EQ(client_->Get("/api/queue?annotator=a&k=x")->status, 400);
}

TEST_F(ServiceTest, LabelsAreStoredAndValidated) {
  auto ok = post_label({{"annotator", "ann1"}, {"image_id", "acc2"}, {"category", 1}});
  ASSERT_TRUE(ok);
  EXPECT_EQ(ok->status, 200);
  EXPECT_EQ(nlohmann::json::parse(ok->body)["revision"], 1);
  EXPECT_EQ(post_label({{"annotator", "ann1"}, {"image_id", "acc2"}, {"category", 4}})->status, 400);
  EXPECT_EQ(post_label({{"annotator", "ann1"}, {"image_id", "acc2"}, {"category", "1"}})->status, 400);
  EXPECT_EQ(post_label({{"annotator", "ann1"}, {"category", 1}})->status, 400);
  EXPECT_EQ(post_label({{"annotator", "ann1"}, {"image_id", "zzz"}, {"category", 1}})->status, 404);
  EXPECT_EQ(client_->Post("/api/labels", "{oops", "application/json")->status, 400);
  EXPECT_EQ(store_->revision(), 1u);
  const auto q = nlohmann::json::parse(client_->Get("/api/queue?annotator=ann1")->body);
  EXPECT_EQ(q["candidates"][0]["image_id"], "acc1");
}

TEST_F(ServiceTest, StatsMirrorStore) {
  post_label({{"annotator", "a"}, {"image_id", "acc1"}, {"category", 1}});
  post_label({{"annotator", "b"}, {"image_id", "acc1"}, {"category", 2}});
  auto r = client_->Get("/api/stats");
  ASSERT_TRUE(r);
  EXPECT_EQ(nlohmann::json::parse(r->body), to_json(store_->stats()));
  const auto j = nlohmann::json::parse(r->body);
  EXPECT_EQ(j["consensus"]["loose"], 1);
  EXPECT_EQ(j["consensus"]["strict"], 0);
}

TEST_F(ServiceTest, ImagesServedWithMediaType) {
  auto png = client_->Get("/api/image/acc1");
  ASSERT_TRUE(png);
  EXPECT_EQ(png->status, 200);
  EXPECT_EQ(png->get_header_value("Content-Type"), "image/png");
  EXPECT_EQ(png->body, testing_support::slurp(dir_ / "images" / "acc1.png"));
  EXPECT_EQ(client_->Get("/api/image/acc2")->get_header_value("Content-Type"), "image/jpeg");
  EXPECT_EQ(client_->Get("/api/image/gone")->status, 404);     // candidate without a file
  EXPECT_EQ(client_->Get("/api/image/unknown")->status, 404);  // not a candidate
}

TEST_F(ServiceTest, ServesUiAssets) {
  auto r = client_->Get("/index.html");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(r->body, "<html>ui</html>");
}

TEST(UrlEncode, EscapesReserved) {
  EXPECT_EQ(url_encode_component("a b/c?d"), "a%20b%2Fc%3Fd");
  EXPECT_EQ(url_encode_component("plain-id_1.x~"), "plain-id_1.x~");
}
