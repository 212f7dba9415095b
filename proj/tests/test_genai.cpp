#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "archiprompt/genai.hpp"
#include "support.hpp"

using namespace archiprompt;
using namespace archiprompt::genai;

namespace {

GenRequest text_request(std::string input = "describe a villa") {
  GenRequest r;
  r.kind = Kind::text;
  r.system_instruction = "You are an architect.";
  r.user_content = std::move(input);
  return r;
}

// Local provider stub; each test installs its own handler.
class RemoteProvider : public ::testing::Test {
 protected:
  void SetUp() override {
    ::setenv("ARCHIPROMPT_TEST_KEY", "secret", 1);
    server_.Post("/v1/generate", [this](const httplib::Request& req, httplib::Response& res) {
      ++calls_;
      last_auth_ = req.get_header_value("Authorization");
      last_body_ = req.body;
      handler_(req, res);
    });
    server_.Get("/img/x.png", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("PNGDATA", "image/png");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  RemoteConfig config(int timeout_ms = 2000) const {
    RemoteConfig c;
    c.provider_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1/generate";
    c.model_id = "test-model";
    c.credential_env = "ARCHIPROMPT_TEST_KEY";
    c.timeout_ms = timeout_ms;
    return c;
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> calls_{0};
  std::string last_auth_, last_body_;
  std::function<void(const httplib::Request&, httplib::Response&)> handler_;
};

}  // namespace

TEST(Hash, Sha256KnownVectors) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(MockClient, TextIsDeterministic) {
  MockClient a, b;
  auto r1 = a.generate_text(text_request());
  auto r2 = b.generate_text(text_request());
  EXPECT_EQ(r1.content, r2.content);
  EXPECT_EQ(r1.provider, genai::Provider::mock);
  EXPECT_NE(r1.content, a.generate_text(text_request("describe a tower")).content);

  auto shifted = text_request();
  shifted.system_instruction = "You are an architect";
  shifted.user_content = ".describe a villa";
  EXPECT_NE(a.generate_text(shifted).content, r1.content);
}

TEST(MockClient, ImageIdsAreStableAndDistinct) {
  MockClient m;
  GenRequest p;
  p.kind = Kind::image;
  p.user_content = "A tropical villa";
  auto id = m.generate_image(p).content;
  EXPECT_EQ(id, MockClient::image_id_for("A tropical villa"));
  EXPECT_EQ(id.rfind("mock-", 0), 0u);
  EXPECT_EQ(id.size(), 5u + 16u);
  EXPECT_EQ(id, "mock-" + sha256_hex("A tropical villa").substr(0, 16));
  p.user_content = "A coastal cliff";
  EXPECT_NE(m.generate_image(p).content, id);
}

TEST(MockClient, PlaceholderOnlyWhenAsked) {
  test::TempDir dir;
  GenRequest p;
  p.kind = Kind::image;
  p.user_content = "A villa";
  p.artifact_dir = dir.path();
  EXPECT_FALSE(MockClient(false).generate_image(p).local_path);
  EXPECT_TRUE(std::filesystem::is_empty(dir.path()));
  auto r = MockClient(true).generate_image(p);
  ASSERT_TRUE(r.local_path);
  EXPECT_TRUE(std::filesystem::exists(*r.local_path));
}

TEST(MockClient, RejectsInvalidRequests) {
  MockClient m;
  EXPECT_THROW(m.generate_text(text_request("")), InvalidRequest);
  auto r = text_request();
  r.timeout_ms = 0;
  EXPECT_THROW(m.generate_text(r), InvalidRequest);
  r = text_request();
  EXPECT_THROW(m.generate_image(r), InvalidRequest);  // kind mismatch
}

TEST_F(RemoteProvider, TextRoundTrip) {
  handler_ = [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"content": "a villa on a cliff"})", "application/json");
  };
  RemoteClient client(config());
  auto r = client.generate_text(text_request());
  EXPECT_EQ(r.content, "a villa on a cliff");
  EXPECT_EQ(r.provider, genai::Provider::remote);
  EXPECT_EQ(last_auth_, "Bearer secret");
  auto body = nlohmann::json::parse(last_body_);
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_EQ(body["kind"], "text");
  EXPECT_EQ(body["input"], "describe a villa");
}

TEST_F(RemoteProvider, ImageFromBase64IsWritten) {
  handler_ = [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"image_id": "img1", "b64": "aGVsbG8="})", "application/json");
  };
  test::TempDir dir;
  GenRequest req;
  req.kind = Kind::image;
  req.user_content = "A villa";
  req.artifact_dir = dir.path();
  auto r = RemoteClient(config()).generate_image(req);
  EXPECT_EQ(r.content, "img1");
  ASSERT_TRUE(r.local_path);
  std::ifstream in(*r.local_path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(bytes, "hello");
}

TEST_F(RemoteProvider, ImageFromUrlIsDownloaded) {
  const int port = port_;
  handler_ = [port](const httplib::Request&, httplib::Response& res) {
    res.set_content(nlohmann::json{{"image_id", "x"}, {"url", "http://127.0.0.1:" + std::to_string(port) + "/img/x.png"}}
                        .dump(),
                    "application/json");
  };
  test::TempDir dir;
  GenRequest req;
  req.kind = Kind::image;
  req.user_content = "A villa";
  req.artifact_dir = dir.path();
  auto r = RemoteClient(config()).generate_image(req);
  ASSERT_TRUE(r.local_path);
  EXPECT_EQ(std::filesystem::file_size(*r.local_path), 7u);
}

TEST_F(RemoteProvider, RejectedCredentialIsAuthFailure) {
  handler_ = [](const httplib::Request&, httplib::Response& res) { res.status = 401; };
  EXPECT_THROW(RemoteClient(config()).generate_text(text_request()), AuthFailure);
}

TEST_F(RemoteProvider, MissingCredentialNeverCallsProvider) {
  handler_ = [](const httplib::Request&, httplib::Response& res) { res.set_content("{}", "application/json"); };
  auto c = config();
  c.credential_env = "ARCHIPROMPT_TEST_UNSET_KEY";
  ::unsetenv("ARCHIPROMPT_TEST_UNSET_KEY");
  EXPECT_THROW(RemoteClient(c).generate_text(text_request()), AuthFailure);
  EXPECT_EQ(calls_, 0);
}

TEST_F(RemoteProvider, RateLimitRetriesOnce) {
  handler_ = [this](const httplib::Request&, httplib::Response& res) {
    if (calls_ == 1) {
      res.status = 429;
      res.set_header("Retry-After", "0");
      return;
    }
    res.set_content(R"({"content": "ok"})", "application/json");
  };
  EXPECT_EQ(RemoteClient(config()).generate_text(text_request()).content, "ok");
  EXPECT_EQ(calls_, 2);
}

TEST_F(RemoteProvider, RepeatedRateLimitSurfaces) {
  handler_ = [](const httplib::Request&, httplib::Response& res) {
    res.status = 429;
    res.set_header("Retry-After", "0");
  };
  auto e = test::expect_throw<RateLimited>([&] { RemoteClient(config()).generate_text(text_request()); });
  EXPECT_EQ(e.retry_after().count(), 0);
  EXPECT_EQ(calls_, 2);
}

TEST_F(RemoteProvider, ServerErrorIsProviderError) {
  handler_ = [](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("boom", "text/plain");
  };
  auto e = test::expect_throw<ProviderError>([&] { RemoteClient(config()).generate_text(text_request()); });
  EXPECT_EQ(e.detail()["status"], 500);
  EXPECT_EQ(e.code(), ErrorCode::upstream);
}

TEST_F(RemoteProvider, MalformedBodyIsProviderError) {
  handler_ = [](const httplib::Request&, httplib::Response& res) { res.set_content("[]", "application/json"); };
  EXPECT_THROW(RemoteClient(config()).generate_text(text_request()), ProviderError);
}

TEST_F(RemoteProvider, SlowProviderTimesOut) {
  handler_ = [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(R"({"content": "late"})", "application/json");
  };
  auto req = text_request();
  req.timeout_ms = 150;
  const auto start = std::chrono::steady_clock::now();
  EXPECT_THROW(RemoteClient(config()).generate_text(req), Timeout);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::milliseconds(550));
}
