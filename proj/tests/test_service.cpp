#include <atomic>
#include <barrier>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "archiprompt/service.hpp"
#include "scenario.hpp"
#include "support.hpp"

using namespace archiprompt;
using namespace archiprompt::service;
using archiprompt::session::GroupCondition;
using nlohmann::json;

namespace {

ServiceConfig test_config(const std::filesystem::path& data_dir) {
  ServiceConfig c = default_config();
  const auto root = test::data_root();
  c.curriculum_path = root / "curriculum.yaml";
  c.lexicon_path = root / "lexicon_mini.tsv";
  c.personas_path = root / "personas.yaml";
  c.data_dir = data_dir;
  return c;
}

// Deterministic clock: 30 s per call.
Clock stepping_clock() {
  auto t = std::make_shared<std::atomic<session::Timestamp>>(1'700'000'000'000);
  return [t] { return t->fetch_add(30000); };
}

struct CliResult {
  int code;
  std::string out, err;
};

CliResult cli(std::vector<std::string> args, const std::string& input = "") {
  args.insert(args.begin(), "archiprompt");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(input);
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), in, out, err);
  return {code, out.str(), err.str()};
}

class Api : public ::testing::Test {
 protected:
  void SetUp() override {
    runtime_ = std::make_unique<Runtime>(test_config(dir_.path()));
    store_ = std::make_unique<SessionStore>(runtime_->engine(), dir_.path(), stepping_clock());
    mount_api(server_, *store_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }

  std::pair<int, json> post(const std::string& path, const json& body) const {
    auto c = client();
    auto r = c.Post(path, body.dump(), "application/json");
    if (!r) return {0, json()};
    return {r->status, json::parse(r->body, nullptr, false)};
  }
  std::pair<int, json> get(const std::string& path) const {
    auto c = client();
    auto r = c.Get(path);
    if (!r) return {0, json()};
    return {r->status, json::parse(r->body, nullptr, false)};
  }
  json event(const std::string& id, std::uint64_t version, const std::string& kind, const json& payload = json::object()) {
    auto [status, body] = post("/sessions/" + id + "/events", {{"version", version}, {"kind", kind}, {"payload", payload}});
    EXPECT_EQ(status, 200) << body.dump();
    return body;
  }

  test::TempDir dir_;
  std::unique_ptr<Runtime> runtime_;
  std::unique_ptr<SessionStore> store_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

void expect_error_shape(const json& body, const std::string& code) {
  EXPECT_EQ(body["code"], code) << body.dump();
  EXPECT_TRUE(body["message"].is_string());
}

}  // namespace

TEST_F(Api, Health) {
  auto [status, body] = get("/health");
  EXPECT_EQ(status, 200);
  EXPECT_EQ(body["status"], "ok");
}

TEST_F(Api, CreateAndFetch) {
  auto [status, body] = post("/sessions", {{"participant_id", "p1"}, {"condition", "group1"}, {"session_id", "abc"}});
  ASSERT_EQ(status, 201) << body.dump();
  EXPECT_EQ(body["session"]["session_id"], "abc");
  EXPECT_EQ(body["view"]["state"]["kind"], "intro");
  EXPECT_EQ(body["view"]["version"], 1);

  auto [s2, fetched] = get("/sessions/abc");
  EXPECT_EQ(s2, 200);
  EXPECT_EQ(fetched["session"], body["session"]);

  auto [s3, dup] = post("/sessions", {{"participant_id", "p1"}, {"condition", "group1"}, {"session_id", "abc"}});
  EXPECT_EQ(s3, 409);
  expect_error_shape(dup, "conflict");
}

TEST_F(Api, ValidationErrors) {
  auto [s1, b1] = post("/sessions", {{"participant_id", "p1"}, {"condition", "group9"}});
  EXPECT_EQ(s1, 400);
  expect_error_shape(b1, "validation");
  auto [s2, b2] = post("/sessions", {{"condition", "group1"}});
  EXPECT_EQ(s2, 400);
  auto c = client();
  auto r = c.Post("/sessions", "{not json", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  auto [s3, b3] = get("/sessions/missing");
  EXPECT_EQ(s3, 404);
  expect_error_shape(b3, "not_found");
  auto [s4, b4] = get("/nowhere");
  EXPECT_EQ(s4, 404);
  expect_error_shape(b4, "not_found");
  auto [s5, b5] = get("/analytics/anova");
  EXPECT_EQ(s5, 400);
}

TEST_F(Api, TaskViewHidesReferencePrompt) {
  post("/sessions", {{"participant_id", "p"}, {"condition", "group3"}, {"session_id", "g3"}});
  auto [status, body] = get("/sessions/g3");
  ASSERT_EQ(status, 200);
  const auto hidden = runtime_->engine().curriculum().tasks[0].hidden_prompt;
  EXPECT_EQ(body["view"].dump().find(hidden), std::string::npos);
  EXPECT_FALSE(body["view"].contains("personas"));
  EXPECT_EQ(body["view"]["task"]["word_min"], 10);
}

TEST_F(Api, FullGroupOneFlow) {
  post("/sessions", {{"participant_id", "p"}, {"condition", "group1"}, {"session_id", "g1"}});
  auto b = event("g1", 1, "proceed");
  EXPECT_EQ(b["view"]["state"]["kind"], "tip_shown");
  EXPECT_TRUE(b["view"].contains("tip"));
  b = event("g1", 2, "start_task");
  EXPECT_TRUE(b["view"].contains("personas"));

  auto [cs, consult] = post("/sessions/g1/consult", {{"role_id", "sustainability_consultant"}, {"version", 3}});
  ASSERT_EQ(cs, 200) << consult.dump();
  EXPECT_FALSE(consult["vocabulary"].empty());
  auto [us, unknown] = post("/sessions/g1/consult", {{"role_id", "wizard"}});
  EXPECT_EQ(us, 404);
  expect_error_shape(unknown, "unknown_role");

  auto [ws, short_prompt] =
      post("/sessions/g1/events", {{"version", 4}, {"kind", "submit"}, {"payload", {{"text", "A villa."}}}});
  EXPECT_EQ(ws, 422);
  expect_error_shape(short_prompt, "word_limit");
  EXPECT_EQ(short_prompt["detail"]["verdict"], "too_short");

  auto [rs, early] = get("/sessions/g1/result");
  EXPECT_EQ(rs, 409);

  b = event("g1", 4, "submit", {{"text", test::kFirstDrafts[0]}});
  EXPECT_TRUE(b.contains("evaluation"));
  b = event("g1", 5, "get_feedback");
  EXPECT_TRUE(b.contains("feedback"));
  b = event("g1", 6, "resubmit", {{"text", test::kRevision}});
  b = event("g1", 7, "show_result");
  ASSERT_TRUE(b.contains("result"));
  EXPECT_EQ(b["result"]["candidate_prompt"], test::kRevision);

  auto [r2, result] = get("/sessions/g1/result");
  EXPECT_EQ(r2, 200);
  EXPECT_EQ(result["hidden_prompt"], runtime_->engine().curriculum().tasks[0].hidden_prompt);

  auto [is, illegal] = post("/sessions/g1/events", {{"version", 8}, {"kind", "submit"}, {"payload", {{"text", "x"}}}});
  EXPECT_EQ(is, 409);
  expect_error_shape(illegal, "illegal_transition");
}

TEST_F(Api, StaleVersionIsConflict) {
  post("/sessions", {{"participant_id", "p"}, {"condition", "group1"}, {"session_id", "v"}});
  event("v", 1, "proceed");
  auto [status, body] = post("/sessions/v/events", {{"version", 1}, {"kind", "start_task"}});
  EXPECT_EQ(status, 409);
  expect_error_shape(body, "conflict");
  EXPECT_EQ(body["detail"]["current"], 2);
  auto [s2, b2] = post("/sessions/v/events", {{"kind", "start_task"}});
  EXPECT_EQ(s2, 400);
  EXPECT_EQ(store_->get("v").version, 2u);
}

TEST_F(Api, ConcurrentWritersOneWins) {
  for (int round = 0; round < 10; ++round) {
    const std::string id = "race" + std::to_string(round);
    post("/sessions", {{"participant_id", "p"}, {"condition", "group3"}, {"session_id", id}});
    std::barrier sync(2);
    int statuses[2] = {0, 0};
    auto writer = [&](int i) {
      sync.arrive_and_wait();
      statuses[i] = post("/sessions/" + id + "/events",
                         {{"version", 1}, {"kind", "submit"}, {"payload", {{"text", test::kFirstDrafts[0]}}}})
                        .first;
    };
    std::thread a(writer, 0), b(writer, 1);
    a.join();
    b.join();
    std::sort(std::begin(statuses), std::end(statuses));
    EXPECT_EQ(statuses[0], 200);
    EXPECT_EQ(statuses[1], 409);
    EXPECT_EQ(store_->get(id).attempts.size(), 1u);
    EXPECT_EQ(store_->engine().replay(session::EventLog(store_->log_path(id)).read()).version, 2u);
  }
}

TEST_F(Api, AnalyticsEndpoints) {
  for (auto [id, c] : {std::pair{"a1", GroupCondition::group1_guide_and_personas},
                       {"a2", GroupCondition::group2_guide_only}, {"a3", GroupCondition::group3_control},
                       {"a4", GroupCondition::group3_control}}) {
    std::istringstream in(test::tutor_script(c));
    std::ostringstream out;
    TutorOptions opts;
    opts.condition = c;
    opts.session_id = id;
    ASSERT_EQ(run_tutor(*store_, opts, in, out), 0) << out.str();
  }
  auto c = client();
  auto r = c.Get("/analytics/dataset");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  std::istringstream csv(r->body);
  EXPECT_EQ(analytics::parse_dataset(csv).rows.size(), 16u);

  auto [status, body] = get("/analytics/anova?metric=word_count");
  EXPECT_EQ(status, 200) << body.dump();
  EXPECT_EQ(body["metric"], "word_count");
  EXPECT_EQ(body["rows"][0]["df"], 2);
  auto [s2, b2] = get("/analytics/anova?metric=height");
  EXPECT_EQ(s2, 400);
}

TEST(Store, RestartReplaysLogs) {
  test::TempDir dir;
  Runtime rt(test_config(dir.path()));
  std::string record;
  {
    SessionStore store(rt.engine(), dir.path(), stepping_clock());
    std::istringstream in(test::tutor_script(GroupCondition::group1_guide_and_personas));
    std::ostringstream out;
    TutorOptions opts;
    opts.session_id = "keep";
    ASSERT_EQ(run_tutor(store, opts, in, out), 0);
    store.create("other", GroupCondition::group2_guide_only, "half");
    store.apply("half", 1, session::EventKind::proceed, json::object());
    record = session::session_record(store.get("keep"));
  }
  SessionStore again(rt.engine(), dir.path(), stepping_clock());
  EXPECT_EQ(again.load_all(), 2u);
  EXPECT_EQ(session::session_record(again.get("keep")), record);
  EXPECT_EQ(again.get("half").state.kind, session::StateKind::tip_shown);
  // Only completed sessions are exported.
  EXPECT_EQ(export_dataset(rt.engine(), again.list()).rows.size(), 4u);
  // Writes continue where the log ended.
  auto step = again.apply("half", 2, session::EventKind::start_task, json::object());
  EXPECT_EQ(step.session.version, 3u);
}

TEST(Store, RejectsBadIdsAndCorruptLogs) {
  test::TempDir dir;
  Runtime rt(test_config(dir.path()));
  SessionStore store(rt.engine(), dir.path(), stepping_clock());
  EXPECT_THROW(store.create("p", GroupCondition::group1_guide_and_personas, "../escape"), Error);
  EXPECT_THROW(store.get("nope"), NotFound);
  auto generated = store.create("p", GroupCondition::group3_control);
  EXPECT_FALSE(generated.session.session_id.empty());

  std::ofstream(store.log_path("broken")) << "{\"seq\": 7}\n";
  SessionStore again(rt.engine(), dir.path(), stepping_clock());
  EXPECT_THROW(again.load_all(), session::ReplayError);
}

TEST(RuntimeConfig, MissingInputsAreNamed) {
  test::TempDir dir;
  auto c = test_config(dir.path());
  c.lexicon_path = dir.path() / "nope.tsv";
  auto e = test::expect_throw<ConfigError>([&] { Runtime r(c); });
  EXPECT_NE(std::string(e.what()).find("nope.tsv"), std::string::npos);

  c = test_config(dir.path());
  c.mock = false;
  c.remote.provider_url.clear();
  EXPECT_THROW(Runtime r(c), ConfigError);
}

TEST(ApiError, StatusMapping) {
  EXPECT_EQ(api_error(session::WordLimitViolation("w"))["code"], "word_limit");
  EXPECT_EQ(http_status(ErrorCode::word_limit), 422);
  EXPECT_EQ(http_status(ErrorCode::illegal_transition), 409);
  EXPECT_EQ(http_status(ErrorCode::conflict), 409);
  EXPECT_EQ(http_status(ErrorCode::unknown_role), 404);
  EXPECT_EQ(http_status(ErrorCode::not_found), 404);
  EXPECT_EQ(http_status(ErrorCode::validation), 400);
  EXPECT_EQ(http_status(ErrorCode::upstream), 502);
}

// ---------------------------------------------------------------------------
// Command line

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"stats"}).code, 2);
  EXPECT_EQ(cli({"eval", "prompt"}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(Cli, EvalIdenticalPromptScoresHundred) {
  test::TempDir dir;
  auto ref = dir.write("ref.txt", "A tropical villa rendered in watercolor on a coastal cliff\n");
  auto r = cli({"eval", "prompt", "--reference", ref.string()}, "A tropical villa rendered in watercolor on a coastal cliff");
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["similarity_pct"].get<double>(), 100.0);
  EXPECT_EQ(j["word_count"], 10);

  r = cli({"eval", "prompt", "--reference", (dir.path() / "missing").string(), "x"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error [not_found]"), std::string::npos);
}

TEST(Cli, CurriculumValidate) {
  auto ok = cli({"curriculum", "validate", (test::data_root() / "curriculum.yaml").string()});
  EXPECT_EQ(ok.code, 0) << ok.out << ok.err;
  EXPECT_EQ(ok.out.rfind("ok", 0), 0u);

  test::TempDir dir;
  std::ifstream in(test::data_root() / "curriculum.yaml");
  std::string text((std::istreambuf_iterator<char>(in)), {});
  auto pos = text.find("word_min: 10");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 12, "word_min: 90");
  auto bad = cli({"curriculum", "validate", dir.write("bad.yaml", text).string()});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("word_limits"), std::string::npos) << bad.out;
}

TEST(Cli, PersonasList) {
  auto r = cli({"personas", "list", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out).size(), 6u);
}

TEST(Cli, TutorRunsExportAndStats) {
  test::TempDir dir;
  const auto data = dir.path().string();
  for (auto [id, group] : {std::pair{"c1", "group1"}, {"c2", "group3"}}) {
    auto r = cli({"tutor", "run", "--mock", "--data-dir", data, "--group", group, "--session-id", id},
                 test::tutor_script(session::parse_condition(group)));
    ASSERT_EQ(r.code, 0) << r.out << r.err;
  }
  auto partial = cli({"tutor", "run", "--data-dir", data, "--group", "group2", "--session-id", "c3"}, "/proceed\n");
  EXPECT_EQ(partial.code, 1);

  auto out = dir.path() / "data.csv";
  auto r = cli({"export", "dataset", "--data-dir", data, "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto ds = analytics::ingest_dataset(out);
  ASSERT_EQ(ds.rows.size(), 8u);
  EXPECT_EQ(ds.rows[0].group, 1);
  EXPECT_EQ(ds.rows[7].group, 3);

  // Two groups of four rows: enough for ANOVA from the recorded sessions.
  auto anova = cli({"stats", "anova", "--metric", "similarity", "--data-dir", data, "--json"});
  ASSERT_EQ(anova.code, 0) << anova.err;
  EXPECT_EQ(json::parse(anova.out)["rows"][0]["df"], 1);
  auto from_file = cli({"stats", "anova", "--metric", "similarity", out.string(), "--json"});
  EXPECT_EQ(from_file.out, anova.out);

  auto bad_metric = cli({"stats", "tukey", "--metric", "height", out.string()});
  EXPECT_EQ(bad_metric.code, 1);
  EXPECT_NE(bad_metric.err.find("error [validation]"), std::string::npos);
}

TEST(Cli, SurveySummarize) {
  test::TempDir dir;
  auto f = dir.write("s.csv",
                     "participant_id,group,instrument,question_id,level,response\n"
                     "p1,1,pre,1,4,\np2,1,pre,1,5,\np3,2,post,16,,Clearer tips\n");
  auto r = cli({"survey", "summarize", f.string(), "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_FALSE(j.empty());
  auto bad = cli({"survey", "summarize", dir.write("b.csv", "participant_id,group\n").string()});
  EXPECT_EQ(bad.code, 1);
}
