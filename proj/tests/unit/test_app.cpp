#include <gtest/gtest.h>

#include <sstream>
#include <thread>

#include <httplib.h>

#include "cli.hpp"
#include "netsig/serialize.hpp"
#include "service.hpp"
#include "session.hpp"
#include "test_support.hpp"

using namespace netsig;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "netsig");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = app::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// A generated corpus on disk, shared by the tests in this file.
const fs::path& corpus_dir() {
  static testing_support::TempDir dir("app-corpus");
  static const bool ready = [] {
    const auto spec = testing_support::small_spec(11, 20);
    write_corpus(generate_corpus(spec), spec, dir.path());
    return true;
  }();
  (void)ready;
  return dir.path();
}

app::State fresh_state() {
  app::AnalyzeOptions options;
  auto s = app::analyze(corpus_dir() / "snapshot", options);
  s.truth = ground_truth_from_json(read_json_file(corpus_dir() / "truth.json"));
  return s;
}

std::string suppress_body(const Finding& f, std::uint64_t generation) {
  RetuneAction a{SuppressFinding{f.property_id, *f.violated_signature}, generation, "tester", "t", std::nullopt};
  return to_json(a).dump();
}

}  // namespace

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli({"bogus"}).code, app::kExitUsage);
  EXPECT_EQ(cli({}).code, app::kExitUsage);
  EXPECT_EQ(cli({"analyze"}).code, app::kExitUsage);
  EXPECT_EQ(cli({"analyze", "/definitely/not/here"}).code, app::kExitAnalysisError);
  EXPECT_EQ(cli({"analyze", testing_support::fixture("malformed").string()}).code, app::kExitAnalysisError);
  EXPECT_EQ(cli({"analyze", corpus_dir().string(), "--detector", "nope"}).code, app::kExitUsage);
}

TEST(Cli, AnalyzeWritesStateAndIsDeterministic) {
  testing_support::TempDir a("app-a"), b("app-b");
  for (const auto* d : {&a, &b}) {
    const auto r = cli({"analyze", (corpus_dir() / "snapshot").string(), "--out", d->path().string()});
    ASSERT_EQ(r.code, app::kExitOk) << r.err;
  }
  for (const char* f : {app::kFindingsFile, app::kSignaturesFile, app::kManifestFile, app::kBaseSignaturesFile}) {
    ASSERT_TRUE(fs::exists(a.path() / f)) << f;
    EXPECT_EQ(testing_support::slurp(a.path() / f), testing_support::slurp(b.path() / f)) << f;
  }
  const auto findings = parse_findings_jsonl(testing_support::slurp(a.path() / app::kFindingsFile));
  EXPECT_FALSE(findings.empty());
  std::istringstream in(testing_support::slurp(a.path() / app::kFindingsFile));
  for (std::string line; std::getline(in, line);) EXPECT_TRUE(nlohmann::json::parse(line).contains("config"));
}

TEST(Cli, ReportAndEval) {
  testing_support::TempDir d("app-report");
  ASSERT_EQ(cli({"analyze", (corpus_dir() / "snapshot").string(), "--out", d.path().string()}).code, 0);
  const auto r = cli({"report", "--state", d.path().string(), "--limit", "5", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::size_t n = 0;
  for (std::string line; std::getline(lines, line); ++n) EXPECT_NO_THROW((void)nlohmann::json::parse(line));
  EXPECT_EQ(n, 5u);
  const auto json_path = d.path() / "eval.json";
  const auto e = cli({"eval", "--snapshot", (corpus_dir() / "snapshot").string(), "--truth",
                      (corpus_dir() / "truth.json").string(), "--detectors", "zscore,signature", "--json",
                      json_path.string(), "--sankey"});
  ASSERT_EQ(e.code, 0) << e.err;
  const auto doc = read_json_file(json_path);
  EXPECT_EQ(doc["rows"].size(), 2u);
  EXPECT_TRUE(doc.contains("sankey"));
}

TEST(Service, ReadEndpoints) {
  app::Service svc(fresh_state(), std::nullopt);
  EXPECT_EQ(svc.generation().body["generation"], 0);
  const auto page = svc.findings("", 0, app::Service::kDefaultLimit);
  ASSERT_EQ(page.status, 200);
  const auto total = page.body["total"].get<std::size_t>();
  EXPECT_EQ(page.body["findings"].size(), std::min<std::size_t>(total, app::Service::kDefaultLimit));
  EXPECT_EQ(svc.findings("", total, 10).body["findings"].size(), 0u);
  EXPECT_EQ(svc.findings("sideways", 0, 10).status, 400);
  const auto id = page.body["findings"][0]["property_id"].get<std::string>();
  const auto detail = svc.finding(id);
  ASSERT_EQ(detail.status, 200);
  EXPECT_FALSE(detail.body["source"]["lines"].empty());
  EXPECT_EQ(svc.finding("nope/acl/X").status, 404);
  EXPECT_EQ(svc.metrics().status, 200);
  const auto sk = svc.sankey();
  ASSERT_EQ(sk.status, 200);
  EXPECT_FALSE(sk.body["links"].empty());
  EXPECT_EQ(svc.signatures().status, 200);
}

TEST(Service, RetuneGenerationsAndErrors) {
  testing_support::TempDir d("app-service");
  auto initial = fresh_state();
  const auto target = initial.findings.front();
  app::Service svc(std::move(initial), d.path());
  EXPECT_EQ(svc.retune("{oops").status, 400);
  const auto ok = svc.retune(suppress_body(target, 0));
  ASSERT_EQ(ok.status, 200) << ok.body.dump();
  EXPECT_EQ(ok.body["generation"], 1);
  EXPECT_EQ(svc.retune(suppress_body(target, 0)).status, 409);
  EXPECT_EQ(svc.finding(target.property_id).status, 404);
  // Persisted state matches what the service now serves.
  const auto reloaded = app::load_state(d.path());
  EXPECT_EQ(reloaded.generation(), 1u);
  EXPECT_EQ(reloaded.findings, svc.state()->findings);
}

TEST(Service, ConcurrentPostsOneWins) {
  auto initial = fresh_state();
  ASSERT_GE(initial.findings.size(), 2u);
  const auto f1 = initial.findings[0], f2 = initial.findings[1];
  app::Service svc(std::move(initial), std::nullopt);
  httplib::Server server;
  svc.mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  int statuses[2] = {0, 0};
  auto post = [&](int i, const Finding& f) {
    httplib::Client c("127.0.0.1", port);
    auto res = c.Post("/api/retune", suppress_body(f, 0), "application/json");
    statuses[i] = res ? res->status : -1;
  };
  std::thread a(post, 0, f1), b(post, 1, f2);
  a.join();
  b.join();
  std::sort(std::begin(statuses), std::end(statuses));
  EXPECT_EQ(statuses[0], 200);
  EXPECT_EQ(statuses[1], 409);

  httplib::Client c("127.0.0.1", port);
  auto res = c.Get("/api/findings");
  ASSERT_TRUE(res);
  const auto body = nlohmann::json::parse(res->body);
  EXPECT_EQ(body["generation"], 1);
  EXPECT_EQ(body["limit"], app::Service::kDefaultLimit);
  server.stop();
  th.join();
}

TEST(Service, CliReplayEqualsServedState) {
  testing_support::TempDir served("app-served"), replayed("app-replayed");
  ASSERT_EQ(cli({"analyze", (corpus_dir() / "snapshot").string(), "--out", served.path().string()}).code, 0);
  auto state = app::load_state(served.path());
  std::vector<Finding> picks(state.findings.begin(), state.findings.begin() + std::min<std::size_t>(3, state.findings.size()));
  app::Service svc(std::move(state), served.path());
  std::uint64_t gen = 0;
  for (const auto& f : picks) ASSERT_EQ(svc.retune(suppress_body(f, gen++)).status, 200);

  ASSERT_EQ(cli({"analyze", (corpus_dir() / "snapshot").string(), "--out", replayed.path().string()}).code, 0);
  const auto r = cli({"retune", "apply", "--log", (served.path() / app::kRetuneLogFile).string(), "--state",
                      replayed.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {app::kFindingsFile, app::kSignaturesFile}) {
    EXPECT_EQ(testing_support::slurp(served.path() / f), testing_support::slurp(replayed.path() / f)) << f;
  }
}
