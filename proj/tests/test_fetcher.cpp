#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include "bugclass/http.hpp"

#include "bugclass/error.hpp"
#include "bugclass/fetcher.hpp"

using namespace bugclass;
namespace fs = std::filesystem;

namespace {

struct TestTracker {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> hits{0};

  TestTracker() {
    server.Get(R"(/jira/rest/api/2/issue/(.+))", [this](const httplib::Request& req,
                                                        httplib::Response& res) {
      ++hits;
      const std::string id = req.matches[1];
      if (id == "MISSING-1") {
        res.status = 404;
        res.set_content("{\"errorMessages\":[\"Issue does not exist\"]}", "application/json");
        return;
      }
      if (id == "FLAKY-1" && hits <= 2) {
        res.status = 503;
        return;
      }
      std::string description = "null";
      if (id == "FULL-1") description = "\"Steps to reproduce: run it twice\"";
      res.set_content(
          "{\"fields\":{\"summary\":\"NPE in cache\",\"description\":" + description + "}}",
          "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }

  ~TestTracker() {
    server.stop();
    thread.join();
  }

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port) + "/jira"; }
};

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("fetch concatenates summary and description and caches the result") {
  TestTracker tracker;
  TempDir cache("bugclass_fetch_full");
  ReportFetcher fetcher({tracker.base_url(), cache.path.string(), 3, 1});

  const std::string text = fetcher.fetch("FULL-1");
  CHECK(text == "NPE in cache\nSteps to reproduce: run it twice");
  CHECK(fetcher.cached("FULL-1"));
  std::ifstream in(fetcher.cache_path("FULL-1"));
  std::string on_disk((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(on_disk == text);
  // no stray temp files from the atomic write
  for (const auto& entry : fs::directory_iterator(cache.path)) {
    CHECK(entry.path().extension() == ".txt");
  }
}

TEST_CASE("null description collapses to the summary alone") {
  TestTracker tracker;
  TempDir cache("bugclass_fetch_null");
  ReportFetcher fetcher({tracker.base_url(), cache.path.string(), 3, 1});
  CHECK(fetcher.fetch("PLAIN-1") == "NPE in cache");
}

TEST_CASE("cache hits perform no network calls") {
  TestTracker tracker;
  TempDir cache("bugclass_fetch_cached");
  {
    std::ofstream out(cache.path / "WARM-1.txt");
    out << "prewarmed text";
  }
  ReportFetcher fetcher({tracker.base_url(), cache.path.string(), 3, 1});
  CHECK(fetcher.fetch("WARM-1") == "prewarmed text");
  CHECK(tracker.hits == 0);
}

TEST_CASE("404 raises NotFound without retries") {
  TestTracker tracker;
  TempDir cache("bugclass_fetch_missing");
  ReportFetcher fetcher({tracker.base_url(), cache.path.string(), 3, 1});
  try {
    fetcher.fetch("MISSING-1");
    FAIL("expected NotFound");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotFound);
  }
  CHECK(tracker.hits == 1);
  CHECK(!fetcher.cached("MISSING-1"));
}

TEST_CASE("transient server errors are retried with backoff") {
  TestTracker tracker;
  TempDir cache("bugclass_fetch_flaky");
  ReportFetcher fetcher({tracker.base_url(), cache.path.string(), 3, 1});
  CHECK(fetcher.fetch("FLAKY-1") == "NPE in cache");
  CHECK(tracker.hits == 3);  // two 503s, then success
}

TEST_CASE("persistent failures become HttpError after the retry budget") {
  TempDir cache("bugclass_fetch_down");
  // nothing listens on this port
  ReportFetcher fetcher({"http://127.0.0.1:1/jira", cache.path.string(), 2, 1, 1});
  try {
    fetcher.fetch("ANY-1");
    FAIL("expected HttpError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::HttpError);
  }
}
