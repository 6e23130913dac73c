#pragma once

#include <string>

namespace bugclass {

struct FetchOptions {
  std::string base_url;   // e.g. http://tracker.example.org/jira
  std::string cache_dir;  // one directory per project
  int max_retries = 3;    // retries after the first attempt
  int backoff_ms = 1000;  // doubles per retry
  int timeout_s = 30;
};

// Pulls "summary\ndescription" for an issue from the tracker's REST endpoint
// GET {base_url}/rest/api/2/issue/{report_id}?fields=summary,description and
// caches it as {cache_dir}/{report_id}.txt (written atomically). Cache hits
// never touch the network.
class ReportFetcher {
 public:
  explicit ReportFetcher(FetchOptions options);

  bool cached(const std::string& report_id) const;
  std::string cache_path(const std::string& report_id) const;
  // Returns the report text; throws NotFound on 404 and HttpError after the
  // retry budget is exhausted.
  std::string fetch(const std::string& report_id);

 private:
  FetchOptions options_;
  std::string fetch_remote(const std::string& report_id);
};

std::string fetch_report(const std::string& base_url, const std::string& report_id,
                         const std::string& cache_dir);

}  // namespace bugclass
