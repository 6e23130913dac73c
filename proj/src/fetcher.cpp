#include "bugclass/fetcher.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "bugclass/http.hpp"

#include "bugclass/error.hpp"

namespace fs = std::filesystem;

namespace bugclass {

namespace {

void split_base_url(const std::string& base_url, std::string& origin, std::string& prefix) {
  const auto scheme_end = base_url.find("://");
  const std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_start = base_url.find('/', host_start);
  if (path_start == std::string::npos) {
    origin = base_url;
    prefix.clear();
  } else {
    origin = base_url.substr(0, path_start);
    prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  }
}

void write_atomic(const fs::path& target, const std::string& content) {
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) raise(ErrorCode::IoError, "cannot open '" + tmp.string() + "' for writing");
    out << content;
    if (!out.flush()) raise(ErrorCode::IoError, "failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) raise(ErrorCode::IoError, "cannot rename into '" + target.string() + "'");
}

}  // namespace

ReportFetcher::ReportFetcher(FetchOptions options) : options_(std::move(options)) {
  std::error_code ec;
  fs::create_directories(options_.cache_dir, ec);
  if (ec) raise(ErrorCode::IoError, "cannot create cache dir '" + options_.cache_dir + "'");
}

std::string ReportFetcher::cache_path(const std::string& report_id) const {
  return (fs::path(options_.cache_dir) / (report_id + ".txt")).string();
}

bool ReportFetcher::cached(const std::string& report_id) const {
  return fs::exists(cache_path(report_id));
}

std::string ReportFetcher::fetch(const std::string& report_id) {
  const std::string path = cache_path(report_id);
  if (fs::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoError, "cannot read cache file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  }
  const std::string text = fetch_remote(report_id);
  write_atomic(path, text);
  return text;
}

std::string ReportFetcher::fetch_remote(const std::string& report_id) {
  std::string origin, prefix;
  split_base_url(options_.base_url, origin, prefix);
  const std::string target =
      prefix + "/rest/api/2/issue/" + report_id + "?fields=summary,description";

  std::string last_error;
  int backoff = options_.backoff_ms;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      backoff *= 2;
    }
    httplib::Client client(origin);
    client.set_connection_timeout(options_.timeout_s, 0);
    client.set_read_timeout(options_.timeout_s, 0);
    client.set_follow_location(true);
    const httplib::Result res = client.Get(target);
    if (!res) {
      last_error = "transport error (" + httplib::to_string(res.error()) + ")";
      continue;
    }
    if (res->status == 404) {
      raise(ErrorCode::NotFound, report_id + " not found at " + options_.base_url);
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = "HTTP status " + std::to_string(res->status);
      continue;
    }
    try {
      const auto body = nlohmann::json::parse(res->body);
      const auto& fields = body.at("fields");
      std::string summary, description;
      if (fields.contains("summary") && fields["summary"].is_string()) {
        summary = fields["summary"].get<std::string>();
      }
      if (fields.contains("description") && fields["description"].is_string()) {
        description = fields["description"].get<std::string>();
      }
      if (summary.empty()) return description;
      if (description.empty()) return summary;
      return summary + "\n" + description;
    } catch (const std::exception& e) {
      raise(ErrorCode::HttpError,
            "unparseable tracker response for " + report_id + ": " + e.what());
    }
  }
  raise(ErrorCode::HttpError, "giving up on " + report_id + " after " +
                                  std::to_string(options_.max_retries + 1) + " attempts: " +
                                  last_error);
}

std::string fetch_report(const std::string& base_url, const std::string& report_id,
                         const std::string& cache_dir) {
  ReportFetcher fetcher({base_url, cache_dir});
  return fetcher.fetch(report_id);
}

}  // namespace bugclass
