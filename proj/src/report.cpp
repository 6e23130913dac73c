#include "bugclass/report.hpp"

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bugclass/error.hpp"

namespace bugclass {

namespace {

std::uint32_t rotl(std::uint32_t x, int s) { return (x << s) | (x >> (32 - s)); }

}  // namespace

std::string sha1_hex(std::string_view data) {
  std::array<std::uint32_t, 5> h = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u,
                                    0xC3D2E1F0u};
  std::string padded(data);
  const std::uint64_t bit_len = static_cast<std::uint64_t>(data.size()) * 8;
  padded.push_back('\x80');
  while (padded.size() % 64 != 56) padded.push_back('\0');
  for (int i = 7; i >= 0; --i) padded.push_back(static_cast<char>((bit_len >> (8 * i)) & 0xFF));

  std::array<std::uint32_t, 80> w;
  for (std::size_t chunk = 0; chunk < padded.size(); chunk += 64) {
    for (int t = 0; t < 16; ++t) {
      w[t] = 0;
      for (int b = 0; b < 4; ++b) {
        w[t] = (w[t] << 8) | static_cast<unsigned char>(padded[chunk + 4 * t + b]);
      }
    }
    for (int t = 16; t < 80; ++t) w[t] = rotl(w[t - 3] ^ w[t - 8] ^ w[t - 14] ^ w[t - 16], 1);

    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
    for (int t = 0; t < 80; ++t) {
      std::uint32_t f, k;
      if (t < 20) {
        f = (b & c) | (~b & d);
        k = 0x5A827999u;
      } else if (t < 40) {
        f = b ^ c ^ d;
        k = 0x6ED9EBA1u;
      } else if (t < 60) {
        f = (b & c) | (b & d) | (c & d);
        k = 0x8F1BBCDCu;
      } else {
        f = b ^ c ^ d;
        k = 0xCA62C1D6u;
      }
      const std::uint32_t tmp = rotl(a, 5) + f + e + k + w[t];
      e = d;
      d = c;
      c = rotl(b, 30);
      b = a;
      a = tmp;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
    h[4] += e;
  }

  char out[41];
  std::snprintf(out, sizeof(out), "%08x%08x%08x%08x%08x", h[0], h[1], h[2], h[3], h[4]);
  return std::string(out, 40);
}

std::string git_blob_hash(std::string_view content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob.push_back('\0');
  blob.append(content);
  return sha1_hex(blob);
}

std::string git_blob_hash_of_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return git_blob_hash(buffer.str());
}

nlohmann::ordered_json metrics_to_json(const EvalMetrics& m) {
  auto cls = [](const ClassMetrics& c) {
    return nlohmann::ordered_json{{"precision", c.precision},
                                  {"recall", c.recall},
                                  {"f1", c.f1},
                                  {"support", c.support}};
  };
  return nlohmann::ordered_json{
      {"bug", cls(m.bug)},
      {"nonbug", cls(m.nonbug)},
      {"weighted_f1", m.weighted_f1},
      {"bug_f1", m.bug_f1},
      {"confusion",
       {{"tn", m.confusion[0][0]},
        {"fp", m.confusion[0][1]},
        {"fn", m.confusion[1][0]},
        {"tp", m.confusion[1][1]}}}};
}

nlohmann::ordered_json summary_to_json(const DistributionSummary& s) {
  return nlohmann::ordered_json{{"min", s.min}, {"q1", s.q1},   {"median", s.median},
                                {"q3", s.q3},   {"max", s.max}, {"mean", s.mean}};
}

nlohmann::ordered_json distribution_to_json(const RunDistribution& d) {
  return nlohmann::ordered_json{{"runs", d.values.size()},
                                {"summary", summary_to_json(d.summary)},
                                {"weighted_f1", d.values},
                                {"bug_f1", d.bug_values}};
}

nlohmann::ordered_json utest_to_json(const UTestResult& u) {
  return nlohmann::ordered_json{{"u_statistic", u.u_statistic},
                                {"z", u.z},
                                {"p_two_sided", u.p_two_sided},
                                {"all_tied", u.all_tied}};
}

void write_report(const nlohmann::ordered_json& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << report.dump(2) << '\n';
  if (!out.flush()) raise(ErrorCode::IoError, "failed writing '" + path + "'");
}

void write_distribution_csv(const RunDistribution& d, std::uint64_t master_seed,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << "run,seed,weighted_f1,bug_f1\n";
  char buf[80];
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%llu,%.17g,%.17g", i,
                  static_cast<unsigned long long>(master_seed ^ static_cast<std::uint64_t>(i)),
                  d.values[i], d.bug_values[i]);
    out << buf << '\n';
  }
  if (!out.flush()) raise(ErrorCode::IoError, "failed writing '" + path + "'");
}

}  // namespace bugclass
