#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "bugclass/eval.hpp"

namespace bugclass {

std::string sha1_hex(std::string_view data);
// SHA-1 of "blob <size>\0<content>", the hash git assigns to file contents.
std::string git_blob_hash(std::string_view content);
std::string git_blob_hash_of_file(const std::string& path);

nlohmann::ordered_json metrics_to_json(const EvalMetrics& m);
nlohmann::ordered_json summary_to_json(const DistributionSummary& s);
nlohmann::ordered_json distribution_to_json(const RunDistribution& d);
nlohmann::ordered_json utest_to_json(const UTestResult& u);

// Pretty-printed with the keys in insertion order.
void write_report(const nlohmann::ordered_json& report, const std::string& path);

// One "run,seed,weighted_f1,bug_f1" line per run.
void write_distribution_csv(const RunDistribution& d, std::uint64_t master_seed,
                            const std::string& path);

}  // namespace bugclass
