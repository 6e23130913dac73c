#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bugclass/corpus.hpp"
#include "bugclass/error.hpp"
#include "bugclass/eval.hpp"
#include "bugclass/features.hpp"
#include "bugclass/fetcher.hpp"
#include "bugclass/lda.hpp"
#include "bugclass/model_io.hpp"
#include "bugclass/ngram.hpp"
#include "bugclass/parallel.hpp"
#include "bugclass/report.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

using namespace bugclass;

// Reads the label files, loads the cached text per report and builds one
// merged corpus. Text lives at <text_dir>/<project>/<report_id>.txt.
Corpus load_corpus(const std::vector<std::string>& label_paths, const std::string& text_dir) {
  std::vector<Corpus> corpora;
  for (const auto& path : label_paths) {
    const auto records = parse_labels(path);
    std::map<std::pair<std::string, std::string>, std::string> texts;
    for (const auto& rec : records) {
      const fs::path file = fs::path(text_dir) / rec.project / (rec.report_id + ".txt");
      std::ifstream in(file, std::ios::binary);
      if (!in) {
        raise(ErrorCode::MissingText, "no cached text at '" + file.string() + "'");
      }
      std::ostringstream buffer;
      buffer << in.rdbuf();
      texts[{rec.project, rec.report_id}] = buffer.str();
    }
    corpora.push_back(build_corpus(records, texts));
  }
  return corpora.size() == 1 ? std::move(corpora.front()) : merge_corpora(corpora);
}

std::map<DocId, std::int64_t> load_timestamps(const std::vector<std::string>& label_paths) {
  std::map<DocId, std::int64_t> out;
  for (const auto& path : label_paths) {
    for (const auto& rec : parse_labels(path)) {
      out[{rec.project, rec.report_id}] = rec.created_at;
    }
  }
  return out;
}

struct CommonFlags {
  std::uint64_t seed = 42;
  int threads = 1;
};

SelectorKind parse_selector(const std::string& name) {
  if (name == "chi2") return SelectorKind::Chi2;
  if (name == "cfs") return SelectorKind::Cfs;
  return SelectorKind::None;
}

ordered_json pipeline_config_json(const PipelineConfig& config) {
  ordered_json j;
  j["selector"] = config.selector == SelectorKind::Chi2
                      ? "chi2"
                      : (config.selector == SelectorKind::Cfs ? "cfs" : "none");
  j["chi2_k"] = config.chi2_k;
  j["select_on_all"] = config.select_on_all;
  j["classifier"] = config.classifier == ClassifierKind::Logistic ? "logistic" : "forest";
  j["logistic"] = {{"lambda", config.logistic.lambda},
                   {"max_iter", config.logistic.max_iter},
                   {"tol", config.logistic.tol}};
  j["forest"] = {{"n_trees", config.forest.n_trees}, {"mtry", config.forest.mtry}};
  j["threads"] = config.threads;
  return j;
}

int cmd_fetch(const std::vector<std::string>& label_paths, const std::string& base_url,
              const std::string& cache_dir, bool allow_missing, const CommonFlags& common) {
  std::vector<LabelRecord> records;
  for (const auto& path : label_paths) {
    const auto batch = parse_labels(path);
    records.insert(records.end(), batch.begin(), batch.end());
  }
  std::map<std::string, std::unique_ptr<ReportFetcher>> fetchers;
  for (const auto& rec : records) {
    if (!fetchers.count(rec.project)) {
      FetchOptions options;
      options.base_url = base_url;
      options.cache_dir = (fs::path(cache_dir) / rec.project).string();
      fetchers.emplace(rec.project, std::make_unique<ReportFetcher>(options));
    }
  }

  std::atomic<int> fetched{0}, cached{0};
  std::mutex mutex;
  std::vector<std::string> missing;
  const int workers = std::min(common.threads, 4);
  parallel_for(records.size(), workers, [&](std::size_t i) {
    const auto& rec = records[i];
    ReportFetcher& fetcher = *fetchers.at(rec.project);
    if (fetcher.cached(rec.report_id)) {
      ++cached;
      return;
    }
    try {
      fetcher.fetch(rec.report_id);
      ++fetched;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotFound) throw;
      const std::lock_guard<std::mutex> lock(mutex);
      missing.push_back(rec.project + "/" + rec.report_id);
    }
  });

  std::sort(missing.begin(), missing.end());
  std::cout << "fetched " << fetched << ", cached " << cached << ", missing " << missing.size()
            << "\n";
  for (const auto& id : missing) std::cout << "missing: " << id << "\n";
  if (!missing.empty() && !allow_missing) {
    std::cerr << "error: " << missing.size() << " report(s) not found\n";
    return 1;
  }
  return 0;
}

int cmd_extract(const std::vector<std::string>& label_paths, const std::string& text_dir,
                const std::string& out_path, const DictionaryOptions& options) {
  const Corpus corpus = load_corpus(label_paths, text_dir);
  const Dictionary dict = build_dictionary(corpus, options);
  write_dictionary(dict, out_path);
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_project;  // (docs, bugs)
  for (const auto& doc : corpus.documents()) {
    auto& [docs, bugs] = per_project[doc.id.project];
    ++docs;
    if (doc.label == Label::Bug) ++bugs;
  }
  for (const auto& [project, counts] : per_project) {
    std::cout << project << ": " << counts.first << " documents (" << counts.second
              << " BUG, " << counts.first - counts.second << " other)\n";
  }
  std::cout << "documents: " << corpus.num_docs() << "\n";
  std::cout << "valid n-grams (pre-filter): " << dict.pre_filter_size << "\n";
  std::cout << "dictionary entries (post-filter): " << dict.entries.size() << "\n";
  return 0;
}

int cmd_features(const std::vector<std::string>& label_paths, const std::string& text_dir,
                 const std::string& dict_path, const std::string& out_path) {
  const Corpus corpus = load_corpus(label_paths, text_dir);
  const Dictionary dict = read_dictionary(dict_path);
  const SparseFeatureMatrix m = vectorize(corpus, dict);
  write_features(m, out_path);
  std::size_t nonzero = 0;
  for (const auto& row : m.rows) nonzero += row.items.size();
  std::cout << "rows: " << m.rows.size() << ", features: " << m.num_features
            << ", nonzeros: " << nonzero << "\n";
  return 0;
}

int cmd_topics(const std::vector<std::string>& label_paths, const std::string& text_dir,
               const std::string& out_path, const LdaParams& params) {
  std::cout << "seed: " << params.seed << "\n";
  const Corpus corpus = load_corpus(label_paths, text_dir);
  const LdaModel model = train_lda(corpus, params);
  const SparseFeatureMatrix m = membership_vectors(model);
  write_features(m, out_path);
  std::cout << "rows: " << m.rows.size() << ", topics: " << m.num_features << ", log_joint: "
            << (model.log_joint.empty() ? 0.0 : model.log_joint.back()) << "\n";
  return 0;
}

int cmd_select(const std::string& features_path, const std::string& method, std::size_t k,
               const std::string& out_path) {
  const SparseFeatureMatrix m = read_features(features_path);
  const SelectionResult result = method == "chi2" ? select_chi2(m, k) : select_cfs(m);
  const SparseFeatureMatrix slim = apply_selection(m, result);
  write_features(slim, out_path);
  std::cout << "kept " << result.kept.size() << " of " << m.num_features << " features\n";
  if (method == "cfs") std::cout << "subset merit: " << result.merit << "\n";
  return 0;
}

int cmd_train(const std::string& features_path, const std::string& classifier,
              const std::string& out_path, const LogisticParams& logistic_params,
              ForestParams forest_params, const CommonFlags& common) {
  const SparseFeatureMatrix m = read_features(features_path);
  if (classifier == "logistic") {
    const LogisticModel model = train_logistic(m, logistic_params);
    save_model(model, out_path);
    std::cout << "trained logistic on " << m.rows.size() << " rows, final loss "
              << model.loss_history.back() << "\n";
  } else {
    std::cout << "seed: " << common.seed << "\n";
    forest_params.seed = common.seed;
    forest_params.threads = common.threads;
    const Forest model = train_forest(m, forest_params);
    save_model(model, out_path);
    std::cout << "trained forest of " << model.trees.size() << " trees (mtry " << model.mtry
              << ")\n";
  }
  return 0;
}

int cmd_eval(const std::string& features_path, const std::vector<std::string>& label_paths,
             const std::string& setup, int folds, double train_fraction,
             const PipelineConfig& config, const std::string& report_path,
             const CommonFlags& common) {
  std::cout << "seed: " << common.seed << "\n";
  const SparseFeatureMatrix m = read_features(features_path);

  ordered_json report;
  report["schema_version"] = 1;
  report["generator"] = "bugclass";
  report["command"] = "eval";
  report["config"] = pipeline_config_json(config);
  report["config"]["setup"] = setup;
  report["config"]["folds"] = folds;
  report["config"]["train_fraction"] = train_fraction;
  report["config"]["seed"] = common.seed;
  report["inputs"] = {{"features",
                       {{"path", features_path}, {"hash", git_blob_hash_of_file(features_path)}}}};

  if (setup == "cv") {
    const CvResult cv = run_cv(config, m, folds, common.seed);
    report["results"]["mean"] = metrics_to_json(cv.mean);
    ordered_json per_fold = ordered_json::array();
    for (const auto& fm : cv.fold_metrics) per_fold.push_back(metrics_to_json(fm));
    report["results"]["folds"] = std::move(per_fold);
    std::cout << "cv weighted_f1 " << cv.mean.weighted_f1 << ", bug_f1 " << cv.mean.bug_f1
              << "\n";
  } else {
    const auto timestamps = load_timestamps(label_paths);
    const auto [train_rows, test_rows] = chrono_split(m, timestamps, train_fraction);
    const EvalMetrics metrics =
        run_split(config, m.subset(train_rows), m.subset(test_rows));
    report["results"]["split"] = metrics_to_json(metrics);
    report["results"]["train_size"] = train_rows.size();
    report["results"]["test_size"] = test_rows.size();
    std::cout << "chrono weighted_f1 " << metrics.weighted_f1 << ", bug_f1 " << metrics.bug_f1
              << "\n";
  }
  if (!report_path.empty()) write_report(report, report_path);
  return 0;
}

int cmd_compare(const std::string& ngram_path, const std::string& topic_path,
                const std::vector<std::string>& label_paths, int runs, double train_fraction,
                PipelineConfig config, const std::string& report_path,
                const std::string& dist_ngram_path, const std::string& dist_topic_path,
                const CommonFlags& common) {
  std::cout << "seed: " << common.seed << "\n";
  const SparseFeatureMatrix ngram_m = read_features(ngram_path);
  const SparseFeatureMatrix topic_m = read_features(topic_path);
  const auto timestamps = load_timestamps(label_paths);

  config.classifier = ClassifierKind::Forest;

  auto run_side = [&](const SparseFeatureMatrix& m, const PipelineConfig& side_config) {
    const auto [train_rows, test_rows] = chrono_split(m, timestamps, train_fraction);
    const SparseFeatureMatrix train = m.subset(train_rows);
    const SparseFeatureMatrix test = m.subset(test_rows);
    const SelectionResult selection = [&] {
      switch (side_config.selector) {
        case SelectorKind::Chi2:
          return select_chi2(train, side_config.chi2_k);
        case SelectorKind::Cfs:
          return select_cfs(train);
        default: {
          SelectionResult all;
          all.kept.resize(train.num_features);
          for (std::uint32_t f = 0; f < train.num_features; ++f) all.kept[f] = f;
          return all;
        }
      }
    }();
    const SparseFeatureMatrix train_sel = apply_selection(train, selection);
    const SparseFeatureMatrix test_sel = apply_selection(test, selection);
    return multirun_forest(side_config, train_sel, test_sel, runs, common.seed);
  };

  const RunDistribution ngram_dist = run_side(ngram_m, config);
  // topic membership vectors are dense and few; no count-based selection there
  PipelineConfig topic_config = config;
  topic_config.selector = SelectorKind::None;
  const RunDistribution topic_dist = run_side(topic_m, topic_config);

  const UTestResult utest = mann_whitney(ngram_dist.values, topic_dist.values);

  ordered_json report;
  report["schema_version"] = 1;
  report["generator"] = "bugclass";
  report["command"] = "compare";
  report["config"] = pipeline_config_json(config);
  report["config"]["runs"] = runs;
  report["config"]["train_fraction"] = train_fraction;
  report["config"]["seed"] = common.seed;
  report["inputs"] = {
      {"ngram", {{"path", ngram_path}, {"hash", git_blob_hash_of_file(ngram_path)}}},
      {"topic", {{"path", topic_path}, {"hash", git_blob_hash_of_file(topic_path)}}}};
  report["results"]["ngram"] = distribution_to_json(ngram_dist);
  report["results"]["topic"] = distribution_to_json(topic_dist);
  report["results"]["utest"] = utest_to_json(utest);
  if (!report_path.empty()) write_report(report, report_path);
  if (!dist_ngram_path.empty()) write_distribution_csv(ngram_dist, common.seed, dist_ngram_path);
  if (!dist_topic_path.empty()) write_distribution_csv(topic_dist, common.seed, dist_topic_path);

  std::cout << "ngram median " << ngram_dist.summary.median << ", topic median "
            << topic_dist.summary.median << ", U " << utest.u_statistic << ", p "
            << utest.p_two_sided << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bug report classification with n-gram idf key terms"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file providing flag defaults");

  CommonFlags common;

  // fetch
  auto* fetch = app.add_subcommand("fetch", "populate the text cache from the issue tracker");
  std::vector<std::string> fetch_labels;
  std::string fetch_base_url, fetch_cache_dir;
  bool allow_missing = false;
  fetch->add_option("--labels", fetch_labels, "label csv file(s)")->required()->expected(-1);
  fetch->add_option("--base-url", fetch_base_url, "tracker base url")->required();
  fetch->add_option("--cache-dir", fetch_cache_dir, "text cache root")->required();
  fetch->add_flag("--allow-missing", allow_missing, "tolerate 404s, list them and exit 0");
  fetch->add_option("--threads", common.threads, "worker threads (fetch caps at 4)");

  // extract
  auto* extract = app.add_subcommand("extract", "build the n-gram dictionary");
  std::vector<std::string> extract_labels;
  std::string extract_text_dir, extract_out;
  DictionaryOptions dict_options;
  extract->add_option("--labels", extract_labels, "label csv file(s)")->required()->expected(-1);
  extract->add_option("--text-dir", extract_text_dir, "text cache root")->required();
  extract->add_option("--out", extract_out, "dictionary tsv path")->required();
  extract->add_option("--nmax", dict_options.nmax, "longest n-gram in tokens")
      ->capture_default_str();
  extract->add_flag("--prune,!--no-prune", dict_options.prune,
                    "drop n-grams dominated by an equal-stat super-gram")
      ->capture_default_str();
  extract->add_flag("--drop-negative-weights", dict_options.drop_negative_weights,
                    "drop entries with weight < 0");

  // features
  auto* features = app.add_subcommand("features", "vectorize documents over a dictionary");
  std::vector<std::string> features_labels;
  std::string features_text_dir, features_dict, features_out;
  features->add_option("--labels", features_labels, "label csv file(s)")->required()->expected(-1);
  features->add_option("--text-dir", features_text_dir, "text cache root")->required();
  features->add_option("--dict", features_dict, "dictionary tsv")->required();
  features->add_option("--out", features_out, "feature file path")->required();

  // topics
  auto* topics = app.add_subcommand("topics", "train lda and emit topic membership features");
  std::vector<std::string> topics_labels;
  std::string topics_text_dir, topics_out;
  LdaParams lda_params;
  topics->add_option("--labels", topics_labels, "label csv file(s)")->required()->expected(-1);
  topics->add_option("--text-dir", topics_text_dir, "text cache root")->required();
  topics->add_option("--out", topics_out, "feature file path")->required();
  topics->add_option("--topics", lda_params.topics, "topic count")->capture_default_str();
  topics->add_option("--alpha", lda_params.alpha, "doc-topic prior (0 = 50/K)")
      ->capture_default_str();
  topics->add_option("--beta", lda_params.beta, "topic-word prior")->capture_default_str();
  topics->add_option("--iters", lda_params.iterations, "gibbs sweeps")->capture_default_str();
  topics->add_option("--seed", common.seed, "rng seed")->capture_default_str();

  // select
  auto* select = app.add_subcommand("select", "reduce a feature file with chi2 or cfs");
  std::string select_in, select_method = "chi2", select_out;
  std::size_t select_k = 200;
  select->add_option("--features", select_in, "input feature file")->required();
  select->add_option("--method", select_method, "chi2 or cfs")
      ->check(CLI::IsMember({"chi2", "cfs"}))
      ->capture_default_str();
  select->add_option("--k", select_k, "features kept by chi2")->capture_default_str();
  select->add_option("--out", select_out, "output feature file")->required();

  // train
  auto* train = app.add_subcommand("train", "train and serialize a classifier");
  std::string train_in, train_classifier = "logistic", train_out;
  LogisticParams logistic_params;
  ForestParams forest_params;
  train->add_option("--features", train_in, "input feature file")->required();
  train->add_option("--classifier", train_classifier, "logistic or forest")
      ->check(CLI::IsMember({"logistic", "forest"}))
      ->capture_default_str();
  train->add_option("--out", train_out, "model json path")->required();
  train->add_option("--lambda", logistic_params.lambda, "l2 strength")->capture_default_str();
  train->add_option("--max-iter", logistic_params.max_iter, "gradient descent cap")
      ->capture_default_str();
  train->add_option("--tol", logistic_params.tol, "relative loss tolerance")
      ->capture_default_str();
  train->add_option("--trees", forest_params.n_trees, "forest size")->capture_default_str();
  train->add_option("--mtry", forest_params.mtry, "features per split (0 = sqrt)")
      ->capture_default_str();
  train->add_option("--seed", common.seed, "rng seed")->capture_default_str();
  train->add_option("--threads", common.threads, "worker threads")->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "run a configured evaluation");
  std::string eval_in, eval_setup = "cv", eval_select = "cfs", eval_classifier = "logistic";
  std::string eval_report;
  std::vector<std::string> eval_labels;
  int eval_folds = 10;
  double eval_fraction = 0.9;
  bool select_on_all = false;
  LogisticParams eval_logistic;
  ForestParams eval_forest;
  std::size_t eval_k = 200;
  eval->add_option("--features", eval_in, "input feature file")->required();
  eval->add_option("--setup", eval_setup, "cv or chrono")
      ->check(CLI::IsMember({"cv", "chrono"}))
      ->capture_default_str();
  eval->add_option("--labels", eval_labels, "label csv file(s), needed for chrono timestamps")
      ->expected(-1);
  eval->add_option("--select", eval_select, "chi2, cfs or none")
      ->check(CLI::IsMember({"chi2", "cfs", "none"}))
      ->capture_default_str();
  eval->add_option("--k", eval_k, "features kept by chi2")->capture_default_str();
  eval->add_flag("--select-on-all", select_on_all,
                 "fit selection on the whole dataset before cv (leaky variant)");
  eval->add_option("--classifier", eval_classifier, "logistic or forest")
      ->check(CLI::IsMember({"logistic", "forest"}))
      ->capture_default_str();
  eval->add_option("--folds", eval_folds, "cv fold count")->capture_default_str();
  eval->add_option("--train-fraction", eval_fraction, "chrono training share")
      ->capture_default_str();
  eval->add_option("--lambda", eval_logistic.lambda, "l2 strength")->capture_default_str();
  eval->add_option("--trees", eval_forest.n_trees, "forest size")->capture_default_str();
  eval->add_option("--mtry", eval_forest.mtry, "features per split (0 = sqrt)")
      ->capture_default_str();
  eval->add_option("--report", eval_report, "write a json report here");
  eval->add_option("--seed", common.seed, "rng seed")->capture_default_str();
  eval->add_option("--threads", common.threads, "worker threads")->capture_default_str();

  // compare
  auto* compare = app.add_subcommand("compare",
                                     "paired n-gram vs topic forest runs with a u-test");
  std::string cmp_ngram, cmp_topic, cmp_report, cmp_dist_ngram, cmp_dist_topic;
  std::vector<std::string> cmp_labels;
  std::string cmp_select = "chi2";
  std::size_t cmp_k = 200;
  int cmp_runs = 1000;
  double cmp_fraction = 0.9;
  ForestParams cmp_forest;
  compare->add_option("--features-ngram", cmp_ngram, "n-gram feature file")->required();
  compare->add_option("--features-topic", cmp_topic, "topic feature file")->required();
  compare->add_option("--labels", cmp_labels, "label csv file(s) for the chrono split")
      ->required()
      ->expected(-1);
  compare->add_option("--runs", cmp_runs, "forest runs per side")->capture_default_str();
  compare->add_option("--select", cmp_select, "selection for the n-gram side")
      ->check(CLI::IsMember({"chi2", "cfs", "none"}))
      ->capture_default_str();
  compare->add_option("--k", cmp_k, "features kept by chi2")->capture_default_str();
  compare->add_option("--train-fraction", cmp_fraction, "chrono training share")
      ->capture_default_str();
  compare->add_option("--trees", cmp_forest.n_trees, "forest size")->capture_default_str();
  compare->add_option("--mtry", cmp_forest.mtry, "features per split (0 = sqrt)")
      ->capture_default_str();
  compare->add_option("--report", cmp_report, "write a json report here");
  compare->add_option("--dist-ngram", cmp_dist_ngram, "per-run csv for the n-gram side");
  compare->add_option("--dist-topic", cmp_dist_topic, "per-run csv for the topic side");
  compare->add_option("--seed", common.seed, "master seed")->capture_default_str();
  compare->add_option("--threads", common.threads, "worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(fetch)) {
      return cmd_fetch(fetch_labels, fetch_base_url, fetch_cache_dir, allow_missing, common);
    }
    if (app.got_subcommand(extract)) {
      return cmd_extract(extract_labels, extract_text_dir, extract_out, dict_options);
    }
    if (app.got_subcommand(features)) {
      return cmd_features(features_labels, features_text_dir, features_dict, features_out);
    }
    if (app.got_subcommand(topics)) {
      lda_params.seed = common.seed;
      return cmd_topics(topics_labels, topics_text_dir, topics_out, lda_params);
    }
    if (app.got_subcommand(select)) {
      return cmd_select(select_in, select_method, select_k, select_out);
    }
    if (app.got_subcommand(train)) {
      return cmd_train(train_in, train_classifier, train_out, logistic_params, forest_params,
                       common);
    }
    if (app.got_subcommand(eval)) {
      if (eval_setup == "chrono" && eval_labels.empty()) {
        std::cerr << "usage error: --setup chrono needs --labels for timestamps\n";
        return 2;
      }
      PipelineConfig config;
      config.selector = parse_selector(eval_select);
      config.chi2_k = eval_k;
      config.select_on_all = select_on_all;
      config.classifier =
          eval_classifier == "logistic" ? ClassifierKind::Logistic : ClassifierKind::Forest;
      config.logistic = eval_logistic;
      config.forest = eval_forest;
      config.forest.seed = common.seed;
      config.threads = common.threads;
      return cmd_eval(eval_in, eval_labels, eval_setup, eval_folds, eval_fraction, config,
                      eval_report, common);
    }
    if (app.got_subcommand(compare)) {
      PipelineConfig config;
      config.selector = parse_selector(cmp_select);
      config.chi2_k = cmp_k;
      config.classifier = ClassifierKind::Forest;
      config.forest = cmp_forest;
      config.threads = common.threads;
      return cmd_compare(cmp_ngram, cmp_topic, cmp_labels, cmp_runs, cmp_fraction, config,
                         cmp_report, cmp_dist_ngram, cmp_dist_topic, common);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
