#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bugclass/corpus.hpp"
#include "bugclass/features.hpp"

namespace bugclass {

struct LdaParams {
  int topics = 50;
  double alpha = 0.0;  // <= 0 means the 50/K heuristic
  double beta = 0.01;
  int iterations = 1000;
  std::uint64_t seed = 42;
};

struct LdaModel {
  int topics = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<std::string> vocab;                        // word index -> token
  std::vector<std::vector<std::uint32_t>> topic_word;    // K x V counts
  std::vector<std::uint32_t> topic_totals;               // K
  std::vector<std::vector<std::uint32_t>> doc_topic;     // D x K counts
  std::vector<std::vector<std::uint32_t>> doc_words;     // D -> word indices per token
  std::vector<std::vector<std::uint16_t>> assignments;   // D -> topic id per token
  std::vector<DocId> doc_ids;
  std::vector<Label> labels;
  std::vector<double> log_joint;  // collapsed log p(w, z) after each sweep
};

// Collapsed Gibbs sampler on unigram tokens; deterministic for a given seed.
LdaModel train_lda(const Corpus& corpus, const LdaParams& params = {});

double lda_log_joint(const LdaModel& model);

// Smoothed per-document topic proportions (n_dk + alpha) / (len_d + K alpha),
// stored dense (all K values per row) in the shared sparse-matrix shape.
SparseFeatureMatrix membership_vectors(const LdaModel& model);

}  // namespace bugclass
