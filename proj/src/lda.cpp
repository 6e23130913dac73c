#include "bugclass/lda.hpp"

#include <cmath>

#include "bugclass/error.hpp"
#include "bugclass/rng.hpp"

namespace bugclass {

LdaModel train_lda(const Corpus& corpus, const LdaParams& params) {
  if (corpus.num_docs() == 0) raise(ErrorCode::InvalidArgument, "empty corpus");
  if (params.topics < 2) raise(ErrorCode::InvalidArgument, "need at least 2 topics");
  if (params.topics > 65535) raise(ErrorCode::InvalidArgument, "too many topics");

  const int K = params.topics;
  const double alpha = params.alpha > 0.0 ? params.alpha : 50.0 / static_cast<double>(K);
  const double beta = params.beta;

  LdaModel model;
  model.topics = K;
  model.alpha = alpha;
  model.beta = beta;
  model.vocab = corpus.vocab();
  const std::size_t V = model.vocab.size();
  const std::size_t D = corpus.num_docs();

  model.doc_words.resize(D);
  model.assignments.resize(D);
  model.doc_topic.assign(D, std::vector<std::uint32_t>(K, 0));
  model.topic_word.assign(K, std::vector<std::uint32_t>(V, 0));
  model.topic_totals.assign(K, 0);
  for (std::size_t d = 0; d < D; ++d) {
    const auto& doc = corpus.documents()[d];
    model.doc_ids.push_back(doc.id);
    model.labels.push_back(doc.label);
    model.doc_words[d].reserve(doc.tokens.size());
    for (const auto& tok : doc.tokens) {
      model.doc_words[d].push_back(corpus.rank_of(*corpus.id_of(tok)));
    }
  }

  Rng rng(params.seed);
  for (std::size_t d = 0; d < D; ++d) {
    auto& z = model.assignments[d];
    z.reserve(model.doc_words[d].size());
    for (const std::uint32_t w : model.doc_words[d]) {
      const auto k = static_cast<std::uint16_t>(rng.below(static_cast<std::uint64_t>(K)));
      z.push_back(k);
      ++model.doc_topic[d][k];
      ++model.topic_word[k][w];
      ++model.topic_totals[k];
    }
  }

  const double v_beta = static_cast<double>(V) * beta;
  std::vector<double> cumulative(K);
  for (int sweep = 0; sweep < params.iterations; ++sweep) {
    for (std::size_t d = 0; d < D; ++d) {
      auto& z = model.assignments[d];
      auto& n_dk = model.doc_topic[d];
      const auto& words = model.doc_words[d];
      for (std::size_t j = 0; j < words.size(); ++j) {
        const std::uint32_t w = words[j];
        const std::uint16_t old_k = z[j];
        --n_dk[old_k];
        --model.topic_word[old_k][w];
        --model.topic_totals[old_k];

        double total = 0.0;
        for (int k = 0; k < K; ++k) {
          total += (n_dk[k] + alpha) * (model.topic_word[k][w] + beta) /
                   (model.topic_totals[k] + v_beta);
          cumulative[k] = total;
        }
        const double u = rng.unit() * total;
        int new_k = 0;
        while (new_k + 1 < K && cumulative[new_k] <= u) ++new_k;

        z[j] = static_cast<std::uint16_t>(new_k);
        ++n_dk[new_k];
        ++model.topic_word[new_k][w];
        ++model.topic_totals[new_k];
      }
    }
    model.log_joint.push_back(lda_log_joint(model));
  }
  return model;
}

double lda_log_joint(const LdaModel& model) {
  const int K = model.topics;
  const std::size_t V = model.vocab.size();
  const double alpha = model.alpha, beta = model.beta;
  double lp = 0.0;
  // p(z): per-document Dirichlet-multinomial
  for (std::size_t d = 0; d < model.doc_topic.size(); ++d) {
    const double len = static_cast<double>(model.doc_words[d].size());
    lp += std::lgamma(K * alpha) - std::lgamma(len + K * alpha);
    for (int k = 0; k < K; ++k) {
      lp += std::lgamma(model.doc_topic[d][k] + alpha) - std::lgamma(alpha);
    }
  }
  // p(w | z): per-topic Dirichlet-multinomial
  for (int k = 0; k < K; ++k) {
    lp += std::lgamma(V * beta) - std::lgamma(model.topic_totals[k] + V * beta);
    for (std::size_t w = 0; w < V; ++w) {
      lp += std::lgamma(model.topic_word[k][w] + beta) - std::lgamma(beta);
    }
  }
  return lp;
}

SparseFeatureMatrix membership_vectors(const LdaModel& model) {
  SparseFeatureMatrix m;
  const int K = model.topics;
  m.num_features = static_cast<std::uint32_t>(K);
  m.feature_names.reserve(K);
  for (int k = 0; k < K; ++k) m.feature_names.push_back("topic_" + std::to_string(k));

  m.rows.reserve(model.doc_topic.size());
  for (std::size_t d = 0; d < model.doc_topic.size(); ++d) {
    SparseRow row;
    row.doc_id = model.doc_ids[d];
    row.label = model.labels[d];
    const double len = static_cast<double>(model.doc_words[d].size());
    const double denom = len + K * model.alpha;
    row.items.reserve(K);
    for (int k = 0; k < K; ++k) {
      row.items.push_back({static_cast<std::uint32_t>(k),
                           (model.doc_topic[d][k] + model.alpha) / denom});
    }
    m.rows.push_back(std::move(row));
  }
  return m;
}

}  // namespace bugclass
