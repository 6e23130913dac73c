#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "bugclass/corpus.hpp"
#include "bugclass/ngram.hpp"

namespace bugclass {

struct SparseItem {
  std::uint32_t ordinal = 0;
  double value = 0.0;

  bool operator==(const SparseItem&) const = default;
};

struct SparseRow {
  DocId doc_id;
  Label label = Label::NonBug;
  std::vector<SparseItem> items;  // sorted by ordinal, zeros omitted

  double value_of(std::uint32_t ordinal) const;
};

struct SparseFeatureMatrix {
  std::vector<SparseRow> rows;
  std::uint32_t num_features = 0;
  std::vector<std::string> feature_names;  // ordinal -> name

  SparseFeatureMatrix subset(const std::vector<std::size_t>& row_indices) const;
  std::vector<Label> labels() const;
};

enum class SelectionMethod { Chi2, Cfs };

struct SelectionResult {
  std::vector<std::uint32_t> kept;  // sorted ascending
  std::vector<double> scores;       // aligned with kept: chi2 stat, or final CFS merit
  SelectionMethod method = SelectionMethod::Chi2;
  double merit = 0.0;               // CFS merit of the returned subset
};

// Raw phrase-occurrence counts per document over the dictionary terms;
// occurrences may overlap. Counting runs over the corpus suffix array, one
// range search per term.
SparseFeatureMatrix vectorize(const Corpus& corpus, const Dictionary& dict);

// Count-based one-degree-of-freedom statistic per feature: observed per-class
// count sums against expectations proportional to the class total counts.
std::vector<double> chi2_scores(const SparseFeatureMatrix& m);
SelectionResult select_chi2(const SparseFeatureMatrix& m, std::size_t k);

// Presence/absence view of the matrix used by CFS, exposed so that merit can
// be evaluated on arbitrary subsets.
struct CfsData {
  std::vector<std::vector<std::uint32_t>> presence;  // feature -> sorted doc indices
  std::vector<std::uint8_t> labels;                  // 1 = BUG
  std::size_t num_docs = 0;
  std::size_t num_bug = 0;
  std::vector<double> class_su;                      // feature-class SU
};

CfsData cfs_prepare(const SparseFeatureMatrix& m);
// SU between two binarized features given their presence lists.
double cfs_pair_su(const CfsData& data, std::uint32_t a, std::uint32_t b);
double cfs_merit(const CfsData& data, const std::vector<std::uint32_t>& subset);
SelectionResult select_cfs(const SparseFeatureMatrix& m);

// Entropy-based symmetrical uncertainty of two binary variables given the
// 2x2 joint counts; in bits.
double symmetrical_uncertainty(std::size_t n00, std::size_t n01, std::size_t n10,
                               std::size_t n11);

SparseFeatureMatrix apply_selection(const SparseFeatureMatrix& m, const SelectionResult& s);

// One line per document: "<label> <ordinal:value> ...", 1-based ordinals,
// plus ".docids" and ".names" companions.
void write_features(const SparseFeatureMatrix& m, const std::string& path);
SparseFeatureMatrix read_features(const std::string& path);

}  // namespace bugclass
