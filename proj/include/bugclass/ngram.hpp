#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "bugclass/corpus.hpp"
#include "bugclass/suffix_index.hpp"

namespace bugclass {

struct NGramEntry {
  std::vector<std::string> tokens;
  std::uint64_t gtf = 0;  // total occurrences across the corpus (overlaps count)
  std::uint32_t df = 0;   // documents containing the exact phrase
  std::uint32_t sdf = 0;  // documents containing every distinct token, any order
  double weight = 0.0;

  std::string text() const;  // tokens joined by single spaces
};

struct Dictionary {
  // Sorted by weight desc, then gtf desc, then tokens lexicographic.
  std::vector<NGramEntry> entries;
  std::unordered_map<std::string, std::uint32_t> term_index;  // text() -> ordinal
  std::size_t pre_filter_size = 0;  // distinct valid n-grams before the df >= 2 cut

  void rebuild_term_index();
};

// All distinct within-document n-grams with gtf >= 2 and 1 <= length <= nmax,
// with exact gtf and df. One bottom-up pass over the lcp-interval structure;
// per interval the document count is a single scan of its sa range, so total
// work is bounded by the occurrence mass of the emitted phrases.
std::vector<NGramEntry> enumerate_ngrams(const SuffixIndex& index, const Corpus& corpus,
                                         int nmax);

// Fills sdf via per-token posting lists intersected smallest-first.
void compute_sdf(std::vector<NGramEntry>& entries, const Corpus& corpus);

// w(g) = log2(num_docs * df / sdf^2); reduces to plain IDF for unigrams.
double ngram_weight(std::uint64_t df, std::uint64_t sdf, std::uint64_t num_docs);
double ngram_weight(const NGramEntry& entry, std::uint64_t num_docs);

struct DictionaryOptions {
  int nmax = 10;
  bool prune = true;                  // drop n-grams dominated by an equal-stat super-gram
  bool drop_negative_weights = false;
};

Dictionary build_dictionary(const Corpus& corpus, const DictionaryOptions& options = {});

// TSV with header "rank\tngram\tn\tgtf\tdf\tsdf\tweight"; weight at 6 decimals.
void write_dictionary(const Dictionary& dict, const std::string& path);
void write_dictionary(const Dictionary& dict, std::ostream& out);
Dictionary read_dictionary(const std::string& path);
Dictionary read_dictionary(std::istream& in, const std::string& name);

}  // namespace bugclass
