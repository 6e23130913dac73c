#pragma once

#include <cstdint>
#include <vector>

#include "bugclass/corpus.hpp"

namespace bugclass {

// Suffix array over the corpus token stream, with the LCP array that makes
// repeated-phrase enumeration a single bottom-up interval pass.
struct SuffixIndex {
  std::vector<std::uint32_t> sa;      // suffix start positions, lexicographic order
  std::vector<std::uint32_t> lcp;     // lcp[i] = |common prefix of sa[i-1], sa[i]|; lcp[0] = 0
  std::vector<std::uint32_t> doc_of;  // stream position -> document index
};

// Prefix doubling with counting sort per round: O(n log n) in stream length.
std::vector<std::uint32_t> sort_suffixes(const std::vector<std::uint32_t>& stream);

// Kasai's linear-time LCP construction.
std::vector<std::uint32_t> lcp_from_sa(const std::vector<std::uint32_t>& stream,
                                       const std::vector<std::uint32_t>& sa);

SuffixIndex build_suffix_index(const Corpus& corpus);

}  // namespace bugclass
