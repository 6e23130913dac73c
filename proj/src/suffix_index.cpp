#include "bugclass/suffix_index.hpp"

#include <algorithm>
#include <numeric>

#include "bugclass/error.hpp"

namespace bugclass {

std::vector<std::uint32_t> sort_suffixes(const std::vector<std::uint32_t>& stream) {
  const std::size_t n = stream.size();
  std::vector<std::uint32_t> sa(n);
  if (n == 0) return sa;

  // Initial ranks: token ids are already ordinal, compress them to 0..n-1.
  std::vector<std::uint32_t> rank(n), tmp_rank(n), tmp(n), count;
  {
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return stream[a] < stream[b]; });
    std::uint32_t r = 0;
    rank[order[0]] = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (stream[order[i]] != stream[order[i - 1]]) ++r;
      rank[order[i]] = r;
    }
    sa = order;
  }

  for (std::size_t k = 1;; k <<= 1) {
    // sa currently sorted by rank; re-sort by (rank[i], rank[i+k]) with two
    // stable counting passes, least significant key first.
    // Pass 1: by second key. Suffixes with i+k >= n have the empty second key
    // and come first; the rest follow in the order of sa shifted by k.
    std::size_t idx = 0;
    for (std::size_t i = n - std::min(k, n); i < n; ++i) tmp[idx++] = static_cast<std::uint32_t>(i);
    for (std::size_t i = 0; i < n; ++i) {
      if (sa[i] >= k) tmp[idx++] = sa[i] - static_cast<std::uint32_t>(k);
    }
    // Pass 2: stable counting sort by first key.
    count.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) ++count[rank[i] + 1];
    for (std::size_t i = 1; i <= n; ++i) count[i] += count[i - 1];
    for (std::size_t i = 0; i < n; ++i) sa[count[rank[tmp[i]]]++] = tmp[i];

    // Recompute ranks.
    tmp_rank[sa[0]] = 0;
    std::uint32_t r = 0;
    for (std::size_t i = 1; i < n; ++i) {
      const std::uint32_t prev = sa[i - 1], cur = sa[i];
      const bool same = rank[prev] == rank[cur] &&
                        (prev + k < n ? (cur + k < n && rank[prev + k] == rank[cur + k])
                                      : cur + k >= n);
      if (!same) ++r;
      tmp_rank[cur] = r;
    }
    rank.swap(tmp_rank);
    if (r + 1 == n) break;
  }
  return sa;
}

std::vector<std::uint32_t> lcp_from_sa(const std::vector<std::uint32_t>& stream,
                                       const std::vector<std::uint32_t>& sa) {
  const std::size_t n = stream.size();
  std::vector<std::uint32_t> lcp(n, 0), inv(n);
  for (std::size_t i = 0; i < n; ++i) inv[sa[i]] = static_cast<std::uint32_t>(i);
  std::uint32_t h = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (inv[i] == 0) {
      h = 0;
      continue;
    }
    const std::size_t j = sa[inv[i] - 1];
    while (i + h < n && j + h < n && stream[i + h] == stream[j + h]) ++h;
    lcp[inv[i]] = h;
    if (h > 0) --h;
  }
  return lcp;
}

SuffixIndex build_suffix_index(const Corpus& corpus) {
  if (corpus.num_docs() == 0) {
    raise(ErrorCode::InvalidArgument, "cannot index an empty corpus");
  }
  SuffixIndex index;
  index.sa = sort_suffixes(corpus.token_stream());
  index.lcp = lcp_from_sa(corpus.token_stream(), index.sa);

  const auto& offsets = corpus.doc_offsets();
  index.doc_of.resize(corpus.token_stream().size());
  for (std::size_t d = 0; d < offsets.size(); ++d) {
    const std::size_t end =
        d + 1 < offsets.size() ? offsets[d + 1] : corpus.token_stream().size();
    for (std::size_t p = offsets[d]; p < end; ++p) {
      index.doc_of[p] = static_cast<std::uint32_t>(d);
    }
  }
  return index;
}

}  // namespace bugclass
