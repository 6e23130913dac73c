#include "bugclass/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bugclass/error.hpp"

namespace bugclass {

std::string NGramEntry::text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

void Dictionary::rebuild_term_index() {
  term_index.clear();
  term_index.reserve(entries.size());
  for (std::uint32_t i = 0; i < entries.size(); ++i) {
    term_index.emplace(entries[i].text(), i);
  }
}

std::vector<NGramEntry> enumerate_ngrams(const SuffixIndex& index, const Corpus& corpus,
                                         int nmax) {
  if (nmax < 1) raise(ErrorCode::InvalidArgument, "nmax must be >= 1");
  const auto& stream = corpus.token_stream();
  const auto& sa = index.sa;
  const auto& lcp = index.lcp;
  const std::size_t n = stream.size();

  std::vector<NGramEntry> entries;
  // Generation-stamped distinct-document counter, reused across intervals.
  std::vector<std::uint32_t> doc_stamp(corpus.num_docs(), 0);
  std::uint32_t generation = 0;

  auto process = [&](std::size_t left, std::size_t right, std::uint32_t value,
                     std::uint32_t parent_value) {
    const std::uint32_t lo = parent_value + 1;
    const std::uint32_t hi = std::min<std::uint32_t>(value, static_cast<std::uint32_t>(nmax));
    if (lo > hi) return;
    const std::uint64_t gtf = right - left + 1;
    ++generation;
    std::uint32_t df = 0;
    for (std::size_t i = left; i <= right; ++i) {
      const std::uint32_t d = index.doc_of[sa[i]];
      if (doc_stamp[d] != generation) {
        doc_stamp[d] = generation;
        ++df;
      }
    }
    const std::size_t start = sa[left];
    for (std::uint32_t len = lo; len <= hi; ++len) {
      NGramEntry entry;
      entry.tokens.reserve(len);
      for (std::uint32_t j = 0; j < len; ++j) {
        entry.tokens.push_back(corpus.token_of(stream[start + j]));
      }
      entry.gtf = gtf;
      entry.df = df;
      entries.push_back(std::move(entry));
    }
  };

  // Bottom-up lcp-interval traversal. An interval popped with value v covers
  // the maximal sa range sharing a prefix of v tokens; the phrase lengths in
  // (parent value, v] have exactly that range as their occurrence set.
  struct Open {
    std::uint32_t lcp;
    std::size_t lb;
  };
  std::vector<Open> stack;
  stack.push_back({0, 0});
  for (std::size_t i = 1; i <= n; ++i) {
    const std::uint32_t h = i < n ? lcp[i] : 0;
    std::size_t lb = i - 1;
    while (h < stack.back().lcp) {
      const Open top = stack.back();
      stack.pop_back();
      const std::uint32_t parent_value = std::max(h, stack.back().lcp);
      process(top.lb, i - 1, top.lcp, parent_value);
      lb = top.lb;
    }
    if (h > stack.back().lcp) stack.push_back({h, lb});
  }
  return entries;
}

void compute_sdf(std::vector<NGramEntry>& entries, const Corpus& corpus) {
  // Posting lists over vocabulary ranks: sorted distinct doc indices.
  const std::size_t vocab_size = corpus.vocab().size();
  std::vector<std::vector<std::uint32_t>> postings(vocab_size);
  const auto& docs = corpus.documents();
  for (std::uint32_t d = 0; d < docs.size(); ++d) {
    for (const auto& tok : docs[d].tokens) {
      auto& list = postings[corpus.rank_of(*corpus.id_of(tok))];
      if (list.empty() || list.back() != d) list.push_back(d);
    }
  }

  std::vector<std::uint32_t> ranks;
  for (auto& entry : entries) {
    ranks.clear();
    for (const auto& tok : entry.tokens) {
      const auto id = corpus.id_of(tok);
      if (!id) {
        entry.sdf = 0;
        ranks.clear();
        break;
      }
      ranks.push_back(corpus.rank_of(*id));
    }
    if (ranks.empty()) continue;
    std::sort(ranks.begin(), ranks.end());
    ranks.erase(std::unique(ranks.begin(), ranks.end()), ranks.end());
    std::sort(ranks.begin(), ranks.end(), [&](std::uint32_t a, std::uint32_t b) {
      return postings[a].size() < postings[b].size();
    });
    std::uint32_t count = 0;
    for (const std::uint32_t d : postings[ranks.front()]) {
      bool in_all = true;
      for (std::size_t t = 1; t < ranks.size(); ++t) {
        const auto& list = postings[ranks[t]];
        if (!std::binary_search(list.begin(), list.end(), d)) {
          in_all = false;
          break;
        }
      }
      if (in_all) ++count;
    }
    entry.sdf = count;
  }
}

double ngram_weight(std::uint64_t df, std::uint64_t sdf, std::uint64_t num_docs) {
  return std::log2(static_cast<double>(num_docs) * static_cast<double>(df) /
                   (static_cast<double>(sdf) * static_cast<double>(sdf)));
}

double ngram_weight(const NGramEntry& entry, std::uint64_t num_docs) {
  return ngram_weight(entry.df, entry.sdf, num_docs);
}

namespace {

// Hashable key for a token sequence.
std::string joined(const std::vector<std::string>& tokens, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) {
    if (i > from) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace

Dictionary build_dictionary(const Corpus& corpus, const DictionaryOptions& options) {
  if (corpus.num_docs() == 0) {
    raise(ErrorCode::InvalidArgument, "cannot build a dictionary from an empty corpus");
  }
  const SuffixIndex index = build_suffix_index(corpus);
  std::vector<NGramEntry> entries = enumerate_ngrams(index, corpus, options.nmax);

  Dictionary dict;
  dict.pre_filter_size = entries.size();

  std::erase_if(entries, [](const NGramEntry& e) { return e.df < 2; });
  compute_sdf(entries, corpus);
  for (auto& entry : entries) {
    entry.weight = ngram_weight(entry, corpus.num_docs());
  }

  if (options.prune && !entries.empty()) {
    // g has an equal-stat strict super-gram iff one of its one-token
    // extensions has equal gtf and df (both are monotone under extension),
    // so it is enough to check each entry's two length-minus-one children.
    std::unordered_map<std::string, std::size_t> by_text;
    by_text.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
      by_text.emplace(joined(entries[i].tokens, 0, entries[i].tokens.size()), i);
    }
    std::vector<bool> dominated(entries.size(), false);
    for (const auto& entry : entries) {
      const std::size_t len = entry.tokens.size();
      if (len < 2) continue;
      for (const std::string& child :
           {joined(entry.tokens, 0, len - 1), joined(entry.tokens, 1, len)}) {
        const auto it = by_text.find(child);
        if (it == by_text.end()) continue;
        const auto& c = entries[it->second];
        if (c.gtf == entry.gtf && c.df == entry.df) dominated[it->second] = true;
      }
    }
    std::vector<NGramEntry> kept;
    kept.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (!dominated[i]) kept.push_back(std::move(entries[i]));
    }
    entries = std::move(kept);
  }

  if (options.drop_negative_weights) {
    std::erase_if(entries, [](const NGramEntry& e) { return e.weight < 0.0; });
  }

  std::sort(entries.begin(), entries.end(), [](const NGramEntry& a, const NGramEntry& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    if (a.gtf != b.gtf) return a.gtf > b.gtf;
    return a.tokens < b.tokens;
  });

  dict.entries = std::move(entries);
  dict.rebuild_term_index();
  return dict;
}

void write_dictionary(const Dictionary& dict, std::ostream& out) {
  out << "rank\tngram\tn\tgtf\tdf\tsdf\tweight\n";
  char weight_buf[64];
  for (std::size_t i = 0; i < dict.entries.size(); ++i) {
    const auto& e = dict.entries[i];
    std::snprintf(weight_buf, sizeof(weight_buf), "%.6f", e.weight);
    out << (i + 1) << '\t' << e.text() << '\t' << e.tokens.size() << '\t' << e.gtf << '\t'
        << e.df << '\t' << e.sdf << '\t' << weight_buf << '\n';
  }
}

void write_dictionary(const Dictionary& dict, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  write_dictionary(dict, out);
  if (!out.flush()) raise(ErrorCode::IoError, "failed writing '" + path + "'");
}

Dictionary read_dictionary(std::istream& in, const std::string& name) {
  Dictionary dict;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    raise(ErrorCode::ParseError, name + " line " + std::to_string(line_no) + ": " + why);
  };
  if (!std::getline(in, line)) {
    ++line_no;
    fail("missing header");
  }
  ++line_no;
  if (line == "rank\tngram\tn\tgtf\tdf\tsdf\tweight\r") line.pop_back();
  if (line != "rank\tngram\tn\tgtf\tdf\tsdf\tweight") fail("bad header");

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t p = 0; p <= line.size(); ++p) {
      if (p == line.size() || line[p] == '\t') {
        fields.push_back(line.substr(start, p - start));
        start = p + 1;
      }
    }
    if (fields.size() != 7) fail("expected 7 fields, got " + std::to_string(fields.size()));
    NGramEntry entry;
    try {
      std::size_t pos = 0;
      const unsigned long long n_tokens = std::stoull(fields[2], &pos);
      if (pos != fields[2].size()) fail("bad n");
      entry.gtf = std::stoull(fields[3], &pos);
      if (pos != fields[3].size()) fail("bad gtf");
      entry.df = static_cast<std::uint32_t>(std::stoul(fields[4], &pos));
      if (pos != fields[4].size()) fail("bad df");
      entry.sdf = static_cast<std::uint32_t>(std::stoul(fields[5], &pos));
      if (pos != fields[5].size()) fail("bad sdf");
      entry.weight = std::stod(fields[6], &pos);
      if (pos != fields[6].size()) fail("bad weight");
      std::istringstream toks(fields[1]);
      std::string tok;
      while (toks >> tok) entry.tokens.push_back(tok);
      if (entry.tokens.size() != n_tokens) fail("n does not match the token count");
      if (entry.tokens.empty()) fail("empty ngram");
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      fail("malformed numeric field");
    }
    dict.entries.push_back(std::move(entry));
  }
  dict.pre_filter_size = dict.entries.size();
  dict.rebuild_term_index();
  return dict;
}

Dictionary read_dictionary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open dictionary '" + path + "'");
  return read_dictionary(in, path);
}

}  // namespace bugclass
