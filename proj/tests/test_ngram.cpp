#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bugclass/error.hpp"
#include "bugclass/ngram.hpp"
#include "oracles.hpp"

using namespace bugclass;

namespace {

Corpus corpus_from_token_lists(const std::vector<std::vector<std::string>>& docs_tokens) {
  std::vector<Document> docs(docs_tokens.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    docs[d].id = {"p", "r" + std::to_string(d)};
    docs[d].tokens = docs_tokens[d];
    docs[d].created_at = 1000000000 + static_cast<std::int64_t>(d);
  }
  return Corpus(std::move(docs));
}

std::map<std::vector<std::string>, oracles::NGramStats> as_map(
    const std::vector<NGramEntry>& entries) {
  std::map<std::vector<std::string>, oracles::NGramStats> out;
  for (const auto& e : entries) {
    CHECK(out.find(e.tokens) == out.end());  // no duplicate token sequences
    out[e.tokens] = {e.gtf, e.df, e.sdf};
  }
  return out;
}

}  // namespace

TEST_CASE("enumerate_ngrams on the overlap fixture") {
  const Corpus corpus = corpus_from_token_lists({{"a", "b", "a", "b", "a"}});
  const SuffixIndex index = build_suffix_index(corpus);
  auto entries = enumerate_ngrams(index, corpus, 3);
  const auto got = as_map(entries);
  REQUIRE(got.size() == 5);
  CHECK(got.at({"a"}).gtf == 3);
  CHECK(got.at({"b"}).gtf == 2);
  CHECK(got.at({"a", "b"}).gtf == 2);
  CHECK(got.at({"b", "a"}).gtf == 2);
  CHECK(got.at({"a", "b", "a"}).gtf == 2);
  for (const auto& [gram, stats] : got) CHECK(stats.df == 1);
}

TEST_CASE("duplicate documents produce df 2") {
  const Corpus corpus = corpus_from_token_lists({{"a", "b"}, {"a", "b"}});
  const SuffixIndex index = build_suffix_index(corpus);
  const auto got = as_map(enumerate_ngrams(index, corpus, 3));
  CHECK(got.at({"a", "b"}).gtf == 2);
  CHECK(got.at({"a", "b"}).df == 2);
}

TEST_CASE("nmax 1 yields exactly the repeated unigrams") {
  const Corpus corpus = corpus_from_token_lists({{"a", "b", "a", "c"}, {"c", "c"}});
  const SuffixIndex index = build_suffix_index(corpus);
  const auto got = as_map(enumerate_ngrams(index, corpus, 1));
  REQUIRE(got.size() == 2);
  CHECK(got.at({"a"}).gtf == 2);
  CHECK(got.at({"c"}).gtf == 3);
}

TEST_CASE("enumeration equals brute force on random corpora") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Corpus corpus = oracles::random_corpus(seed, 8, 5, 25);
    const int nmax = 1 + static_cast<int>(seed % 5);
    const SuffixIndex index = build_suffix_index(corpus);
    auto entries = enumerate_ngrams(index, corpus, nmax);
    compute_sdf(entries, corpus);
    const auto got = as_map(entries);
    const auto expected = oracles::brute_force_ngrams(corpus, nmax);
    REQUIRE(got.size() == expected.size());
    for (const auto& [gram, stats] : expected) {
      REQUIRE(got.count(gram));
      CHECK(got.at(gram).gtf == stats.gtf);
      CHECK(got.at(gram).df == stats.df);
      CHECK(got.at(gram).sdf == stats.sdf);
    }
  }
}

TEST_CASE("empty documents flow through enumeration and sdf") {
  const Corpus corpus = corpus_from_token_lists({{"a", "b"}, {}, {"a", "b"}, {}});
  const SuffixIndex index = build_suffix_index(corpus);
  auto entries = enumerate_ngrams(index, corpus, 3);
  compute_sdf(entries, corpus);
  const auto got = as_map(entries);
  const auto expected = oracles::brute_force_ngrams(corpus, 3);
  REQUIRE(got.size() == expected.size());
  CHECK(got.at({"a", "b"}).df == 2);
  CHECK(got.at({"a", "b"}).sdf == 2);
}

TEST_CASE("sdf posting-list fixture") {
  const Corpus corpus =
      corpus_from_token_lists({{"foo", "bar"}, {"bar", "foo"}, {"foo", "bar", "baz"}});
  const SuffixIndex index = build_suffix_index(corpus);
  auto entries = enumerate_ngrams(index, corpus, 2);
  compute_sdf(entries, corpus);
  const auto got = as_map(entries);
  CHECK(got.at({"foo", "bar"}).df == 2);
  CHECK(got.at({"foo", "bar"}).sdf == 3);
  // unigram sdf always equals df
  for (const auto& [gram, stats] : got) {
    if (gram.size() == 1) CHECK(stats.sdf == stats.df);
  }
}

TEST_CASE("weight formula fixtures") {
  CHECK(ngram_weight(2, 4, 4) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(ngram_weight(2, 3, 3) == doctest::Approx(std::log2(6.0 / 9.0)).epsilon(1e-12));
  // an everywhere-unigram weighs 0
  CHECK(ngram_weight(7, 7, 7) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("unigram weight law and monotonicity") {
  Rng rng(123);
  for (int i = 0; i < 2000; ++i) {
    const std::uint64_t num_docs = 2 + rng.below(1000);
    const std::uint64_t sdf = 1 + rng.below(num_docs);
    const std::uint64_t df = 1 + rng.below(sdf);
    // unigram: sdf == df reduces to plain idf
    CHECK(ngram_weight(df, df, num_docs) ==
          doctest::Approx(std::log2(static_cast<double>(num_docs) / df)).epsilon(1e-12));
    if (df + 1 <= sdf) {
      CHECK(ngram_weight(df + 1, sdf, num_docs) > ngram_weight(df, sdf, num_docs));
    }
    if (sdf + 1 <= num_docs) {
      CHECK(ngram_weight(df, sdf + 1, num_docs) < ngram_weight(df, sdf, num_docs));
    }
  }
}

TEST_CASE("dictionary drops df < 2 and applies dominance pruning") {
  // "x" appears in exactly one document: filtered out
  const Corpus corpus = corpus_from_token_lists({{"a", "b", "c"}, {"a", "b", "c"}, {"x", "x"}});
  DictionaryOptions options;
  options.nmax = 3;

  const Dictionary dict = build_dictionary(corpus, options);
  CHECK(dict.term_index.count("x") == 0);
  // "a b" is dominated by "a b c" (equal gtf and df)
  CHECK(dict.term_index.count("a b") == 0);
  CHECK(dict.term_index.count("b c") == 0);
  CHECK(dict.term_index.count("a") == 0);
  CHECK(dict.term_index.count("a b c") == 1);

  options.prune = false;
  const Dictionary unpruned = build_dictionary(corpus, options);
  CHECK(unpruned.term_index.count("a b") == 1);
  CHECK(unpruned.pre_filter_size >= unpruned.entries.size());
}

TEST_CASE("pruning removes exactly the entries dominated by a super-gram") {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    const Corpus corpus = oracles::random_corpus(seed, 6, 4, 18);
    DictionaryOptions options;
    options.nmax = 4;
    options.prune = false;
    const Dictionary unpruned = build_dictionary(corpus, options);
    options.prune = true;
    const Dictionary pruned = build_dictionary(corpus, options);

    // brute-force dominance over the unpruned entry set
    for (const auto& e : unpruned.entries) {
      bool dominated = false;
      for (const auto& super : unpruned.entries) {
        if (super.tokens.size() <= e.tokens.size()) continue;
        if (super.gtf != e.gtf || super.df != e.df) continue;
        for (std::size_t start = 0; start + e.tokens.size() <= super.tokens.size(); ++start) {
          if (std::equal(e.tokens.begin(), e.tokens.end(), super.tokens.begin() + start)) {
            dominated = true;
            break;
          }
        }
        if (dominated) break;
      }
      CHECK(pruned.term_index.count(e.text()) == (dominated ? 0u : 1u));
    }
  }
}

TEST_CASE("dictionary sorted by weight then gtf then tokens") {
  const Corpus corpus = oracles::random_corpus(5, 10, 5, 30);
  const Dictionary dict = build_dictionary(corpus, {.nmax = 3});
  for (std::size_t i = 1; i < dict.entries.size(); ++i) {
    const auto& prev = dict.entries[i - 1];
    const auto& cur = dict.entries[i];
    const bool ordered = prev.weight > cur.weight ||
                         (prev.weight == cur.weight &&
                          (prev.gtf > cur.gtf ||
                           (prev.gtf == cur.gtf && prev.tokens < cur.tokens)));
    CHECK(ordered);
  }
  for (std::uint32_t i = 0; i < dict.entries.size(); ++i) {
    CHECK(dict.term_index.at(dict.entries[i].text()) == i);
  }
}

TEST_CASE("dictionary TSV write therefore read round-trip") {
  const Corpus corpus = oracles::random_corpus(21, 8, 5, 20);
  const Dictionary dict = build_dictionary(corpus, {.nmax = 3});

  std::ostringstream first;
  write_dictionary(dict, first);

  std::istringstream in(first.str());
  const Dictionary reread = read_dictionary(in, "mem.tsv");
  REQUIRE(reread.entries.size() == dict.entries.size());
  for (std::size_t i = 0; i < dict.entries.size(); ++i) {
    CHECK(reread.entries[i].tokens == dict.entries[i].tokens);
    CHECK(reread.entries[i].gtf == dict.entries[i].gtf);
    CHECK(reread.entries[i].df == dict.entries[i].df);
    CHECK(reread.entries[i].sdf == dict.entries[i].sdf);
  }
  // a second write is byte-identical
  std::ostringstream second;
  write_dictionary(reread, second);
  CHECK(second.str() == first.str());
}

TEST_CASE("dictionary TSV line format") {
  Dictionary dict;
  NGramEntry e;
  e.tokens = {"nullpointerexception"};
  e.gtf = 252;
  e.df = 140;
  e.sdf = 140;
  e.weight = ngram_weight(e, 5590);
  dict.entries.push_back(e);
  dict.rebuild_term_index();
  std::ostringstream out;
  write_dictionary(dict, out);
  std::istringstream lines(out.str());
  std::string header, line;
  std::getline(lines, header);
  CHECK(header == "rank\tngram\tn\tgtf\tdf\tsdf\tweight");
  std::getline(lines, line);
  CHECK(line.substr(0, 31) == "1\tnullpointerexception\t1\t252\t14");
}

TEST_CASE("read_dictionary reports the offending line") {
  std::istringstream in("rank\tngram\tn\tgtf\tdf\tsdf\tweight\n1\tfoo\t1\t2\t2\t2\tnot_a_number\n");
  try {
    read_dictionary(in, "bad.tsv");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}
