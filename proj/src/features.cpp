#include "bugclass/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include "bugclass/error.hpp"
#include "bugclass/suffix_index.hpp"

namespace bugclass {

double SparseRow::value_of(std::uint32_t ordinal) const {
  const auto it = std::lower_bound(
      items.begin(), items.end(), ordinal,
      [](const SparseItem& item, std::uint32_t o) { return item.ordinal < o; });
  return (it != items.end() && it->ordinal == ordinal) ? it->value : 0.0;
}

SparseFeatureMatrix SparseFeatureMatrix::subset(const std::vector<std::size_t>& row_indices) const {
  SparseFeatureMatrix out;
  out.num_features = num_features;
  out.feature_names = feature_names;
  out.rows.reserve(row_indices.size());
  for (const std::size_t i : row_indices) out.rows.push_back(rows[i]);
  return out;
}

std::vector<Label> SparseFeatureMatrix::labels() const {
  std::vector<Label> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row.label);
  return out;
}

namespace {

// sa range [lo, hi) of suffixes whose first pattern.size() tokens equal
// pattern.
std::pair<std::size_t, std::size_t> sa_range(const std::vector<std::uint32_t>& stream,
                                             const std::vector<std::uint32_t>& sa,
                                             const std::vector<std::uint32_t>& pattern) {
  // -1: prefix < pattern, 0: equal, +1: prefix > pattern
  auto cmp = [&](std::uint32_t pos) -> int {
    for (std::size_t j = 0; j < pattern.size(); ++j) {
      if (pos + j >= stream.size()) return -1;  // suffix exhausted, sorts first
      if (stream[pos + j] < pattern[j]) return -1;
      if (stream[pos + j] > pattern[j]) return 1;
    }
    return 0;
  };
  const auto lo = std::partition_point(sa.begin(), sa.end(),
                                       [&](std::uint32_t pos) { return cmp(pos) < 0; });
  const auto hi = std::partition_point(lo, sa.end(),
                                       [&](std::uint32_t pos) { return cmp(pos) == 0; });
  return {static_cast<std::size_t>(lo - sa.begin()), static_cast<std::size_t>(hi - sa.begin())};
}

}  // namespace

SparseFeatureMatrix vectorize(const Corpus& corpus, const Dictionary& dict) {
  SparseFeatureMatrix m;
  m.num_features = static_cast<std::uint32_t>(dict.entries.size());
  m.feature_names.reserve(dict.entries.size());
  for (const auto& e : dict.entries) m.feature_names.push_back(e.text());
  m.rows.resize(corpus.num_docs());
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    m.rows[d].doc_id = corpus.documents()[d].id;
    m.rows[d].label = corpus.documents()[d].label;
  }
  if (corpus.num_docs() == 0) return m;

  const SuffixIndex index = build_suffix_index(corpus);
  const auto& stream = corpus.token_stream();

  std::vector<std::uint32_t> pattern;
  std::vector<std::uint32_t> touched;
  std::vector<double> doc_count(corpus.num_docs(), 0.0);
  for (std::uint32_t t = 0; t < dict.entries.size(); ++t) {
    pattern.clear();
    bool in_vocab = true;
    for (const auto& tok : dict.entries[t].tokens) {
      const auto id = corpus.id_of(tok);
      if (!id) {
        in_vocab = false;
        break;
      }
      pattern.push_back(*id);
    }
    if (!in_vocab) continue;
    const auto [lo, hi] = sa_range(stream, index.sa, pattern);
    touched.clear();
    for (std::size_t i = lo; i < hi; ++i) {
      const std::uint32_t d = index.doc_of[index.sa[i]];
      if (doc_count[d] == 0.0) touched.push_back(d);
      doc_count[d] += 1.0;
    }
    for (const std::uint32_t d : touched) {
      m.rows[d].items.push_back({t, doc_count[d]});
      doc_count[d] = 0.0;
    }
  }
  // Terms were visited in ascending ordinal order, so rows are already sorted.
  return m;
}

std::vector<double> chi2_scores(const SparseFeatureMatrix& m) {
  double class_total[2] = {0.0, 0.0};
  for (const auto& row : m.rows) {
    for (const auto& item : row.items) class_total[static_cast<int>(row.label)] += item.value;
  }
  if (class_total[0] <= 0.0 || class_total[1] <= 0.0) {
    raise(ErrorCode::DegenerateClass, "a class has zero total feature count");
  }
  const double grand = class_total[0] + class_total[1];
  const double share[2] = {class_total[0] / grand, class_total[1] / grand};

  std::vector<double> observed_bug(m.num_features, 0.0), total(m.num_features, 0.0);
  for (const auto& row : m.rows) {
    for (const auto& item : row.items) {
      total[item.ordinal] += item.value;
      if (row.label == Label::Bug) observed_bug[item.ordinal] += item.value;
    }
  }
  std::vector<double> scores(m.num_features, 0.0);
  for (std::uint32_t f = 0; f < m.num_features; ++f) {
    if (total[f] <= 0.0) continue;  // absent feature, no evidence either way
    const double observed[2] = {total[f] - observed_bug[f], observed_bug[f]};
    double stat = 0.0;
    for (int c = 0; c < 2; ++c) {
      const double expected = share[c] * total[f];
      const double diff = observed[c] - expected;
      stat += diff * diff / expected;
    }
    scores[f] = stat;
  }
  return scores;
}

SelectionResult select_chi2(const SparseFeatureMatrix& m, std::size_t k) {
  if (k < 1) raise(ErrorCode::InvalidArgument, "k must be >= 1");
  const std::vector<double> scores = chi2_scores(m);
  std::vector<std::uint32_t> order(m.num_features);
  for (std::uint32_t f = 0; f < m.num_features; ++f) order[f] = f;
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  order.resize(std::min<std::size_t>(k, order.size()));
  std::sort(order.begin(), order.end());

  SelectionResult result;
  result.method = SelectionMethod::Chi2;
  result.kept = std::move(order);
  result.scores.reserve(result.kept.size());
  for (const std::uint32_t f : result.kept) result.scores.push_back(scores[f]);
  return result;
}

double symmetrical_uncertainty(std::size_t n00, std::size_t n01, std::size_t n10,
                               std::size_t n11) {
  const double n = static_cast<double>(n00 + n01 + n10 + n11);
  if (n == 0.0) return 0.0;
  auto h = [](std::initializer_list<double> probs) {
    double out = 0.0;
    for (const double p : probs) {
      if (p > 0.0) out -= p * std::log2(p);
    }
    return out;
  };
  const double x1 = static_cast<double>(n10 + n11) / n;
  const double y1 = static_cast<double>(n01 + n11) / n;
  const double hx = h({x1, 1.0 - x1});
  const double hy = h({y1, 1.0 - y1});
  const double hxy = h({static_cast<double>(n00) / n, static_cast<double>(n01) / n,
                        static_cast<double>(n10) / n, static_cast<double>(n11) / n});
  const double denom = hx + hy;
  if (denom <= 0.0) return 0.0;
  return 2.0 * (hx + hy - hxy) / denom;
}

CfsData cfs_prepare(const SparseFeatureMatrix& m) {
  CfsData data;
  data.num_docs = m.rows.size();
  data.labels.reserve(m.rows.size());
  for (const auto& row : m.rows) {
    data.labels.push_back(row.label == Label::Bug ? 1 : 0);
    if (row.label == Label::Bug) ++data.num_bug;
  }
  if (data.num_bug == 0 || data.num_bug == data.num_docs) {
    raise(ErrorCode::DegenerateClass, "both classes must be present");
  }
  data.presence.resize(m.num_features);
  for (std::uint32_t r = 0; r < m.rows.size(); ++r) {
    for (const auto& item : m.rows[r].items) {
      if (item.value != 0.0) data.presence[item.ordinal].push_back(r);
    }
  }
  data.class_su.resize(m.num_features);
  for (std::uint32_t f = 0; f < m.num_features; ++f) {
    std::size_t n11 = 0;
    for (const std::uint32_t d : data.presence[f]) n11 += data.labels[d];
    const std::size_t n1x = data.presence[f].size();
    const std::size_t n10 = n1x - n11;
    const std::size_t n01 = data.num_bug - n11;
    const std::size_t n00 = data.num_docs - n1x - n01;
    data.class_su[f] = symmetrical_uncertainty(n00, n01, n10, n11);
  }
  return data;
}

double cfs_pair_su(const CfsData& data, std::uint32_t a, std::uint32_t b) {
  const auto& pa = data.presence[a];
  const auto& pb = data.presence[b];
  std::size_t both = 0;
  std::size_t i = 0, j = 0;
  while (i < pa.size() && j < pb.size()) {
    if (pa[i] < pb[j]) {
      ++i;
    } else if (pa[i] > pb[j]) {
      ++j;
    } else {
      ++both;
      ++i;
      ++j;
    }
  }
  const std::size_t n11 = both;
  const std::size_t n10 = pa.size() - both;   // a only
  const std::size_t n01 = pb.size() - both;   // b only
  const std::size_t n00 = data.num_docs - pa.size() - n01;
  return symmetrical_uncertainty(n00, n01, n10, n11);
}

double cfs_merit(const CfsData& data, const std::vector<std::uint32_t>& subset) {
  const std::size_t k = subset.size();
  if (k == 0) return 0.0;
  double rcf = 0.0;
  for (const std::uint32_t f : subset) rcf += data.class_su[f];
  rcf /= static_cast<double>(k);
  double rff = 0.0;
  if (k > 1) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        rff += cfs_pair_su(data, subset[i], subset[j]);
      }
    }
    rff /= static_cast<double>(k * (k - 1) / 2);
  }
  const double kd = static_cast<double>(k);
  return kd * rcf / std::sqrt(kd + kd * (kd - 1.0) * rff);
}

SelectionResult select_cfs(const SparseFeatureMatrix& m) {
  if (m.num_features < 2) raise(ErrorCode::InvalidArgument, "CFS needs at least 2 features");
  const CfsData data = cfs_prepare(m);

  // Best-first forward search: pop the best open subset, expand by one
  // feature, stop after 5 consecutive expansions without a new global best.
  struct Node {
    double merit;
    std::vector<std::uint32_t> subset;  // sorted
    bool operator<(const Node& other) const { return merit < other.merit; }
  };
  std::priority_queue<Node> open;
  std::set<std::vector<std::uint32_t>> visited;
  open.push({0.0, {}});
  visited.insert({});

  std::vector<std::uint32_t> best_subset;
  double best_merit = 0.0;
  int stale = 0;
  constexpr int kMaxStale = 5;
  constexpr double kImprovementEps = 1e-12;

  while (!open.empty() && stale < kMaxStale) {
    const Node node = open.top();
    open.pop();
    bool improved = false;
    for (std::uint32_t f = 0; f < m.num_features; ++f) {
      if (std::binary_search(node.subset.begin(), node.subset.end(), f)) continue;
      std::vector<std::uint32_t> child = node.subset;
      child.insert(std::upper_bound(child.begin(), child.end(), f), f);
      if (!visited.insert(child).second) continue;
      const double merit = cfs_merit(data, child);
      if (merit > best_merit + kImprovementEps) {
        best_merit = merit;
        best_subset = child;
        improved = true;
      }
      open.push({merit, std::move(child)});
    }
    stale = improved ? 0 : stale + 1;
  }

  SelectionResult result;
  result.method = SelectionMethod::Cfs;
  result.kept = best_subset;
  result.merit = best_merit;
  result.scores.assign(result.kept.size(), best_merit);
  return result;
}

SparseFeatureMatrix apply_selection(const SparseFeatureMatrix& m, const SelectionResult& s) {
  for (const std::uint32_t f : s.kept) {
    if (f >= m.num_features) {
      raise(ErrorCode::InvalidArgument, "selection refers to ordinal " + std::to_string(f) +
                                            " but the matrix has " +
                                            std::to_string(m.num_features) + " features");
    }
  }
  std::vector<std::uint32_t> remap(m.num_features, UINT32_MAX);
  for (std::uint32_t i = 0; i < s.kept.size(); ++i) remap[s.kept[i]] = i;

  SparseFeatureMatrix out;
  out.num_features = static_cast<std::uint32_t>(s.kept.size());
  out.feature_names.reserve(s.kept.size());
  for (const std::uint32_t f : s.kept) {
    out.feature_names.push_back(f < m.feature_names.size() ? m.feature_names[f] : "");
  }
  out.rows.reserve(m.rows.size());
  for (const auto& row : m.rows) {
    SparseRow slim;
    slim.doc_id = row.doc_id;
    slim.label = row.label;
    for (const auto& item : row.items) {
      if (remap[item.ordinal] != UINT32_MAX) slim.items.push_back({remap[item.ordinal], item.value});
    }
    out.rows.push_back(std::move(slim));
  }
  return out;
}

namespace {

std::string format_value(double v) {
  if (v == static_cast<double>(static_cast<long long>(v)) && std::abs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

}  // namespace

void write_features(const SparseFeatureMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  for (const auto& row : m.rows) {
    out << (row.label == Label::Bug ? 1 : 0);
    for (const auto& item : row.items) {
      out << ' ' << (item.ordinal + 1) << ':' << format_value(item.value);
    }
    out << '\n';
  }
  if (!out.flush()) raise(ErrorCode::IoError, "failed writing '" + path + "'");

  std::ofstream ids(path + ".docids", std::ios::binary);
  if (!ids) raise(ErrorCode::IoError, "cannot open '" + path + ".docids' for writing");
  for (const auto& row : m.rows) ids << row.doc_id.project << '\t' << row.doc_id.report_id << '\n';
  if (!ids.flush()) raise(ErrorCode::IoError, "failed writing '" + path + ".docids'");

  std::ofstream names(path + ".names", std::ios::binary);
  if (!names) raise(ErrorCode::IoError, "cannot open '" + path + ".names' for writing");
  for (const auto& name : m.feature_names) names << name << '\n';
  if (!names.flush()) raise(ErrorCode::IoError, "failed writing '" + path + ".names'");
}

SparseFeatureMatrix read_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open feature file '" + path + "'");
  SparseFeatureMatrix m;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    int label_value = -1;
    if (!(ss >> label_value) || (label_value != 0 && label_value != 1)) {
      raise(ErrorCode::ParseError, path + " line " + std::to_string(line_no) + ": bad label");
    }
    SparseRow row;
    row.label = label_value == 1 ? Label::Bug : Label::NonBug;
    std::string pair;
    std::uint32_t prev_ordinal = 0;
    bool first = true;
    while (ss >> pair) {
      const auto colon = pair.find(':');
      std::uint32_t ordinal = 0;
      double value = 0.0;
      bool ok = colon != std::string::npos && colon > 0;
      if (ok) {
        try {
          std::size_t pos = 0;
          const unsigned long ord1 = std::stoul(pair.substr(0, colon), &pos);
          ok = pos == colon && ord1 >= 1;
          ordinal = static_cast<std::uint32_t>(ord1 - 1);
          const std::string value_text = pair.substr(colon + 1);
          value = std::stod(value_text, &pos);
          ok = ok && pos == value_text.size();
        } catch (const std::exception&) {
          ok = false;
        }
      }
      if (!ok) {
        raise(ErrorCode::ParseError,
              path + " line " + std::to_string(line_no) + ": bad pair '" + pair + "'");
      }
      if (!first && ordinal <= prev_ordinal) {
        raise(ErrorCode::ParseError,
              path + " line " + std::to_string(line_no) + ": ordinals not ascending");
      }
      first = false;
      prev_ordinal = ordinal;
      row.items.push_back({ordinal, value});
      m.num_features = std::max(m.num_features, ordinal + 1);
    }
    m.rows.push_back(std::move(row));
  }

  std::ifstream names(path + ".names", std::ios::binary);
  if (names) {
    while (std::getline(names, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      m.feature_names.push_back(line);
    }
    m.num_features =
        std::max<std::uint32_t>(m.num_features, static_cast<std::uint32_t>(m.feature_names.size()));
  }

  std::ifstream ids(path + ".docids", std::ios::binary);
  if (ids) {
    std::size_t r = 0;
    while (std::getline(ids, line) && r < m.rows.size()) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto tab = line.find('\t');
      if (tab == std::string::npos) {
        m.rows[r].doc_id = {"", line};
      } else {
        m.rows[r].doc_id = {line.substr(0, tab), line.substr(tab + 1)};
      }
      ++r;
    }
  }
  return m;
}

}  // namespace bugclass
