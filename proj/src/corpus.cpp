#include "bugclass/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "bugclass/error.hpp"

namespace bugclass {

namespace {

constexpr std::size_t kMaxTokenLength = 64;

bool is_token_char(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); }

// RFC-4180-ish CSV: quoted fields may contain commas, escaped quotes and
// newlines. Returns one vector of fields per record.
std::vector<std::vector<std::string>> read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool any_data = false;
  int c;
  while ((c = in.get()) != EOF) {
    const char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        in_quotes = true;
        any_data = true;
        break;
      case ',':
        fields.push_back(std::move(field));
        field.clear();
        any_data = true;
        break;
      case '\r':
        break;
      case '\n':
        if (any_data || !field.empty() || !fields.empty()) {
          fields.push_back(std::move(field));
          field.clear();
          records.push_back(std::move(fields));
          fields.clear();
          any_data = false;
        }
        break;
      default:
        field.push_back(ch);
        any_data = true;
        break;
    }
  }
  if (any_data || !field.empty() || !fields.empty()) {
    fields.push_back(std::move(field));
    records.push_back(std::move(fields));
  }
  return records;
}

// Days since 1970-01-01 for a civil date (Hinnant's algorithm).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

unsigned days_in_month(std::int64_t y, unsigned m) {
  static constexpr std::array<unsigned, 12> lengths = {31, 28, 31, 30, 31, 30,
                                                       31, 31, 30, 31, 30, 31};
  if (m == 2) {
    const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    return leap ? 29 : 28;
  }
  return lengths[m - 1];
}

bool parse_fixed_uint(const std::string& s, std::size_t pos, std::size_t len, unsigned& out) {
  unsigned value = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (i >= s.size() || s[i] < '0' || s[i] > '9') return false;
    value = value * 10 + static_cast<unsigned>(s[i] - '0');
  }
  out = value;
  return true;
}

const std::set<std::string>& corrected_type_set() {
  static const std::set<std::string> kTypes = {"BUG",     "RFE",  "IMPR", "DOC",
                                               "REFAC",   "BACKPORT", "CLEANUP",
                                               "SPEC",    "TASK", "TEST", "OTHER"};
  return kTypes;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view raw) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && current.size() <= kMaxTokenLength) tokens.push_back(current);
    current.clear();
  };
  for (const char c : raw) {
    const char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (is_token_char(lower)) {
      current.push_back(lower);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

Label label_from_corrected_type(const std::string& corrected_type) {
  if (!corrected_type_set().count(corrected_type)) {
    raise(ErrorCode::BadLabel, "unknown corrected_type '" + corrected_type + "'");
  }
  return corrected_type == "BUG" ? Label::Bug : Label::NonBug;
}

std::int64_t parse_iso8601_utc(const std::string& text) {
  // YYYY-MM-DDTHH:MM:SS followed by Z or +hh:mm / -hh:mm
  unsigned year, month, day, hour, minute, second;
  const bool shape_ok =
      text.size() >= 20 && parse_fixed_uint(text, 0, 4, year) && text[4] == '-' &&
      parse_fixed_uint(text, 5, 2, month) && text[7] == '-' &&
      parse_fixed_uint(text, 8, 2, day) && text[10] == 'T' &&
      parse_fixed_uint(text, 11, 2, hour) && text[13] == ':' &&
      parse_fixed_uint(text, 14, 2, minute) && text[16] == ':' &&
      parse_fixed_uint(text, 17, 2, second);
  if (!shape_ok) raise(ErrorCode::BadTimestamp, "'" + text + "' is not ISO-8601");

  std::int64_t offset = 0;
  const std::string tail = text.substr(19);
  if (tail == "Z") {
    offset = 0;
  } else if (tail.size() == 6 && (tail[0] == '+' || tail[0] == '-') && tail[3] == ':') {
    unsigned oh, om;
    if (!parse_fixed_uint(tail, 1, 2, oh) || !parse_fixed_uint(tail, 4, 2, om) || oh > 23 ||
        om > 59) {
      raise(ErrorCode::BadTimestamp, "'" + text + "' has a malformed UTC offset");
    }
    offset = static_cast<std::int64_t>(oh) * 3600 + om * 60;
    if (tail[0] == '-') offset = -offset;
  } else {
    raise(ErrorCode::BadTimestamp, "'" + text + "' has a malformed UTC offset");
  }

  if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month) || hour > 23 ||
      minute > 59 || second > 59) {
    raise(ErrorCode::BadTimestamp, "'" + text + "' is out of range");
  }
  const std::int64_t days = days_from_civil(year, month, day);
  return days * 86400 + hour * 3600 + minute * 60 + second - offset;
}

std::string format_iso8601_utc(std::int64_t seconds) {
  // Inverse of days_from_civil (Hinnant's civil_from_days).
  std::int64_t days = seconds / 86400;
  std::int64_t rem = seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  std::int64_t z = days + 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  const std::int64_t year = y + (m <= 2);

  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(year), m, d, static_cast<long long>(rem / 3600),
                static_cast<long long>((rem / 60) % 60), static_cast<long long>(rem % 60));
  return std::string(buf);
}

std::vector<LabelRecord> parse_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open label file '" + path + "'");
  return parse_labels(in, path);
}

std::vector<LabelRecord> parse_labels(std::istream& in, const std::string& name) {
  const auto records = read_csv(in);
  if (records.empty()) raise(ErrorCode::MissingColumn, name + ": empty label file");

  static constexpr std::array<const char*, 5> kRequired = {
      "project", "report_id", "original_type", "corrected_type", "created_at"};
  const auto& header = records.front();
  std::array<std::size_t, 5> col{};
  for (std::size_t i = 0; i < kRequired.size(); ++i) {
    const auto it = std::find(header.begin(), header.end(), kRequired[i]);
    if (it == header.end()) {
      raise(ErrorCode::MissingColumn, name + ": header lacks '" + kRequired[i] + "'");
    }
    col[i] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<LabelRecord> result;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& row = records[r];
    const std::string where = name + " row " + std::to_string(r + 1);
    if (row.size() < header.size()) {
      raise(ErrorCode::ParseError, where + ": expected " + std::to_string(header.size()) +
                                       " fields, got " + std::to_string(row.size()));
    }
    LabelRecord rec;
    rec.project = row[col[0]];
    rec.report_id = row[col[1]];
    rec.original_type = row[col[2]];
    rec.corrected_type = row[col[3]];
    if (rec.report_id.empty()) raise(ErrorCode::ParseError, where + ": empty report_id");
    label_from_corrected_type(rec.corrected_type);  // closed-set check
    try {
      rec.created_at = parse_iso8601_utc(row[col[4]]);
    } catch (const Error& e) {
      raise(ErrorCode::BadTimestamp, where + ": " + e.what());
    }
    if (!seen.insert({rec.project, rec.report_id}).second) {
      raise(ErrorCode::DuplicateId, where + ": duplicate (" + rec.project + ", " +
                                        rec.report_id + ")");
    }
    result.push_back(std::move(rec));
  }
  return result;
}

Corpus::Corpus(std::vector<Document> docs) : docs_(std::move(docs)) {
  std::set<std::string> distinct;
  for (const auto& doc : docs_) {
    distinct.insert(doc.tokens.begin(), doc.tokens.end());
  }
  vocab_.assign(distinct.begin(), distinct.end());

  std::unordered_map<std::string_view, std::uint32_t> rank;
  rank.reserve(vocab_.size());
  for (std::uint32_t i = 0; i < vocab_.size(); ++i) rank.emplace(vocab_[i], i);

  const auto num_docs = static_cast<std::uint32_t>(docs_.size());
  std::size_t total = docs_.size();
  for (const auto& doc : docs_) total += doc.tokens.size();
  stream_.reserve(total);
  doc_offsets_.reserve(docs_.size());
  for (std::uint32_t d = 0; d < docs_.size(); ++d) {
    doc_offsets_.push_back(stream_.size());
    for (const auto& tok : docs_[d].tokens) {
      stream_.push_back(num_docs + rank.find(tok)->second);
    }
    stream_.push_back(d);  // sentinel
  }
}

const std::string& Corpus::token_of(std::uint32_t id) const { return vocab_[rank_of(id)]; }

std::optional<std::uint32_t> Corpus::id_of(const std::string& token) const {
  const auto it = std::lower_bound(vocab_.begin(), vocab_.end(), token);
  if (it == vocab_.end() || *it != token) return std::nullopt;
  return static_cast<std::uint32_t>(docs_.size() + (it - vocab_.begin()));
}

std::optional<std::int64_t> Corpus::created_at_of(const DocId& id) const {
  for (const auto& doc : docs_) {
    if (doc.id == id) return doc.created_at;
  }
  return std::nullopt;
}

std::map<DocId, std::int64_t> Corpus::timestamps() const {
  std::map<DocId, std::int64_t> out;
  for (const auto& doc : docs_) out.emplace(doc.id, doc.created_at);
  return out;
}

Corpus build_corpus(const std::vector<LabelRecord>& labels,
                    const std::map<std::pair<std::string, std::string>, std::string>& texts) {
  std::vector<Document> docs;
  docs.reserve(labels.size());
  for (const auto& rec : labels) {
    const auto it = texts.find({rec.project, rec.report_id});
    if (it == texts.end()) {
      raise(ErrorCode::MissingText, "no text for (" + rec.project + ", " + rec.report_id + ")");
    }
    Document doc;
    doc.id = {rec.project, rec.report_id};
    doc.tokens = tokenize(it->second);
    doc.label = label_from_corrected_type(rec.corrected_type);
    doc.created_at = rec.created_at;
    docs.push_back(std::move(doc));
  }
  return Corpus(std::move(docs));
}

Corpus merge_corpora(const std::vector<Corpus>& corpora) {
  std::vector<Document> docs;
  std::set<DocId> seen;
  for (const auto& corpus : corpora) {
    for (const auto& doc : corpus.documents()) {
      if (!seen.insert(doc.id).second) {
        raise(ErrorCode::DuplicateId, "duplicate doc_id " + doc.id.str());
      }
      docs.push_back(doc);
    }
  }
  return Corpus(std::move(docs));
}

}  // namespace bugclass
