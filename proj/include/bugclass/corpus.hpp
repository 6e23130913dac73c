#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bugclass {

enum class Label : int { NonBug = 0, Bug = 1 };

struct DocId {
  std::string project;
  std::string report_id;

  auto operator<=>(const DocId&) const = default;
  std::string str() const { return project + "/" + report_id; }
};

struct LabelRecord {
  std::string project;
  std::string report_id;
  std::string original_type;
  std::string corrected_type;
  std::int64_t created_at = 0;  // seconds since epoch, UTC
};

struct Document {
  DocId id;
  std::vector<std::string> tokens;
  Label label = Label::NonBug;
  std::int64_t created_at = 0;
};

// Immutable tokenized corpus. Alongside the documents it keeps an integer
// token stream for the suffix machinery: sentinel ids are 0..D-1 (one per
// document, appended after the document's tokens) and real tokens get
// D + rank, where rank is the token's position in the sorted vocabulary.
// Hence id order equals lexicographic token order and every sentinel sorts
// below every real token while staying distinct from the other sentinels.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Document> docs);

  const std::vector<Document>& documents() const { return docs_; }
  std::size_t num_docs() const { return docs_.size(); }
  const std::vector<std::uint32_t>& token_stream() const { return stream_; }
  const std::vector<std::size_t>& doc_offsets() const { return doc_offsets_; }
  const std::vector<std::string>& vocab() const { return vocab_; }

  bool is_sentinel(std::uint32_t id) const { return id < docs_.size(); }
  // Token string for a real-token id.
  const std::string& token_of(std::uint32_t id) const;
  // Vocabulary rank of a real-token id.
  std::uint32_t rank_of(std::uint32_t id) const {
    return id - static_cast<std::uint32_t>(docs_.size());
  }
  // Real-token id for a token string, if the token occurs in the corpus.
  std::optional<std::uint32_t> id_of(const std::string& token) const;

  std::optional<std::int64_t> created_at_of(const DocId& id) const;
  // doc_id -> created_at for every document.
  std::map<DocId, std::int64_t> timestamps() const;

 private:
  std::vector<Document> docs_;
  std::vector<std::string> vocab_;
  std::vector<std::uint32_t> stream_;
  std::vector<std::size_t> doc_offsets_;
};

// Lowercases, maps every character outside [a-z0-9] to a space, splits on
// whitespace runs and drops tokens longer than 64 characters.
std::vector<std::string> tokenize(std::string_view raw);

// Closed corrected_type set; throws BadLabel for anything else.
Label label_from_corrected_type(const std::string& corrected_type);

// Strict "YYYY-MM-DDTHH:MM:SS(Z|+hh:mm|-hh:mm)"; throws BadTimestamp.
std::int64_t parse_iso8601_utc(const std::string& text);
std::string format_iso8601_utc(std::int64_t seconds);

std::vector<LabelRecord> parse_labels(const std::string& path);
std::vector<LabelRecord> parse_labels(std::istream& in, const std::string& name);

Corpus build_corpus(const std::vector<LabelRecord>& labels,
                    const std::map<std::pair<std::string, std::string>, std::string>& texts);

Corpus merge_corpora(const std::vector<Corpus>& corpora);

}  // namespace bugclass
