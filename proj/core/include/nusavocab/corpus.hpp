#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "nusavocab/document.hpp"

namespace nusavocab {

/// Set of accepted ISO 639-3 language codes.
class LanguageRegistry {
 public:
  LanguageRegistry() = default;
  explicit LanguageRegistry(std::vector<std::string> codes);

  // ind plus the twelve regional languages of the pre-training corpus.
  static LanguageRegistry defaults();

  void add(std::string code) { codes_.insert(std::move(code)); }
  bool contains(std::string_view code) const { return codes_.find(code) != codes_.end(); }
  const std::set<std::string, std::less<>>& codes() const noexcept { return codes_; }

 private:
  std::set<std::string, std::less<>> codes_;
};

struct DocumentCounts {
  std::uint64_t documents = 0;
  std::uint64_t characters = 0;  // Unicode code points

  friend bool operator==(const DocumentCounts&, const DocumentCounts&) = default;
};

/// Per (source, language) document and character counts.
struct CorpusManifest {
  std::map<std::pair<std::string, std::string>, DocumentCounts> by_source_language;
  std::uint64_t total_documents = 0;
  std::uint64_t total_characters = 0;

  struct Row {
    std::string key;
    DocumentCounts counts;
  };

  void add(const Document& doc);
  void merge(const CorpusManifest& other);

  // Report views, sorted by descending document count then key.
  std::vector<Row> languages() const;
  std::vector<Row> sources() const;

  friend bool operator==(const CorpusManifest&, const CorpusManifest&) = default;
};

struct Rejection {
  std::string path;
  std::size_t line = 0;  // 1-based
  std::string reason;
};

struct IngestResult {
  std::vector<Document> documents;
  CorpusManifest manifest;
  std::vector<Rejection> rejections;
};

/// Parses one JSONL record with string fields id, lang, source, text.
/// Returns the rejection reason on failure.
std::variant<Document, std::string> parse_document_line(std::string_view line,
                                                        const LanguageRegistry& registry);
std::string document_to_json(const Document& doc);
std::string documents_to_jsonl(std::span<const Document> docs);

/// Reads JSONL files (in parallel, merged in file order). Malformed lines,
/// unknown language codes and repeated ids go to the rejection report; blank
/// lines are skipped. An unreadable file throws IoError.
IngestResult ingest(std::span<const std::filesystem::path> paths, const LanguageRegistry& registry);

using ContentHash = std::array<std::uint8_t, 16>;

/// MD5 of the whitespace-collapsed text.
ContentHash content_hash(std::string_view text);

/// Drops documents whose content hash matches an earlier document. First
/// occurrence wins and survivor order is preserved.
std::vector<Document> deduplicate(std::span<const Document> documents);

struct HoldoutSplit {
  std::vector<Document> train;
  std::vector<Document> eval;
};

/// Eval set size is round(fraction * N); members come from a seeded uniform
/// shuffle of document indices. Both outputs keep input order.
HoldoutSplit holdout_split(std::span<const Document> documents, double fraction, std::uint64_t seed);

// Sorted eval indices for a corpus of n documents.
std::vector<std::size_t> holdout_indices(std::size_t n, double fraction, std::uint64_t seed);

CorpusManifest language_stats(std::span<const Document> documents);

}  // namespace nusavocab
