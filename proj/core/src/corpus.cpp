#include "nusavocab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include <openssl/evp.h>

#include <json.hpp>

#include "nusavocab/error.hpp"
#include "nusavocab/io.hpp"
#include "nusavocab/parallel.hpp"
#include "nusavocab/random.hpp"
#include "nusavocab/unicode_text.hpp"

namespace nusavocab {

using json = nlohmann::json;

LanguageRegistry::LanguageRegistry(std::vector<std::string> codes) {
  for (auto& c : codes) codes_.insert(std::move(c));
}

LanguageRegistry LanguageRegistry::defaults() {
  return LanguageRegistry({"ind", "jav", "sun", "ace", "msa", "min", "bjn", "ban", "gor", "bug",
                           "nia", "tet"});
}

void CorpusManifest::add(const Document& doc) {
  auto& counts = by_source_language[{doc.source, doc.lang}];
  const std::uint64_t chars = text::count_code_points(doc.text);
  counts.documents += 1;
  counts.characters += chars;
  total_documents += 1;
  total_characters += chars;
}

void CorpusManifest::merge(const CorpusManifest& other) {
  for (const auto& [key, counts] : other.by_source_language) {
    auto& mine = by_source_language[key];
    mine.documents += counts.documents;
    mine.characters += counts.characters;
  }
  total_documents += other.total_documents;
  total_characters += other.total_characters;
}

namespace {

std::vector<CorpusManifest::Row> sorted_rows(std::map<std::string, DocumentCounts> grouped) {
  std::vector<CorpusManifest::Row> rows;
  rows.reserve(grouped.size());
  for (auto& [key, counts] : grouped) rows.push_back({key, counts});
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.counts.documents > b.counts.documents;
  });
  return rows;
}

}  // namespace

std::vector<CorpusManifest::Row> CorpusManifest::languages() const {
  std::map<std::string, DocumentCounts> grouped;
  for (const auto& [key, counts] : by_source_language) {
    auto& g = grouped[key.second];
    g.documents += counts.documents;
    g.characters += counts.characters;
  }
  return sorted_rows(std::move(grouped));
}

std::vector<CorpusManifest::Row> CorpusManifest::sources() const {
  std::map<std::string, DocumentCounts> grouped;
  for (const auto& [key, counts] : by_source_language) {
    auto& g = grouped[key.first];
    g.documents += counts.documents;
    g.characters += counts.characters;
  }
  return sorted_rows(std::move(grouped));
}

std::variant<Document, std::string> parse_document_line(std::string_view line,
                                                        const LanguageRegistry& registry) {
  json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (record.is_discarded()) return std::string("malformed JSON");
  if (!record.is_object()) return std::string("record is not a JSON object");

  Document doc;
  for (auto [key, field] : {std::pair{"id", &doc.id}, std::pair{"lang", &doc.lang},
                            std::pair{"source", &doc.source}, std::pair{"text", &doc.text}}) {
    auto it = record.find(key);
    if (it == record.end()) return std::string("missing field '") + key + "'";
    if (!it->is_string()) return std::string("field '") + key + "' is not a string";
    *field = it->get<std::string>();
  }
  if (doc.id.empty()) return std::string("empty id");
  if (doc.text.empty()) return std::string("empty text");
  if (!registry.contains(doc.lang)) return "unknown language code '" + doc.lang + "'";
  return doc;
}

std::string document_to_json(const Document& doc) {
  json record = {{"id", doc.id}, {"lang", doc.lang}, {"source", doc.source}, {"text", doc.text}};
  return record.dump();
}

std::string documents_to_jsonl(std::span<const Document> docs) {
  std::string out;
  for (const Document& doc : docs) {
    out += document_to_json(doc);
    out += '\n';
  }
  return out;
}

IngestResult ingest(std::span<const std::filesystem::path> paths, const LanguageRegistry& registry) {
  struct FileResult {
    std::vector<Document> documents;
    std::vector<Rejection> rejections;
  };
  std::vector<FileResult> per_file(paths.size());

  parallel_for(paths.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t f = begin; f < end; ++f) {
      const std::string content = read_file(paths[f]);
      FileResult& result = per_file[f];
      std::size_t pos = 0;
      std::size_t line_no = 0;
      while (pos < content.size()) {
        std::size_t eol = content.find('\n', pos);
        if (eol == std::string::npos) eol = content.size();
        std::string_view line(content.data() + pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        auto parsed = parse_document_line(line, registry);
        if (auto* doc = std::get_if<Document>(&parsed)) {
          result.documents.push_back(std::move(*doc));
        } else {
          result.rejections.push_back({paths[f].string(), line_no, std::get<std::string>(parsed)});
        }
      }
    }
  });

  IngestResult out;
  std::unordered_set<std::string> seen_ids;
  for (std::size_t f = 0; f < per_file.size(); ++f) {
    for (Document& doc : per_file[f].documents) {
      if (!seen_ids.insert(doc.id).second) {
        out.rejections.push_back({paths[f].string(), 0, "duplicate id '" + doc.id + "'"});
        continue;
      }
      out.manifest.add(doc);
      out.documents.push_back(std::move(doc));
    }
    for (Rejection& r : per_file[f].rejections) out.rejections.push_back(std::move(r));
  }
  return out;
}

ContentHash content_hash(std::string_view text_in) {
  const std::string collapsed = text::collapse_whitespace(text_in);
  ContentHash digest{};
  unsigned int length = 0;
  if (EVP_Digest(collapsed.data(), collapsed.size(), digest.data(), &length, EVP_md5(), nullptr) != 1 ||
      length != digest.size()) {
    throw Error("MD5 digest failed");
  }
  return digest;
}

std::vector<Document> deduplicate(std::span<const Document> documents) {
  std::vector<ContentHash> hashes(documents.size());
  parallel_for(documents.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) hashes[i] = content_hash(documents[i].text);
  });

  struct HashOf {
    std::size_t operator()(const ContentHash& h) const noexcept {
      std::size_t v = 0;
      std::memcpy(&v, h.data(), sizeof v);
      return v;
    }
  };
  std::unordered_set<ContentHash, HashOf> seen;
  seen.reserve(documents.size());
  std::vector<Document> out;
  for (std::size_t i = 0; i < documents.size(); ++i) {
    if (seen.insert(hashes[i]).second) out.push_back(documents[i]);
  }
  return out;
}

std::vector<std::size_t> holdout_indices(std::size_t n, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw DataError("holdout fraction must be in [0, 1], got " + std::to_string(fraction));
  }
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  CounterRng rng(rng::derive_key(seed, 0x686f6c646f7574ULL));
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(order[i], order[j]);
  }
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

HoldoutSplit holdout_split(std::span<const Document> documents, double fraction, std::uint64_t seed) {
  const std::vector<std::size_t> eval = holdout_indices(documents.size(), fraction, seed);
  HoldoutSplit split;
  split.eval.reserve(eval.size());
  split.train.reserve(documents.size() - eval.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < documents.size(); ++i) {
    if (next < eval.size() && eval[next] == i) {
      split.eval.push_back(documents[i]);
      ++next;
    } else {
      split.train.push_back(documents[i]);
    }
  }
  return split;
}

CorpusManifest language_stats(std::span<const Document> documents) {
  const std::size_t chunks = std::max<std::size_t>(1, std::min(worker_count(), documents.size()));
  std::vector<CorpusManifest> partial(chunks);
  parallel_for(chunks, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      const std::size_t lo = documents.size() * c / chunks;
      const std::size_t hi = documents.size() * (c + 1) / chunks;
      for (std::size_t i = lo; i < hi; ++i) partial[c].add(documents[i]);
    }
  });
  CorpusManifest manifest;
  for (const auto& p : partial) manifest.merge(p);
  return manifest;
}

}  // namespace nusavocab
