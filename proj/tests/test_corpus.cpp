#include <doctest.h>

#include <random>
#include <set>

#include "nusavocab/corpus.hpp"
#include "nusavocab/error.hpp"
#include "nusavocab/parallel.hpp"
#include "support.hpp"

using namespace nusavocab;
using testing_support::doc_line;

TEST_CASE("language registry") {
  const auto r = LanguageRegistry::defaults();
  for (const char* code : {"ind", "jav", "sun", "ace", "msa", "min", "bjn", "ban", "gor", "bug", "nia", "tet"}) {
    CHECK(r.contains(code));
  }
  CHECK_FALSE(r.contains("eng"));
}

TEST_CASE("parse_document_line") {
  const auto r = LanguageRegistry::defaults();
  CHECK(std::holds_alternative<Document>(parse_document_line(doc_line("1", "ind", "wiki", "halo"), r)));
  CHECK(std::get<std::string>(parse_document_line("{", r)) == "malformed JSON");
  CHECK(std::get<std::string>(parse_document_line(doc_line("1", "xxx", "wiki", "halo"), r)).find("xxx") !=
        std::string::npos);
  CHECK(std::holds_alternative<std::string>(parse_document_line(R"({"id":"1","lang":"ind","source":"w"})", r)));
  CHECK(std::holds_alternative<std::string>(parse_document_line(R"({"id":1,"lang":"ind","source":"w","text":"a"})", r)));
}

TEST_CASE("document json round trip") {
  const Document d{"x\"1", "jav", "cc100", "baris\nkapindho \xc3\xa9"};
  const auto parsed = parse_document_line(document_to_json(d), LanguageRegistry::defaults());
  CHECK(std::get<Document>(parsed) == d);
}

TEST_CASE("ingest") {
  testing_support::TempDir dir;
  const auto r = LanguageRegistry::defaults();
  CHECK(ingest({}, r).documents.empty());

  const auto p = dir.write("a.jsonl", doc_line("1", "ind", "w", "satu") + "\n{oops\n\n" + doc_line("2", "sun", "w", "dua") + "\n");
  const std::vector<std::filesystem::path> paths{p};
  const IngestResult res = ingest(paths, r);
  CHECK(res.documents.size() == 2);
  REQUIRE(res.rejections.size() == 1);
  CHECK(res.rejections[0].line == 2);
  CHECK(res.manifest.total_documents == 2);
  CHECK(res.manifest.total_characters == 7);

  const auto q = dir.write("b.jsonl", doc_line("1", "ind", "w", "dup id") + "\n");
  const std::vector<std::filesystem::path> both{p, q};
  CHECK(ingest(both, r).rejections.size() == 2);

  const std::vector<std::filesystem::path> missing{dir / "nope.jsonl"};
  CHECK_THROWS_AS(ingest(missing, r), IoError);
}

TEST_CASE("deduplicate") {
  const Document a{"1", "ind", "w", "sama  saja"}, a2{"2", "ind", "w", "sama saja"}, b{"3", "ind", "w", "beda"};
  const std::vector<Document> distinct{a, b};
  CHECK(deduplicate(distinct) == distinct);
  const std::vector<Document> dup{a, a2, b};
  CHECK(deduplicate(dup) == std::vector<Document>{a, b});

  std::mt19937_64 gen(8);
  std::vector<Document> docs;
  for (int i = 0; i < 300; ++i) docs.push_back({std::to_string(i), "ind", "w", testing_support::random_sentence(gen, 2, "ab")});
  const auto once = deduplicate(docs);
  CHECK(deduplicate(once) == once);
  // First occurrences survive in their original order.
  std::set<std::string> seen;
  std::vector<Document> expected;
  for (const auto& d : docs) {
    if (seen.insert(d.text).second) expected.push_back(d);
  }
  CHECK(once == expected);
}

TEST_CASE("holdout split") {
  std::vector<Document> docs;
  for (int i = 0; i < 100; ++i) docs.push_back({std::to_string(i), "ind", "w", "t" + std::to_string(i)});
  CHECK(holdout_split(docs, 0.0, 1).eval.empty());
  const auto s = holdout_split(docs, 0.05, 1);
  CHECK(s.eval.size() == 5);
  CHECK(s.train.size() == 95);
  std::set<std::string> ids;
  for (const auto& d : s.train) ids.insert(d.id);
  for (const auto& d : s.eval) CHECK(ids.insert(d.id).second);
  CHECK(ids.size() == 100);
  CHECK_THROWS_AS(holdout_split(docs, 1.5, 1), DataError);

  for (std::size_t n : {0u, 1u, 7u, 33u, 999u}) {
    for (double f : {0.0, 0.05, 0.5, 1.0}) {
      const auto idx = holdout_indices(n, f, 42);
      CHECK(idx.size() == static_cast<std::size_t>(std::llround(f * double(n))));
      CHECK(std::is_sorted(idx.begin(), idx.end()));
      CHECK(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
    }
  }
}

TEST_CASE("holdout inclusion frequency is uniform") {
  // 4000 seeds keep the per-document binomial noise well inside the band.
  const std::size_t n = 1000, seeds = 4000;
  std::vector<std::size_t> hits(n, 0);
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    for (std::size_t i : holdout_indices(n, 0.05, seed)) ++hits[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double freq = double(hits[i]) / double(seeds);
    CHECK(freq >= 0.03);
    CHECK(freq <= 0.07);
  }
}

TEST_CASE("language stats") {
  CHECK(language_stats({}).total_documents == 0);
  std::vector<Document> docs{{"1", "jav", "w", "a"}, {"2", "sun", "w", "b"}, {"3", "jav", "c", "c"}};
  const auto m = language_stats(docs);
  const auto langs = m.languages();
  REQUIRE(langs.size() == 2);
  CHECK(langs[0].key == "jav");
  CHECK(langs[0].counts.documents == 2);
  CHECK(langs[1].counts.documents == 1);
  CHECK(m.total_documents == 3);
  std::reverse(docs.begin(), docs.end());
  CHECK(language_stats(docs) == m);
}

TEST_CASE("corpus ops are thread-count independent") {
  std::mt19937_64 gen(12);
  std::vector<Document> docs;
  for (int i = 0; i < 500; ++i) docs.push_back({std::to_string(i), "ind", "w", testing_support::random_sentence(gen, 2, "abc")});
  set_worker_count(1);
  const auto d1 = deduplicate(docs);
  set_worker_count(8);
  const auto d8 = deduplicate(docs);
  set_worker_count(0);
  CHECK(d1 == d8);
}
