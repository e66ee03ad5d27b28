#include <doctest.h>

#include <random>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "nusavocab/expansion.hpp"
#include "nusavocab/io.hpp"
#include "support.hpp"

using namespace nusavocab;
using testing_support::TempDir;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string make_corpus(const TempDir& dir, int docs = 120) {
  std::mt19937_64 gen(31);
  std::string body;
  const char* langs[] = {"ind", "jav", "sun"};
  for (int i = 0; i < docs; ++i) {
    body += testing_support::doc_line("doc" + std::to_string(i), langs[i % 3], i % 4 ? "wiki" : "cc100",
                                      testing_support::random_sentence(gen, 12, "abcdefg")) +
            "\n";
  }
  body += testing_support::doc_line("dup", "ind", "wiki", "sama saja") + "\n";
  body += testing_support::doc_line("dup2", "ind", "wiki", "sama  saja") + "\n";
  return dir.write("corpus.jsonl", body).string();
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run({"--help"}).code == cli::kExitOk);
  TempDir dir;
  const std::string corpus = make_corpus(dir);
  const auto r = run({"split", "--input", corpus, "--fraction", "1.5", "--seed", "1", "--train-out",
                      (dir / "t").string(), "--eval-out", (dir / "e").string()});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("1.5") != std::string::npos);
  CHECK(run({"mask", "--input", corpus}).code == cli::kExitUsage);
}

TEST_CASE("data errors exit 2 with a json report") {
  TempDir dir;
  const auto bad = dir.write("bad.txt", "[PAD]\n[PAD]\n");
  const auto cand = dir.write("cand.txt", "[PAD]\n[UNK]\n[CLS]\n[SEP]\n[MASK]\n");
  const auto r = run({"expand-vocab", "--base", bad.string(), "--candidate", cand.string(), "--out", (dir / "o").string()});
  CHECK(r.code == cli::kExitData);
  const auto report = nlohmann::json::parse(r.err);
  CHECK(report["error"]["kind"] == "data_error");
  CHECK_FALSE(std::filesystem::exists(dir / "o"));
}

TEST_CASE("config commands") {
  TempDir dir;
  const auto good = dir.write("cfg.json", R"({"sequence_length":128,"batch_size":256,"peak_learning_rate":0.0003,
    "warmup_steps":24000,"optimization_steps":500000,"scheduler":"linear","optimizer":"adamw","beta1":0.9,
    "beta2":0.999,"epsilon":1e-8,"weight_decay":0.01,"numeric_format":"bfloat16"})");
  CHECK(run({"validate-config", "--file", good.string()}).code == cli::kExitOk);
  const auto bad = dir.write("bad.json", R"({"warmup_steps":600000})");
  const auto r = run({"validate-config", "--file", bad.string()});
  CHECK(r.code == cli::kExitData);
  CHECK(r.out.find("warmup") != std::string::npos);
  const auto b = run({"token-budget", "--file", good.string()});
  CHECK(nlohmann::json::parse(b.out)["tokens"] == 16384000000ULL);
}

TEST_CASE("score command") {
  TempDir dir;
  const auto cls = dir.write("cls.jsonl", R"({"gold":"A","pred":"A"}
{"gold":"A","pred":"B"}
{"gold":"B","pred":"B"}
{"gold":"B","pred":"B"}
)");
  const auto r = run({"score", "--task", "classification", "--input", cls.string()});
  REQUIRE(r.code == 0);
  CHECK(std::abs(nlohmann::json::parse(r.out)["macro_f1"].get<double>() - 11.0 / 15.0) < 1e-9);

  const auto seq = dir.write("seq.jsonl", R"({"gold":["B-PER","I-PER","O"],"pred":["B-PER","I-PER","O"]})"
                                          "\n");
  CHECK(nlohmann::json::parse(run({"score", "--task", "seqlabel", "--input", seq.string()}).out)["f1"] == 1.0);
  const auto d = run({"score", "--task", "delta", "--original", "75.23", "--perturbed", "61.14"});
  CHECK(nlohmann::json::parse(d.out)["delta"] == 14.09);
  CHECK(run({"score", "--task", "perplexity"}).code == cli::kExitUsage);
}

TEST_CASE("end-to-end pipeline") {
  TempDir dir;
  const std::string corpus = make_corpus(dir);
  auto p = [&](const char* n) { return (dir / n).string(); };

  auto ing = run({"ingest", "--input", corpus, "--out", p("clean.jsonl")});
  REQUIRE(ing.code == 0);
  CHECK(nlohmann::json::parse(ing.out)["documents"] == 122);

  REQUIRE(run({"dedup", "--input", p("clean.jsonl"), "--out", p("dedup.jsonl")}).code == 0);
  REQUIRE(run({"dedup", "--input", p("dedup.jsonl"), "--out", p("dedup2.jsonl")}).code == 0);
  CHECK(read_file(p("dedup.jsonl")) == read_file(p("dedup2.jsonl")));

  REQUIRE(run({"split", "--input", p("dedup.jsonl"), "--seed", "3", "--train-out", p("train.jsonl"), "--eval-out",
               p("eval.jsonl")})
              .code == 0);

  REQUIRE(run({"train-tokenizer", "--input", p("train.jsonl"), "--target-size", "60", "--out", p("base.txt")}).code == 0);
  REQUIRE(run({"train-tokenizer", "--input", p("train.jsonl"), "--target-size", "90", "--exclude-source", "cc100",
               "--out", p("cand.txt")})
              .code == 0);
  const auto ev = run({"expand-vocab", "--base", p("base.txt"), "--candidate", p("cand.txt"), "--out", p("ext.txt")});
  REQUIRE(ev.code == 0);
  const auto report = nlohmann::json::parse(ev.out);
  CHECK(report["extended_size"] == report["base_size"].get<int>() + report["new_token_count"].get<int>());

  std::vector<float> data;
  const auto base_size = report["base_size"].get<std::size_t>();
  for (std::size_t i = 0; i < base_size * 4; ++i) data.push_back(static_cast<float>(i % 7));
  write_file_atomic(p("emb.bin"), serialize_embeddings(EmbeddingMatrix(base_size, 4, data)));
  REQUIRE(run({"expand-embeddings", "--input", p("emb.bin"), "--base-vocab", p("base.txt"), "--extended-vocab",
               p("ext.txt"), "--out", p("emb2.bin")})
              .code == 0);
  CHECK(load_embeddings(p("emb2.bin")).rows() == report["extended_size"].get<std::size_t>());

  const auto ratio = run({"new-token-ratio", "--base", p("base.txt"), "--extended", p("ext.txt"), "--input", p("eval.jsonl")});
  REQUIRE(ratio.code == 0);
  const double r = nlohmann::json::parse(ratio.out)["ratio"];
  CHECK(r >= 0.0);
  CHECK(r <= 1.0);

  REQUIRE(run({"preprocess", "--vocab", p("ext.txt"), "--input", p("train.jsonl"), "--seq-len", "32", "--out",
               p("packed.bin")})
              .code == 0);
  REQUIRE(run({"mask", "--input", p("packed.bin"), "--vocab", p("ext.txt"), "--seed", "1", "--out", p("masked.jsonl")})
              .code == 0);
  const auto ms = run({"mask-stats", "--input", p("masked.jsonl")});
  REQUIRE(ms.code == 0);
  CHECK(nlohmann::json::parse(ms.out)["count"].get<int>() > 0);

  const auto st = run({"stats", "--input", corpus});
  REQUIRE(st.code == 0);
  CHECK(nlohmann::json::parse(st.out)["total_documents"] == 122);
}

TEST_CASE("seeded subcommands are reproducible across runs and thread counts") {
  TempDir dir;
  const std::string corpus = make_corpus(dir, 300);
  auto p = [&](const std::string& n) { return (dir / n).string(); };
  const auto lex = dir.write("eng.tsv", "abc\txyz\nbad\tgood\nface\tvisage\n");

  auto pipeline = [&](const std::string& tag, const std::string& threads) {
    auto t = [&](const std::string& n) { return p(tag + "-" + n); };
    std::vector<std::vector<std::string>> cmds = {
        {"ingest", "--input", corpus, "--out", t("clean")},
        {"dedup", "--input", t("clean"), "--out", t("dedup")},
        {"split", "--input", t("dedup"), "--seed", "7", "--train-out", t("train"), "--eval-out", t("eval")},
        {"train-tokenizer", "--input", t("train"), "--target-size", "80", "--out", t("vocab")},
        {"preprocess", "--vocab", t("vocab"), "--input", t("train"), "--seq-len", "16", "--shuffle-seed", "2", "--out",
         t("packed")},
        {"mask", "--input", t("packed"), "--vocab", t("vocab"), "--seed", "5", "--epoch", "1", "--out", t("masked")},
        {"codemix", "--input", t("eval"), "--lexicon", lex.string(), "--seed", "4", "--out", t("mixed"), "--log",
         t("mixlog")},
    };
    std::string stdout_all;
    for (auto& c : cmds) {
      c.insert(c.begin(), {"--threads", threads});
      const auto r = run(c);
      REQUIRE_MESSAGE(r.code == 0, r.err);
      stdout_all += r.out;
    }
    std::string files;
    for (const char* f : {"clean", "dedup", "train", "eval", "vocab", "packed", "masked", "mixed", "mixlog"}) {
      files += read_file(t(f));
    }
    return std::pair{files, stdout_all};
  };

  const auto a = pipeline("a", "1");
  const auto b = pipeline("b", "1");
  const auto c = pipeline("c", "8");
  CHECK(a.first == b.first);
  CHECK(a.first == c.first);
  CHECK(a.second.size() > 0);
}
