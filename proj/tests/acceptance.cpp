// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "nusavocab/nusavocab.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace nusavocab;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

std::string fmt(double x, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

// 1
Outcome vocabulary_arithmetic() {
  Outcome o;
  std::vector<std::string> base_body, fresh;
  for (int i = 0; i < 30521 - 5; ++i) base_body.push_back("base" + std::to_string(i));
  for (int i = 0; i < 1511; ++i) fresh.push_back("new" + std::to_string(i));
  const Vocabulary base = testing_support::make_vocab(base_body);
  o.require(base.size() == 30521, "base fixture size");
  const Vocabulary ext = extend_vocabulary(base, fresh);
  o.require(ext.size() == 32032, "extended size " + std::to_string(ext.size()));
  for (std::size_t i = 0; i < base.size(); ++i) {
    o.require(ext.find(base.token(static_cast<TokenId>(i))) == static_cast<TokenId>(i), "base id moved");
  }
  if (o.pass) o.detail = "30521 + 1511 = " + std::to_string(ext.size()) + ", base ids preserved";
  return o;
}

// 2
Outcome embedding_mean_init() {
  Outcome o;
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<std::size_t> rows_d(3, 500), cols_d(2, 64), new_d(0, 20);
  std::normal_distribution<float> val(0.0f, 2.0f);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t rows = rows_d(gen), cols = cols_d(gen), extra = new_d(gen);
    std::vector<float> data(rows * cols);
    for (auto& x : data) x = val(gen);
    const EmbeddingMatrix m(rows, cols, data);
    const EmbeddingMatrix e = extend_embeddings(m, extra);
    o.require(e.rows() == rows + extra, "row count");
    const auto means = oracle::column_means(data, rows, cols);
    for (std::size_t r = rows; r < e.rows(); ++r) {
      for (std::size_t c = 0; c < cols; ++c) worst = std::max(worst, std::abs(double(e.at(r, c)) - means[c]));
    }
    const EmbeddingMatrix same = extend_embeddings(m, 0);
    o.require(serialize_embeddings(same) == serialize_embeddings(m), "new_count=0 not bit-identical");
  }
  o.require(worst <= 1e-6, "max deviation " + fmt(worst));
  if (o.pass) o.detail = "50 matrices, max |row - mean| = " + fmt(worst) + ", new_count=0 bit-identical";
  return o;
}

// 3
Outcome masking_distribution() {
  Outcome o;
  std::vector<std::string> body;
  for (int i = 0; i < 1000; ++i) body.push_back("t" + std::to_string(i));
  const Vocabulary v = testing_support::make_vocab(body);
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<TokenId> id(5, static_cast<TokenId>(v.size() - 1));
  std::vector<PackedSequence> seqs(10000);
  for (auto& s : seqs) {
    s.ids.push_back(v.cls_id());
    for (int i = 0; i < 126; ++i) s.ids.push_back(id(gen));
    s.ids.push_back(v.sep_id());
  }
  const auto examples = mask_sequences(seqs, MaskingConfig{}, v, 12345, 0);
  const auto st = masking_stats(examples);
  o.require(st.selected_fraction() >= 0.145 && st.selected_fraction() <= 0.155,
            "selected fraction " + fmt(st.selected_fraction()));
  o.require(std::abs(st.mask_share() - 0.8) <= 0.015, "mask share " + fmt(st.mask_share()));
  o.require(std::abs(st.random_share() - 0.1) <= 0.015, "random share " + fmt(st.random_share()));
  o.require(std::abs(st.keep_share() - 0.1) <= 0.015, "keep share " + fmt(st.keep_share()));
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    std::vector<TokenId> rebuilt = examples[i].input_ids;
    for (std::size_t j = 0; j < rebuilt.size(); ++j) {
      const auto a = examples[i].actions[j];
      if (a == MaskAction::masked || a == MaskAction::randomized) rebuilt[j] = static_cast<TokenId>(examples[i].labels[j]);
      if (a == MaskAction::randomized) o.require(!v.is_special(examples[i].input_ids[j]), "special id in random slot");
    }
    o.require(rebuilt == seqs[i].ids, "reconstruction failed at sequence " + std::to_string(i));
  }
  if (o.pass) {
    o.detail = "selected " + fmt(st.selected_fraction(), 4) + ", shares " + fmt(st.mask_share(), 4) + "/" +
               fmt(st.random_share(), 4) + "/" + fmt(st.keep_share(), 4) + ", reconstruction holds";
  }
  return o;
}

// 4
Outcome packing_conservation() {
  Outcome o;
  std::vector<std::string> body;
  for (char c = 'a'; c <= 'z'; ++c) {
    body.emplace_back(1, c);
    body.push_back(std::string("##") + c);
  }
  const TokenizerModel model(testing_support::make_vocab(body));
  std::mt19937_64 gen(4);
  std::uniform_int_distribution<int> ndocs(0, 40), nwords(0, 60);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Document> docs;
    const int n = ndocs(gen);
    for (int i = 0; i < n; ++i) {
      docs.push_back({std::to_string(i), "ind", "w", testing_support::random_sentence(gen, static_cast<std::size_t>(nwords(gen)), "abcxyz")});
    }
    const auto packed = pack_sequences(docs, model, 128);
    std::vector<TokenId> stream;
    for (const auto& d : docs) {
      const auto ids = model.encode(d.text, true);
      stream.insert(stream.end(), ids.begin(), ids.end());
    }
    const std::size_t emitted = packed.sequences.size() * 128;
    o.require(emitted == stream.size() / 128 * 128, "emitted count");
    for (const auto& s : packed.sequences) o.require(s.ids.size() == 128, "sequence length");
    const auto expected = oracle::chunk(stream, 128);
    o.require(expected.size() == packed.sequences.size(), "sequence count");
    for (std::size_t i = 0; i < expected.size() && i < packed.sequences.size(); ++i) {
      o.require(expected[i] == packed.sequences[i].ids, "content mismatch");
    }
  }
  if (o.pass) o.detail = "100 corpora match the chunking oracle";
  return o;
}

// 5
Outcome perplexity_anchors() {
  Outcome o;
  const double a = metrics::perplexity(1.488), b = metrics::perplexity(1.327);
  o.require(std::abs(a - 4.427) <= 0.01, "ppl(1.488) = " + fmt(a));
  o.require(std::abs(b - 3.769) <= 0.01, "ppl(1.327) = " + fmt(b));
  o.detail = "ppl(1.488) = " + fmt(a, 5) + ", ppl(1.327) = " + fmt(b, 5);
  return o;
}

// 6
Outcome token_budget_anchor() {
  Outcome o;
  const auto t = token_budget(PretrainConfig{});
  o.require(t == 16'384'000'000ULL, "budget " + std::to_string(t));
  o.detail = "500000 * 256 * 128 = " + std::to_string(t);
  return o;
}

// 7
Outcome delta_anchors() {
  Outcome o;
  const double a = metrics::delta_accuracy(91.00, 90.40), b = metrics::delta_accuracy(75.23, 61.14);
  o.require(a == 0.60, "91.00 - 90.40 = " + fmt(a, 17));
  o.require(b == 14.09, "75.23 - 61.14 = " + fmt(b, 17));
  o.detail = "0.60 and 14.09 exact";
  return o;
}

// 8
Outcome trainer_oracle() {
  Outcome o;
  std::mt19937_64 gen(8);
  std::uniform_int_distribution<std::size_t> distinct(1, 200);
  std::uniform_int_distribution<std::uint64_t> count(1, 40);
  for (int trial = 0; trial < 25; ++trial) {
    WordFrequencyTable t;
    const std::size_t n = distinct(gen);
    const std::string alphabet = trial % 2 ? "abcdef" : "abcdefghijklmnop";
    while (t.entries.size() < n) t.add(testing_support::random_word(gen, 8, alphabet), count(gen));
    TrainerConfig cfg;
    cfg.target_vocab_size = 10 + static_cast<std::size_t>(trial) * 12;
    cfg.min_pair_frequency = 1 + static_cast<std::uint64_t>(trial % 3);
    const Vocabulary v = train_wordpiece(t, cfg);
    const std::vector<std::string> got(v.tokens().begin(), v.tokens().end());
    const auto want = oracle::rescan_wordpiece({t.entries.begin(), t.entries.end()}, cfg.target_vocab_size,
                                               cfg.min_pair_frequency);
    o.require(got == want, "corpus " + std::to_string(trial) + " differs from oracle");
    o.require(to_vocab_text(train_wordpiece(t, cfg)) == to_vocab_text(v), "repeated run differs");
  }
  if (o.pass) o.detail = "25 corpora identical to the rescan oracle, repeat runs byte-identical";
  return o;
}

// 9
Outcome metric_oracles() {
  Outcome o;
  using strings = std::vector<std::string>;
  auto macro = [](strings g, strings p) { return metrics::macro_f1(g, p).macro_f1; };
  o.require(std::abs(macro({"A", "A", "B", "B"}, {"A", "B", "B", "B"}) - 11.0 / 15.0) <= 1e-9, "11/15 case");
  o.require(std::abs(macro({"A", "B", "C"}, {"A", "B", "C"}) - 1.0) <= 1e-9, "perfect case");
  // A: P=1/2 R=1/2; B: P=1 R=1/2 -> 2/3; C: P=1/2 R=1 -> 2/3
  o.require(std::abs(macro({"A", "A", "B", "B", "C"}, {"A", "C", "B", "A", "C"}) - (0.5 + 2.0 / 3 + 2.0 / 3) / 3) <= 1e-9,
            "three-class case");

  std::mt19937_64 gen(9);
  const strings types{"PER", "LOC", "ORG"};
  const strings tags{"O", "B-PER", "I-PER", "B-LOC", "I-LOC", "B-ORG", "I-ORG"};
  std::uniform_int_distribution<std::size_t> len(0, 10), pick(0, tags.size() - 1);
  std::vector<metrics::SequencePair> pairs;
  std::vector<std::pair<strings, strings>> raw;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = len(gen);
    strings g, p;
    for (std::size_t k = 0; k < n; ++k) {
      g.push_back(tags[pick(gen)]);
      p.push_back(tags[pick(gen)]);
    }
    const std::vector<metrics::SequencePair> one{{g, p}};
    const auto single = metrics::conll_span_f1(one);
    const auto want = oracle::span_prf({{g, p}}, types);
    o.require(single.true_positives == want.tp && single.predicted_spans == want.pred && single.gold_spans == want.gold,
              "span counts differ on sequence " + std::to_string(i));
    pairs.push_back({g, p});
    raw.emplace_back(g, p);
  }
  const auto all = metrics::conll_span_f1(pairs);
  const auto want = oracle::span_prf(raw, types);
  o.require(std::abs(all.f1 - want.f) <= 1e-12, "aggregate F1");
  if (o.pass) o.detail = "macro fixtures within 1e-9, 1000 BIO sequences match enumeration (F1 " + fmt(all.f1, 4) + ")";
  return o;
}

// 10
Outcome new_token_fixture() {
  Outcome o;
  const Vocabulary base = testing_support::make_vocab({"saya", "suka", "makan", "di", "rumah", "dan", "kamu", "juga", "goreng"});
  const std::vector<std::string> fresh{"sate"};
  const TokenizerModel b(base), e(extend_vocabulary(base, fresh));
  const std::vector<Document> docs{{"x", "ind", "w", "saya suka makan sate di rumah dan kamu juga goreng"}};
  const auto p = proportion_new_tokens(docs, b, e);
  o.require(p.ratio == 0.10, "ratio " + fmt(p.ratio));
  o.require(proportion_new_tokens(docs, b, b).ratio == 0.0, "extended = base is not 0");
  o.detail = "1 of " + std::to_string(p.total_tokens) + " tokens new -> " + fmt(p.ratio) + "; identical vocab -> 0";
  return o;
}

// 11
Outcome pipeline_determinism() {
  Outcome o;
  testing_support::TempDir dir;
  std::mt19937_64 gen(11);
  std::string body;
  for (int i = 0; i < 1000; ++i) {
    const std::string text = i % 10 == 9 ? "duplikat yang sama" : testing_support::random_sentence(gen, 14, "abcdefgh");
    body += testing_support::doc_line("d" + std::to_string(i), i % 2 ? "ind" : "jav", "wiki", text) + "\n";
  }
  const auto corpus = dir.write("corpus.jsonl", body).string();
  const auto lex = dir.write("eng.tsv", "abc\txyz\nbad\tgood\nface\tvisage\nhead\tkepala\n").string();
  auto p = [&](const std::string& n) { return (dir / n).string(); };

  auto run = [&](std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    o.require(code == 0, args[2] + " failed: " + err.str());
    return out.str();
  };

  auto pipeline = [&](const std::string& tag, const std::string& threads) {
    auto t = [&](const std::string& n) { return p(tag + "-" + n); };
    const std::vector<std::vector<std::string>> cmds = {
        {"ingest", "--input", corpus, "--out", t("clean")},
        {"dedup", "--input", t("clean"), "--out", t("dedup")},
        {"split", "--input", t("dedup"), "--seed", "17", "--fraction", "0.05", "--train-out", t("train"), "--eval-out", t("eval")},
        {"train-tokenizer", "--input", t("train"), "--target-size", "200", "--out", t("vocab")},
        {"preprocess", "--vocab", t("vocab"), "--input", t("train"), "--shuffle-seed", "3", "--out", t("packed")},
        {"mask", "--input", t("packed"), "--vocab", t("vocab"), "--seed", "5", "--epoch", "2", "--out", t("masked")},
        {"codemix", "--input", t("train"), "--lexicon", lex, "--seed", "9", "--out", t("mixed"), "--log", t("mixlog")},
    };
    for (auto c : cmds) {
      c.insert(c.begin(), {"--threads", threads});
      run(c);
    }
    std::string all;
    for (const char* f : {"clean", "dedup", "train", "eval", "vocab", "packed", "masked", "mixed", "mixlog"}) {
      all += read_file(t(f));
    }
    return all;
  };

  const std::string a = pipeline("a", "1");
  const std::string b = pipeline("b", "1");
  const std::string c = pipeline("c", "8");
  o.require(a == b, "two runs differ");
  o.require(a == c, "1 vs 8 threads differ");

  run({"--threads", "4", "dedup", "--input", p("a-dedup"), "--out", p("again")});
  o.require(read_file(p("again")) == read_file(p("a-dedup")), "dedup not idempotent");

  const LanguageRegistry reg = LanguageRegistry::defaults();
  const std::vector<std::filesystem::path> dedup_path{p("a-dedup")}, train_path{p("a-train")}, eval_path{p("a-eval")};
  const auto all = ingest(dedup_path, reg).documents;
  const auto train = ingest(train_path, reg).documents;
  const auto eval = ingest(eval_path, reg).documents;
  o.require(eval.size() == static_cast<std::size_t>(std::llround(0.05 * double(all.size()))), "eval size");
  std::set<std::string> ids;
  for (const auto& d : train) ids.insert(d.id);
  for (const auto& d : eval) o.require(ids.insert(d.id).second, "train/eval overlap");
  o.require(ids.size() == all.size(), "union is not the input");
  if (o.pass) {
    o.detail = std::to_string(all.size()) + " docs after dedup, eval " + std::to_string(eval.size()) +
               ", 7 seeded subcommands byte-identical across runs and 1 vs 8 threads";
  }
  return o;
}

// 12
Outcome codemix_protocol() {
  Outcome o;
  const auto lex = codemix::parse_lexicon("saya\tI\nmakan\teat\nnasi\trice\ndi\tat\nrumah\thome\npergi\tgo\npasar\tmarket\n", "eng");
  const std::vector<std::string> pool{"saya", "Makan", "nasi,", "di", "rumah.", "kami", "pergi", "ke", "pasar", "dan", "(saya)"};
  std::mt19937_64 gen(12);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1), len(1, 20);
  for (int i = 0; i < 500; ++i) {
    std::string s;
    const std::size_t n = len(gen);
    for (std::size_t k = 0; k < n; ++k) s += (k ? " " : "") + pool[pick(gen)];
    const codemix::CodeMixConfig cfg{0.4, static_cast<std::uint64_t>(i) * 7919};
    const auto p = codemix::perturb_sentence(s, lex, cfg);
    o.require(p.log.size() == static_cast<std::size_t>(std::ceil(0.4 * double(p.eligible) - 1e-9)),
              "replacement count on sentence " + std::to_string(i));
    o.require(text::split_whitespace(p.text).size() == text::split_whitespace(s).size(), "word count changed");
    const auto id = codemix::perturb_sentence(s, lex, {0.0, cfg.seed});
    o.require(id.text == s && id.log.empty(), "R=0 is not the identity");
    const auto slots = oracle::naive_sample_slots(p.eligible, p.log.size(), rng::derive_key(cfg.seed, 0x636d6978ULL));
    std::vector<std::size_t> eligible_positions;
    const auto words = text::split_whitespace(s);
    for (std::size_t w = 0; w < words.size(); ++w) {
      std::string core(words[w]);
      while (!core.empty() && std::ispunct(static_cast<unsigned char>(core.front()))) core.erase(0, 1);
      while (!core.empty() && std::ispunct(static_cast<unsigned char>(core.back()))) core.pop_back();
      if (lex.find(text::to_lower(core))) eligible_positions.push_back(w);
    }
    o.require(eligible_positions.size() == p.eligible, "eligibility count");
    for (std::size_t k = 0; k < p.log.size() && k < slots.size() && slots[k] < eligible_positions.size(); ++k) {
      o.require(p.log[k].position == eligible_positions[slots[k]], "sampler differs from oracle");
    }
  }
  if (o.pass) o.detail = "500 sentences: counts, word counts, identity at R=0 and sampler oracle all hold";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"vocabulary arithmetic", vocabulary_arithmetic},
      {"embedding mean initialization", embedding_mean_init},
      {"masking distribution", masking_distribution},
      {"packing conservation", packing_conservation},
      {"perplexity anchors", perplexity_anchors},
      {"token budget anchor", token_budget_anchor},
      {"delta accuracy anchors", delta_anchors},
      {"trainer oracle", trainer_oracle},
      {"metric oracles", metric_oracles},
      {"new token proportion fixture", new_token_fixture},
      {"pipeline determinism", pipeline_determinism},
      {"code-mix protocol", codemix_protocol},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2zu %-30s %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(), secs);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
