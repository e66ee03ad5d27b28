#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "nusavocab/nusavocab.hpp"

using namespace nusavocab;

namespace {

std::vector<Document> synthetic_corpus(std::size_t docs, std::size_t words_per_doc) {
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<int> len(2, 9), ch(0, 11);
  const std::string letters = "aeiknmrstuly";
  std::vector<Document> out;
  for (std::size_t d = 0; d < docs; ++d) {
    std::string text;
    for (std::size_t w = 0; w < words_per_doc; ++w) {
      if (w) text += ' ';
      const int n = len(gen);
      for (int i = 0; i < n; ++i) text += letters[static_cast<std::size_t>(ch(gen))];
    }
    out.push_back({std::to_string(d), "ind", "bench", std::move(text)});
  }
  return out;
}

const Vocabulary& trained_vocab() {
  static const Vocabulary vocab = [] {
    const auto docs = synthetic_corpus(2000, 50);
    const TokenizerModel front(Vocabulary({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"}));
    TrainerConfig cfg;
    cfg.target_vocab_size = 2000;
    return train_wordpiece(collect_word_frequencies(docs, front), cfg);
  }();
  return vocab;
}

void BM_TrainWordPiece(benchmark::State& state) {
  const auto docs = synthetic_corpus(static_cast<std::size_t>(state.range(0)), 50);
  const TokenizerModel front(Vocabulary({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"}));
  const auto freqs = collect_word_frequencies(docs, front);
  TrainerConfig cfg;
  cfg.target_vocab_size = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(train_wordpiece(freqs, cfg));
}
BENCHMARK(BM_TrainWordPiece)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Encode(benchmark::State& state) {
  const TokenizerModel model(trained_vocab());
  const auto docs = synthetic_corpus(200, 100);
  std::size_t bytes = 0;
  for (const auto& d : docs) bytes += d.text.size();
  for (auto _ : state) {
    for (const auto& d : docs) benchmark::DoNotOptimize(model.encode(d.text, true));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes));
}
BENCHMARK(BM_Encode);

void BM_Masking(benchmark::State& state) {
  const Vocabulary& vocab = trained_vocab();
  std::mt19937_64 gen(2);
  std::uniform_int_distribution<TokenId> id(5, static_cast<TokenId>(vocab.size() - 1));
  std::vector<PackedSequence> seqs(1000);
  for (auto& s : seqs) {
    for (int i = 0; i < 128; ++i) s.ids.push_back(id(gen));
  }
  std::uint64_t epoch = 0;
  for (auto _ : state) benchmark::DoNotOptimize(mask_sequences(seqs, MaskingConfig{}, vocab, 7, epoch++));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * seqs.size()));
}
BENCHMARK(BM_Masking);

}  // namespace

BENCHMARK_MAIN();
