#include "nusavocab/trainer.hpp"

#include <algorithm>
#include <queue>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "nusavocab/error.hpp"
#include "nusavocab/random.hpp"
#include "nusavocab/parallel.hpp"
#include "nusavocab/unicode_text.hpp"

namespace nusavocab {

void WordFrequencyTable::add(std::string_view word, std::uint64_t count) {
  if (count == 0) return;
  auto it = entries.find(word);
  if (it == entries.end()) {
    entries.emplace(std::string(word), count);
  } else {
    it->second += count;
  }
  total_words += count;
}

void WordFrequencyTable::merge(const WordFrequencyTable& other) {
  for (const auto& [word, count] : other.entries) add(word, count);
}

WordFrequencyTable collect_word_frequencies(std::span<const Document> documents,
                                            const TokenizerModel& front_end) {
  const std::size_t chunks = std::max<std::size_t>(1, std::min(worker_count(), documents.size()));
  std::vector<WordFrequencyTable> partial(chunks);
  parallel_for(chunks, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      const std::size_t lo = documents.size() * c / chunks;
      const std::size_t hi = documents.size() * (c + 1) / chunks;
      for (std::size_t i = lo; i < hi; ++i) {
        const Document& doc = documents[i];
        if (!text::is_valid_utf8(doc.text)) {
          throw DataError("document '" + doc.id + "': text is not valid UTF-8");
        }
        for (const std::string& word : front_end.normalize_and_pretokenize(doc.text)) {
          partial[c].add(word);
        }
      }
    }
  });
  WordFrequencyTable table;
  for (const auto& p : partial) table.merge(p);
  return table;
}

namespace {

using SymbolId = std::uint32_t;
using PairKey = std::uint64_t;
using u128 = uint128;

constexpr PairKey make_key(SymbolId a, SymbolId b) { return (PairKey{a} << 32) | b; }
constexpr SymbolId left_of(PairKey k) { return static_cast<SymbolId>(k >> 32); }
constexpr SymbolId right_of(PairKey k) { return static_cast<SymbolId>(k & 0xffffffffu); }

struct Candidate {
  std::uint64_t pair_freq;
  std::uint64_t left_freq;
  std::uint64_t right_freq;
  PairKey key;
  std::string merged;
  std::string left;
};

// True when `x` ranks strictly below `y` (priority_queue ordering).
struct RanksBelow {
  bool operator()(const Candidate& x, const Candidate& y) const {
    // score(x) < score(y)  <=>  px * ly * ry < py * lx * rx
    const u128 lhs = u128{x.pair_freq} * y.left_freq * y.right_freq;
    const u128 rhs = u128{y.pair_freq} * x.left_freq * x.right_freq;
    if (lhs != rhs) return lhs < rhs;
    if (x.merged != y.merged) return x.merged > y.merged;
    return x.left > y.left;
  }
};

class MergeTrainer {
 public:
  MergeTrainer(const WordFrequencyTable& freqs, const TrainerConfig& cfg) : cfg_(cfg) {
    for (std::string_view s : cfg_.specials.all()) {
      vocab_.emplace_back(s);
      in_vocab_.emplace(s);
    }
    build_alphabet(freqs);
  }

  Vocabulary run() {
    for (const auto& [key, freq] : pair_freq_) push(key);
    while (vocab_.size() < cfg_.target_vocab_size) {
      std::optional<PairKey> best = pop_best();
      if (!best) break;
      apply_merge(*best);
    }
    return Vocabulary(std::move(vocab_), cfg_.specials, cfg_.continuation_prefix);
  }

 private:
  struct Word {
    std::vector<SymbolId> symbols;
    std::uint64_t count;
  };

  SymbolId intern(const std::string& s) {
    auto [it, inserted] = symbol_ids_.emplace(s, static_cast<SymbolId>(symbols_.size()));
    if (inserted) {
      symbols_.push_back(s);
      symbol_freq_.push_back(0);
      symbol_pairs_.emplace_back();
    }
    return it->second;
  }

  void build_alphabet(const WordFrequencyTable& freqs) {
    const std::string& prefix = cfg_.continuation_prefix;
    std::vector<std::vector<std::string>> split;
    std::vector<std::uint64_t> counts;
    std::unordered_map<std::string, std::uint64_t> symbol_count;
    for (const auto& [word, count] : freqs.entries) {
      if (count == 0 || word.empty()) continue;
      std::vector<std::string> syms;
      for (const text::CodePoint& cp : text::code_points(word)) {
        std::string s = cp.offset == 0 ? std::string() : prefix;
        s.append(word, cp.offset, cp.length);
        symbol_count[s] += count;
        syms.push_back(std::move(s));
      }
      split.push_back(std::move(syms));
      counts.push_back(count);
    }

    std::vector<std::pair<std::string, std::uint64_t>> ranked(symbol_count.begin(), symbol_count.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    std::size_t budget = cfg_.target_vocab_size - SpecialTokens::kCount;
    if (cfg_.initial_alphabet_limit) budget = std::min(budget, *cfg_.initial_alphabet_limit);
    // Symbols that coincide with special strings are already in the vocabulary.
    std::vector<std::string> alphabet;
    std::unordered_set<std::string> kept;
    for (const auto& [s, c] : ranked) {
      if (in_vocab_.contains(s)) {
        kept.insert(s);
        continue;
      }
      if (alphabet.size() >= budget) continue;
      alphabet.push_back(s);
      kept.insert(s);
    }
    std::sort(alphabet.begin(), alphabet.end());
    for (std::string& s : alphabet) {
      in_vocab_.insert(s);
      vocab_.push_back(std::move(s));
    }

    for (std::size_t w = 0; w < split.size(); ++w) {
      const bool usable = std::all_of(split[w].begin(), split[w].end(),
                                      [&](const std::string& s) { return kept.contains(s); });
      if (!usable) continue;
      Word word{{}, counts[w]};
      for (const std::string& s : split[w]) word.symbols.push_back(intern(s));
      words_.push_back(std::move(word));
      add_word(words_.size() - 1, nullptr);
    }
  }

  void add_word(std::size_t w, std::unordered_set<PairKey>* touched) {
    const Word& word = words_[w];
    for (SymbolId s : word.symbols) symbol_freq_[s] += word.count;
    for (std::size_t i = 0; i + 1 < word.symbols.size(); ++i) {
      const PairKey key = make_key(word.symbols[i], word.symbols[i + 1]);
      std::uint64_t& f = pair_freq_[key];
      if (f == 0) {
        symbol_pairs_[word.symbols[i]].insert(key);
        symbol_pairs_[word.symbols[i + 1]].insert(key);
      }
      f += word.count;
      pair_words_[key].push_back(static_cast<std::uint32_t>(w));
      if (touched) touched->insert(key);
    }
  }

  void remove_word(std::size_t w, std::unordered_set<PairKey>& touched) {
    const Word& word = words_[w];
    for (SymbolId s : word.symbols) symbol_freq_[s] -= word.count;
    for (std::size_t i = 0; i + 1 < word.symbols.size(); ++i) {
      const PairKey key = make_key(word.symbols[i], word.symbols[i + 1]);
      pair_freq_[key] -= word.count;
      touched.insert(key);
    }
  }

  void push(PairKey key) {
    auto it = pair_freq_.find(key);
    if (it == pair_freq_.end() || it->second < cfg_.min_pair_frequency) return;
    const SymbolId a = left_of(key);
    const SymbolId b = right_of(key);
    heap_.push(Candidate{it->second, symbol_freq_[a], symbol_freq_[b], key, merged_string(a, b),
                         symbols_[a]});
  }

  std::string merged_string(SymbolId a, SymbolId b) const {
    const std::string& right = symbols_[b];
    const std::string& prefix = cfg_.continuation_prefix;
    std::string merged = symbols_[a];
    if (right.starts_with(prefix)) {
      merged.append(right, prefix.size());
    } else {
      merged.append(right);
    }
    return merged;
  }

  std::optional<PairKey> pop_best() {
    while (!heap_.empty()) {
      Candidate top = heap_.top();
      heap_.pop();
      auto it = pair_freq_.find(top.key);
      if (it == pair_freq_.end() || it->second != top.pair_freq) continue;
      if (symbol_freq_[left_of(top.key)] != top.left_freq) continue;
      if (symbol_freq_[right_of(top.key)] != top.right_freq) continue;
      return top.key;
    }
    return std::nullopt;
  }

  void apply_merge(PairKey key) {
    const SymbolId a = left_of(key);
    const SymbolId b = right_of(key);
    const std::string merged = merged_string(a, b);
    const SymbolId m = intern(merged);
    if (in_vocab_.insert(merged).second) vocab_.push_back(merged);

    std::vector<std::uint32_t> affected = std::move(pair_words_[key]);
    pair_words_.erase(key);
    std::sort(affected.begin(), affected.end());
    affected.erase(std::unique(affected.begin(), affected.end()), affected.end());

    std::unordered_set<PairKey> touched;
    for (std::uint32_t w : affected) {
      Word& word = words_[w];
      bool present = false;
      for (std::size_t i = 0; i + 1 < word.symbols.size(); ++i) {
        if (word.symbols[i] == a && word.symbols[i + 1] == b) {
          present = true;
          break;
        }
      }
      if (!present) continue;
      remove_word(w, touched);
      std::vector<SymbolId> next;
      next.reserve(word.symbols.size());
      for (std::size_t i = 0; i < word.symbols.size(); ++i) {
        if (i + 1 < word.symbols.size() && word.symbols[i] == a && word.symbols[i + 1] == b) {
          next.push_back(m);
          ++i;
        } else {
          next.push_back(word.symbols[i]);
        }
      }
      word.symbols = std::move(next);
      add_word(w, &touched);
    }

    std::unordered_set<PairKey> refresh;
    for (PairKey k : touched) {
      auto it = pair_freq_.find(k);
      if (it != pair_freq_.end() && it->second == 0) {
        pair_freq_.erase(it);
        symbol_pairs_[left_of(k)].erase(k);
        symbol_pairs_[right_of(k)].erase(k);
        pair_words_.erase(k);
      } else {
        refresh.insert(k);
      }
    }
    for (SymbolId s : {a, b, m}) {
      for (PairKey k : symbol_pairs_[s]) refresh.insert(k);
    }
    for (PairKey k : refresh) push(k);
  }

  const TrainerConfig& cfg_;
  std::vector<std::string> vocab_;
  std::unordered_set<std::string> in_vocab_;

  std::vector<std::string> symbols_;
  std::unordered_map<std::string, SymbolId> symbol_ids_;
  std::vector<std::uint64_t> symbol_freq_;
  std::vector<std::unordered_set<PairKey>> symbol_pairs_;

  std::vector<Word> words_;
  std::unordered_map<PairKey, std::uint64_t> pair_freq_;
  std::unordered_map<PairKey, std::vector<std::uint32_t>> pair_words_;
  std::priority_queue<Candidate, std::vector<Candidate>, RanksBelow> heap_;
};

}  // namespace

Vocabulary train_wordpiece(const WordFrequencyTable& freqs, const TrainerConfig& cfg) {
  if (freqs.entries.empty()) throw DataError("cannot train on an empty word frequency table");
  if (cfg.target_vocab_size < SpecialTokens::kCount) {
    throw DataError("target vocabulary size " + std::to_string(cfg.target_vocab_size) +
                    " is smaller than the number of special tokens");
  }
  if (cfg.min_pair_frequency == 0) throw DataError("min_pair_frequency must be positive");
  if (cfg.continuation_prefix.empty()) throw DataError("continuation prefix must not be empty");
  MergeTrainer trainer(freqs, cfg);
  return trainer.run();
}

}  // namespace nusavocab
