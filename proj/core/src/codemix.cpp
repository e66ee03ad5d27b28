#include "nusavocab/codemix.hpp"

#include <algorithm>
#include <cmath>

#include "nusavocab/error.hpp"
#include "nusavocab/io.hpp"
#include "nusavocab/parallel.hpp"
#include "nusavocab/random.hpp"
#include "nusavocab/unicode_text.hpp"

namespace nusavocab::codemix {

const std::string* Lexicon::find(std::string_view normalized_word) const {
  auto it = entries.find(normalized_word);
  return it == entries.end() ? nullptr : &it->second;
}

namespace {

std::string normalize_word(std::string_view word) { return text::to_lower(text::to_nfc(word)); }

bool has_whitespace(std::string_view s) {
  for (const auto& cp : text::code_points(s)) {
    if (text::is_whitespace(cp.value)) return true;
  }
  return false;
}

}  // namespace

Lexicon parse_lexicon(std::string_view tsv, std::string l2_code) {
  Lexicon lexicon{std::move(l2_code), {}};
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < tsv.size()) {
    std::size_t eol = tsv.find('\n', pos);
    if (eol == std::string_view::npos) eol = tsv.size();
    std::string_view line = tsv.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = "lexicon line " + std::to_string(line_no) + ": ";
    if (!text::is_valid_utf8(line)) throw DataError(where + "invalid UTF-8");
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) throw DataError(where + "expected source<TAB>target");
    const std::string source = normalize_word(line.substr(0, tab));
    const std::string target = normalize_word(line.substr(tab + 1));
    if (source.empty() || target.empty()) throw DataError(where + "empty source or target");
    if (has_whitespace(source) || has_whitespace(target)) {
      throw DataError(where + "entries must be single words");
    }
    if (!lexicon.entries.emplace(source, target).second) {
      throw DataError(where + "duplicate source '" + source + "'");
    }
  }
  return lexicon;
}

Lexicon load_lexicon(const std::filesystem::path& path, std::string l2_code) {
  return parse_lexicon(read_file(path), std::move(l2_code));
}

std::size_t replacement_count(double ratio, std::size_t eligible) {
  const double x = ratio * static_cast<double>(eligible);
  const double k = std::ceil(x - 1e-9 * std::max(1.0, x));
  return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(eligible)));
}

std::vector<std::size_t> sample_slots(std::size_t n, std::size_t k, std::uint64_t key) {
  if (k > n) throw DataError("cannot sample more slots than available");
  // Fenwick tree over "still available" flags; find_by_rank descends it.
  std::vector<std::size_t> tree(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    tree[i] += 1;
    const std::size_t parent = i + (i & (~i + 1));
    if (parent <= n) tree[parent] += tree[i];
  }
  std::size_t top_bit = 1;
  while (top_bit * 2 <= n) top_bit *= 2;

  CounterRng rng(key);
  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t rank = static_cast<std::size_t>(rng.below(n - i));
    std::size_t node = 0;
    for (std::size_t step = top_bit; step > 0; step /= 2) {
      const std::size_t next = node + step;
      if (next <= n && tree[next] <= rank) {
        node = next;
        rank -= tree[next];
      }
    }
    // node is the count of slots before the chosen one; slot index = node.
    chosen.push_back(node);
    for (std::size_t j = node + 1; j <= n; j += j & (~j + 1)) tree[j] -= 1;
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

PerturbedSentence perturb_sentence(std::string_view sentence, const Lexicon& lexicon,
                                   const CodeMixConfig& cfg) {
  if (lexicon.entries.empty()) throw DataError("lexicon is empty");
  if (!(cfg.ratio >= 0.0 && cfg.ratio <= 1.0)) throw DataError("perturbation ratio must be in [0, 1]");

  struct Eligible {
    std::size_t position;
    std::size_t core_offset;  // byte offset in sentence
    std::size_t core_length;
    const std::string* target;
  };
  std::vector<Eligible> eligible;
  const std::vector<std::string_view> words = text::split_whitespace(sentence);
  for (std::size_t w = 0; w < words.size(); ++w) {
    const std::string_view word = words[w];
    const auto cps = text::code_points(word);
    std::size_t lo = 0;
    std::size_t hi = cps.size();
    while (lo < hi && text::is_punctuation(cps[lo].value)) ++lo;
    while (hi > lo && text::is_punctuation(cps[hi - 1].value)) --hi;
    if (lo == hi) continue;
    const std::size_t begin = cps[lo].offset;
    const std::size_t end = cps[hi - 1].offset + cps[hi - 1].length;
    const std::string_view core = word.substr(begin, end - begin);
    if (const std::string* target = lexicon.find(normalize_word(core))) {
      const auto offset = static_cast<std::size_t>(word.data() - sentence.data()) + begin;
      eligible.push_back({w, offset, core.size(), target});
    }
  }

  PerturbedSentence out;
  out.eligible = eligible.size();
  const std::size_t k = replacement_count(cfg.ratio, eligible.size());
  if (k == 0) {
    out.text = std::string(sentence);
    return out;
  }
  const std::vector<std::size_t> slots = sample_slots(eligible.size(), k, rng::derive_key(cfg.seed, 0x636d6978ULL));

  std::size_t cursor = 0;
  for (std::size_t slot : slots) {
    const Eligible& e = eligible[slot];
    const std::string_view source = sentence.substr(e.core_offset, e.core_length);
    std::string replacement = *e.target;
    const auto first = text::code_points(source);
    if (!first.empty() && text::is_uppercase(first.front().value)) {
      replacement = text::capitalize_first(replacement);
    }
    out.text.append(sentence.substr(cursor, e.core_offset - cursor));
    out.text.append(replacement);
    cursor = e.core_offset + e.core_length;
    out.log.push_back({e.position, std::string(source), std::move(replacement)});
  }
  out.text.append(sentence.substr(cursor));
  return out;
}

std::uint64_t document_seed(std::uint64_t seed, std::string_view document_id) {
  return rng::derive_key(seed, rng::hash_string(document_id));
}

PerturbedDataset perturb_dataset(std::span<const Document> documents, const Lexicon& lexicon,
                                 const CodeMixConfig& cfg) {
  if (lexicon.entries.empty()) throw DataError("lexicon is empty");
  if (!(cfg.ratio >= 0.0 && cfg.ratio <= 1.0)) throw DataError("perturbation ratio must be in [0, 1]");
  PerturbedDataset out;
  out.documents.assign(documents.begin(), documents.end());
  out.logs.resize(documents.size());
  std::vector<std::size_t> eligible(documents.size());
  parallel_for(documents.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      CodeMixConfig doc_cfg{cfg.ratio, document_seed(cfg.seed, documents[i].id)};
      PerturbedSentence p = perturb_sentence(documents[i].text, lexicon, doc_cfg);
      out.documents[i].text = std::move(p.text);
      out.logs[i] = std::move(p.log);
      eligible[i] = p.eligible;
    }
  });
  out.summary.sentences = documents.size();
  for (std::size_t i = 0; i < documents.size(); ++i) {
    out.summary.total_eligible += eligible[i];
    out.summary.total_replaced += out.logs[i].size();
  }
  if (out.summary.total_eligible > 0) {
    out.summary.realized_ratio = static_cast<double>(out.summary.total_replaced) /
                                 static_cast<double>(out.summary.total_eligible);
  }
  return out;
}

}  // namespace nusavocab::codemix
