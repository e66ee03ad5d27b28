#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nusavocab/nusavocab.hpp"

namespace nusavocab::cli {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// Bad flag combinations detected after parsing; exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<fs::path> to_paths(const std::vector<std::string>& raw) {
  return {raw.begin(), raw.end()};
}

LanguageRegistry registry_with(const std::vector<std::string>& extra) {
  LanguageRegistry registry = LanguageRegistry::defaults();
  for (const auto& code : extra) registry.add(code);
  return registry;
}

ojson rejection_json(const Rejection& r) {
  return {{"path", r.path}, {"line", r.line}, {"reason", r.reason}};
}

// Corpus readers used by downstream stages expect curated input.
std::vector<Document> read_documents_strict(const std::vector<std::string>& inputs,
                                            const LanguageRegistry& registry) {
  const auto paths = to_paths(inputs);
  IngestResult result = ingest(paths, registry);
  if (!result.rejections.empty()) {
    const Rejection& r = result.rejections.front();
    throw DataError(r.path + ":" + std::to_string(r.line) + ": " + r.reason + " (" +
                    std::to_string(result.rejections.size()) + " rejected line(s); run `ingest` first)");
  }
  return std::move(result.documents);
}

ojson manifest_json(const CorpusManifest& manifest) {
  ojson languages = ojson::array();
  for (const auto& row : manifest.languages()) {
    languages.push_back({{"lang", row.key},
                         {"documents", row.counts.documents},
                         {"characters", row.counts.characters}});
  }
  ojson sources = ojson::array();
  for (const auto& row : manifest.sources()) {
    sources.push_back({{"source", row.key},
                       {"documents", row.counts.documents},
                       {"characters", row.counts.characters}});
  }
  std::vector<std::pair<std::pair<std::string, std::string>, DocumentCounts>> cells(
      manifest.by_source_language.begin(), manifest.by_source_language.end());
  std::stable_sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) {
    return a.second.documents > b.second.documents;
  });
  ojson by_source_language = ojson::array();
  for (const auto& [key, counts] : cells) {
    by_source_language.push_back({{"source", key.first},
                                  {"lang", key.second},
                                  {"documents", counts.documents},
                                  {"characters", counts.characters}});
  }
  return {{"total_documents", manifest.total_documents},
          {"total_characters", manifest.total_characters},
          {"languages", languages},
          {"sources", sources},
          {"by_source_language", by_source_language}};
}

struct TokenizerFlags {
  bool no_lowercase = false;
  bool no_normalize = false;
  std::size_t max_chars = 100;

  void attach(CLI::App* sub) {
    sub->add_flag("--no-lowercase", no_lowercase, "Keep original casing");
    sub->add_flag("--no-normalize", no_normalize, "Skip NFC normalization");
    sub->add_option("--max-chars", max_chars, "Longest word (code points) before it becomes [UNK]")
        ->check(CLI::PositiveNumber);
  }

  TokenizerOptions options() const {
    TokenizerOptions opts;
    opts.lowercase = !no_lowercase;
    opts.normalization = no_normalize ? UnicodeNormalization::none : UnicodeNormalization::nfc;
    opts.max_chars_per_word = max_chars;
    return opts;
  }
};

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(const std::vector<std::string>& args) {
    CLI::App app{"nusavocab: vocabulary expansion and MLM data toolkit", "nusavocab"};
    app.require_subcommand(1);
    app.fallthrough();
    std::size_t threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: NUSAVOCAB_THREADS or all cores)");

    register_commands(app);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out_, err_);
      return code == 0 ? kExitOk : kExitUsage;
    }
    if (threads > 0) set_worker_count(threads);

    try {
      for (auto& [sub, handler] : handlers_) {
        if (sub->parsed()) {
          handler();
          break;
        }
      }
    } catch (const UsageError& e) {
      err_ << "usage error: " << e.what() << "\n";
      return kExitUsage;
    } catch (const IoError& e) {
      report_error("io_error", e.what());
      return kExitData;
    } catch (const Error& e) {
      report_error("data_error", e.what());
      return kExitData;
    } catch (const nlohmann::json::exception& e) {
      report_error("data_error", e.what());
      return kExitData;
    }
    if (threads > 0) set_worker_count(0);
    return exit_code_;
  }

 private:
  void report_error(const char* kind, const std::string& message) {
    ojson report = {{"error", {{"kind", kind}, {"message", message}}}};
    err_ << report.dump() << "\n";
  }

  void emit(const ojson& report, const std::string& report_path = {}) {
    const std::string text = report.dump(2) + "\n";
    if (!report_path.empty()) write_file_atomic(report_path, text);
    out_ << text;
  }

  void add(CLI::App* sub, std::function<void()> handler) { handlers_.emplace_back(sub, std::move(handler)); }

  void register_commands(CLI::App& app);

  std::ostream& out_;
  std::ostream& err_;
  std::vector<std::pair<CLI::App*, std::function<void()>>> handlers_;
  int exit_code_ = kExitOk;

  // Option storage; CLI11 binds to these by reference.
  struct {
    std::vector<std::string> inputs, exclude_sources, langs;
    std::size_t target_size = 10000;
    std::uint64_t min_pair_freq = 2;
    std::optional<std::size_t> alphabet_limit;
    std::string out;
    TokenizerFlags tok;
  } train_;
  struct {
    std::string base, candidate, out, report;
  } expand_vocab_;
  struct {
    std::string input, out, base_vocab, extended_vocab;
    std::optional<std::size_t> new_count;
    bool exclude_specials = false;
  } expand_emb_;
  struct {
    std::string base, extended;
    std::vector<std::string> inputs, langs;
    TokenizerFlags tok;
  } ratio_;
  struct {
    std::vector<std::string> inputs, langs;
    std::string out, report, rejections;
  } ingest_;
  struct {
    std::vector<std::string> inputs, langs;
    std::string out;
  } dedup_;
  struct {
    std::vector<std::string> inputs, langs;
    double fraction = 0.05;
    std::uint64_t seed = 0;
    std::string train_out, eval_out;
  } split_;
  struct {
    std::vector<std::string> inputs, langs;
    std::string out;
  } stats_;
  struct {
    std::string vocab, out;
    std::vector<std::string> inputs, langs;
    std::size_t seq_len = 128;
    std::optional<std::uint64_t> shuffle_seed;
    TokenizerFlags tok;
  } preprocess_;
  struct {
    std::string input, vocab, out;
    std::uint64_t seed = 0, epoch = 0;
    MaskingConfig cfg;
    bool include_specials = false, exact_count = false;
  } mask_;
  struct {
    std::string input;
  } mask_stats_;
  struct {
    std::string task, input, labels;
    std::optional<double> original, perturbed, loss;
  } score_;
  struct {
    std::string input, lexicon, l2, out, log;
    double ratio = 0.4;
    std::uint64_t seed = 0;
  } codemix_;
  struct {
    std::string file;
  } validate_;
  struct {
    std::string file;
  } budget_;

  void cmd_train_tokenizer();
  void cmd_expand_vocab();
  void cmd_expand_embeddings();
  void cmd_new_token_ratio();
  void cmd_ingest();
  void cmd_dedup();
  void cmd_split();
  void cmd_stats();
  void cmd_preprocess();
  void cmd_mask();
  void cmd_mask_stats();
  void cmd_score();
  void cmd_codemix();
  void cmd_validate_config();
  void cmd_token_budget();
};

void Runner::register_commands(CLI::App& app) {
  {
    auto* sub = app.add_subcommand("train-tokenizer", "Train a WordPiece vocabulary from JSONL corpora");
    sub->add_option("--input", train_.inputs, "Corpus JSONL files")->required()->check(CLI::ExistingFile);
    sub->add_option("--exclude-source", train_.exclude_sources, "Drop documents with this source tag");
    sub->add_option("--target-size", train_.target_size, "Target vocabulary size")->check(CLI::PositiveNumber);
    sub->add_option("--min-pair-freq", train_.min_pair_freq, "Minimum pair frequency for a merge")
        ->check(CLI::PositiveNumber);
    sub->add_option("--alphabet-limit", train_.alphabet_limit, "Cap on the initial alphabet")
        ->check(CLI::PositiveNumber);
    sub->add_option("--lang", train_.langs, "Extra accepted language codes");
    sub->add_option("--out", train_.out, "Output vocab.txt")->required();
    train_.tok.attach(sub);
    add(sub, [this] { cmd_train_tokenizer(); });
  }
  {
    auto* sub = app.add_subcommand("expand-vocab", "Append non-overlapping candidate tokens to a base vocab");
    sub->add_option("--base", expand_vocab_.base, "Base vocab.txt")->required()->check(CLI::ExistingFile);
    sub->add_option("--candidate", expand_vocab_.candidate, "Candidate vocab.txt")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", expand_vocab_.out, "Extended vocab.txt")->required();
    sub->add_option("--report", expand_vocab_.report, "Also write the JSON report here");
    add(sub, [this] { cmd_expand_vocab(); });
  }
  {
    auto* sub = app.add_subcommand("expand-embeddings", "Append mean-initialized rows to an EMB1 matrix");
    sub->add_option("--input", expand_emb_.input, "EMB1 file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", expand_emb_.out, "Output EMB1 file")->required();
    sub->add_option("--new-count", expand_emb_.new_count, "Rows to append");
    sub->add_option("--base-vocab", expand_emb_.base_vocab, "Base vocab.txt aligned to the matrix")
        ->check(CLI::ExistingFile);
    sub->add_option("--extended-vocab", expand_emb_.extended_vocab, "Extended vocab.txt (sets the new row count)")
        ->check(CLI::ExistingFile);
    sub->add_flag("--exclude-specials", expand_emb_.exclude_specials,
                  "Leave special-token rows out of the mean (needs --base-vocab)");
    add(sub, [this] { cmd_expand_embeddings(); });
  }
  {
    auto* sub = app.add_subcommand("new-token-ratio", "Proportion of tokens that only the extended vocab has");
    sub->add_option("--base", ratio_.base, "Base vocab.txt")->required()->check(CLI::ExistingFile);
    sub->add_option("--extended", ratio_.extended, "Extended vocab.txt")->required()->check(CLI::ExistingFile);
    sub->add_option("--input", ratio_.inputs, "Document JSONL files")->required()->check(CLI::ExistingFile);
    sub->add_option("--lang", ratio_.langs, "Extra accepted language codes");
    ratio_.tok.attach(sub);
    add(sub, [this] { cmd_new_token_ratio(); });
  }
  {
    auto* sub = app.add_subcommand("ingest", "Validate JSONL corpora and write a manifest");
    sub->add_option("--input", ingest_.inputs, "Corpus JSONL files")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", ingest_.out, "Accepted documents (JSONL)")->required();
    sub->add_option("--report", ingest_.report, "Also write the JSON report here");
    sub->add_option("--rejections", ingest_.rejections, "Write rejected lines (JSONL)");
    sub->add_option("--lang", ingest_.langs, "Extra accepted language codes");
    add(sub, [this] { cmd_ingest(); });
  }
  {
    auto* sub = app.add_subcommand("dedup", "Remove exact duplicate documents");
    sub->add_option("--input", dedup_.inputs, "Document JSONL files")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", dedup_.out, "Output JSONL")->required();
    sub->add_option("--lang", dedup_.langs, "Extra accepted language codes");
    add(sub, [this] { cmd_dedup(); });
  }
  {
    auto* sub = app.add_subcommand("split", "Seeded document-level evaluation holdout");
    sub->add_option("--input", split_.inputs, "Document JSONL files")->required()->check(CLI::ExistingFile);
    sub->add_option("--fraction", split_.fraction, "Evaluation fraction")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--seed", split_.seed, "Shuffle seed")->required();
    sub->add_option("--train-out", split_.train_out, "Training documents (JSONL)")->required();
    sub->add_option("--eval-out", split_.eval_out, "Evaluation documents (JSONL)")->required();
    sub->add_option("--lang", split_.langs, "Extra accepted language codes");
    add(sub, [this] { cmd_split(); });
  }
  {
    auto* sub = app.add_subcommand("stats", "Per-language and per-source document statistics");
    sub->add_option("--input", stats_.inputs, "Corpus JSONL files")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", stats_.out, "Also write the JSON manifest here");
    sub->add_option("--lang", stats_.langs, "Extra accepted language codes");
    add(sub, [this] { cmd_stats(); });
  }
  {
    auto* sub = app.add_subcommand("preprocess", "Encode documents and pack fixed-length sequences (PAK1)");
    sub->add_option("--vocab", preprocess_.vocab, "vocab.txt")->required()->check(CLI::ExistingFile);
    sub->add_option("--input", preprocess_.inputs, "Document JSONL files")->required()->check(CLI::ExistingFile);
    sub->add_option("--seq-len", preprocess_.seq_len, "Sequence length")->check(CLI::Range(2, 1 << 30));
    sub->add_option("--out", preprocess_.out, "Output PAK1 file")->required();
    sub->add_option("--shuffle-seed", preprocess_.shuffle_seed, "Shuffle documents before concatenation");
    sub->add_option("--lang", preprocess_.langs, "Extra accepted language codes");
    preprocess_.tok.attach(sub);
    add(sub, [this] { cmd_preprocess(); });
  }
  {
    auto* sub = app.add_subcommand("mask", "Apply dynamic MLM masking to packed sequences");
    sub->add_option("--input", mask_.input, "PAK1 file")->required()->check(CLI::ExistingFile);
    sub->add_option("--vocab", mask_.vocab, "vocab.txt")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", mask_.seed, "Masking seed")->required();
    sub->add_option("--epoch", mask_.epoch, "Epoch number (masks differ per epoch)");
    sub->add_option("--out", mask_.out, "Masked examples (JSONL)")->required();
    sub->add_option("--mask-fraction", mask_.cfg.mask_fraction, "Selection probability per token")
        ->check(CLI::Range(0.0, 0.999999));
    sub->add_option("--mask-prob", mask_.cfg.mask_prob, "P([MASK] | selected)")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--random-prob", mask_.cfg.random_prob, "P(random | selected)")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--keep-prob", mask_.cfg.keep_prob, "P(keep | selected)")->check(CLI::Range(0.0, 1.0));
    sub->add_flag("--include-specials", mask_.include_specials, "Allow selecting special-token positions");
    sub->add_flag("--exact-count", mask_.exact_count, "Select exactly round(fraction * maskable) positions");
    add(sub, [this] { cmd_mask(); });
  }
  {
    auto* sub = app.add_subcommand("mask-stats", "Empirical masking rates of a masked JSONL file");
    sub->add_option("--input", mask_stats_.input, "Masked examples (JSONL)")->required()->check(CLI::ExistingFile);
    add(sub, [this] { cmd_mask_stats(); });
  }
  {
    auto* sub = app.add_subcommand("score", "Evaluation metrics");
    sub->add_option("--task", score_.task, "Metric family")
        ->required()
        ->check(CLI::IsMember({"classification", "seqlabel", "delta", "perplexity"}));
    sub->add_option("--input", score_.input, "Predictions (JSONL)")->check(CLI::ExistingFile);
    sub->add_option("--labels", score_.labels, "Comma-separated label set (classification)");
    sub->add_option("--original", score_.original, "Original accuracy in percent (delta)");
    sub->add_option("--perturbed", score_.perturbed, "Perturbed accuracy in percent (delta)");
    sub->add_option("--loss", score_.loss, "Mean cross-entropy (perplexity)");
    add(sub, [this] { cmd_score(); });
  }
  {
    auto* sub = app.add_subcommand("codemix", "Synthetic code-mixed perturbation with a bilingual lexicon");
    sub->add_option("--input", codemix_.input, "JSONL records with a text field")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--lexicon", codemix_.lexicon, "source<TAB>target lexicon")->required()->check(CLI::ExistingFile);
    sub->add_option("--l2", codemix_.l2, "L2 language code (default: lexicon file stem)");
    sub->add_option("--ratio", codemix_.ratio, "Perturbation ratio R")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--seed", codemix_.seed, "Sampling seed")->required();
    sub->add_option("--out", codemix_.out, "Perturbed records (JSONL)")->required();
    sub->add_option("--log", codemix_.log, "Replacement log (JSONL)");
    add(sub, [this] { cmd_codemix(); });
  }
  {
    auto* sub = app.add_subcommand("validate-config", "Validate a pre-training config file");
    sub->add_option("--file", validate_.file, "Config JSON")->required()->check(CLI::ExistingFile);
    add(sub, [this] { cmd_validate_config(); });
  }
  {
    auto* sub = app.add_subcommand("token-budget", "Total training tokens implied by a config");
    sub->add_option("--file", budget_.file, "Config JSON (default: built-in defaults)")->check(CLI::ExistingFile);
    add(sub, [this] { cmd_token_budget(); });
  }
}

void Runner::cmd_train_tokenizer() {
  std::vector<Document> docs = read_documents_strict(train_.inputs, registry_with(train_.langs));
  const std::size_t before = docs.size();
  std::erase_if(docs, [&](const Document& d) {
    return std::find(train_.exclude_sources.begin(), train_.exclude_sources.end(), d.source) !=
           train_.exclude_sources.end();
  });
  TrainerConfig cfg;
  cfg.target_vocab_size = train_.target_size;
  cfg.min_pair_frequency = train_.min_pair_freq;
  cfg.initial_alphabet_limit = train_.alphabet_limit;
  // Only the front end is used, so any valid vocabulary will do.
  const auto specials = cfg.specials.all();
  const TokenizerModel front_end(Vocabulary(std::vector<std::string>(specials.begin(), specials.end())),
                                 train_.tok.options());
  const WordFrequencyTable freqs = collect_word_frequencies(docs, front_end);
  const Vocabulary vocab = train_wordpiece(freqs, cfg);
  write_file_atomic(train_.out, to_vocab_text(vocab));
  emit({{"documents", docs.size()},
        {"excluded_documents", before - docs.size()},
        {"distinct_words", freqs.entries.size()},
        {"total_words", freqs.total_words},
        {"vocab_size", vocab.size()},
        {"target_vocab_size", cfg.target_vocab_size},
        {"out", train_.out}});
}

void Runner::cmd_expand_vocab() {
  const Vocabulary base = load_vocab_file(expand_vocab_.base);
  const Vocabulary candidate = load_vocab_file(expand_vocab_.candidate);
  const ExpansionReport plan = plan_expansion(base, candidate);
  const Vocabulary extended = extend_vocabulary(base, plan.new_tokens);
  write_file_atomic(expand_vocab_.out, to_vocab_text(extended));
  emit({{"base_size", plan.base_size},
        {"candidate_size", plan.candidate_size},
        {"new_token_count", plan.new_tokens.size()},
        {"extended_size", extended.size()},
        {"new_tokens", plan.new_tokens}},
       expand_vocab_.report);
}

void Runner::cmd_expand_embeddings() {
  const EmbeddingMatrix matrix = load_embeddings(expand_emb_.input);
  std::optional<Vocabulary> base;
  if (!expand_emb_.base_vocab.empty()) {
    base = load_vocab_file(expand_emb_.base_vocab);
    if (base->size() != matrix.rows()) {
      throw DataError("matrix has " + std::to_string(matrix.rows()) + " rows but the base vocabulary has " +
                      std::to_string(base->size()) + " tokens");
    }
  }
  std::size_t new_count = 0;
  if (expand_emb_.new_count) {
    new_count = *expand_emb_.new_count;
  } else if (!expand_emb_.extended_vocab.empty()) {
    if (!base) throw UsageError("--extended-vocab needs --base-vocab");
    const Vocabulary extended = load_vocab_file(expand_emb_.extended_vocab);
    if (!is_prefix_extension(*base, extended)) {
      throw DataError("extended vocabulary does not preserve the base vocabulary ids");
    }
    new_count = extended.size() - base->size();
  } else {
    throw UsageError("give --new-count or --base-vocab with --extended-vocab");
  }
  std::vector<TokenId> excluded;
  if (expand_emb_.exclude_specials) {
    if (!base) throw UsageError("--exclude-specials needs --base-vocab");
    const auto ids = base->special_ids();
    excluded.assign(ids.begin(), ids.end());
  }
  const EmbeddingMatrix extended = extend_embeddings(matrix, new_count, excluded);
  write_file_atomic(expand_emb_.out, serialize_embeddings(extended));
  emit({{"rows", matrix.rows()},
        {"cols", matrix.cols()},
        {"new_rows", new_count},
        {"extended_rows", extended.rows()},
        {"excluded_rows", excluded.size()},
        {"out", expand_emb_.out}});
}

void Runner::cmd_new_token_ratio() {
  const auto opts = ratio_.tok.options();
  const TokenizerModel base(load_vocab_file(ratio_.base), opts);
  const TokenizerModel extended(load_vocab_file(ratio_.extended), opts);
  const std::vector<Document> docs = read_documents_strict(ratio_.inputs, registry_with(ratio_.langs));
  const NewTokenProportion p = proportion_new_tokens(docs, base, extended);
  emit({{"documents", docs.size()},
        {"base_size", base.vocab().size()},
        {"extended_size", extended.vocab().size()},
        {"new_tokens", p.new_tokens},
        {"total_tokens", p.total_tokens},
        {"ratio", p.ratio}});
}

void Runner::cmd_ingest() {
  const auto paths = to_paths(ingest_.inputs);
  const IngestResult result = ingest(paths, registry_with(ingest_.langs));
  write_file_atomic(ingest_.out, documents_to_jsonl(result.documents));
  ojson rejections = ojson::array();
  std::string rejection_lines;
  for (const auto& r : result.rejections) {
    rejections.push_back(rejection_json(r));
    rejection_lines += rejection_json(r).dump() + "\n";
  }
  if (!ingest_.rejections.empty()) write_file_atomic(ingest_.rejections, rejection_lines);
  emit({{"documents", result.documents.size()},
        {"rejected", result.rejections.size()},
        {"manifest", manifest_json(result.manifest)},
        {"rejections", rejections}},
       ingest_.report);
}

void Runner::cmd_dedup() {
  const std::vector<Document> docs = read_documents_strict(dedup_.inputs, registry_with(dedup_.langs));
  const std::vector<Document> kept = deduplicate(docs);
  write_file_atomic(dedup_.out, documents_to_jsonl(kept));
  emit({{"input_documents", docs.size()}, {"output_documents", kept.size()}, {"removed", docs.size() - kept.size()}});
}

void Runner::cmd_split() {
  const std::vector<Document> docs = read_documents_strict(split_.inputs, registry_with(split_.langs));
  const HoldoutSplit split = holdout_split(docs, split_.fraction, split_.seed);
  write_file_atomic(split_.train_out, documents_to_jsonl(split.train));
  write_file_atomic(split_.eval_out, documents_to_jsonl(split.eval));
  emit({{"documents", docs.size()},
        {"train", split.train.size()},
        {"eval", split.eval.size()},
        {"fraction", split_.fraction},
        {"seed", split_.seed}});
}

void Runner::cmd_stats() {
  const auto paths = to_paths(stats_.inputs);
  const IngestResult result = ingest(paths, registry_with(stats_.langs));
  ojson report = manifest_json(language_stats(result.documents));
  report["rejected"] = result.rejections.size();
  emit(report, stats_.out);
}

void Runner::cmd_preprocess() {
  const TokenizerModel model(load_vocab_file(preprocess_.vocab), preprocess_.tok.options());
  const std::vector<Document> docs = read_documents_strict(preprocess_.inputs, registry_with(preprocess_.langs));
  const PackResult packed = pack_sequences(docs, model, preprocess_.seq_len, preprocess_.shuffle_seed);
  write_file_atomic(preprocess_.out, serialize_packed(packed));
  emit({{"documents", docs.size()},
        {"seq_len", packed.sequence_length},
        {"total_ids", packed.total_ids},
        {"sequences", packed.sequences.size()},
        {"discarded_ids", packed.discarded_ids},
        {"out", preprocess_.out}});
}

ojson stats_json(const MaskingStats& s) {
  return {{"count", s.count},
          {"maskable", s.maskable},
          {"selected", s.selected},
          {"masked", s.masked},
          {"randomized", s.randomized},
          {"kept", s.kept},
          {"selected_fraction", s.selected_fraction()},
          {"mask_share", s.mask_share()},
          {"random_share", s.random_share()},
          {"keep_share", s.keep_share()}};
}

void Runner::cmd_mask() {
  const Vocabulary vocab = load_vocab_file(mask_.vocab);
  const PackResult packed = load_packed(mask_.input);
  MaskingConfig cfg = mask_.cfg;
  cfg.exclude_specials = !mask_.include_specials;
  cfg.selection = mask_.exact_count ? MaskSelection::exact_count : MaskSelection::bernoulli;
  const std::vector<MaskedExample> examples = mask_sequences(packed.sequences, cfg, vocab, mask_.seed, mask_.epoch);
  std::string lines;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    lines += masked_example_to_json(examples[i], i);
    lines += '\n';
  }
  write_file_atomic(mask_.out, lines);
  ojson report = stats_json(masking_stats(examples));
  report["seed"] = mask_.seed;
  report["epoch"] = mask_.epoch;
  emit(report);
}

void Runner::cmd_mask_stats() {
  const std::string content = read_file(mask_stats_.input);
  MaskingStats stats;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      stats.add(masked_example_from_json(line));
    } catch (const DataError& e) {
      throw DataError(mask_stats_.input + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  emit(stats_json(stats));
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
  std::vector<nlohmann::json> records;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto record = nlohmann::json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      throw DataError(path + ":" + std::to_string(line_no) + ": malformed JSON record");
    }
    records.push_back(std::move(record));
  }
  return records;
}

void Runner::cmd_score() {
  const std::string& task = score_.task;
  if (task == "delta") {
    if (score_.original && score_.perturbed) {
      emit({{"task", task},
            {"original", *score_.original},
            {"perturbed", *score_.perturbed},
            {"delta", metrics::delta_accuracy(*score_.original, *score_.perturbed)}});
      return;
    }
    if (score_.input.empty()) throw UsageError("delta needs --original and --perturbed, or --input");
    ojson rows = ojson::array();
    for (const auto& r : read_jsonl(score_.input)) {
      const double original = r.at("original").get<double>();
      const double perturbed = r.at("perturbed").get<double>();
      ojson row;
      if (r.contains("name")) row["name"] = r.at("name");
      row["original"] = original;
      row["perturbed"] = perturbed;
      row["delta"] = metrics::delta_accuracy(original, perturbed);
      rows.push_back(std::move(row));
    }
    emit({{"task", task}, {"rows", rows}});
    return;
  }
  if (task == "perplexity") {
    if (!score_.loss) throw UsageError("perplexity needs --loss");
    emit({{"task", task}, {"loss", *score_.loss}, {"perplexity", metrics::perplexity(*score_.loss)}});
    return;
  }
  if (score_.input.empty()) throw UsageError(task + " needs --input");
  const auto records = read_jsonl(score_.input);
  if (task == "classification") {
    std::vector<std::string> gold, pred;
    for (const auto& r : records) {
      gold.push_back(r.at("gold").get<std::string>());
      pred.push_back(r.at("pred").get<std::string>());
    }
    std::optional<std::set<std::string>> labels;
    if (!score_.labels.empty()) {
      labels.emplace();
      std::stringstream ss(score_.labels);
      std::string label;
      while (std::getline(ss, label, ',')) {
        if (!label.empty()) labels->insert(label);
      }
    }
    const metrics::MacroF1Report report = metrics::macro_f1(gold, pred, labels);
    ojson per_class = ojson::object();
    for (const auto& [label, s] : report.per_class) {
      per_class[label] = {{"precision", s.precision},
                          {"recall", s.recall},
                          {"f1", s.f1},
                          {"tp", s.true_positives},
                          {"fp", s.false_positives},
                          {"fn", s.false_negatives}};
    }
    emit({{"task", task}, {"examples", gold.size()}, {"macro_f1", report.macro_f1}, {"per_class", per_class}});
    return;
  }
  std::vector<metrics::SequencePair> pairs;
  for (const auto& r : records) {
    pairs.push_back({r.at("gold").get<std::vector<std::string>>(), r.at("pred").get<std::vector<std::string>>()});
  }
  const metrics::SpanF1Report report = metrics::conll_span_f1(pairs);
  emit({{"task", task},
        {"sequences", pairs.size()},
        {"precision", report.precision},
        {"recall", report.recall},
        {"f1", report.f1},
        {"true_positives", report.true_positives},
        {"predicted_spans", report.predicted_spans},
        {"gold_spans", report.gold_spans},
        {"empty", report.empty}});
}

void Runner::cmd_codemix() {
  const std::string l2 = codemix_.l2.empty() ? fs::path(codemix_.lexicon).stem().string() : codemix_.l2;
  const codemix::Lexicon lexicon = codemix::load_lexicon(codemix_.lexicon, l2);

  std::vector<ojson> records;
  std::vector<Document> docs;
  {
    std::istringstream in(read_file(codemix_.input));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      auto record = ojson::parse(line, nullptr, false);
      const std::string where = codemix_.input + ":" + std::to_string(line_no) + ": ";
      if (record.is_discarded() || !record.is_object()) throw DataError(where + "malformed JSON record");
      if (!record.contains("text") || !record["text"].is_string()) throw DataError(where + "missing string field 'text'");
      Document doc;
      doc.id = record.contains("id") && record["id"].is_string() ? record["id"].get<std::string>()
                                                                 : "#" + std::to_string(records.size());
      doc.text = record["text"].get<std::string>();
      docs.push_back(std::move(doc));
      records.push_back(std::move(record));
    }
  }

  const codemix::PerturbedDataset result =
      codemix::perturb_dataset(docs, lexicon, codemix::CodeMixConfig{codemix_.ratio, codemix_.seed});
  std::string out_lines;
  std::string log_lines;
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i]["text"] = result.documents[i].text;
    out_lines += records[i].dump() + "\n";
    for (const auto& r : result.logs[i]) {
      log_lines += ojson{{"id", docs[i].id}, {"position", r.position}, {"source", r.source}, {"target", r.target}}
                       .dump() +
                   "\n";
    }
  }
  write_file_atomic(codemix_.out, out_lines);
  if (!codemix_.log.empty()) write_file_atomic(codemix_.log, log_lines);
  emit({{"l2", lexicon.l2_code},
        {"ratio", codemix_.ratio},
        {"seed", codemix_.seed},
        {"sentences", result.summary.sentences},
        {"total_eligible", result.summary.total_eligible},
        {"total_replaced", result.summary.total_replaced},
        {"realized_ratio", result.summary.realized_ratio}});
}

void Runner::cmd_validate_config() {
  const ConfigValidation v = parse_pretrain_config(read_file(validate_.file));
  if (!v.ok()) {
    ojson violations = ojson::array();
    std::string summary;
    for (const auto& violation : v.violations) {
      violations.push_back({{"field", violation.field}, {"constraint", violation.constraint}});
      if (!summary.empty()) summary += "; ";
      summary += violation.field + ": " + violation.constraint;
    }
    emit({{"valid", false}, {"violations", violations}});
    err_ << ojson{{"error", {{"kind", "invalid_config"}, {"message", summary}}}}.dump() << "\n";
    exit_code_ = kExitData;
    return;
  }
  emit({{"valid", true}, {"config", ojson::parse(pretrain_config_to_json(*v.config))}});
}

void Runner::cmd_token_budget() {
  PretrainConfig cfg;
  if (!budget_.file.empty()) {
    const ConfigValidation v = parse_pretrain_config(read_file(budget_.file));
    if (!v.ok()) {
      throw DataError("invalid config: " + v.violations.front().field + ": " + v.violations.front().constraint);
    }
    cfg = *v.config;
  }
  emit({{"optimization_steps", cfg.optimization_steps},
        {"batch_size", cfg.batch_size},
        {"sequence_length", cfg.sequence_length},
        {"tokens", token_budget(cfg)}});
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Runner runner(out, err);
  return runner.run(args);
}

}  // namespace nusavocab::cli
