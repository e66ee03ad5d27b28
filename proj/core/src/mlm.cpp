#include "nusavocab/mlm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "nusavocab/error.hpp"
#include "nusavocab/io.hpp"
#include "nusavocab/parallel.hpp"
#include "nusavocab/random.hpp"

namespace nusavocab {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

PackResult pack_stream(std::span<const TokenId> stream, std::size_t length) {
  if (length < 2) throw DataError("sequence length must be at least 2");
  PackResult out;
  out.sequence_length = length;
  out.total_ids = stream.size();
  const std::size_t full = stream.size() / length;
  out.sequences.reserve(full);
  for (std::size_t s = 0; s < full; ++s) {
    const auto chunk = stream.subspan(s * length, length);
    out.sequences.push_back({std::vector<TokenId>(chunk.begin(), chunk.end())});
  }
  out.discarded_ids = stream.size() - full * length;
  return out;
}

PackResult pack_sequences(std::span<const Document> documents, const TokenizerModel& model,
                          std::size_t length, std::optional<std::uint64_t> shuffle_seed) {
  if (length < 2) throw DataError("sequence length must be at least 2");
  std::vector<std::vector<TokenId>> encoded(documents.size());
  parallel_for(documents.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) encoded[i] = model.encode(documents[i].text, true);
  });

  std::vector<std::size_t> order(documents.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle_seed) {
    CounterRng rng(rng::derive_key(*shuffle_seed, 0x7061636bULL));
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(order.size() - i));
      std::swap(order[i], order[j]);
    }
  }

  PackResult out;
  out.sequence_length = length;
  std::vector<TokenId> current;
  current.reserve(length);
  for (std::size_t doc : order) {
    for (TokenId id : encoded[doc]) {
      current.push_back(id);
      if (current.size() == length) {
        out.sequences.push_back({std::move(current)});
        current = {};
        current.reserve(length);
      }
    }
    out.total_ids += encoded[doc].size();
    std::vector<TokenId>().swap(encoded[doc]);
  }
  out.discarded_ids = current.size();
  return out;
}

namespace {

constexpr char kPackedMagic[4] = {'P', 'A', 'K', '1'};
constexpr std::size_t kPackedHeader = 16;

}  // namespace

std::string serialize_packed(const PackResult& packed) {
  if (packed.sequence_length > std::numeric_limits<std::uint32_t>::max()) {
    throw DataError("sequence length too large for PAK1");
  }
  std::string out(kPackedMagic, 4);
  const auto length = static_cast<std::uint32_t>(packed.sequence_length);
  const auto count = static_cast<std::uint64_t>(packed.sequences.size());
  out.append(reinterpret_cast<const char*>(&length), 4);
  out.append(reinterpret_cast<const char*>(&count), 8);
  out.reserve(out.size() + packed.sequences.size() * length * 4);
  for (const PackedSequence& seq : packed.sequences) {
    if (seq.ids.size() != length) throw DataError("packed sequence has wrong length");
    out.append(reinterpret_cast<const char*>(seq.ids.data()), seq.ids.size() * sizeof(TokenId));
  }
  return out;
}

PackResult deserialize_packed(std::string_view bytes) {
  if (bytes.size() < kPackedHeader || std::memcmp(bytes.data(), kPackedMagic, 4) != 0) {
    throw DataError("not a PAK1 packed file");
  }
  std::uint32_t length = 0;
  std::uint64_t count = 0;
  std::memcpy(&length, bytes.data() + 4, 4);
  std::memcpy(&count, bytes.data() + 8, 8);
  if (length < 2) throw DataError("PAK1 sequence length must be at least 2");
  const std::size_t payload = bytes.size() - kPackedHeader;
  if (count > payload / (std::size_t{length} * sizeof(TokenId)) ||
      payload != count * length * sizeof(TokenId)) {
    throw DataError("PAK1 payload size does not match header (" + std::to_string(count) + " x " +
                    std::to_string(length) + ")");
  }
  PackResult out;
  out.sequence_length = length;
  out.sequences.resize(count);
  const char* cursor = bytes.data() + kPackedHeader;
  for (auto& seq : out.sequences) {
    seq.ids.resize(length);
    std::memcpy(seq.ids.data(), cursor, length * sizeof(TokenId));
    cursor += length * sizeof(TokenId);
  }
  out.total_ids = count * length;
  return out;
}

PackResult load_packed(const std::filesystem::path& path) { return deserialize_packed(read_file(path)); }

void MaskingConfig::validate() const {
  auto is_ratio = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (!(std::isfinite(mask_fraction) && mask_fraction >= 0.0 && mask_fraction < 1.0)) {
    throw DataError("mask_fraction must be in [0, 1)");
  }
  if (!is_ratio(mask_prob) || !is_ratio(random_prob) || !is_ratio(keep_prob)) {
    throw DataError("mask/random/keep probabilities must each be in [0, 1]");
  }
  if (std::abs(mask_prob + random_prob + keep_prob - 1.0) > 1e-9) {
    throw DataError("mask_prob + random_prob + keep_prob must equal 1");
  }
}

namespace {

// Tags separating the independent draws made for one position.
constexpr std::uint64_t kDrawSelect = 0;
constexpr std::uint64_t kDrawAction = 1;
constexpr std::uint64_t kDrawReplace = 2;

}  // namespace

MaskedExample apply_masking(const PackedSequence& seq, const MaskingConfig& cfg, const Vocabulary& vocab,
                            std::uint64_t seed, std::uint64_t epoch, std::uint64_t sequence_index) {
  cfg.validate();
  const auto specials = vocab.special_ids();
  if (vocab.size() < specials.size() + 1) {
    throw DataError("vocabulary has no non-special token to use for random replacement");
  }
  const std::uint64_t pool = vocab.size() - specials.size();
  const std::size_t n = seq.ids.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (seq.ids[i] >= vocab.size()) {
      throw DataError("sequence " + std::to_string(sequence_index) + ": id " + std::to_string(seq.ids[i]) +
                      " at position " + std::to_string(i) + " is out of range");
    }
  }

  const std::uint64_t key =
      rng::derive_key(rng::derive_key(rng::derive_key(seed, epoch), sequence_index), 0x6d6c6dULL);

  std::vector<bool> maskable(n);
  std::uint32_t maskable_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    maskable[i] = !(cfg.exclude_specials && vocab.is_special(seq.ids[i]));
    maskable_count += maskable[i] ? 1 : 0;
  }

  std::vector<bool> selected(n, false);
  if (cfg.selection == MaskSelection::bernoulli) {
    for (std::size_t i = 0; i < n; ++i) {
      selected[i] = maskable[i] && rng::to_unit(rng::at(key, 3 * i + kDrawSelect)) < cfg.mask_fraction;
    }
  } else {
    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < n; ++i) {
      if (maskable[i]) positions.push_back(i);
    }
    const auto k = static_cast<std::size_t>(
        std::llround(cfg.mask_fraction * static_cast<double>(positions.size())));
    CounterRng rng(rng::derive_key(key, 0x6578616374ULL));
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(positions.size() - i));
      std::swap(positions[i], positions[j]);
      selected[positions[i]] = true;
    }
  }

  MaskedExample out;
  out.input_ids = seq.ids;
  out.labels.assign(n, kIgnoreLabel);
  out.actions.assign(n, MaskAction::untouched);
  out.maskable = maskable_count;
  for (std::size_t i = 0; i < n; ++i) {
    if (!selected[i]) continue;
    out.labels[i] = static_cast<std::int32_t>(seq.ids[i]);
    const double u = rng::to_unit(rng::at(key, 3 * i + kDrawAction));
    if (u < cfg.mask_prob) {
      out.actions[i] = MaskAction::masked;
      out.input_ids[i] = vocab.mask_id();
    } else if (u < cfg.mask_prob + cfg.random_prob) {
      out.actions[i] = MaskAction::randomized;
      // Map a draw over the non-special pool onto vocabulary ids.
      auto id = static_cast<TokenId>(rng::to_below(rng::at(key, 3 * i + kDrawReplace), pool));
      for (TokenId s : specials) {
        if (s <= id) ++id;
      }
      out.input_ids[i] = id;
    } else {
      out.actions[i] = MaskAction::kept;
    }
  }
  return out;
}

std::vector<MaskedExample> mask_sequences(std::span<const PackedSequence> sequences,
                                          const MaskingConfig& cfg, const Vocabulary& vocab,
                                          std::uint64_t seed, std::uint64_t epoch) {
  cfg.validate();
  std::vector<MaskedExample> out(sequences.size());
  parallel_for(sequences.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = apply_masking(sequences[i], cfg, vocab, seed, epoch, i);
  });
  return out;
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double MaskingStats::selected_fraction() const { return ratio(selected, maskable); }
double MaskingStats::mask_share() const { return ratio(masked, selected); }
double MaskingStats::random_share() const { return ratio(randomized, selected); }
double MaskingStats::keep_share() const { return ratio(kept, selected); }

void MaskingStats::add(const MaskedExample& example) {
  ++count;
  maskable += example.maskable;
  for (MaskAction a : example.actions) {
    switch (a) {
      case MaskAction::untouched:
        break;
      case MaskAction::masked:
        ++selected;
        ++masked;
        break;
      case MaskAction::randomized:
        ++selected;
        ++randomized;
        break;
      case MaskAction::kept:
        ++selected;
        ++kept;
        break;
    }
  }
}

MaskingStats masking_stats(std::span<const MaskedExample> examples) {
  MaskingStats stats;
  for (const MaskedExample& e : examples) stats.add(e);
  return stats;
}

char action_code(MaskAction action) {
  switch (action) {
    case MaskAction::untouched:
      return '.';
    case MaskAction::masked:
      return 'M';
    case MaskAction::randomized:
      return 'R';
    case MaskAction::kept:
      return 'K';
  }
  return '?';
}

MaskAction parse_action_code(char code) {
  switch (code) {
    case '.':
      return MaskAction::untouched;
    case 'M':
      return MaskAction::masked;
    case 'R':
      return MaskAction::randomized;
    case 'K':
      return MaskAction::kept;
    default:
      throw DataError(std::string("unknown mask action code '") + code + "'");
  }
}

std::string masked_example_to_json(const MaskedExample& example, std::uint64_t index) {
  std::string actions;
  actions.reserve(example.actions.size());
  for (MaskAction a : example.actions) actions.push_back(action_code(a));
  nlohmann::json record = {{"index", index},
                           {"input_ids", example.input_ids},
                           {"labels", example.labels},
                           {"actions", actions},
                           {"maskable", example.maskable}};
  return record.dump();
}

MaskedExample masked_example_from_json(std::string_view line) {
  nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
  if (record.is_discarded() || !record.is_object()) throw DataError("malformed masked example");
  MaskedExample out;
  try {
    out.input_ids = record.at("input_ids").get<std::vector<TokenId>>();
    out.labels = record.at("labels").get<std::vector<std::int32_t>>();
    for (char c : record.at("actions").get<std::string>()) out.actions.push_back(parse_action_code(c));
    out.maskable = record.at("maskable").get<std::uint32_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed masked example: ") + e.what());
  }
  if (out.labels.size() != out.input_ids.size() || out.actions.size() != out.input_ids.size()) {
    throw DataError("masked example fields have mismatched lengths");
  }
  return out;
}

}  // namespace nusavocab
