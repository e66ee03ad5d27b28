#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nusavocab {

/// Continued pre-training hyperparameters. Defaults are the base-model
/// values; the large model uses peak_learning_rate = 3e-5.
struct PretrainConfig {
  std::uint64_t sequence_length = 128;
  std::uint64_t batch_size = 256;
  double peak_learning_rate = 3e-4;
  std::uint64_t warmup_steps = 24'000;
  std::uint64_t optimization_steps = 500'000;
  std::string scheduler = "linear";
  std::string optimizer = "adamw";
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
  // Recorded only; nothing here performs training arithmetic.
  std::string numeric_format = "bfloat16";

  friend bool operator==(const PretrainConfig&, const PretrainConfig&) = default;
};

struct ConfigViolation {
  std::string field;
  std::string constraint;
};

struct ConfigValidation {
  std::optional<PretrainConfig> config;  // set when there are no violations
  std::vector<ConfigViolation> violations;

  bool ok() const noexcept { return violations.empty(); }
};

ConfigValidation validate_pretrain_config(const PretrainConfig& cfg);

/// Parses a JSON object with the PretrainConfig field names. Omitted fields
/// take their defaults; unknown fields and wrong types are violations, as is
/// anything validate_pretrain_config rejects.
ConfigValidation parse_pretrain_config(std::string_view json_text);

std::string pretrain_config_to_json(const PretrainConfig& cfg);

/// optimization_steps * batch_size * sequence_length. Throws DataError on
/// 64-bit overflow.
std::uint64_t token_budget(const PretrainConfig& cfg);

}  // namespace nusavocab
