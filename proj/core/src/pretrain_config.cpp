#include "nusavocab/pretrain_config.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "nusavocab/error.hpp"
#include "nusavocab/random.hpp"

namespace nusavocab {

using json = nlohmann::ordered_json;

ConfigValidation validate_pretrain_config(const PretrainConfig& cfg) {
  ConfigValidation result;
  auto violate = [&](std::string field, std::string constraint) {
    result.violations.push_back({std::move(field), std::move(constraint)});
  };
  auto positive_finite = [](double v) { return std::isfinite(v) && v > 0.0; };

  if (cfg.sequence_length == 0) violate("sequence_length", "sequence_length > 0");
  if (cfg.batch_size == 0) violate("batch_size", "batch_size > 0");
  if (!positive_finite(cfg.peak_learning_rate)) violate("peak_learning_rate", "peak_learning_rate > 0");
  if (cfg.optimization_steps == 0) violate("optimization_steps", "optimization_steps > 0");
  if (cfg.warmup_steps > cfg.optimization_steps) violate("warmup_steps", "warmup ≤ steps");
  if (cfg.scheduler != "linear") violate("scheduler", "scheduler in {linear}");
  if (cfg.optimizer != "adamw") violate("optimizer", "optimizer in {adamw}");
  if (!(std::isfinite(cfg.beta1) && cfg.beta1 > 0.0 && cfg.beta1 < 1.0)) violate("beta1", "0 < beta1 < 1");
  if (!(std::isfinite(cfg.beta2) && cfg.beta2 > 0.0 && cfg.beta2 < 1.0)) violate("beta2", "0 < beta2 < 1");
  if (!(cfg.beta1 < cfg.beta2)) violate("beta1", "beta1 < beta2");
  if (!positive_finite(cfg.epsilon)) violate("epsilon", "epsilon > 0");
  if (!(std::isfinite(cfg.weight_decay) && cfg.weight_decay >= 0.0)) violate("weight_decay", "weight_decay >= 0");
  if (cfg.numeric_format.empty()) violate("numeric_format", "numeric_format is non-empty");

  if (result.ok()) result.config = cfg;
  return result;
}

namespace {

template <typename T>
void read_field(const json& obj, const char* name, T& out, ConfigValidation& result) {
  auto it = obj.find(name);
  if (it == obj.end()) return;
  if constexpr (std::is_same_v<T, std::string>) {
    if (!it->is_string()) {
      result.violations.push_back({name, std::string(name) + " must be a string"});
      return;
    }
  } else if constexpr (std::is_integral_v<T>) {
    if (!it->is_number_unsigned()) {
      result.violations.push_back({name, std::string(name) + " must be a non-negative integer"});
      return;
    }
  } else {
    if (!it->is_number()) {
      result.violations.push_back({name, std::string(name) + " must be a number"});
      return;
    }
  }
  out = it->get<T>();
}

}  // namespace

ConfigValidation parse_pretrain_config(std::string_view json_text) {
  ConfigValidation result;
  json obj = json::parse(json_text, nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) {
    result.violations.push_back({"<document>", "config must be a JSON object"});
    return result;
  }
  static constexpr const char* kFields[] = {
      "sequence_length", "batch_size", "peak_learning_rate", "warmup_steps", "optimization_steps",
      "scheduler",       "optimizer",  "beta1",              "beta2",        "epsilon",
      "weight_decay",    "numeric_format"};
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* f : kFields) known = known || item.key() == f;
    if (!known) result.violations.push_back({item.key(), "unknown field"});
  }

  PretrainConfig cfg;
  read_field(obj, "sequence_length", cfg.sequence_length, result);
  read_field(obj, "batch_size", cfg.batch_size, result);
  read_field(obj, "peak_learning_rate", cfg.peak_learning_rate, result);
  read_field(obj, "warmup_steps", cfg.warmup_steps, result);
  read_field(obj, "optimization_steps", cfg.optimization_steps, result);
  read_field(obj, "scheduler", cfg.scheduler, result);
  read_field(obj, "optimizer", cfg.optimizer, result);
  read_field(obj, "beta1", cfg.beta1, result);
  read_field(obj, "beta2", cfg.beta2, result);
  read_field(obj, "epsilon", cfg.epsilon, result);
  read_field(obj, "weight_decay", cfg.weight_decay, result);
  read_field(obj, "numeric_format", cfg.numeric_format, result);

  ConfigValidation checked = validate_pretrain_config(cfg);
  result.violations.insert(result.violations.end(), checked.violations.begin(), checked.violations.end());
  if (result.ok()) result.config = cfg;
  return result;
}

std::string pretrain_config_to_json(const PretrainConfig& cfg) {
  json obj;
  obj["sequence_length"] = cfg.sequence_length;
  obj["batch_size"] = cfg.batch_size;
  obj["peak_learning_rate"] = cfg.peak_learning_rate;
  obj["warmup_steps"] = cfg.warmup_steps;
  obj["optimization_steps"] = cfg.optimization_steps;
  obj["scheduler"] = cfg.scheduler;
  obj["optimizer"] = cfg.optimizer;
  obj["beta1"] = cfg.beta1;
  obj["beta2"] = cfg.beta2;
  obj["epsilon"] = cfg.epsilon;
  obj["weight_decay"] = cfg.weight_decay;
  obj["numeric_format"] = cfg.numeric_format;
  return obj.dump(2);
}

std::uint64_t token_budget(const PretrainConfig& cfg) {
  using u128 = uint128;
  constexpr u128 kMax = std::numeric_limits<std::uint64_t>::max();
  const u128 per_seq = u128{cfg.optimization_steps} * cfg.batch_size;
  if (per_seq > kMax) throw DataError("token budget overflows 64 bits");
  const u128 total = per_seq * cfg.sequence_length;
  if (total > kMax) throw DataError("token budget overflows 64 bits");
  return static_cast<std::uint64_t>(total);
}

}  // namespace nusavocab
