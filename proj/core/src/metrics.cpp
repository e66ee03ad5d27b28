#include "nusavocab/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "nusavocab/error.hpp"

namespace nusavocab::metrics {
namespace {

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double f1_of(double precision, double recall) {
  return safe_div(2.0 * precision * recall, precision + recall);
}

}  // namespace

MacroF1Report macro_f1(std::span<const std::string> gold, std::span<const std::string> pred,
                       std::optional<std::set<std::string>> label_set) {
  if (gold.size() != pred.size()) {
    throw DataError("gold has " + std::to_string(gold.size()) + " labels but pred has " +
                    std::to_string(pred.size()));
  }
  if (gold.empty()) throw DataError("macro F1 of an empty result is undefined");

  std::set<std::string> labels;
  if (label_set) {
    labels = std::move(*label_set);
    for (const std::string& g : gold) {
      if (!labels.contains(g)) throw DataError("gold label '" + g + "' is not in the label set");
    }
  } else {
    labels.insert(gold.begin(), gold.end());
    labels.insert(pred.begin(), pred.end());
  }

  MacroF1Report report;
  for (const std::string& label : labels) report.per_class[label];
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == pred[i]) {
      ++report.per_class[gold[i]].true_positives;
      continue;
    }
    ++report.per_class[gold[i]].false_negatives;
    if (auto it = report.per_class.find(pred[i]); it != report.per_class.end()) ++it->second.false_positives;
  }

  double sum = 0.0;
  for (auto& [label, s] : report.per_class) {
    const auto tp = static_cast<double>(s.true_positives);
    s.precision = safe_div(tp, tp + static_cast<double>(s.false_positives));
    s.recall = safe_div(tp, tp + static_cast<double>(s.false_negatives));
    s.f1 = f1_of(s.precision, s.recall);
    sum += s.f1;
  }
  report.macro_f1 = sum / static_cast<double>(report.per_class.size());
  return report;
}

std::vector<Span> decode_bio(std::span<const std::string> tags) {
  std::vector<Span> spans;
  std::optional<Span> open;
  auto close = [&] {
    if (open) spans.push_back(std::move(*open));
    open.reset();
  };
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const std::string& tag = tags[i];
    if (tag == "O") {
      close();
      continue;
    }
    if (tag.size() < 3 || tag[1] != '-' || (tag[0] != 'B' && tag[0] != 'I')) {
      throw DataError("invalid BIO tag '" + tag + "' at position " + std::to_string(i));
    }
    std::string type = tag.substr(2);
    if (tag[0] == 'I' && open && open->type == type) {
      open->end = i;
      continue;
    }
    close();
    open = Span{i, i, std::move(type)};
  }
  close();
  return spans;
}

SpanF1Report conll_span_f1(std::span<const SequencePair> pairs) {
  SpanF1Report report;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const SequencePair& pair = pairs[p];
    if (pair.gold.size() != pair.pred.size()) {
      throw DataError("pair " + std::to_string(p) + ": gold has " + std::to_string(pair.gold.size()) +
                      " tags but pred has " + std::to_string(pair.pred.size()));
    }
    const std::vector<Span> gold = decode_bio(pair.gold);
    const std::vector<Span> pred = decode_bio(pair.pred);
    report.gold_spans += gold.size();
    report.predicted_spans += pred.size();
    // decode_bio emits spans in increasing start order with unique starts.
    std::vector<Span> common;
    std::set_intersection(gold.begin(), gold.end(), pred.begin(), pred.end(), std::back_inserter(common));
    report.true_positives += common.size();
  }
  const auto tp = static_cast<double>(report.true_positives);
  report.precision = safe_div(tp, static_cast<double>(report.predicted_spans));
  report.recall = safe_div(tp, static_cast<double>(report.gold_spans));
  report.f1 = f1_of(report.precision, report.recall);
  report.empty = report.gold_spans == 0 && report.predicted_spans == 0;
  return report;
}

double perplexity(double loss) {
  if (!std::isfinite(loss) || loss < 0.0) {
    throw DataError("loss must be finite and non-negative, got " + std::to_string(loss));
  }
  return std::exp(loss);
}

double delta_accuracy(double original_pct, double perturbed_pct) {
  auto check = [](double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0 || v > 100.0) {
      throw DataError(std::string(name) + " accuracy must be a percentage in [0, 100], got " +
                      std::to_string(v));
    }
  };
  check(original_pct, "original");
  check(perturbed_pct, "perturbed");
  const double delta = original_pct - perturbed_pct;
  return std::round(delta * 1e9) / 1e9;
}

}  // namespace nusavocab::metrics
