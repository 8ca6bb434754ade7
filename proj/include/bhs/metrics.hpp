#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace bhs {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

/// Confusion-matrix metrics. A ratio with a zero denominator is 0. Macro
/// averages run over classes with support > 0 only; the others are flagged
/// in `zero_support`. Weighted averages weight each class by its support.
struct MetricsReport {
  std::size_t n_classes = 0;
  std::size_t total = 0;
  std::vector<std::vector<std::size_t>> confusion;  // [gold][predicted]
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  std::vector<bool> zero_support;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
};

/// Throws Error(kShapeMismatch) on length mismatch or empty input and
/// Error(kIndexOutOfRange) for a label ≥ n_classes.
MetricsReport compute_metrics(std::span<const std::size_t> gold,
                              std::span<const std::size_t> predicted, std::size_t n_classes);

/// Evaluation summary of one trained model, mirroring the comparison table
/// columns (memory, training time, accuracy) plus the per-class scores.
struct EvalReport {
  std::string architecture;
  MetricsReport metrics;
  double train_seconds = 0.0;
  double peak_memory_mb = 0.0;
  std::size_t train_samples = 0;
  std::size_t validation_samples = 0;
  std::size_t test_samples = 0;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  bool early_stopped = false;

  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
  std::string to_text() const;
};

/// Peak resident set size of this process in MiB (VmHWM), or 0 when the
/// platform does not expose it.
double peak_memory_mb();

}  // namespace bhs
