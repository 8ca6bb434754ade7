#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "bhs/metrics.hpp"
#include "bhs/train.hpp"

namespace bhs {

struct RunSummary {
  std::string name;
  EvalReport report;
};

/// One row per run: architecture, memory usage (MB), training time (s),
/// accuracy (%).
std::string format_comparison_table(const std::vector<RunSummary>& runs);

/// Rows are classes, columns are runs, cells are per-class F1.
std::string format_f1_table(const std::vector<RunSummary>& runs);

/// SVG 1.1 line chart of train and validation accuracy per epoch: one
/// <polyline> per series with one point per epoch.
std::string history_svg(const History& history, std::string_view title);

}  // namespace bhs
