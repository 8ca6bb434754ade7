#include "bhs/report.hpp"

#include <algorithm>
#include <cstdio>

#include "bhs/corpus.hpp"

namespace bhs {

namespace {

std::string format(const char* fmt, auto... args) {
  const int n = std::snprintf(nullptr, 0, fmt, args...);
  std::string out(static_cast<std::size_t>(n), '\0');
  std::snprintf(out.data(), out.size() + 1, fmt, args...);
  return out;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

std::string format_comparison_table(const std::vector<RunSummary>& runs) {
  std::string out = format("%-14s %-24s %18s %24s %14s\n", "Architecture", "Run",
                           "Memory usage (MB)", "Time for training (s)", "Accuracy (%)");
  for (const RunSummary& r : runs) {
    out += format("%-14s %-24s %18.1f %24.2f %14.2f\n", r.report.architecture.c_str(),
                  r.name.c_str(), r.report.peak_memory_mb, r.report.train_seconds,
                  100.0 * r.report.metrics.accuracy);
  }
  return out;
}

std::string format_f1_table(const std::vector<RunSummary>& runs) {
  std::string out = format("%-20s", "Class");
  for (const RunSummary& r : runs) {
    out += format(" %12s", r.report.architecture.c_str());
  }
  out += "\n";
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    out += format("%-20s", std::string(kClassNames[c]).c_str());
    for (const RunSummary& r : runs) {
      const auto& per_class = r.report.metrics.per_class;
      if (c < per_class.size() && !r.report.metrics.zero_support[c]) {
        out += format(" %12.4f", per_class[c].f1);
      } else {
        out += format(" %12s", "n/a");
      }
    }
    out += "\n";
  }
  out += format("%-20s", "macro avg");
  for (const RunSummary& r : runs) {
    out += format(" %12.4f", r.report.metrics.macro_f1);
  }
  out += "\n";
  return out;
}

std::string history_svg(const History& history, std::string_view title) {
  constexpr double kWidth = 640, kHeight = 400;
  constexpr double kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const std::size_t epochs = history.size();
  auto x_of = [&](std::size_t i) {
    return epochs <= 1 ? kLeft + plot_w / 2
                       : kLeft + plot_w * static_cast<double>(i) / static_cast<double>(epochs - 1);
  };
  auto y_of = [&](double acc) { return kTop + plot_h * (1.0 - std::clamp(acc, 0.0, 1.0)); };

  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"%.0f\" height=\"%.0f\" "
      "viewBox=\"0 0 %.0f %.0f\">\n",
      kWidth, kHeight, kWidth, kHeight);
  out += "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + format("%.1f", kWidth / 2) +
         "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
         xml_escape(title) + "</text>\n";
  out += format(
      "<g stroke=\"black\" stroke-width=\"1\"><line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" "
      "y2=\"%.1f\"/><line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\"/></g>\n",
      kLeft, kTop, kLeft, kTop + plot_h, kLeft, kTop + plot_h, kLeft + plot_w, kTop + plot_h);
  out += "<g font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double acc = k / 4.0;
    out += format("<text x=\"%.1f\" y=\"%.1f\">%.2f</text>\n", kLeft - 6, y_of(acc) + 4, acc);
  }
  out += "</g>\n";
  out += format(
      "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      "font-size=\"12\">epoch (1 to %zu)</text>\n",
      kLeft + plot_w / 2, kHeight - 14, epochs);
  out += format(
      "<text x=\"16\" y=\"%.1f\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      "font-size=\"12\" transform=\"rotate(-90 16 %.1f)\">accuracy</text>\n",
      kTop + plot_h / 2, kTop + plot_h / 2);

  auto series = [&](const char* id, const char* color, auto value) {
    std::string points;
    for (std::size_t i = 0; i < epochs; ++i) {
      if (!points.empty()) {
        points += ' ';
      }
      points += format("%.2f,%.2f", x_of(i), y_of(value(history[i])));
    }
    return format("<polyline id=\"%s\" fill=\"none\" stroke=\"%s\" stroke-width=\"2\" points=\"",
                  id, color) +
           points + "\"/>\n";
  };
  out += series("train", "#1f77b4", [](const EpochStats& e) { return e.train_acc; });
  out += series("validation", "#ff7f0e", [](const EpochStats& e) { return e.val_acc; });

  out += format(
      "<g font-family=\"sans-serif\" font-size=\"12\"><rect x=\"%.1f\" y=\"%.1f\" width=\"12\" "
      "height=\"3\" fill=\"#1f77b4\"/><text x=\"%.1f\" y=\"%.1f\">train</text>"
      "<rect x=\"%.1f\" y=\"%.1f\" width=\"12\" height=\"3\" fill=\"#ff7f0e\"/>"
      "<text x=\"%.1f\" y=\"%.1f\">validation</text></g>\n",
      kWidth - 150, kTop + plot_h - 36, kWidth - 134, kTop + plot_h - 31, kWidth - 150,
      kTop + plot_h - 18, kWidth - 134, kTop + plot_h - 13);
  out += "</svg>\n";
  return out;
}

}  // namespace bhs
