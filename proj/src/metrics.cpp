#include "bhs/metrics.hpp"

#include <cstdio>
#include <fstream>

#include "bhs/corpus.hpp"
#include "bhs/error.hpp"

namespace bhs {

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

MetricsReport compute_metrics(std::span<const std::size_t> gold,
                              std::span<const std::size_t> predicted, std::size_t n_classes) {
  if (gold.size() != predicted.size() || gold.empty()) {
    throw Error(Errc::kShapeMismatch, "metrics need equal, non-empty gold and predicted lists");
  }
  MetricsReport r;
  r.n_classes = n_classes;
  r.total = gold.size();
  r.confusion.assign(n_classes, std::vector<std::size_t>(n_classes, 0));
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] >= n_classes || predicted[i] >= n_classes) {
      throw Error(Errc::kIndexOutOfRange, "label outside [0, " + std::to_string(n_classes) + ")");
    }
    ++r.confusion[gold[i]][predicted[i]];
  }
  std::size_t correct = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    correct += r.confusion[c][c];
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.total);

  std::size_t counted = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    std::size_t support = 0;
    std::size_t predicted_c = 0;
    for (std::size_t k = 0; k < n_classes; ++k) {
      support += r.confusion[c][k];
      predicted_c += r.confusion[k][c];
    }
    const auto tp = static_cast<double>(r.confusion[c][c]);
    ClassMetrics m;
    m.support = support;
    m.precision = ratio(tp, static_cast<double>(predicted_c));
    m.recall = ratio(tp, static_cast<double>(support));
    m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
    r.per_class.push_back(m);
    r.zero_support.push_back(support == 0);
    if (support > 0) {
      ++counted;
      r.macro_precision += m.precision;
      r.macro_recall += m.recall;
      r.macro_f1 += m.f1;
      const double w = static_cast<double>(support) / static_cast<double>(r.total);
      r.weighted_precision += w * m.precision;
      r.weighted_recall += w * m.recall;
      r.weighted_f1 += w * m.f1;
    }
  }
  r.macro_precision = ratio(r.macro_precision, static_cast<double>(counted));
  r.macro_recall = ratio(r.macro_recall, static_cast<double>(counted));
  r.macro_f1 = ratio(r.macro_f1, static_cast<double>(counted));
  return r;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json classes = nlohmann::json::array();
  for (std::size_t c = 0; c < metrics.per_class.size(); ++c) {
    const ClassMetrics& m = metrics.per_class[c];
    classes.push_back({
        {"class", c < kNumClasses ? std::string(kClassNames[c]) : std::to_string(c)},
        {"f1", m.f1},
        {"precision", m.precision},
        {"recall", m.recall},
        {"support", m.support},
        {"zero_support", static_cast<bool>(metrics.zero_support[c])},
    });
  }
  return {
      {"accuracy", metrics.accuracy},
      {"architecture", architecture},
      {"best_epoch", best_epoch},
      {"confusion", metrics.confusion},
      {"early_stopped", early_stopped},
      {"epochs_run", epochs_run},
      {"macro", {{"f1", metrics.macro_f1},
                 {"precision", metrics.macro_precision},
                 {"recall", metrics.macro_recall}}},
      {"peak_memory_mb", peak_memory_mb},
      {"per_class", classes},
      {"test_samples", test_samples},
      {"train_samples", train_samples},
      {"train_seconds", train_seconds},
      {"validation_samples", validation_samples},
      {"weighted", {{"f1", metrics.weighted_f1},
                    {"precision", metrics.weighted_precision},
                    {"recall", metrics.weighted_recall}}},
  };
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  EvalReport r;
  try {
    r.architecture = j.at("architecture").get<std::string>();
    r.train_seconds = j.at("train_seconds").get<double>();
    r.peak_memory_mb = j.at("peak_memory_mb").get<double>();
    r.train_samples = j.at("train_samples").get<std::size_t>();
    r.validation_samples = j.at("validation_samples").get<std::size_t>();
    r.test_samples = j.at("test_samples").get<std::size_t>();
    r.epochs_run = j.at("epochs_run").get<std::size_t>();
    r.best_epoch = j.at("best_epoch").get<std::size_t>();
    r.early_stopped = j.at("early_stopped").get<bool>();
    MetricsReport& m = r.metrics;
    m.accuracy = j.at("accuracy").get<double>();
    m.confusion = j.at("confusion").get<std::vector<std::vector<std::size_t>>>();
    m.n_classes = m.confusion.size();
    for (const auto& row : m.confusion) {
      for (std::size_t v : row) {
        m.total += v;
      }
    }
    for (const auto& c : j.at("per_class")) {
      m.per_class.push_back({c.at("precision").get<double>(), c.at("recall").get<double>(),
                             c.at("f1").get<double>(), c.at("support").get<std::size_t>()});
      m.zero_support.push_back(c.at("zero_support").get<bool>());
    }
    m.macro_precision = j.at("macro").at("precision").get<double>();
    m.macro_recall = j.at("macro").at("recall").get<double>();
    m.macro_f1 = j.at("macro").at("f1").get<double>();
    m.weighted_precision = j.at("weighted").at("precision").get<double>();
    m.weighted_recall = j.at("weighted").at("recall").get<double>();
    m.weighted_f1 = j.at("weighted").at("f1").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kMalformedRow, std::string("evaluation report: ") + e.what());
  }
  return r;
}

std::string EvalReport::to_text() const {
  std::string out;
  out += "architecture: " + architecture + "\n";
  out += "samples: train " + std::to_string(train_samples) + ", validation " +
         std::to_string(validation_samples) + ", test " + std::to_string(test_samples) + "\n";
  out += "epochs: " + std::to_string(epochs_run) + " (best " + std::to_string(best_epoch) +
         (early_stopped ? ", early stop" : "") + ")\n";
  out += "training time (s): " + fixed(train_seconds, 2) + "\n";
  out += "peak memory (MB): " + fixed(peak_memory_mb, 1) + "\n";
  out += "accuracy: " + fixed(metrics.accuracy, 4) + "\n\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-20s %9s %9s %9s %8s\n", "class", "precision", "recall",
                "f1", "support");
  out += line;
  for (std::size_t c = 0; c < metrics.per_class.size(); ++c) {
    const ClassMetrics& m = metrics.per_class[c];
    const std::string name = c < kNumClasses ? std::string(kClassNames[c]) : std::to_string(c);
    std::snprintf(line, sizeof line, "%-20s %9.4f %9.4f %9.4f %8zu%s\n", name.c_str(),
                  m.precision, m.recall, m.f1, m.support,
                  metrics.zero_support[c] ? "  (no support)" : "");
    out += line;
  }
  std::snprintf(line, sizeof line, "%-20s %9.4f %9.4f %9.4f\n", "macro avg",
                metrics.macro_precision, metrics.macro_recall, metrics.macro_f1);
  out += line;
  std::snprintf(line, sizeof line, "%-20s %9.4f %9.4f %9.4f\n", "weighted avg",
                metrics.weighted_precision, metrics.weighted_recall, metrics.weighted_f1);
  out += line;
  out += "\nconfusion (rows gold, columns predicted):\n";
  for (const auto& row : metrics.confusion) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      std::snprintf(line, sizeof line, "%s%5zu", k == 0 ? "" : " ", row[k]);
      out += line;
    }
    out += "\n";
  }
  return out;
}

double peak_memory_mb() {
  std::ifstream status("/proc/self/status");
  std::string key;
  while (status >> key) {
    if (key == "VmHWM:") {
      double kb = 0.0;
      status >> kb;
      return kb / 1024.0;
    }
    std::string rest;
    std::getline(status, rest);
  }
  return 0.0;
}

}  // namespace bhs
