#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace bhs::testing {

std::map<std::string, double> naive_tfidf(const TokenSequence& doc,
                                          const std::vector<TokenSequence>& corpus) {
  const double n_docs = static_cast<double>(corpus.size());
  std::map<std::string, double> u;
  for (const std::string& term : doc) {
    double df = 0;
    for (const TokenSequence& d : corpus) {
      df += std::count(d.begin(), d.end(), term) > 0 ? 1 : 0;
    }
    if (df == 0) {
      continue;
    }
    const double tf = static_cast<double>(std::count(doc.begin(), doc.end(), term));
    u[term] = tf * std::log(n_docs / df);
  }
  double sq = 0;
  for (const auto& [term, v] : u) {
    sq += v * v;
  }
  const double norm = std::sqrt(sq);
  for (auto& [term, v] : u) {
    v = norm == 0 ? 0.0 : v / norm;
  }
  return u;
}

BruteMetrics brute_metrics(const std::vector<std::size_t>& gold,
                           const std::vector<std::size_t>& predicted, std::size_t n_classes) {
  BruteMetrics m;
  const std::size_t n = gold.size();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    correct += gold[i] == predicted[i] ? 1 : 0;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  std::size_t present = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    std::size_t tp = 0, pred_c = 0, gold_c = 0;
    for (std::size_t i = 0; i < n; ++i) {
      tp += gold[i] == c && predicted[i] == c ? 1 : 0;
      pred_c += predicted[i] == c ? 1 : 0;
      gold_c += gold[i] == c ? 1 : 0;
    }
    const double p = pred_c == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(pred_c);
    const double r = gold_c == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(gold_c);
    const double f = p + r == 0 ? 0.0 : 2 * p * r / (p + r);
    m.precision.push_back(p);
    m.recall.push_back(r);
    m.f1.push_back(f);
    m.support.push_back(gold_c);
    if (gold_c > 0) {
      ++present;
      m.macro_precision += p;
      m.macro_recall += r;
      m.macro_f1 += f;
      m.weighted_f1 += f * static_cast<double>(gold_c) / static_cast<double>(n);
    }
  }
  m.macro_precision /= static_cast<double>(present);
  m.macro_recall /= static_cast<double>(present);
  m.macro_f1 /= static_cast<double>(present);
  return m;
}

}  // namespace bhs::testing
