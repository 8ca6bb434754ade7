#include "bhs/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "bhs/csv.hpp"
#include "bhs/error.hpp"
#include "bhs/hash.hpp"
#include "bhs/unicode.hpp"

namespace bhs {

int encode_label(std::string_view name) {
  std::string_view trimmed = unicode::trim(name);
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (kClassNames[i] == trimmed) {
      return static_cast<int>(i);
    }
  }
  throw Error(Errc::kUnknownLabel, "\"" + std::string(trimmed) + "\"");
}

std::string_view decode_label(int index) {
  return label_name(label_from_index(index));
}

ClassLabel label_from_index(int index) {
  if (index < 0 || index >= static_cast<int>(kNumClasses)) {
    throw Error(Errc::kIndexOutOfRange, "class index " + std::to_string(index));
  }
  return static_cast<ClassLabel>(index);
}

std::array<double, kNumClasses> one_hot(int index) {
  std::array<double, kNumClasses> v{};
  v[static_cast<std::size_t>(label_index(label_from_index(index)))] = 1.0;
  return v;
}

namespace {

std::string at_line(std::size_t line) { return "line " + std::to_string(line); }

}  // namespace

LabeledCorpus parse_corpus(std::string_view csv_text, const ColumnSpec& schema,
                           std::string source) {
  std::vector<csv::Record> records = csv::parse(csv_text);
  if (records.empty()) {
    throw Error(Errc::kMalformedRow, at_line(1) + ": missing header row");
  }
  const csv::Record& header = records.front();
  auto column_of = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.fields.size(); ++i) {
      if (unicode::trim(header.fields[i]) == name) {
        return i;
      }
    }
    throw Error(Errc::kMalformedRow,
                at_line(header.line) + ": header has no \"" + name + "\" column");
  };
  const std::size_t text_col = column_of(schema.text_column);
  const std::size_t label_col = column_of(schema.label_column);

  LabeledCorpus corpus;
  corpus.source = std::move(source);
  corpus.samples.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const csv::Record& rec = records[r];
    if (rec.fields.size() != header.fields.size()) {
      throw Error(Errc::kMalformedRow,
                  at_line(rec.line) + ": expected " +
                      std::to_string(header.fields.size()) + " columns, found " +
                      std::to_string(rec.fields.size()));
    }
    const std::string& text = rec.fields[text_col];
    if (!unicode::is_valid_utf8(text)) {
      throw Error(Errc::kMalformedRow, at_line(rec.line) + ": text is not valid UTF-8");
    }
    if (unicode::trim(text).empty()) {
      throw Error(Errc::kMalformedRow, at_line(rec.line) + ": empty text");
    }
    int label = 0;
    try {
      label = encode_label(rec.fields[label_col]);
    } catch (const Error& e) {
      throw Error(Errc::kUnknownLabel,
                  at_line(rec.line) + ": \"" + rec.fields[label_col] + "\"");
    }
    corpus.samples.push_back(Sample{text, static_cast<ClassLabel>(label)});
  }
  return corpus;
}

LabeledCorpus load_corpus(const std::filesystem::path& path, const ColumnSpec& schema) {
  if (!std::filesystem::exists(path)) {
    throw Error(Errc::kFileNotFound, path.string());
  }
  return parse_corpus(read_file(path), schema, path.string());
}

std::string corpus_to_csv(const LabeledCorpus& corpus) {
  std::string out = csv::format_row({"text", "label"});
  for (const Sample& s : corpus.samples) {
    out += csv::format_row({s.text, std::string(label_name(s.label))});
  }
  return out;
}

IndexSplit split_indices(std::span<const int> labels, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw Error(Errc::kInvalidArgument, "train_fraction must lie in (0, 1)");
  }
  const std::size_t n = labels.size();
  if (n == 0) {
    throw Error(Errc::kEmptyCorpus, "cannot split an empty corpus");
  }
  const double f = spec.train_fraction;
  const auto target = static_cast<std::size_t>(std::llround(f * static_cast<double>(n)));
  std::mt19937_64 rng(spec.seed);
  IndexSplit out;

  if (!spec.stratified) {
    if (target == 0 || target == n) {
      throw Error(Errc::kTooFewSamples,
                  std::to_string(n) + " samples cannot fill both sides of the split");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(target));
    out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(target), order.end());
  } else {
    std::map<int, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < n; ++i) {
      strata[labels[i]].push_back(i);
    }
    struct Quota {
      std::size_t lo, hi;
      double remainder;
    };
    std::vector<Quota> quotas;
    std::size_t sum_lo = 0;
    std::size_t sum_hi = 0;
    for (const auto& [label, members] : strata) {
      const std::size_t c = members.size();
      if (c < 2) {
        throw Error(Errc::kTooFewSamples,
                    "class " + std::to_string(label) + " has " + std::to_string(c) +
                        " sample(s); stratified split needs at least 2");
      }
      const double share = f * static_cast<double>(c);
      const auto fl = static_cast<std::size_t>(std::floor(share));
      const auto ce = static_cast<std::size_t>(std::ceil(share));
      Quota q{std::max<std::size_t>(1, fl), std::min(c - 1, ce), 0.0};
      q.remainder = share - static_cast<double>(q.lo);
      quotas.push_back(q);
      sum_lo += q.lo;
      sum_hi += q.hi;
    }
    // Each stratum gets floor or ceil of its share; the extras go to the
    // largest remainders so the total hits the target when it is reachable.
    std::size_t extras = std::clamp(target, sum_lo, sum_hi) - sum_lo;
    std::vector<std::size_t> order(quotas.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return quotas[a].remainder > quotas[b].remainder;
    });
    std::vector<std::size_t> take(quotas.size());
    for (std::size_t k = 0; k < quotas.size(); ++k) {
      take[k] = quotas[k].lo;
    }
    for (std::size_t k : order) {
      if (extras == 0) {
        break;
      }
      if (quotas[k].hi > take[k]) {
        ++take[k];
        --extras;
      }
    }
    std::size_t k = 0;
    for (auto& [label, members] : strata) {
      std::shuffle(members.begin(), members.end(), rng);
      out.train.insert(out.train.end(), members.begin(),
                       members.begin() + static_cast<std::ptrdiff_t>(take[k]));
      out.test.insert(out.test.end(),
                      members.begin() + static_cast<std::ptrdiff_t>(take[k]),
                      members.end());
      ++k;
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::pair<LabeledCorpus, LabeledCorpus> split(const LabeledCorpus& corpus,
                                              const SplitSpec& spec) {
  std::vector<int> labels;
  labels.reserve(corpus.size());
  for (const Sample& s : corpus.samples) {
    labels.push_back(label_index(s.label));
  }
  IndexSplit idx = split_indices(labels, spec);
  LabeledCorpus train{{}, corpus.source};
  LabeledCorpus test{{}, corpus.source};
  for (std::size_t i : idx.train) {
    train.samples.push_back(corpus.samples[i]);
  }
  for (std::size_t i : idx.test) {
    test.samples.push_back(corpus.samples[i]);
  }
  return {std::move(train), std::move(test)};
}

}  // namespace bhs
