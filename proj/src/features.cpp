#include "bhs/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "bhs/error.hpp"
#include "bhs/hash.hpp"

namespace bhs {

namespace {

constexpr std::string_view kVocabMagic = "#bhs-vocabulary";
constexpr int kVocabVersion = 1;

std::size_t parse_count(const std::string& field, std::size_t line_no) {
  try {
    std::size_t used = 0;
    unsigned long long v = std::stoull(field, &used);
    if (used != field.size()) {
      throw std::invalid_argument(field);
    }
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw Error(Errc::kMalformedRow,
                "vocabulary line " + std::to_string(line_no) + ": bad integer \"" + field + "\"");
  }
}

}  // namespace

Vocabulary Vocabulary::fit(std::span<const TokenSequence> docs,
                           std::optional<std::size_t> max_terms) {
  if (docs.empty()) {
    throw Error(Errc::kEmptyCorpus, "cannot fit a vocabulary on zero documents");
  }
  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> stats;  // tf, df
  for (const TokenSequence& doc : docs) {
    std::set<std::string_view> seen;
    for (const std::string& t : doc) {
      auto& [tf, df] = stats[t];
      ++tf;
      if (seen.insert(t).second) {
        ++df;
      }
    }
  }
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> ranked(stats.begin(),
                                                                                 stats.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.first != b.second.first) {
      return a.second.first > b.second.first;
    }
    return a.first < b.first;
  });
  if (max_terms && ranked.size() > *max_terms) {
    ranked.resize(*max_terms);
  }
  Vocabulary v;
  v.corpus_size_ = docs.size();
  for (auto& [term, counts] : ranked) {
    v.add(term, counts.second);
  }
  return v;
}

void Vocabulary::add(std::string term, std::size_t df) {
  const auto id = static_cast<std::int32_t>(terms_.size() + 2);
  index_.emplace(term, id);
  terms_.push_back(std::move(term));
  df_.push_back(df);
}

std::optional<std::int32_t> Vocabulary::find(std::string_view term) const {
  if (auto it = index_.find(std::string(term)); it != index_.end()) {
    return it->second;
  }
  return std::nullopt;
}

std::int32_t Vocabulary::id_or_unk(std::string_view term) const {
  return find(term).value_or(kUnkId);
}

const std::string& Vocabulary::term(std::int32_t id) const {
  if (id < 2 || static_cast<std::size_t>(id) >= size()) {
    throw Error(Errc::kIndexOutOfRange, "term id " + std::to_string(id));
  }
  return terms_[static_cast<std::size_t>(id - 2)];
}

std::size_t Vocabulary::document_frequency(std::int32_t id) const {
  if (id < 2 || static_cast<std::size_t>(id) >= size()) {
    throw Error(Errc::kIndexOutOfRange, "term id " + std::to_string(id));
  }
  return df_[static_cast<std::size_t>(id - 2)];
}

std::string Vocabulary::to_tsv() const {
  std::string out = std::string(kVocabMagic) + "\tversion=" + std::to_string(kVocabVersion) +
                    "\tN=" + std::to_string(corpus_size_) + "\n";
  out += "term\tindex\tdocument_frequency\n";
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    out += terms_[i] + "\t" + std::to_string(i + 2) + "\t" + std::to_string(df_[i]) + "\n";
  }
  return out;
}

Vocabulary Vocabulary::from_tsv(std::string_view text) {
  Vocabulary v;
  std::size_t line_no = 0;
  bool header = false;
  bool columns = false;
  while (!text.empty()) {
    ++line_no;
    std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (line.ends_with('\r')) {
      line.remove_suffix(1);
    }
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> f;
    for (std::size_t start = 0;;) {
      std::size_t tab = line.find('\t', start);
      f.emplace_back(line.substr(start, tab == std::string_view::npos ? line.npos : tab - start));
      if (tab == std::string_view::npos) {
        break;
      }
      start = tab + 1;
    }
    if (!header) {
      if (f.size() != 3 || f[0] != kVocabMagic || !f[1].starts_with("version=") ||
          !f[2].starts_with("N=")) {
        throw Error(Errc::kMalformedRow, "vocabulary: missing header line");
      }
      if (parse_count(f[1].substr(8), line_no) != kVocabVersion) {
        throw Error(Errc::kFormatVersionMismatch, "vocabulary " + f[1]);
      }
      v.corpus_size_ = parse_count(f[2].substr(2), line_no);
      header = true;
      continue;
    }
    if (!columns) {
      columns = true;
      if (f.size() == 3 && f[0] == "term" && f[1] == "index") {
        continue;
      }
    }
    if (f.size() != 3 || f[0].empty()) {
      throw Error(Errc::kMalformedRow, "vocabulary line " + std::to_string(line_no));
    }
    std::size_t index = parse_count(f[1], line_no);
    std::size_t df = parse_count(f[2], line_no);
    if (index != v.terms_.size() + 2 || df == 0 || df > v.corpus_size_ ||
        v.index_.contains(f[0])) {
      throw Error(Errc::kMalformedRow, "vocabulary line " + std::to_string(line_no) +
                                           ": indices must be dense and unique, 1 <= df <= N");
    }
    v.add(f[0], df);
  }
  if (!header) {
    throw Error(Errc::kMalformedRow, "vocabulary: empty file");
  }
  return v;
}

std::string Vocabulary::fingerprint() const { return sha256_hex(to_tsv()); }

TfIdfVector tfidf(const TokenSequence& doc, const Vocabulary& vocab) {
  std::map<std::int32_t, std::size_t> counts;
  for (const std::string& t : doc) {
    if (auto id = vocab.find(t)) {
      ++counts[*id];
    }
  }
  const auto n_docs = static_cast<double>(vocab.corpus_size());
  TfIdfVector w;
  double sum_sq = 0.0;
  for (const auto& [id, tf] : counts) {
    const auto df = static_cast<double>(vocab.document_frequency(id));
    const double u = static_cast<double>(tf) * std::log(n_docs / df);
    w[id] = u;
    sum_sq += u * u;
  }
  if (sum_sq > 0.0) {
    const double norm = std::sqrt(sum_sq);
    for (auto& [id, value] : w) {
      value /= norm;
    }
  }
  return w;
}

std::vector<double> densify(const TfIdfVector& v, std::size_t dim) {
  std::vector<double> out(dim, 0.0);
  for (const auto& [id, value] : v) {
    if (id < 0 || static_cast<std::size_t>(id) >= dim) {
      throw Error(Errc::kIndexOutOfRange, "term id " + std::to_string(id));
    }
    out[static_cast<std::size_t>(id)] = value;
  }
  return out;
}

EncodedSequence encode_sequence(const TokenSequence& doc, const Vocabulary& vocab,
                                std::size_t max_len) {
  if (max_len == 0) {
    throw Error(Errc::kInvalidArgument, "max_len must be at least 1");
  }
  EncodedSequence enc;
  enc.ids.assign(max_len, kPadId);
  enc.true_length = std::min(doc.size(), max_len);
  for (std::size_t i = 0; i < enc.true_length; ++i) {
    enc.ids[i] = vocab.id_or_unk(doc[i]);
  }
  return enc;
}

std::size_t choose_max_len(std::span<const TokenSequence> docs, std::size_t cap,
                           std::size_t floor) {
  if (docs.empty()) {
    return std::max<std::size_t>(floor, 1);
  }
  std::vector<std::size_t> lengths;
  lengths.reserve(docs.size());
  for (const TokenSequence& d : docs) {
    lengths.push_back(d.size());
  }
  std::sort(lengths.begin(), lengths.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(lengths.size())));
  const std::size_t p95 = lengths[std::max<std::size_t>(rank, 1) - 1];
  return std::clamp(p95, std::max<std::size_t>(floor, 1), std::max(cap, floor));
}

}  // namespace bhs
