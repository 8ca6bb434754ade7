#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bhs/preprocess.hpp"

namespace bhs {

inline constexpr std::int32_t kPadId = 0;
inline constexpr std::int32_t kUnkId = 1;

/// Term ↔ index map with document frequencies. Indices 0 and 1 are reserved
/// for PAD and UNK; real terms start at 2 and are ordered by descending
/// corpus frequency, ties broken by byte order of the term.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Throws Error(kEmptyCorpus) when `docs` is empty.
  static Vocabulary fit(std::span<const TokenSequence> docs,
                        std::optional<std::size_t> max_terms = std::nullopt);

  std::optional<std::int32_t> find(std::string_view term) const;
  std::int32_t id_or_unk(std::string_view term) const;

  /// Number of ids, reserved ones included.
  std::size_t size() const { return terms_.size() + 2; }
  std::size_t term_count() const { return terms_.size(); }
  std::size_t corpus_size() const { return corpus_size_; }

  /// Term and document frequency for a real term id (≥ 2).
  const std::string& term(std::int32_t id) const;
  std::size_t document_frequency(std::int32_t id) const;

  /// Header `#bhs-vocabulary<TAB>version=1<TAB>N=<docs>`, then one
  /// `term<TAB>index<TAB>document_frequency` row per term in index order.
  std::string to_tsv() const;

  /// Throws Error(kFormatVersionMismatch) or Error(kMalformedRow).
  static Vocabulary from_tsv(std::string_view text);

  std::string fingerprint() const;

 private:
  void add(std::string term, std::size_t df);

  std::vector<std::string> terms_;
  std::vector<std::size_t> df_;
  std::unordered_map<std::string, std::int32_t> index_;
  std::size_t corpus_size_ = 0;
};

/// Sparse term-id → weight map. Every in-vocabulary term of the document has
/// an entry, including those whose weight is exactly zero.
using TfIdfVector = std::map<std::int32_t, double>;

/// w_i = TF_i·ln(N/n_i) / ‖TF·ln(N/n)‖₂ with raw in-document counts. A
/// document whose unnormalized vector is zero maps to all-zero weights.
TfIdfVector tfidf(const TokenSequence& doc, const Vocabulary& vocab);

std::vector<double> densify(const TfIdfVector& v, std::size_t dim);

struct EncodedSequence {
  std::vector<std::int32_t> ids;  // exactly max_len entries
  std::size_t true_length = 0;    // tokens kept before padding
};

/// Maps tokens to ids (UNK when absent), truncates the tail beyond max_len,
/// and pads the tail with PAD. Throws Error(kInvalidArgument) if max_len is 0.
EncodedSequence encode_sequence(const TokenSequence& doc, const Vocabulary& vocab,
                                std::size_t max_len);

/// Nearest-rank 95th percentile of document lengths, clamped to
/// [floor, cap].
std::size_t choose_max_len(std::span<const TokenSequence> docs, std::size_t cap = 64,
                           std::size_t floor = 1);

}  // namespace bhs
