#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bhs {

inline constexpr std::size_t kNumClasses = 7;

/// The seven comment categories in their canonical encoding order.
enum class ClassLabel : int {
  kHateSpeech = 0,
  kAggressiveComment = 1,
  kReligiousHatred = 2,
  kEthnicalAttack = 3,
  kReligiousComment = 4,
  kPoliticalComment = 5,
  kSuicidalComment = 6,
};

/// Canonical display names, indexed by encoding.
inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "Hate Speech",      "Aggressive Comment", "Religious Hatred",
    "Ethnical Attack",  "Religious Comment",  "Political Comment",
    "Suicidal Comment",
};

/// Maps a canonical name (surrounding whitespace ignored) to its index.
/// Throws Error(kUnknownLabel).
int encode_label(std::string_view name);

/// Inverse of encode_label. Throws Error(kIndexOutOfRange).
std::string_view decode_label(int index);

ClassLabel label_from_index(int index);
inline int label_index(ClassLabel label) { return static_cast<int>(label); }
inline std::string_view label_name(ClassLabel label) {
  return kClassNames[static_cast<std::size_t>(label)];
}

/// Throws Error(kIndexOutOfRange) for indices outside [0, 6].
std::array<double, kNumClasses> one_hot(int index);

struct Sample {
  std::string text;
  ClassLabel label = ClassLabel::kHateSpeech;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct LabeledCorpus {
  std::vector<Sample> samples;
  std::string source = "inline";

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

struct ColumnSpec {
  std::string text_column = "text";
  std::string label_column = "label";
};

/// Parses CSV text with a header row. Extra columns are ignored; every row
/// must have the header's column count.
///
/// Errors: kMalformedRow (wrong column count, invalid UTF-8, blank text,
/// missing header columns), kUnknownLabel (non-canonical label string).
/// Messages carry the 1-based line number.
LabeledCorpus parse_corpus(std::string_view csv_text, const ColumnSpec& schema = {},
                           std::string source = "inline");

/// Reads and parses a corpus file. Throws Error(kFileNotFound) if absent.
LabeledCorpus load_corpus(const std::filesystem::path& path,
                          const ColumnSpec& schema = {});

/// Serializes with a `text,label` header and LF line endings.
std::string corpus_to_csv(const LabeledCorpus& corpus);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 42;
  bool stratified = true;
};

struct IndexSplit {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

/// Seeded partition of sample indices by label. The train side has
/// round(train_fraction * n) members whenever every stratum can also keep at
/// least one sample on each side; stratified mode keeps each class within one
/// sample of its proportional share.
///
/// Errors: kInvalidArgument (fraction outside (0,1)), kEmptyCorpus,
/// kTooFewSamples (a side would be empty, or a stratum has fewer than 2).
IndexSplit split_indices(std::span<const int> labels, const SplitSpec& spec);

/// split_indices applied to a corpus; each side keeps the original order.
std::pair<LabeledCorpus, LabeledCorpus> split(const LabeledCorpus& corpus,
                                              const SplitSpec& spec);

}  // namespace bhs
