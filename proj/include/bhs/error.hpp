#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bhs {

enum class Errc {
  kFileNotFound,
  kIo,
  kMalformedRow,
  kUnknownLabel,
  kTooFewSamples,
  kInvalidArgument,
  kEmptyCorpus,
  kShapeMismatch,
  kIndexOutOfRange,
  kNonFinite,
  kGraphNotRecorded,
  kInvalidSpec,
  kDivergedLoss,
  kFormatVersionMismatch,
  kChecksumMismatch,
  kVocabHashMismatch,
  kPipelineHashMismatch,
};

/// Stable identifier for an error code, e.g. "ChecksumMismatch".
std::string_view errc_name(Errc code);

/// Every error raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map failures to exit codes.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace bhs
