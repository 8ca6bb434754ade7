#include "bhs/error.hpp"

namespace bhs {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kFileNotFound: return "FileNotFound";
    case Errc::kIo: return "IoError";
    case Errc::kMalformedRow: return "MalformedRow";
    case Errc::kUnknownLabel: return "UnknownLabel";
    case Errc::kTooFewSamples: return "TooFewSamples";
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kEmptyCorpus: return "EmptyCorpus";
    case Errc::kShapeMismatch: return "ShapeMismatch";
    case Errc::kIndexOutOfRange: return "IndexOutOfRange";
    case Errc::kNonFinite: return "NonFinite";
    case Errc::kGraphNotRecorded: return "GraphNotRecorded";
    case Errc::kInvalidSpec: return "InvalidSpec";
    case Errc::kDivergedLoss: return "DivergedLoss";
    case Errc::kFormatVersionMismatch: return "FormatVersionMismatch";
    case Errc::kChecksumMismatch: return "ChecksumMismatch";
    case Errc::kVocabHashMismatch: return "VocabHashMismatch";
    case Errc::kPipelineHashMismatch: return "PipelineHashMismatch";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message),
      code_(code) {}

}  // namespace bhs
