#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bhs/error.hpp"
#include "bhs/features.hpp"
#include "bhs/model.hpp"

namespace bhs {

inline constexpr std::uint32_t kModelFormatVersion = 1;

struct TrainedModel {
  Model model;
  Vocabulary vocab;
  std::string pipeline_hash;  // TokenPipelineConfig::fingerprint() of the fitted pipeline
};

/// Binary layout, little-endian:
///   "BHSMODEL" | u32 version | str spec-json | str vocab-hash |
///   str pipeline-hash | u32 tensor-count |
///   { str name | u32 rank | u64 dims[rank] | f64 values[] }* | sha256
/// where str is a u32 byte length followed by the bytes and the trailing
/// SHA-256 covers everything before it.
std::string encode_model(const Model& model, std::string_view vocab_hash,
                         std::string_view pipeline_hash);

struct DecodedModel {
  Model model;
  std::string vocab_hash;
  std::string pipeline_hash;
};

/// Checks run in order: size and magic, version (kFormatVersionMismatch),
/// checksum (kChecksumMismatch), then structure.
DecodedModel decode_model(std::string_view bytes);

void save_model(const TrainedModel& trained, const std::filesystem::path& path);

struct LoadWarning {
  Errc code;
  std::string message;
};

struct LoadedModel {
  TrainedModel trained;
  std::vector<LoadWarning> warnings;
};

/// Reads a model file together with the vocabulary it should be used with.
/// A vocabulary whose hash differs from the one recorded at save time is
/// reported as a kVocabHashMismatch warning, not an error.
LoadedModel load_model(const std::filesystem::path& model_path,
                       const std::filesystem::path& vocab_path);

}  // namespace bhs
