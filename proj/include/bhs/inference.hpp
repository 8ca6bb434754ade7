#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bhs/corpus.hpp"
#include "bhs/preprocess.hpp"
#include "bhs/serialize.hpp"

namespace bhs {

struct Prediction {
  ClassLabel label = ClassLabel::kHateSpeech;
  std::array<double, kNumClasses> distribution{};
  TokenSequence tokens;
  /// The pipeline left no tokens; the prediction is for an all-PAD input.
  bool empty_after_preprocessing = false;
};

Prediction predict(const TrainedModel& trained, std::string_view text,
                   const TokenPipelineConfig& pipeline);

/// predict() over many texts in one batched forward pass per chunk.
std::vector<Prediction> predict_batch(const TrainedModel& trained,
                                      std::span<const std::string> texts,
                                      const TokenPipelineConfig& pipeline);

}  // namespace bhs
