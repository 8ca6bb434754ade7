#include "bhs/inference.hpp"

#include <algorithm>

namespace bhs {

Prediction predict(const TrainedModel& trained, std::string_view text,
                   const TokenPipelineConfig& pipeline) {
  const std::string owned(text);
  return predict_batch(trained, std::span<const std::string>(&owned, 1), pipeline).front();
}

std::vector<Prediction> predict_batch(const TrainedModel& trained,
                                      std::span<const std::string> texts,
                                      const TokenPipelineConfig& pipeline) {
  constexpr std::size_t kChunk = 256;
  const std::size_t len = trained.model.spec().max_len;
  std::vector<Prediction> out(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += kChunk) {
    const std::size_t end = std::min(texts.size(), start + kChunk);
    std::vector<std::int32_t> ids;
    ids.reserve((end - start) * len);
    for (std::size_t i = start; i < end; ++i) {
      Prediction& p = out[i];
      p.tokens = run_pipeline(texts[i], pipeline);
      p.empty_after_preprocessing = p.tokens.empty();
      EncodedSequence e = encode_sequence(p.tokens, trained.vocab, len);
      ids.insert(ids.end(), e.ids.begin(), e.ids.end());
    }
    std::vector<std::vector<double>> probs = trained.model.predict_proba(ids, end - start);
    for (std::size_t i = start; i < end; ++i) {
      Prediction& p = out[i];
      std::copy_n(probs[i - start].begin(), kNumClasses, p.distribution.begin());
      p.label = label_from_index(static_cast<int>(argmax(p.distribution)));
    }
  }
  return out;
}

}  // namespace bhs
