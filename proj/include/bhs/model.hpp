#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bhs/ad/layers.hpp"
#include "bhs/corpus.hpp"

namespace bhs {

enum class Architecture { kLstm, kGru, kAttention };

std::string_view architecture_name(Architecture arch);

/// Accepts "lstm", "gru" or "attention". Throws Error(kInvalidSpec) with the
/// valid values listed.
Architecture parse_architecture(std::string_view name);

struct ModelSpec {
  Architecture architecture = Architecture::kAttention;
  std::size_t embed_dim = 64;
  std::size_t kernel_width = 3;
  std::size_t conv_channels = 64;
  std::size_t rnn_hidden = 64;     // per direction; decoder state size too
  std::size_t attention_dim = 64;  // attention only
  double dropout_node = 0.4;
  double dropout_recurrent = 0.3;
  std::size_t max_len = 32;
  std::size_t vocab_size = 0;
  std::size_t n_classes = kNumClasses;

  /// Throws Error(kInvalidSpec).
  void validate() const;

  nlohmann::json to_json() const;
  static ModelSpec from_json(const nlohmann::json& j);

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// embedding → node dropout → conv1d → bidirectional LSTM → decoder head →
/// node dropout → dense. Heads:
///   lstm       decoder LSTM over the encoder states, final hidden state
///   gru        decoder GRU over the encoder states, final hidden state
///   attention  s₀ = tanh(W_p [h_fwd(n); h_bwd(1)] + b_p); one additive
///              attention step gives c₁; s₁ = GRU(c₁, s₀)
class Model {
 public:
  /// Throws Error(kInvalidSpec). Identical (spec, seed) give identical
  /// initial parameters.
  Model(const ModelSpec& spec, std::uint64_t seed);

  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  const ModelSpec& spec() const { return spec_; }
  ad::ParameterStore& parameters() { return store_; }
  const ad::ParameterStore& parameters() const { return store_; }

  /// Logits [batch, n_classes] for `ids` holding `batch` rows of equal
  /// length n ≥ kernel_width. Dropout is active when the graph is in
  /// training mode.
  ad::Var forward(ad::Graph& g, std::span<const std::int32_t> ids, std::size_t batch) const;

  /// Softmax rows in eval mode.
  std::vector<std::vector<double>> predict_proba(std::span<const std::int32_t> ids,
                                                 std::size_t batch) const;

 private:
  ad::Var head(ad::Graph& g, const ad::Var& encoded) const;

  ModelSpec spec_;
  ad::ParameterStore store_;
  ad::Embedding embedding_;
  ad::Conv1d conv_;
  ad::Lstm encoder_fwd_;
  ad::Lstm encoder_bwd_;
  ad::Lstm decoder_lstm_;
  ad::Gru decoder_gru_;
  ad::Dense bridge_;
  ad::AdditiveAttention attention_;
  ad::Dense output_;
};

/// Index of the largest entry; the lowest index wins an exact tie.
std::size_t argmax(std::span<const double> values);

}  // namespace bhs
