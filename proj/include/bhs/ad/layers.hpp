#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bhs/ad/graph.hpp"
#include "bhs/ad/ops.hpp"

namespace bhs::ad {

/// Owns parameters at stable addresses, in creation order.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  /// Throws Error(kInvalidArgument) on a duplicate name.
  Parameter& add(std::string name, Tensor value);

  Parameter* find(std::string_view name);
  const Parameter* find(std::string_view name) const;

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }

  /// Total number of scalar weights.
  std::size_t scalar_count() const;
  void zero_grad();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

/// uniform(−r, r), r = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(const Shape& shape, std::size_t fan_in, std::size_t fan_out,
                      std::mt19937_64& rng);

struct Dense {
  static Dense create(ParameterStore& store, const std::string& name, std::size_t in,
                      std::size_t out, std::mt19937_64& rng);
  Var forward(Graph& g, const Var& x) const;

  Parameter* w = nullptr;  // [in, out]
  Parameter* b = nullptr;  // [out]
};

struct Embedding {
  static Embedding create(ParameterStore& store, const std::string& name, std::size_t vocab,
                          std::size_t dim, std::mt19937_64& rng);
  Var forward(Graph& g, std::span<const std::int32_t> ids, const Shape& ids_shape) const;

  Parameter* table = nullptr;  // [vocab, dim]
};

struct Conv1d {
  static Conv1d create(ParameterStore& store, const std::string& name, std::size_t width,
                       std::size_t in, std::size_t out, std::mt19937_64& rng);
  Var forward(Graph& g, const Var& x) const;

  Parameter* kernels = nullptr;  // [width, in, out]
  Parameter* bias = nullptr;     // [out]
};

/// Gates packed in the order input, forget, output, candidate.
struct Lstm {
  struct State {
    Var h;
    Var c;
  };

  static Lstm create(ParameterStore& store, const std::string& name, std::size_t in,
                     std::size_t hidden, std::mt19937_64& rng);

  State zero_state(Graph& g, std::size_t batch) const;

  /// One step on x [B, in]. `recurrent_mask` [B, hidden], when given,
  /// multiplies h_prev on its way into the recurrent matmul only.
  State cell(Graph& g, const Var& x, const State& prev,
             const Tensor* recurrent_mask = nullptr) const;

  /// Runs over x [B, n, in] left to right (or right to left when
  /// `reverse`). Returns per-position hidden states [B, hidden] indexed by
  /// original position. Recurrent dropout draws one mask per sequence.
  std::vector<Var> run(Graph& g, const Var& x, bool reverse, double recurrent_dropout) const;

  std::size_t hidden = 0;
  Parameter* w = nullptr;  // [in, 4·hidden]
  Parameter* u = nullptr;  // [hidden, 4·hidden]
  Parameter* b = nullptr;  // [4·hidden]

 private:
  State step(Graph& g, const Var& xw, const State& prev, const Tensor* recurrent_mask) const;
};

/// h = (1 − z)⊙h_prev + z⊙h̃ with h̃ = tanh(x W_h + (r⊙h_prev) U_h + b_h).
/// Input projection packed in the order update, reset, candidate.
struct Gru {
  static Gru create(ParameterStore& store, const std::string& name, std::size_t in,
                    std::size_t hidden, std::mt19937_64& rng);

  Var zero_state(Graph& g, std::size_t batch) const;
  Var cell(Graph& g, const Var& x, const Var& h_prev,
           const Tensor* recurrent_mask = nullptr) const;
  std::vector<Var> run(Graph& g, const Var& x, bool reverse, double recurrent_dropout) const;

  std::size_t hidden = 0;
  Parameter* w = nullptr;     // [in, 3·hidden]
  Parameter* u_zr = nullptr;  // [hidden, 2·hidden]
  Parameter* u_h = nullptr;   // [hidden, hidden]
  Parameter* b = nullptr;     // [3·hidden]

 private:
  Var step(Graph& g, const Var& xw, const Var& h_prev, const Tensor* recurrent_mask) const;
};

/// Forward and backward LSTM over x [B, n, d]; output [B, n, 2·hidden]
/// with the forward half first at every position.
Var bidirectional_encode(Graph& g, const Lstm& forward, const Lstm& backward, const Var& x,
                         double recurrent_dropout);

/// score(s, h_i) = v_aᵀ tanh(W_a [s; h_i]); alpha = softmax_i(score);
/// context = Σ_i alpha_i h_i.
struct AdditiveAttention {
  struct Result {
    Var context;  // [B, d_h]
    Var alpha;    // [B, n]
  };

  static AdditiveAttention create(ParameterStore& store, const std::string& name,
                                  std::size_t state_dim, std::size_t encoder_dim,
                                  std::size_t attention_dim, std::mt19937_64& rng);

  /// s [B, d_s], h [B, n, d_h].
  Result forward(Graph& g, const Var& s, const Var& h) const;

  std::size_t state_dim = 0;
  std::size_t encoder_dim = 0;
  Parameter* w_a = nullptr;  // [d_s + d_h, d_att]
  Parameter* v_a = nullptr;  // [d_att]
};

}  // namespace bhs::ad
