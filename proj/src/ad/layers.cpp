#include "bhs/ad/layers.hpp"

#include <cmath>

#include "bhs/error.hpp"

namespace bhs::ad {

Parameter& ParameterStore::add(std::string name, Tensor value) {
  if (find(name) != nullptr) {
    throw Error(Errc::kInvalidArgument, "duplicate parameter name \"" + name + "\"");
  }
  params_.push_back(std::make_unique<Parameter>(std::move(name), std::move(value)));
  return *params_.back();
}

Parameter* ParameterStore::find(std::string_view name) {
  for (auto& p : params_) {
    if (p->name == name) {
      return p.get();
    }
  }
  return nullptr;
}

const Parameter* ParameterStore::find(std::string_view name) const {
  return const_cast<ParameterStore*>(this)->find(name);
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    n += p->value.size();
  }
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) {
    p->zero_grad();
  }
}

Tensor glorot_uniform(const Shape& shape, std::size_t fan_in, std::size_t fan_out,
                      std::mt19937_64& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    t[i] = (2.0 * u - 1.0) * r;
  }
  return t;
}

// ---------------------------------------------------------------------------

Dense Dense::create(ParameterStore& store, const std::string& name, std::size_t in,
                    std::size_t out, std::mt19937_64& rng) {
  Dense d;
  d.w = &store.add(name + ".w", glorot_uniform({in, out}, in, out, rng));
  d.b = &store.add(name + ".b", Tensor({out}));
  return d;
}

Var Dense::forward(Graph& g, const Var& x) const { return linear(x, g.param(*w), g.param(*b)); }

Embedding Embedding::create(ParameterStore& store, const std::string& name, std::size_t vocab,
                            std::size_t dim, std::mt19937_64& rng) {
  Embedding e;
  e.table = &store.add(name + ".table", glorot_uniform({vocab, dim}, vocab, dim, rng));
  return e;
}

Var Embedding::forward(Graph& g, std::span<const std::int32_t> ids,
                       const Shape& ids_shape) const {
  return embedding(g.param(*table), ids, ids_shape);
}

Conv1d Conv1d::create(ParameterStore& store, const std::string& name, std::size_t width,
                      std::size_t in, std::size_t out, std::mt19937_64& rng) {
  Conv1d c;
  c.kernels =
      &store.add(name + ".kernels", glorot_uniform({width, in, out}, width * in, width * out, rng));
  c.bias = &store.add(name + ".bias", Tensor({out}));
  return c;
}

Var Conv1d::forward(Graph& g, const Var& x) const {
  return conv1d(x, g.param(*kernels), g.param(*bias));
}

// ---------------------------------------------------------------------------

namespace {

Var masked(const Var& h, const Tensor* mask) {
  return mask == nullptr ? h : apply_mask(h, *mask);
}

const Tensor* recurrent_mask(Graph& g, std::size_t batch, std::size_t hidden, double rate,
                             Tensor& storage) {
  if (!g.training() || rate == 0.0) {
    return nullptr;
  }
  storage = dropout_mask({batch, hidden}, rate, g.rng());
  return &storage;
}

void require_sequence(const Var& x, std::size_t in, const char* layer) {
  if (x.value().rank() != 3 || x.dim(2) != in || x.dim(1) == 0) {
    throw Error(Errc::kShapeMismatch, std::string(layer) + ": expected [B, n >= 1, " +
                                          std::to_string(in) + "], got " +
                                          shape_string(x.shape()));
  }
}

}  // namespace

Lstm Lstm::create(ParameterStore& store, const std::string& name, std::size_t in,
                  std::size_t hidden, std::mt19937_64& rng) {
  Lstm l;
  l.hidden = hidden;
  l.w = &store.add(name + ".w", glorot_uniform({in, 4 * hidden}, in, 4 * hidden, rng));
  l.u = &store.add(name + ".u", glorot_uniform({hidden, 4 * hidden}, hidden, 4 * hidden, rng));
  Tensor bias({4 * hidden});
  for (std::size_t j = hidden; j < 2 * hidden; ++j) {
    bias[j] = 1.0;
  }
  l.b = &store.add(name + ".b", std::move(bias));
  return l;
}

Lstm::State Lstm::zero_state(Graph& g, std::size_t batch) const {
  return {g.constant(Tensor({batch, hidden})), g.constant(Tensor({batch, hidden}))};
}

Lstm::State Lstm::step(Graph& g, const Var& xw, const State& prev,
                       const Tensor* recurrent_mask) const {
  Var gates = add(xw, matmul(masked(prev.h, recurrent_mask), g.param(*u)));
  Var sig = sigmoid(slice_last(gates, 0, 3 * hidden));
  Var i = slice_last(sig, 0, hidden);
  Var f = slice_last(sig, hidden, hidden);
  Var o = slice_last(sig, 2 * hidden, hidden);
  Var cand = tanh(slice_last(gates, 3 * hidden, hidden));
  Var c = add(mul(f, prev.c), mul(i, cand));
  return {mul(o, tanh(c)), c};
}

Lstm::State Lstm::cell(Graph& g, const Var& x, const State& prev,
                       const Tensor* recurrent_mask) const {
  return step(g, linear(x, g.param(*w), g.param(*b)), prev, recurrent_mask);
}

std::vector<Var> Lstm::run(Graph& g, const Var& x, bool reverse,
                           double recurrent_dropout) const {
  require_sequence(x, w->value.dim(0), "lstm");
  const std::size_t batch = x.dim(0), n = x.dim(1);
  Tensor mask_storage;
  const Tensor* mask = recurrent_mask(g, batch, hidden, recurrent_dropout, mask_storage);
  Var xw = linear(x, g.param(*w), g.param(*b));
  State state = zero_state(g, batch);
  std::vector<Var> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = reverse ? n - 1 - k : k;
    state = step(g, time_step(xw, t), state, mask);
    out[t] = state.h;
  }
  return out;
}

// ---------------------------------------------------------------------------

Gru Gru::create(ParameterStore& store, const std::string& name, std::size_t in,
                std::size_t hidden, std::mt19937_64& rng) {
  Gru r;
  r.hidden = hidden;
  r.w = &store.add(name + ".w", glorot_uniform({in, 3 * hidden}, in, 3 * hidden, rng));
  r.u_zr =
      &store.add(name + ".u_zr", glorot_uniform({hidden, 2 * hidden}, hidden, 2 * hidden, rng));
  r.u_h = &store.add(name + ".u_h", glorot_uniform({hidden, hidden}, hidden, hidden, rng));
  r.b = &store.add(name + ".b", Tensor({3 * hidden}));
  return r;
}

Var Gru::zero_state(Graph& g, std::size_t batch) const {
  return g.constant(Tensor({batch, hidden}));
}

Var Gru::step(Graph& g, const Var& xw, const Var& h_prev, const Tensor* recurrent_mask) const {
  Var hm = masked(h_prev, recurrent_mask);
  Var zr = sigmoid(add(slice_last(xw, 0, 2 * hidden), matmul(hm, g.param(*u_zr))));
  Var z = slice_last(zr, 0, hidden);
  Var r = slice_last(zr, hidden, hidden);
  Var cand = tanh(add(slice_last(xw, 2 * hidden, hidden), matmul(mul(r, hm), g.param(*u_h))));
  return add(h_prev, mul(z, sub(cand, h_prev)));
}

Var Gru::cell(Graph& g, const Var& x, const Var& h_prev, const Tensor* recurrent_mask) const {
  return step(g, linear(x, g.param(*w), g.param(*b)), h_prev, recurrent_mask);
}

std::vector<Var> Gru::run(Graph& g, const Var& x, bool reverse, double recurrent_dropout) const {
  require_sequence(x, w->value.dim(0), "gru");
  const std::size_t batch = x.dim(0), n = x.dim(1);
  Tensor mask_storage;
  const Tensor* mask = recurrent_mask(g, batch, hidden, recurrent_dropout, mask_storage);
  Var xw = linear(x, g.param(*w), g.param(*b));
  Var h = zero_state(g, batch);
  std::vector<Var> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = reverse ? n - 1 - k : k;
    h = step(g, time_step(xw, t), h, mask);
    out[t] = h;
  }
  return out;
}

// ---------------------------------------------------------------------------

Var bidirectional_encode(Graph& g, const Lstm& forward, const Lstm& backward, const Var& x,
                         double recurrent_dropout) {
  std::vector<Var> fwd = forward.run(g, x, false, recurrent_dropout);
  std::vector<Var> bwd = backward.run(g, x, true, recurrent_dropout);
  return concat_last({stack_steps(fwd), stack_steps(bwd)});
}

AdditiveAttention AdditiveAttention::create(ParameterStore& store, const std::string& name,
                                            std::size_t state_dim, std::size_t encoder_dim,
                                            std::size_t attention_dim, std::mt19937_64& rng) {
  AdditiveAttention a;
  a.state_dim = state_dim;
  a.encoder_dim = encoder_dim;
  const std::size_t rows = state_dim + encoder_dim;
  a.w_a = &store.add(name + ".w_a",
                     glorot_uniform({rows, attention_dim}, rows, attention_dim, rng));
  a.v_a = &store.add(name + ".v_a", glorot_uniform({attention_dim}, attention_dim, 1, rng));
  return a;
}

AdditiveAttention::Result AdditiveAttention::forward(Graph& g, const Var& s, const Var& h) const {
  if (s.value().rank() != 2 || s.dim(1) != state_dim || h.value().rank() != 3 ||
      h.dim(0) != s.dim(0) || h.dim(2) != encoder_dim || h.dim(1) == 0) {
    throw Error(Errc::kShapeMismatch, "attention: state " + shape_string(s.shape()) +
                                          " over encoder states " + shape_string(h.shape()));
  }
  const std::size_t batch = h.dim(0), n = h.dim(1), att = v_a->value.dim(0);
  Var w = g.param(*w_a);
  Var w_s = slice_first(w, 0, state_dim);
  Var w_h = slice_first(w, state_dim, encoder_dim);
  Var energy = tanh(add_broadcast(matmul(h, w_h), matmul(s, w_s)));
  Var scores = reshape(matmul(energy, reshape(g.param(*v_a), {att, 1})), {batch, n});
  Var alpha = softmax_rows(scores);
  return {weighted_sum(alpha, h), alpha};
}

}  // namespace bhs::ad
