#include "bhs/model.hpp"

#include <random>

#include "bhs/error.hpp"

namespace bhs {

using ad::Var;

std::string_view architecture_name(Architecture arch) {
  switch (arch) {
    case Architecture::kLstm:
      return "lstm";
    case Architecture::kGru:
      return "gru";
    case Architecture::kAttention:
      return "attention";
  }
  return "unknown";
}

Architecture parse_architecture(std::string_view name) {
  if (name == "lstm") {
    return Architecture::kLstm;
  }
  if (name == "gru") {
    return Architecture::kGru;
  }
  if (name == "attention") {
    return Architecture::kAttention;
  }
  throw Error(Errc::kInvalidSpec,
              "unknown architecture \"" + std::string(name) + "\" (valid: lstm, gru, attention)");
}

void ModelSpec::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::kInvalidSpec, what); };
  if (embed_dim == 0 || kernel_width == 0 || conv_channels == 0 || rnn_hidden == 0 ||
      attention_dim == 0 || max_len == 0) {
    fail("all model dimensions must be at least 1");
  }
  if (vocab_size < 3) {
    fail("vocab_size must cover PAD, UNK and at least one term");
  }
  if (max_len < kernel_width) {
    fail("max_len " + std::to_string(max_len) + " is shorter than kernel_width " +
         std::to_string(kernel_width));
  }
  if (!(dropout_node >= 0.0 && dropout_node < 1.0) ||
      !(dropout_recurrent >= 0.0 && dropout_recurrent < 1.0)) {
    fail("dropout rates must be in [0, 1)");
  }
  if (n_classes != kNumClasses) {
    fail("n_classes must be " + std::to_string(kNumClasses));
  }
}

nlohmann::json ModelSpec::to_json() const {
  return {
      {"architecture", std::string(architecture_name(architecture))},
      {"attention_dim", attention_dim},
      {"conv_channels", conv_channels},
      {"dropout_node", dropout_node},
      {"dropout_recurrent", dropout_recurrent},
      {"embed_dim", embed_dim},
      {"kernel_width", kernel_width},
      {"max_len", max_len},
      {"n_classes", n_classes},
      {"rnn_hidden", rnn_hidden},
      {"vocab_size", vocab_size},
  };
}

ModelSpec ModelSpec::from_json(const nlohmann::json& j) {
  ModelSpec s;
  try {
    s.architecture = parse_architecture(j.at("architecture").get<std::string>());
    s.attention_dim = j.at("attention_dim").get<std::size_t>();
    s.conv_channels = j.at("conv_channels").get<std::size_t>();
    s.dropout_node = j.at("dropout_node").get<double>();
    s.dropout_recurrent = j.at("dropout_recurrent").get<double>();
    s.embed_dim = j.at("embed_dim").get<std::size_t>();
    s.kernel_width = j.at("kernel_width").get<std::size_t>();
    s.max_len = j.at("max_len").get<std::size_t>();
    s.n_classes = j.at("n_classes").get<std::size_t>();
    s.rnn_hidden = j.at("rnn_hidden").get<std::size_t>();
    s.vocab_size = j.at("vocab_size").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kInvalidSpec, std::string("model spec: ") + e.what());
  }
  s.validate();
  return s;
}

Model::Model(const ModelSpec& spec, std::uint64_t seed) : spec_(spec) {
  spec_.validate();
  std::mt19937_64 rng(seed);
  const std::size_t h = spec_.rnn_hidden;
  embedding_ = ad::Embedding::create(store_, "embedding", spec_.vocab_size, spec_.embed_dim, rng);
  conv_ = ad::Conv1d::create(store_, "conv", spec_.kernel_width, spec_.embed_dim,
                             spec_.conv_channels, rng);
  encoder_fwd_ = ad::Lstm::create(store_, "encoder.fwd", spec_.conv_channels, h, rng);
  encoder_bwd_ = ad::Lstm::create(store_, "encoder.bwd", spec_.conv_channels, h, rng);
  switch (spec_.architecture) {
    case Architecture::kLstm:
      decoder_lstm_ = ad::Lstm::create(store_, "decoder", 2 * h, h, rng);
      break;
    case Architecture::kGru:
      decoder_gru_ = ad::Gru::create(store_, "decoder", 2 * h, h, rng);
      break;
    case Architecture::kAttention:
      bridge_ = ad::Dense::create(store_, "bridge", 2 * h, h, rng);
      attention_ =
          ad::AdditiveAttention::create(store_, "attention", h, 2 * h, spec_.attention_dim, rng);
      decoder_gru_ = ad::Gru::create(store_, "decoder", 2 * h, h, rng);
      break;
  }
  output_ = ad::Dense::create(store_, "output", h, spec_.n_classes, rng);
}

Var Model::head(ad::Graph& g, const Var& encoded) const {
  const std::size_t h = spec_.rnn_hidden;
  switch (spec_.architecture) {
    case Architecture::kLstm:
      return decoder_lstm_.run(g, encoded, false, spec_.dropout_recurrent).back();
    case Architecture::kGru:
      return decoder_gru_.run(g, encoded, false, spec_.dropout_recurrent).back();
    case Architecture::kAttention: {
      const std::size_t n = encoded.dim(1);
      Var fwd_last = ad::slice_last(ad::time_step(encoded, n - 1), 0, h);
      Var bwd_first = ad::slice_last(ad::time_step(encoded, 0), h, h);
      Var s0 = ad::tanh(bridge_.forward(g, ad::concat_last({fwd_last, bwd_first})));
      Var context = attention_.forward(g, s0, encoded).context;
      return decoder_gru_.cell(g, context, s0);
    }
  }
  throw Error(Errc::kInvalidSpec, "unknown architecture");
}

Var Model::forward(ad::Graph& g, std::span<const std::int32_t> ids, std::size_t batch) const {
  if (batch == 0 || ids.size() % batch != 0) {
    throw Error(Errc::kShapeMismatch, std::to_string(ids.size()) + " ids do not form " +
                                          std::to_string(batch) + " equal rows");
  }
  const std::size_t n = ids.size() / batch;
  if (n < spec_.kernel_width) {
    throw Error(Errc::kShapeMismatch, "sequence length " + std::to_string(n) +
                                          " is shorter than the kernel width");
  }
  Var x = embedding_.forward(g, ids, {batch, n});
  x = ad::dropout(x, spec_.dropout_node);
  Var conv = conv_.forward(g, x);
  Var encoded = ad::bidirectional_encode(g, encoder_fwd_, encoder_bwd_, conv,
                                         spec_.dropout_recurrent);
  Var state = ad::dropout(head(g, encoded), spec_.dropout_node);
  return output_.forward(g, state);
}

std::vector<std::vector<double>> Model::predict_proba(std::span<const std::int32_t> ids,
                                                      std::size_t batch) const {
  ad::Graph g(ad::Mode::kEval);
  Var logits = forward(g, ids, batch);
  const ad::Tensor& v = logits.value();
  const std::size_t c = spec_.n_classes;
  std::vector<std::vector<double>> out;
  out.reserve(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    out.push_back(ad::softmax(std::span<const double>(v.data() + b * c, c)));
  }
  return out;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) {
      best = i;
    }
  }
  return best;
}

}  // namespace bhs
