#include "bhs/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "bhs/csv.hpp"
#include "bhs/error.hpp"

namespace bhs {

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::kInvalidArgument, what); };
  if (batch_size == 0) {
    fail("batch_size must be at least 1");
  }
  if (max_epochs == 0) {
    fail("max_epochs must be at least 1");
  }
  if (patience == 0) {
    fail("patience must be at least 1");
  }
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    fail("validation_fraction must be in (0, 1)");
  }
  if (!(min_delta >= 0.0)) {
    fail("min_delta must be non-negative");
  }
  if (!(adam.learning_rate > 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) ||
      !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) || !(adam.epsilon > 0.0)) {
    fail("invalid optimizer settings");
  }
}

nlohmann::json TrainConfig::to_json() const {
  return {
      {"adam", {{"beta1", adam.beta1},
                {"beta2", adam.beta2},
                {"epsilon", adam.epsilon},
                {"learning_rate", adam.learning_rate}}},
      {"batch_size", batch_size},
      {"max_epochs", max_epochs},
      {"min_delta", min_delta},
      {"patience", patience},
      {"seed", seed},
      {"validation_fraction", validation_fraction},
  };
}

// ---------------------------------------------------------------------------

Adam::Adam(ad::ParameterStore& params, AdamConfig config) : params_(params), config_(config) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    m_.emplace_back(params_[i].value.shape());
    v_.emplace_back(params_[i].value.shape());
  }
}

void Adam::step() {
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double lr = config_.learning_rate;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    ad::Parameter& p = params_[i];
    if (p.grad.size() != p.value.size()) {
      continue;
    }
    double* w = p.value.data();
    const double* g = p.grad.data();
    double* m = m_[i].data();
    double* v = v_[i].data();
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      m[k] = b1 * m[k] + (1.0 - b1) * g[k];
      v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
      w[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + config_.epsilon);
    }
  }
}

// ---------------------------------------------------------------------------

EarlyStopping::EarlyStopping(std::size_t patience, double min_delta)
    : patience_(patience), min_delta_(min_delta) {
  if (patience_ == 0) {
    throw Error(Errc::kInvalidArgument, "patience must be at least 1");
  }
}

bool EarlyStopping::update(std::size_t epoch, double val_loss) {
  improved_ = best_epoch_ == 0 || val_loss < best_loss_ - min_delta_;
  if (improved_) {
    best_epoch_ = epoch;
    best_loss_ = val_loss;
    since_best_ = 0;
  } else {
    ++since_best_;
  }
  stopped_ = since_best_ >= patience_;
  return stopped_;
}

// ---------------------------------------------------------------------------

std::string history_to_csv(const History& history) {
  std::string out = "epoch,train_loss,train_acc,val_loss,val_acc\n";
  char line[256];
  for (const EpochStats& e : history) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g\n", e.epoch, e.train_loss,
                  e.train_acc, e.val_loss, e.val_acc);
    out += line;
  }
  return out;
}

History history_from_csv(std::string_view text) {
  std::vector<csv::Record> rows = csv::parse(text);
  if (rows.empty() || rows[0].fields.size() != 5 || rows[0].fields[0] != "epoch") {
    throw Error(Errc::kMalformedRow, "history: expected header epoch,train_loss,...");
  }
  History h;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    if (f.size() != 5) {
      throw Error(Errc::kMalformedRow, "history line " + std::to_string(rows[i].line));
    }
    try {
      h.push_back({std::stoul(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3]),
                   std::stod(f[4])});
    } catch (const std::exception&) {
      throw Error(Errc::kMalformedRow, "history line " + std::to_string(rows[i].line));
    }
  }
  return h;
}

SequenceDataset encode_dataset(std::span<const TokenSequence> docs, std::span<const int> labels,
                               const Vocabulary& vocab, std::size_t max_len) {
  if (docs.size() != labels.size()) {
    throw Error(Errc::kShapeMismatch, "documents and labels differ in length");
  }
  SequenceDataset d;
  d.max_len = max_len;
  d.ids.reserve(docs.size() * max_len);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    EncodedSequence e = encode_sequence(docs[i], vocab, max_len);
    d.ids.insert(d.ids.end(), e.ids.begin(), e.ids.end());
    if (labels[i] < 0) {
      throw Error(Errc::kIndexOutOfRange, "negative label");
    }
    d.labels.push_back(static_cast<std::size_t>(labels[i]));
  }
  return d;
}

// ---------------------------------------------------------------------------

namespace {

std::size_t count_correct(const ad::Tensor& logits, std::span<const std::size_t> labels) {
  const std::size_t c = logits.dim(1);
  std::size_t correct = 0;
  for (std::size_t b = 0; b < labels.size(); ++b) {
    if (argmax(std::span<const double>(logits.data() + b * c, c)) == labels[b]) {
      ++correct;
    }
  }
  return correct;
}

}  // namespace

Trainer::Trainer(Model& model, const TrainConfig& config)
    : model_(model), config_(config), adam_(model.parameters(), config.adam), rng_(config.seed) {
  config_.validate();
}

LossAccuracy Trainer::train_epoch(const SequenceDataset& data) {
  if (data.size() == 0) {
    throw Error(Errc::kEmptyCorpus, "no training samples");
  }
  ++epoch_;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng_);

  const std::size_t len = data.max_len;
  double loss_sum = 0.0;
  std::size_t correct = 0;
  std::vector<std::int32_t> ids;
  std::vector<std::size_t> labels;
  for (std::size_t start = 0; start < order.size(); start += config_.batch_size) {
    const std::size_t end = std::min(order.size(), start + config_.batch_size);
    ids.clear();
    labels.clear();
    for (std::size_t k = start; k < end; ++k) {
      const std::size_t i = order[k];
      ids.insert(ids.end(), data.ids.begin() + static_cast<std::ptrdiff_t>(i * len),
                 data.ids.begin() + static_cast<std::ptrdiff_t>((i + 1) * len));
      labels.push_back(data.labels[i]);
    }
    try {
      ad::Graph g(ad::Mode::kTrain, rng_());
      ad::Var logits = model_.forward(g, ids, labels.size());
      ad::Var loss = ad::softmax_cross_entropy(logits, labels);
      model_.parameters().zero_grad();
      g.backward(loss);
      adam_.step();
      loss_sum += loss.value().item() * static_cast<double>(labels.size());
      correct += count_correct(logits.value(), labels);
    } catch (const Error& e) {
      if (e.code() != Errc::kNonFinite) {
        throw;
      }
      throw Error(Errc::kDivergedLoss, "epoch " + std::to_string(epoch_) + ": " + e.what());
    }
  }
  const auto n = static_cast<double>(data.size());
  return {loss_sum / n, static_cast<double>(correct) / n};
}

LossAccuracy Trainer::evaluate(const SequenceDataset& data) const {
  if (data.size() == 0) {
    return {};
  }
  constexpr std::size_t kEvalBatch = 256;
  const std::size_t len = data.max_len;
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < data.size(); start += kEvalBatch) {
    const std::size_t end = std::min(data.size(), start + kEvalBatch);
    std::span<const std::int32_t> ids(data.ids.data() + start * len, (end - start) * len);
    std::span<const std::size_t> labels(data.labels.data() + start, end - start);
    ad::Graph g(ad::Mode::kEval);
    ad::Var logits = model_.forward(g, ids, labels.size());
    ad::Var loss = ad::softmax_cross_entropy(logits, labels);
    loss_sum += loss.value().item() * static_cast<double>(labels.size());
    correct += count_correct(logits.value(), labels);
  }
  const auto n = static_cast<double>(data.size());
  return {loss_sum / n, static_cast<double>(correct) / n};
}

std::vector<ad::Tensor> snapshot(const ad::ParameterStore& params) {
  std::vector<ad::Tensor> out;
  out.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    out.push_back(params[i].value);
  }
  return out;
}

void restore(ad::ParameterStore& params, const std::vector<ad::Tensor>& values) {
  if (values.size() != params.size()) {
    throw Error(Errc::kShapeMismatch, "snapshot does not match the parameter set");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (values[i].shape() != params[i].value.shape()) {
      throw Error(Errc::kShapeMismatch, "snapshot shape differs for " + params[i].name);
    }
    params[i].value = values[i];
  }
}

StopOutcome run_early_stopping(std::size_t max_epochs, std::size_t patience, double min_delta,
                               const std::function<double(std::size_t)>& run_epoch,
                               const std::function<void(std::size_t)>& on_best) {
  EarlyStopping stopper(patience, min_delta);
  StopOutcome out;
  for (std::size_t epoch = 1; epoch <= max_epochs; ++epoch) {
    const bool stop = stopper.update(epoch, run_epoch(epoch));
    out.epochs_run = epoch;
    if (stopper.improved() && on_best) {
      on_best(epoch);
    }
    if (stop) {
      out.early_stopped = true;
      break;
    }
  }
  out.best_epoch = stopper.best_epoch();
  return out;
}

TrainResult fit(Model& model, const SequenceDataset& train, const SequenceDataset& validation,
                const TrainConfig& config, const std::function<void(const EpochStats&)>& on_epoch) {
  config.validate();
  if (validation.size() == 0) {
    throw Error(Errc::kTooFewSamples, "early stopping needs a non-empty validation set");
  }
  const auto started = std::chrono::steady_clock::now();
  Trainer trainer(model, config);
  TrainResult result;
  std::vector<ad::Tensor> best = snapshot(model.parameters());
  const StopOutcome outcome = run_early_stopping(
      config.max_epochs, config.patience, config.min_delta,
      [&](std::size_t epoch) {
        const LossAccuracy tr = trainer.train_epoch(train);
        LossAccuracy va;
        try {
          va = trainer.evaluate(validation);
        } catch (const Error& e) {
          if (e.code() != Errc::kNonFinite) {
            throw;
          }
          throw Error(Errc::kDivergedLoss, "epoch " + std::to_string(epoch) + ": " + e.what());
        }
        if (!std::isfinite(tr.loss) || !std::isfinite(va.loss)) {
          throw Error(Errc::kDivergedLoss,
                      "epoch " + std::to_string(epoch) + ": loss is not finite");
        }
        EpochStats stats{epoch, tr.loss, tr.accuracy, va.loss, va.accuracy};
        result.history.push_back(stats);
        if (on_epoch) {
          on_epoch(stats);
        }
        return va.loss;
      },
      [&](std::size_t) { best = snapshot(model.parameters()); });
  restore(model.parameters(), best);
  result.epochs_run = outcome.epochs_run;
  result.best_epoch = outcome.best_epoch;
  result.early_stopped = outcome.early_stopped;
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace bhs
