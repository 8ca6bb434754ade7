#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bhs/features.hpp"
#include "bhs/model.hpp"

namespace bhs {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  AdamConfig adam;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 200;
  std::size_t patience = 5;
  double min_delta = 0.0;  // required decrease in validation loss
  double validation_fraction = 0.1;
  std::uint64_t seed = 42;

  /// Throws Error(kInvalidArgument).
  void validate() const;
  nlohmann::json to_json() const;
};

class Adam {
 public:
  Adam(ad::ParameterStore& params, AdamConfig config);

  /// Applies one update from the accumulated gradients.
  void step();
  std::size_t steps() const { return t_; }

 private:
  ad::ParameterStore& params_;
  AdamConfig config_;
  std::vector<ad::Tensor> m_;
  std::vector<ad::Tensor> v_;
  std::size_t t_ = 0;
};

/// Tracks validation loss. An epoch improves when its loss is below
/// best − min_delta; training stops once `patience` consecutive epochs
/// fail to improve.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience, double min_delta = 0.0);

  /// Records the loss of a 1-based epoch; returns true when training should
  /// stop after it.
  bool update(std::size_t epoch, double val_loss);

  bool improved() const { return improved_; }
  bool stopped() const { return stopped_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }

 private:
  std::size_t patience_;
  double min_delta_;
  std::size_t best_epoch_ = 0;
  double best_loss_ = 0.0;
  std::size_t since_best_ = 0;
  bool improved_ = false;
  bool stopped_ = false;
};

struct StopOutcome {
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  bool early_stopped = false;
};

/// The epoch loop behind fit(): calls run_epoch(e) for e = 1, 2, … to get
/// that epoch's validation loss, and on_best(e) after every improving
/// epoch, until max_epochs or the patience rule ends the run.
StopOutcome run_early_stopping(std::size_t max_epochs, std::size_t patience, double min_delta,
                               const std::function<double(std::size_t)>& run_epoch,
                               const std::function<void(std::size_t)>& on_best);

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

using History = std::vector<EpochStats>;

/// Header `epoch,train_loss,train_acc,val_loss,val_acc`; values printed
/// with 17 significant digits.
std::string history_to_csv(const History& history);
History history_from_csv(std::string_view text);

/// Fixed-length encoded documents with their class indices.
struct SequenceDataset {
  std::size_t max_len = 0;
  std::vector<std::int32_t> ids;  // row-major [size, max_len]
  std::vector<std::size_t> labels;

  std::size_t size() const { return labels.size(); }
};

SequenceDataset encode_dataset(std::span<const TokenSequence> docs, std::span<const int> labels,
                               const Vocabulary& vocab, std::size_t max_len);

struct LossAccuracy {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Minibatch training with Adam on mean cross-entropy. Batches are drawn
/// from a seeded shuffle, and each batch graph gets its own dropout seed,
/// so a run is a pure function of (model init, data, config).
class Trainer {
 public:
  Trainer(Model& model, const TrainConfig& config);

  /// One pass over `data`. Loss and accuracy are averaged over the batches
  /// as trained, dropout included. Throws Error(kDivergedLoss) naming the
  /// epoch when a non-finite value appears.
  LossAccuracy train_epoch(const SequenceDataset& data);

  /// Loss and accuracy in eval mode.
  LossAccuracy evaluate(const SequenceDataset& data) const;

  std::size_t epochs_completed() const { return epoch_; }

 private:
  Model& model_;
  TrainConfig config_;
  Adam adam_;
  std::mt19937_64 rng_;
  std::size_t epoch_ = 0;
};

struct TrainResult {
  History history;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  bool early_stopped = false;
  double seconds = 0.0;
};

/// Trains until max_epochs or early stopping on `validation`, then restores
/// the weights of the best validation epoch.
TrainResult fit(Model& model, const SequenceDataset& train, const SequenceDataset& validation,
                const TrainConfig& config,
                const std::function<void(const EpochStats&)>& on_epoch = {});

/// Copies of all parameter values, in store order.
std::vector<ad::Tensor> snapshot(const ad::ParameterStore& params);
void restore(ad::ParameterStore& params, const std::vector<ad::Tensor>& values);

}  // namespace bhs
