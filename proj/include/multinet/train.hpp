// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "multinet/data.hpp"
#include "multinet/losses.hpp"
#include "multinet/model.hpp"
#include "multinet/optim.hpp"

namespace multinet {

struct TrainConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  std::size_t batch_size = 8;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  LossForm loss_form = LossForm::kCategorical;
  DistillMode distillation = DistillMode::kOff;
  double temperature = 3.0;
  /// Copy the best-validation parameters back into the model when training ends.
  bool restore_best = true;

  void validate() const;
  AdamConfig adam() const { return {learning_rate, beta1, beta2, 1e-8}; }
};

/// One line of the NDJSON training log. `split` is "train" (per step),
/// "train_epoch", "val" or "test".
struct LogRecord {
  std::size_t epoch = 0;
  std::uint64_t step = 0;
  std::string split;
  double loss = 0.0;
  double accuracy = 0.0;
};

void write_log_record(std::ostream& out, const LogRecord& record);

struct EpochSummary {
  std::size_t epoch = 0;
  double train_loss = 0.0;      // mean over the epoch's samples, training mode
  double train_accuracy = 0.0;  // running accuracy over the epoch, training mode
  bool has_val = false;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double val_macro_f1 = 0.0;
  bool improved = false;
};

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<std::size_t> truth;
  std::vector<std::size_t> predicted;
};

template <typename T>
struct TrainHooks {
  std::ostream* log = nullptr;
  std::function<void(const LogRecord&)> on_step;
  /// Returning false ends training after this epoch.
  std::function<bool(const EpochSummary&)> on_epoch;
  /// Required when distillation is on; evaluated without gradient.
  const Classifier<T>* teacher = nullptr;
};

template <typename T>
struct TrainResult {
  std::vector<EpochSummary> epochs;
  std::vector<double> step_losses;
  std::size_t best_epoch = 0;
  double best_val_macro_f1 = -1.0;
  OptimizerState<T> optimizer;  // state at the selected snapshot
};

/// Stacks (3,H,W) images into a (B,3,H,W) batch.
template <typename T>
Tensor<T> make_batch(const std::vector<Sample>& samples, const std::vector<std::size_t>& order, std::size_t begin,
                     std::size_t end);

/// Training objective for one batch. DeiT outputs without a teacher train
/// both heads on the ground truth.
template <typename T>
Tensor<T> batch_loss(const ModelOutput<T>& out, const Tensor<T>& target, const TrainConfig& cfg,
                     const Tensor<T>& teacher_logits = {});

/// Argmax of predict_proba per row.
template <typename T>
std::vector<std::size_t> predictions(const ModelOutput<T>& out);

/// Eval mode, no gradient tracking.
template <typename T>
EvalResult evaluate(const Classifier<T>& model, const std::vector<Sample>& samples, std::size_t batch_size,
                    LossForm form = LossForm::kCategorical);

/// Seeded shuffle and dropout streams; aborts with NumericError on a non-finite
/// loss; keeps the snapshot with the best validation macro-F1 (last epoch when
/// there is no validation split).
template <typename T>
TrainResult<T> train(Classifier<T>& model, const std::vector<Sample>& train_set, const std::vector<Sample>& val_set,
                     const TrainConfig& cfg, const TrainHooks<T>& hooks = {});

}  // namespace multinet
