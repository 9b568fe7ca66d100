// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#include "multinet/train.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>

#include "multinet/errors.hpp"
#include "multinet/layers.hpp"
#include "multinet/metrics.hpp"

namespace multinet {

void TrainConfig::validate() const {
  adam().validate();
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  if (epochs == 0) throw ConfigError("epochs must be at least 1");
  if (distillation == DistillMode::kSoft && !(temperature > 0.0)) {
    throw ConfigError("distillation temperature must be positive");
  }
}

void write_log_record(std::ostream& out, const LogRecord& r) {
  nlohmann::ordered_json j;
  j["epoch"] = r.epoch;
  j["step"] = r.step;
  j["split"] = r.split;
  j["loss"] = r.loss;
  j["accuracy"] = r.accuracy;
  out << j.dump() << '\n';
}

template <typename T>
Tensor<T> make_batch(const std::vector<Sample>& samples, const std::vector<std::size_t>& order, std::size_t begin,
                     std::size_t end) {
  const Shape item = samples[order[begin]].image.shape();
  const std::size_t stride = shape_numel(item);
  std::vector<T> values((end - begin) * stride);
  for (std::size_t i = begin; i < end; ++i) {
    const auto& img = samples[order[i]].image;
    if (img.shape() != item) {
      throw DataError(samples[order[i]].source_path + " has shape " + shape_str(img.shape()) + ", expected " +
                      shape_str(item));
    }
    auto src = img.data();
    std::copy(src.begin(), src.end(), values.begin() + static_cast<std::ptrdiff_t>((i - begin) * stride));
  }
  Shape shape{end - begin};
  shape.insert(shape.end(), item.begin(), item.end());
  return Tensor<T>(shape, std::move(values));
}

template <typename T>
Tensor<T> batch_loss(const ModelOutput<T>& out, const Tensor<T>& target, const TrainConfig& cfg,
                     const Tensor<T>& teacher_logits) {
  if (!out.distill_logits.defined()) {
    if (cfg.distillation != DistillMode::kOff) {
      throw ConfigError("distillation needs a model with a distillation token (deit)");
    }
    return cross_entropy(out.logits, target, cfg.loss_form);
  }
  if (cfg.distillation == DistillMode::kOff) {
    return add(cross_entropy(out.logits, target, cfg.loss_form),
               cross_entropy(out.distill_logits, target, cfg.loss_form));
  }
  return distillation_loss(out.logits, out.distill_logits, target, teacher_logits, cfg.distillation,
                           cfg.temperature, cfg.loss_form)
      .total;
}

template <typename T>
std::vector<std::size_t> predictions(const ModelOutput<T>& out) {
  auto probs = predict_proba(out);
  const std::size_t b = probs.extent(0), k = probs.extent(1);
  auto v = probs.data();
  std::vector<std::size_t> pred(b);
  for (std::size_t i = 0; i < b; ++i) {
    pred[i] = static_cast<std::size_t>(std::max_element(v.begin() + i * k, v.begin() + (i + 1) * k) -
                                       (v.begin() + i * k));
  }
  return pred;
}

namespace {

std::vector<std::size_t> labels_of(const std::vector<Sample>& s, const std::vector<std::size_t>& order,
                                   std::size_t begin, std::size_t end) {
  std::vector<std::size_t> out;
  for (std::size_t i = begin; i < end; ++i) out.push_back(s[order[i]].label);
  return out;
}

}  // namespace

template <typename T>
EvalResult evaluate(const Classifier<T>& model, const std::vector<Sample>& samples, std::size_t batch_size,
                    LossForm form) {
  if (samples.empty()) throw DataError("evaluation split is empty");
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  NoGradGuard guard;
  TrainConfig cfg;
  cfg.loss_form = form;
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  EvalResult result;
  double loss_sum = 0.0;
  const ForwardContext ctx{false, nullptr};
  for (std::size_t begin = 0; begin < samples.size(); begin += batch_size) {
    const std::size_t end = std::min(samples.size(), begin + batch_size);
    auto labels = labels_of(samples, order, begin, end);
    auto out = model.forward(make_batch<T>(samples, order, begin, end), ctx);
    auto loss = batch_loss(out, one_hot<T>(labels, model.num_classes()), cfg);
    loss_sum += static_cast<double>(loss.item()) * static_cast<double>(end - begin);
    auto pred = predictions(out);
    result.truth.insert(result.truth.end(), labels.begin(), labels.end());
    result.predicted.insert(result.predicted.end(), pred.begin(), pred.end());
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < result.truth.size(); ++i) correct += result.truth[i] == result.predicted[i];
  result.loss = loss_sum / static_cast<double>(samples.size());
  result.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
  return result;
}

template <typename T>
TrainResult<T> train(Classifier<T>& model, const std::vector<Sample>& train_set, const std::vector<Sample>& val_set,
                     const TrainConfig& cfg, const TrainHooks<T>& hooks) {
  cfg.validate();
  if (train_set.empty()) throw DataError("training split is empty");
  if (cfg.distillation != DistillMode::kOff && hooks.teacher == nullptr) {
    throw ConfigError("distillation mode " + to_string(cfg.distillation) + " needs a teacher model");
  }
  auto params = model.parameters();
  for (auto& p : params) p.tensor.set_requires_grad(true);
  Adam<T> adam(params, cfg.adam());
  std::mt19937_64 shuffle_rng(cfg.seed);
  std::mt19937_64 dropout_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  const ForwardContext ctx{true, &dropout_rng};

  TrainResult<T> result;
  std::vector<std::vector<T>> best_values;
  auto snapshot = [&]() {
    best_values.clear();
    for (const auto& p : params) best_values.emplace_back(p.tensor.data().begin(), p.tensor.data().end());
    result.optimizer = adam.state();
  };

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t step = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      auto labels = labels_of(train_set, order, begin, end);
      auto x = make_batch<T>(train_set, order, begin, end);
      auto target = one_hot<T>(labels, model.num_classes());
      Tensor<T> teacher_logits;
      if (hooks.teacher) {
        NoGradGuard guard;
        teacher_logits = hooks.teacher->forward(x, ForwardContext{false, nullptr}).logits;
      }
      auto out = model.forward(x, ctx);
      auto loss = batch_loss(out, target, cfg, teacher_logits);
      ++step;
      const double value = static_cast<double>(loss.item());
      if (!std::isfinite(value)) {
        throw NumericError("non-finite loss (" + std::to_string(value) + ") at epoch " + std::to_string(epoch) +
                           ", step " + std::to_string(step));
      }
      adam.zero_grad();
      loss.backward();
      adam.step();

      auto pred = predictions(out);
      std::size_t batch_correct = 0;
      for (std::size_t i = 0; i < labels.size(); ++i) batch_correct += pred[i] == labels[i];
      correct += batch_correct;
      loss_sum += value * static_cast<double>(end - begin);
      result.step_losses.push_back(value);
      const LogRecord rec{epoch, step, "train", value,
                          static_cast<double>(batch_correct) / static_cast<double>(end - begin)};
      if (hooks.log) write_log_record(*hooks.log, rec);
      if (hooks.on_step) hooks.on_step(rec);
    }
    EpochSummary summary;
    summary.epoch = epoch;
    summary.train_loss = loss_sum / static_cast<double>(order.size());
    summary.train_accuracy = static_cast<double>(correct) / static_cast<double>(order.size());
    if (hooks.log) write_log_record(*hooks.log, {epoch, step, "train_epoch", summary.train_loss, summary.train_accuracy});
    if (!val_set.empty()) {
      auto eval = evaluate(model, val_set, cfg.batch_size, cfg.loss_form);
      summary.has_val = true;
      summary.val_loss = eval.loss;
      summary.val_accuracy = eval.accuracy;
      summary.val_macro_f1 =
          compute_metrics(confusion(eval.truth, eval.predicted, model.num_classes())).macro_f1;
      if (hooks.log) write_log_record(*hooks.log, {epoch, step, "val", eval.loss, eval.accuracy});
      if (summary.val_macro_f1 > result.best_val_macro_f1) {
        result.best_val_macro_f1 = summary.val_macro_f1;
        result.best_epoch = epoch;
        summary.improved = true;
        snapshot();
      }
    } else {
      result.best_epoch = epoch;
      summary.improved = true;
      snapshot();
    }
    result.epochs.push_back(summary);
    if (hooks.on_epoch && !hooks.on_epoch(summary)) break;
  }
  if (cfg.restore_best && !best_values.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      std::copy(best_values[i].begin(), best_values[i].end(), params[i].tensor.data().begin());
    }
  }
  adam.zero_grad();
  return result;
}

#define MULTINET_INSTANTIATE_TRAIN(T)                                                                            \
  template Tensor<T> make_batch<T>(const std::vector<Sample>&, const std::vector<std::size_t>&, std::size_t,     \
                                   std::size_t);                                                                 \
  template Tensor<T> batch_loss(const ModelOutput<T>&, const Tensor<T>&, const TrainConfig&, const Tensor<T>&);  \
  template std::vector<std::size_t> predictions(const ModelOutput<T>&);                                          \
  template EvalResult evaluate(const Classifier<T>&, const std::vector<Sample>&, std::size_t, LossForm);          \
  template TrainResult<T> train(Classifier<T>&, const std::vector<Sample>&, const std::vector<Sample>&,           \
                                const TrainConfig&, const TrainHooks<T>&);

MULTINET_INSTANTIATE_TRAIN(float)
MULTINET_INSTANTIATE_TRAIN(double)

}  // namespace multinet
