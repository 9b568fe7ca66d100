// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "multinet/checkpoint.hpp"
#include "multinet/errors.hpp"
#include "multinet/layers.hpp"
#include "multinet/losses.hpp"
#include "multinet/models.hpp"
#include "multinet/optim.hpp"
#include "multinet/train.hpp"
#include "test_util.hpp"

using namespace multinet;
using testutil::fd_max_rel_error;
using testutil::values_of;
using TD = Tensor<double>;

namespace {

constexpr std::size_t K = 8;

double direct_ce(const TD& logits, const TD& target) {
  const std::size_t b = logits.extent(0), k = logits.extent(1);
  double total = 0;
  for (std::size_t r = 0; r < b; ++r) {
    double z = 0;
    for (std::size_t c = 0; c < k; ++c) z += std::exp(logits.at({r, c}));
    for (std::size_t c = 0; c < k; ++c) total -= target.at({r, c}) * std::log(std::exp(logits.at({r, c})) / z);
  }
  return total / static_cast<double>(b);
}

double direct_kl(const TD& teacher, const TD& student, double tau) {
  const std::size_t b = teacher.extent(0), k = teacher.extent(1);
  double total = 0;
  for (std::size_t r = 0; r < b; ++r) {
    double zt = 0, zs = 0;
    for (std::size_t c = 0; c < k; ++c) {
      zt += std::exp(teacher.at({r, c}) / tau);
      zs += std::exp(student.at({r, c}) / tau);
    }
    for (std::size_t c = 0; c < k; ++c) {
      const double pt = std::exp(teacher.at({r, c}) / tau) / zt, ps = std::exp(student.at({r, c}) / tau) / zs;
      total += pt * std::log(pt / ps);
    }
  }
  return total / static_cast<double>(b);
}

ModelSpec micro_spec(const std::string& pairing = "vit+multinet") { return {pairing, "micro", 8, 4, K, 0.0}; }

TrainConfig quick_config(std::size_t epochs = 2) {
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.batch_size = 4;
  cfg.epochs = epochs;
  cfg.seed = 3;
  return cfg;
}

std::vector<std::vector<double>> snapshot(const Classifier<double>& model) {
  std::vector<std::vector<double>> out;
  for (const auto& p : model.parameters()) out.push_back(values_of(p.tensor));
  return out;
}

}  // namespace

// --- losses -----------------------------------------------------------------

TEST(CrossEntropy, ConfidentCorrectIsNearZero) {
  TD logits({1, K}, 0.0);
  logits.at({0, 3}) = 50.0;
  EXPECT_LT(cross_entropy(logits, one_hot<double>({3}, K)).item(), 1e-20);
}

TEST(CrossEntropy, UniformIsLogK) {
  const double value = cross_entropy(TD({4, K}, 0.7), one_hot<double>({0, 3, 5, 7}, K)).item();
  EXPECT_NEAR(value, std::log(8.0), 1e-9);
  EXPECT_NEAR(value, 2.07944154167983592825, 1e-9);
}

TEST(CrossEntropy, Eq3LiteralUniformConstant) {
  const double value = cross_entropy(TD({1, K}, 0.0), one_hot<double>({2}, K), LossForm::kEq3Literal).item();
  // −[log(1/8) + 7·log(7/8)]
  EXPECT_NEAR(value, -(std::log(1.0 / 8.0) + 7.0 * std::log(7.0 / 8.0)), 1e-12);
  EXPECT_NEAR(value, 3.01416129005149429028, 1e-9);
}

TEST(CrossEntropy, MatchesDirectFormula) {
  std::mt19937_64 rng(1);
  auto logits = TD::uniform({6, K}, -4, 4, rng);
  auto target = one_hot<double>({0, 1, 2, 5, 6, 7}, K);
  EXPECT_NEAR(cross_entropy(logits, target).item(), direct_ce(logits, target), 1e-12);
}

TEST(CrossEntropy, FormsShareArgmin) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> pick(0, K - 1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t label = pick(rng);
    auto target = one_hot<double>({label}, K);
    std::size_t best_ce = K, best_eq3 = K;
    double min_ce = INFINITY, min_eq3 = INFINITY;
    for (std::size_t guess = 0; guess < K; ++guess) {
      TD logits({1, K}, 0.0);
      logits.at({0, guess}) = 6.0;
      const double ce = cross_entropy(logits, target).item();
      const double eq3 = cross_entropy(logits, target, LossForm::kEq3Literal).item();
      if (ce < min_ce) min_ce = ce, best_ce = guess;
      if (eq3 < min_eq3) min_eq3 = eq3, best_eq3 = guess;
    }
    EXPECT_EQ(best_ce, label);
    EXPECT_EQ(best_eq3, label);
  }
}

TEST(CrossEntropy, RejectsNonOneHotTargets) {
  EXPECT_THROW(cross_entropy(TD({1, K}), TD({1, K}, 0.125)), ShapeError);
  EXPECT_THROW(cross_entropy(TD({1, K}), TD({1, K}, 0.0)), ShapeError);
  EXPECT_THROW(cross_entropy(TD({2, K}), one_hot<double>({1}, K)), ShapeError);
}

TEST(CrossEntropy, GradientsBothForms) {
  std::mt19937_64 rng(3);
  auto logits = TD::uniform({3, K}, -2, 2, rng);
  auto target = one_hot<double>({1, 4, 7}, K);
  for (auto form : {LossForm::kCategorical, LossForm::kEq3Literal})
    EXPECT_LE(fd_max_rel_error([&] { return cross_entropy(logits, target, form); }, {logits}), 1e-4);
}

TEST(LossNames, RoundTrip) {
  EXPECT_EQ(parse_loss_form("eq3-literal"), LossForm::kEq3Literal);
  EXPECT_EQ(to_string(LossForm::kCategorical), "categorical");
  double tau = 0;
  EXPECT_EQ(parse_distill_mode("soft:2.5", &tau), DistillMode::kSoft);
  EXPECT_DOUBLE_EQ(tau, 2.5);
  EXPECT_EQ(parse_distill_mode("hard"), DistillMode::kHard);
  EXPECT_THROW(parse_distill_mode("soft:-1"), ConfigError);
  EXPECT_THROW(parse_loss_form("hinge"), ConfigError);
}

// --- distillation -----------------------------------------------------------

TEST(Distillation, SoftIsZeroForIdenticalLogits) {
  std::mt19937_64 rng(4);
  auto d = TD::uniform({3, K}, -3, 3, rng);
  auto c = TD::uniform({3, K}, -3, 3, rng);
  auto y = one_hot<double>({0, 2, 4}, K);
  auto r = distillation_loss(c, d, y, d.detach(), DistillMode::kSoft, 2.0);
  EXPECT_NEAR(r.distill_term.item(), 0.0, 1e-9);
  EXPECT_NEAR(r.total.item(), direct_ce(c, y), 1e-9);
}

TEST(Distillation, HardWithCorrectTeacherIsTwoCrossEntropies) {
  std::mt19937_64 rng(5);
  auto c = TD::uniform({4, K}, -3, 3, rng), d = TD::uniform({4, K}, -3, 3, rng);
  const std::vector<std::size_t> labels{1, 3, 5, 7};
  auto y = one_hot<double>(labels, K);
  TD teacher({4, K}, 0.0);
  for (std::size_t r = 0; r < 4; ++r) teacher.at({r, labels[r]}) = 9.0;
  auto r = distillation_loss(c, d, y, teacher, DistillMode::kHard);
  EXPECT_NEAR(r.total.item(), direct_ce(c, y) + direct_ce(d, y), 1e-9);
}

TEST(Distillation, SoftMatchesDirectKl) {
  std::mt19937_64 rng(6);
  auto t = TD::uniform({3, K}, -3, 3, rng), s = TD::uniform({3, K}, -3, 3, rng);
  for (double tau : {1.0, 3.0}) {
    EXPECT_NEAR(kl_divergence(t, s, tau).item(), direct_kl(t, s, tau), 1e-12);
    auto r = distillation_loss(s, s, one_hot<double>({0, 1, 2}, K), t, DistillMode::kSoft, tau);
    EXPECT_NEAR(r.distill_term.item(), tau * tau * direct_kl(t, s, tau), 1e-12);
  }
}

TEST(Distillation, TeacherReceivesNoGradient) {
  std::mt19937_64 rng(7);
  auto t = TD::uniform({2, K}, -3, 3, rng), s = TD::uniform({2, K}, -3, 3, rng);
  t.set_requires_grad(true);
  s.set_requires_grad(true);
  kl_divergence(t, s, 2.0).backward();
  for (double g : values_of(t.grad_tensor())) EXPECT_EQ(g, 0.0);
  EXPECT_LE(fd_max_rel_error([&] { return kl_divergence(t.detach(), s, 2.0); }, {s}), 1e-4);
}

TEST(Distillation, MissingTeacherRejected) {
  TD c({1, K}), d({1, K});
  EXPECT_THROW(distillation_loss(c, d, one_hot<double>({0}, K), TD{}, DistillMode::kHard), ConfigError);
}

// --- optimizer --------------------------------------------------------------

TEST(Adam, ZeroGradientLeavesParameters) {
  TD w({3}, {1, -2, 3});
  w.set_requires_grad(true);
  w.zero_grad();
  Adam<double> adam({{"w", w}}, AdamConfig{});
  adam.step();
  EXPECT_EQ(values_of(w), (std::vector<double>{1, -2, 3}));
  EXPECT_EQ(adam.state().step, 1u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  TD w({3}, {1, -2, 3});
  w.set_requires_grad(true);
  sum(mul(w, TD({3}, {2.0, -0.5, 1e-3}))).backward();
  Adam<double> adam({{"w", w}}, AdamConfig{0.01, 0.9, 0.999, 1e-8});
  adam.step();
  EXPECT_NEAR(w.data()[0], 1 - 0.01, 1e-7);
  EXPECT_NEAR(w.data()[1], -2 + 0.01, 1e-7);
  EXPECT_NEAR(w.data()[2], 3 - 0.01, 1e-7);
}

TEST(Adam, ScalarQuadraticTrajectory) {
  // Minimizing θ² from θ=1 with lr 0.1: the library must match a plain loop.
  TD theta({1}, 1.0);
  theta.set_requires_grad(true);
  Adam<double> adam({{"theta", theta}}, AdamConfig{0.1, 0.9, 0.999, 1e-8});
  double t = 1.0, m = 0.0, v = 0.0;
  std::vector<double> trace;
  for (int k = 1; k <= 100; ++k) {
    adam.zero_grad();
    sum(mul(theta, theta)).backward();
    adam.step();
    const double g = 2 * t;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1 - std::pow(0.9, k)), vh = v / (1 - std::pow(0.999, k));
    t -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
    ASSERT_NEAR(theta.data()[0], t, 1e-12) << "step " << k;
    trace.push_back(t);
  }
  // The iterate overshoots and oscillates; the envelope of its swings shrinks.
  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < trace.size(); ++i)
    if (std::abs(trace[i]) >= std::abs(trace[i - 1]) && std::abs(trace[i]) >= std::abs(trace[i + 1]))
      peaks.push_back(std::abs(trace[i]));
  ASSERT_GE(peaks.size(), 2u);
  for (std::size_t i = 1; i < peaks.size(); ++i) EXPECT_LT(peaks[i], peaks[i - 1]);
  EXPECT_LT(std::abs(trace.back()), 0.01);
}

TEST(Adam, InvalidHyperparametersRejected) {
  EXPECT_THROW((AdamConfig{-1e-3, 0.9, 0.999, 1e-8}.validate()), ConfigError);
  EXPECT_THROW((AdamConfig{1e-3, 1.0, 0.999, 1e-8}.validate()), ConfigError);
  EXPECT_THROW((AdamConfig{1e-3, 0.9, 0.999, 0.0}.validate()), ConfigError);
}

// --- training loop ----------------------------------------------------------

TEST(Train, ZeroLearningRateKeepsParameters) {
  auto data = testutil::synthetic_samples(2, 8);
  std::mt19937_64 rng(8);
  auto model = build_model<double>(micro_spec(), rng);
  const auto before = snapshot(*model);
  auto cfg = quick_config(1);
  cfg.learning_rate = 0.0;
  train(*model, data, {}, cfg);
  EXPECT_EQ(snapshot(*model), before);
}

TEST(Train, ReplayIsDeterministic) {
  auto data = testutil::synthetic_samples(2, 8);
  std::vector<std::vector<double>> losses, params;
  std::string logs[2];
  for (int run = 0; run < 2; ++run) {
    std::mt19937_64 rng(9);
    ModelSpec spec = micro_spec();
    spec.dropout = 0.1;
    auto model = build_model<double>(spec, rng);
    std::ostringstream log;
    TrainHooks<double> hooks;
    hooks.log = &log;
    auto result = train(*model, data, data, quick_config(2), hooks);
    losses.push_back(result.step_losses);
    logs[run] = log.str();
    std::vector<double> flat;
    for (auto& p : snapshot(*model)) flat.insert(flat.end(), p.begin(), p.end());
    params.push_back(flat);
  }
  EXPECT_EQ(losses[0], losses[1]);
  EXPECT_EQ(params[0], params[1]);
  EXPECT_EQ(logs[0], logs[1]);
  EXPECT_EQ(losses[0].size(), 8u);
}

TEST(Train, LossDecreasesOnSmallProblem) {
  auto data = testutil::synthetic_samples(2, 8, 0.0);
  std::mt19937_64 rng(10);
  auto model = build_model<double>(micro_spec("multinet"), rng);
  auto cfg = quick_config(15);
  cfg.learning_rate = 1e-2;
  auto result = train(*model, data, {}, cfg);
  EXPECT_LT(result.epochs.back().train_loss, result.epochs.front().train_loss);
}

TEST(Train, NonFiniteLossAbortsWithStep) {
  auto data = testutil::synthetic_samples(1, 8);
  std::mt19937_64 rng(11);
  auto model = build_model<double>(micro_spec(), rng);
  auto params = model->parameters();
  for (auto& p : params)
    if (p.name == "fusion.bias") p.tensor.values()[0] = NAN;
  try {
    train(*model, data, {}, quick_config(1));
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1, step 1"), std::string::npos) << e.what();
  }
}

TEST(Train, LogRecordsAreJsonLines) {
  auto data = testutil::synthetic_samples(1, 8);
  std::mt19937_64 rng(12);
  auto model = build_model<double>(micro_spec(), rng);
  std::ostringstream log;
  TrainHooks<double> hooks;
  hooks.log = &log;
  train(*model, data, data, quick_config(1), hooks);
  std::istringstream in(log.str());
  std::string line;
  std::vector<std::string> splits;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    for (const char* key : {"epoch", "step", "split", "loss", "accuracy"}) EXPECT_TRUE(j.contains(key)) << line;
    splits.push_back(j["split"]);
  }
  EXPECT_EQ(splits, (std::vector<std::string>{"train", "train", "train_epoch", "val"}));
}

TEST(Train, EarlyStopHook) {
  auto data = testutil::synthetic_samples(1, 8);
  std::mt19937_64 rng(13);
  auto model = build_model<double>(micro_spec(), rng);
  TrainHooks<double> hooks;
  hooks.on_epoch = [](const EpochSummary& s) { return s.epoch < 2; };
  EXPECT_EQ(train(*model, data, {}, quick_config(10), hooks).epochs.size(), 2u);
}

TEST(Train, DeitDistillationRequiresTeacher) {
  auto data = testutil::synthetic_samples(1, 8);
  std::mt19937_64 rng(14);
  auto student = build_model<double>(micro_spec("deit"), rng);
  auto teacher = build_model<double>(micro_spec("multinet"), rng);
  auto cfg = quick_config(1);
  cfg.distillation = DistillMode::kHard;
  EXPECT_THROW(train(*student, data, {}, cfg), ConfigError);
  TrainHooks<double> hooks;
  hooks.teacher = teacher.get();
  EXPECT_EQ(train(*student, data, {}, cfg, hooks).step_losses.size(), 2u);
}

// --- checkpoints ------------------------------------------------------------

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
  auto data = testutil::synthetic_samples(1, 8);
  for (const char* pairing : {"vit+multinet", "deit+efficient-style"}) {
    std::mt19937_64 rng(15);
    auto model = build_model<double>(micro_spec(pairing), rng);
    auto result = train(*model, data, {}, quick_config(1));
    auto params = model->parameters();
    auto bytes = serialize_checkpoint(make_checkpoint(params, &result.optimizer, pairing, {{"preset", "micro"}}));

    std::mt19937_64 other(99);
    auto fresh = build_model<double>(micro_spec(pairing), other);
    auto fresh_params = fresh->parameters();
    auto loaded = deserialize_checkpoint(bytes);
    EXPECT_EQ(load_parameters(loaded, fresh_params).size(), fresh_params.size());
    auto state = load_optimizer_state(loaded, fresh_params);
    EXPECT_EQ(state.step, result.optimizer.step);
    EXPECT_EQ(serialize_checkpoint(make_checkpoint(fresh_params, &state, pairing, loaded.config)), bytes) << pairing;
  }
}

TEST(Checkpoint, FloatRoundTrip) {
  std::mt19937_64 rng(16);
  auto model = build_model<float>(micro_spec(), rng);
  auto params = model->parameters();
  auto bytes = serialize_checkpoint(make_checkpoint<float>(params, nullptr, "vit+multinet", {}));
  auto loaded = deserialize_checkpoint(bytes);
  EXPECT_EQ(loaded.dtype, "f32");
  EXPECT_FALSE(loaded.has_optimizer);
  std::mt19937_64 other(17);
  auto fresh = build_model<float>(micro_spec(), other);
  auto fresh_params = fresh->parameters();
  load_parameters(loaded, fresh_params);
  for (std::size_t i = 0; i < params.size(); ++i)
    EXPECT_EQ(values_of(params[i].tensor), values_of(fresh_params[i].tensor)) << params[i].name;
}

TEST(Checkpoint, WrongArchitectureNamesTensor) {
  std::mt19937_64 rng(18);
  auto vit = build_model<double>(micro_spec("vit+multinet"), rng);
  auto params = vit->parameters();
  auto data = make_checkpoint<double>(params, nullptr, "vit+multinet", {});
  ModelSpec wider = micro_spec("vit+multinet");
  wider.image_size = 16;
  auto other = build_model<double>(wider, rng);
  auto other_params = other->parameters();
  try {
    load_parameters(data, other_params);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("branch_a.positional"), std::string::npos) << e.what();
  }
  auto resnet = build_model<double>(micro_spec("vit+resnet-style"), rng);
  auto resnet_params = resnet->parameters();
  EXPECT_THROW(load_parameters(data, resnet_params), CheckpointError);
}

TEST(Checkpoint, PartialBackboneLoad) {
  std::mt19937_64 rng(19);
  auto donor = build_model<double>(micro_spec("multinet"), rng);
  auto donor_params = donor->parameters();
  auto data = make_checkpoint<double>(donor_params, nullptr, "multinet", {});

  auto fused = build_model<double>(micro_spec("vit+multinet"), rng);
  auto params = fused->parameters();
  const auto before = snapshot(*fused);
  LoadOptions opts;
  opts.strict = false;
  opts.source_prefix = "vgg.";
  opts.target_prefix = "branch_b.vgg.";
  auto loaded = load_parameters(data, params, opts);
  ASSERT_FALSE(loaded.empty());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const bool named = std::find(loaded.begin(), loaded.end(), params[i].name) != loaded.end();
    EXPECT_EQ(named, params[i].name.rfind("branch_b.vgg.", 0) == 0) << params[i].name;
    if (named) {
      const auto* src = data.find(params[i].name.substr(std::string("branch_b.").size()));
      ASSERT_NE(src, nullptr);
      EXPECT_EQ(values_of(params[i].tensor), src->values);
    } else {
      EXPECT_EQ(values_of(params[i].tensor), before[i]) << params[i].name;
    }
  }
}

TEST(Checkpoint, CorruptionDetected) {
  std::mt19937_64 rng(20);
  auto model = build_model<double>(micro_spec("multinet"), rng);
  auto bytes = serialize_checkpoint(make_checkpoint<double>(model->parameters(), nullptr, "multinet", {}));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(deserialize_checkpoint(bad_magic), CheckpointError);
  auto bad_version = bytes;
  bad_version[8] = 7;
  try {
    deserialize_checkpoint(bad_version);
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos) << e.what();
  }
  auto truncated = bytes;
  truncated.resize(bytes.size() - 9);
  EXPECT_THROW(deserialize_checkpoint(truncated), CheckpointError);
}

TEST(Checkpoint, FileRoundTrip) {
  testutil::TempDir dir("ckpt");
  std::mt19937_64 rng(21);
  auto model = build_model<double>(micro_spec("multinet"), rng);
  auto data = make_checkpoint<double>(model->parameters(), nullptr, "multinet", {{"seed", 4}});
  write_checkpoint(dir / "a.bin", data);
  auto back = read_checkpoint(dir / "a.bin");
  EXPECT_EQ(back.pairing, "multinet");
  EXPECT_EQ(back.config["seed"], 4);
  EXPECT_EQ(serialize_checkpoint(back), serialize_checkpoint(data));
  EXPECT_THROW(read_checkpoint(dir / "missing.bin"), CheckpointError);
}
