// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "multinet/checkpoint.hpp"
#include "multinet/classes.hpp"
#include "multinet/data.hpp"
#include "multinet/errors.hpp"
#include "multinet/metrics.hpp"
#include "multinet/models.hpp"
#include "multinet/train.hpp"

namespace fs = std::filesystem;

namespace multinet::cli {

namespace {

struct RunConfig {
  // shared
  std::string data;
  std::string layout = "breakhis-tree";
  std::string magnification;
  std::string out = "run";
  std::uint64_t seed = 0;
  std::size_t batch_size = 8;
  // model
  std::string model = "vit+multinet";
  std::string preset = "tiny";
  std::size_t image_size = 224;
  std::size_t patch = 16;
  double dropout = 0.1;
  std::string precision = "f32";
  // training
  std::string split = "70/15/15";
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  std::size_t epochs = 200;
  std::string loss_form = "categorical";
  std::string distill = "off";
  std::string teacher_model;
  std::string teacher_checkpoint;
  std::string init_from;
  std::string init_source_prefix;
  std::string init_target_prefix;
  // eval
  std::string checkpoint;
  std::string split_file;
  std::string split_part = "test";
  // synth
  std::size_t images_per_class = 8;
  std::size_t resolution = 64;
  double noise = 0.05;
  // gradcheck
  std::size_t max_entries = 0;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void check_magnification(const std::string& token) {
  if (!token.empty() && !magnification_index(token)) {
    throw ConfigError("unknown magnification '" + token + "' (known: 40X, 100X, 200X, 400X)");
  }
}

ModelSpec model_spec(const RunConfig& rc) {
  ModelSpec spec;
  spec.pairing = canonical_pairing(rc.model);
  spec.preset = rc.preset;
  spec.image_size = rc.image_size;
  spec.patch = rc.patch;
  spec.dropout = rc.dropout;
  spec.num_classes = kClassNames.size();
  return spec;
}

ModelSpec spec_from_json(const nlohmann::json& cfg) {
  ModelSpec spec;
  try {
    spec.pairing = cfg.at("model").get<std::string>();
    spec.preset = cfg.at("preset").get<std::string>();
    spec.image_size = cfg.at("image_size").get<std::size_t>();
    spec.patch = cfg.at("patch").get<std::size_t>();
    spec.dropout = cfg.at("dropout").get<double>();
    spec.num_classes = cfg.at("num_classes").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint config is incomplete: ") + e.what());
  }
  return spec;
}

nlohmann::json spec_json(const ModelSpec& spec) {
  return {{"model", spec.pairing},         {"preset", spec.preset},   {"image_size", spec.image_size},
          {"patch", spec.patch},           {"dropout", spec.dropout}, {"num_classes", spec.num_classes}};
}

TrainConfig train_config(const RunConfig& rc) {
  TrainConfig tc;
  tc.learning_rate = rc.lr;
  tc.beta1 = rc.beta1;
  tc.beta2 = rc.beta2;
  tc.batch_size = rc.batch_size;
  tc.epochs = rc.epochs;
  tc.seed = rc.seed;
  tc.loss_form = parse_loss_form(rc.loss_form);
  tc.distillation = parse_distill_mode(rc.distill, &tc.temperature);
  tc.validate();
  return tc;
}

void check_precision(const std::string& p) {
  if (p != "f32" && p != "f64") throw ConfigError("precision must be f32 or f64, got '" + p + "'");
}

std::vector<SampleDescriptor> scan(const RunConfig& rc, std::ostream& out) {
  if (rc.data.empty()) throw ConfigError("--data is required");
  const Layout layout = parse_layout(rc.layout);
  ScanResult scanned = scan_dataset(rc.data, layout);
  for (const auto& w : scanned.warnings) out << "warning: " << w << "\n";
  if (!scanned.skipped.empty()) {
    out << "skipped " << scanned.skipped.size() << " file(s):\n";
    for (const auto& s : scanned.skipped) out << "  " << s.path << ": " << s.reason << "\n";
  }
  auto samples = scanned.samples;
  if (!rc.magnification.empty()) samples = filter_magnification(samples, rc.magnification);
  if (samples.empty()) throw DataError("no samples found under " + rc.data);
  return samples;
}

void write_reports(const fs::path& dir, const EvalResult& eval, const std::string& title, std::ostream& out) {
  const auto metrics = compute_metrics(confusion(eval.truth, eval.predicted, kClassNames.size()));
  for (auto format : {ReportFormat::kText, ReportFormat::kCsv, ReportFormat::kJson}) {
    write_text(dir / ("report." + extension(format)), render_report(metrics, format, title));
  }
  out << render_report(metrics, ReportFormat::kText, title);
}

template <typename T>
std::vector<std::string> load_with_context(const CheckpointData& data, ParameterList<T>& params,
                                           const LoadOptions& options) {
  try {
    return load_parameters(data, params, options);
  } catch (const CheckpointError& e) {
    throw ConfigError(std::string("architecture mismatch: ") + e.what());
  } catch (const ShapeError& e) {
    throw ConfigError(std::string("architecture mismatch: ") + e.what());
  }
}

template <typename T>
std::unique_ptr<Classifier<T>> load_model(const fs::path& path, const std::string& pairing_override,
                                          std::mt19937_64& rng, CheckpointData* data_out = nullptr) {
  CheckpointData data = read_checkpoint(path);
  ModelSpec spec = spec_from_json(data.config);
  if (!pairing_override.empty()) spec.pairing = canonical_pairing(pairing_override);
  auto model = build_model<T>(spec, rng);
  auto params = model->parameters();
  load_with_context(data, params, {});
  if (data_out) *data_out = std::move(data);
  return model;
}

template <typename T>
int train_impl(const RunConfig& rc, const std::string& echo, std::ostream& out) {
  const ModelSpec spec = model_spec(rc);
  const TrainConfig tc = train_config(rc);
  const SplitRatios ratios = parse_ratios(rc.split);
  check_magnification(rc.magnification);
  if (tc.distillation != DistillMode::kOff && rc.teacher_checkpoint.empty()) {
    throw ConfigError("--distill " + rc.distill + " needs --teacher-checkpoint");
  }
  std::mt19937_64 rng(rc.seed);
  auto model = build_model<T>(spec, rng);

  const fs::path dir = rc.out;
  fs::create_directories(dir);
  write_text(dir / "config.toml", echo);

  const auto samples = scan(rc, out);
  const DatasetSplit split = split_dataset(samples, ratios, rc.seed);
  write_text(dir / "split.json", split_record(split).dump(2) + "\n");
  out << fmt::format("{} samples: train {}, val {}, test {}\n", samples.size(), split.train.size(),
                     split.val.size(), split.test.size());
  const auto train_set = load_samples(split.train, rc.image_size);
  const auto val_set = load_samples(split.val, rc.image_size);
  const auto test_set = load_samples(split.test, rc.image_size);

  if (!rc.init_from.empty()) {
    const CheckpointData init = read_checkpoint(rc.init_from);
    auto params = model->parameters();
    LoadOptions options{false, rc.init_source_prefix, rc.init_target_prefix};
    const auto loaded = load_with_context(init, params, options);
    out << "initialized " << loaded.size() << " of " << params.size() << " tensors from " << rc.init_from << "\n";
  }
  std::unique_ptr<Classifier<T>> teacher;
  TrainHooks<T> hooks;
  if (!rc.teacher_checkpoint.empty()) {
    std::mt19937_64 teacher_rng(rc.seed);
    teacher = load_model<T>(rc.teacher_checkpoint, rc.teacher_model, teacher_rng);
    hooks.teacher = teacher.get();
  }
  std::ofstream log(dir / "train_log.jsonl", std::ios::trunc);
  if (!log) throw DataError("cannot write " + (dir / "train_log.jsonl").string());
  hooks.log = &log;
  hooks.on_epoch = [&out](const EpochSummary& s) {
    out << fmt::format("epoch {:>4}  train loss {:.4f} acc {:.3f}", s.epoch, s.train_loss, s.train_accuracy);
    if (s.has_val) out << fmt::format("  val loss {:.4f} acc {:.3f} macro-F1 {:.3f}", s.val_loss, s.val_accuracy, s.val_macro_f1);
    out << "\n";
    return true;
  };
  const auto result = train(*model, train_set, val_set, tc, hooks);
  out << "selected epoch " << result.best_epoch << "\n";

  nlohmann::json config = spec_json(spec);
  config["precision"] = rc.precision;
  config["seed"] = rc.seed;
  config["learning_rate"] = rc.lr;
  config["beta1"] = rc.beta1;
  config["beta2"] = rc.beta2;
  config["batch_size"] = rc.batch_size;
  config["epochs"] = rc.epochs;
  config["loss_form"] = to_string(tc.loss_form);
  config["distill"] = rc.distill;
  config["split"] = rc.split;
  config["magnification"] = rc.magnification;
  config["selected_epoch"] = result.best_epoch;
  const auto params = model->parameters();
  write_checkpoint(dir / "checkpoint.bin", make_checkpoint(params, &result.optimizer, spec.pairing, config));

  const std::vector<Sample>* report_set = &test_set;
  std::string part = "test";
  if (test_set.empty()) {
    report_set = val_set.empty() ? &train_set : &val_set;
    part = val_set.empty() ? "train" : "val";
    out << "warning: test split is empty, reporting on the " << part << " split\n";
  }
  const auto eval = evaluate(*model, *report_set, rc.batch_size, tc.loss_form);
  write_log_record(log, {result.epochs.size(), result.step_losses.size(), "test", eval.loss, eval.accuracy});
  write_reports(dir, eval, spec.pairing + " (" + part + " split)", out);
  return kOk;
}

template <typename T>
int eval_impl(const RunConfig& rc, std::ostream& out) {
  check_magnification(rc.magnification);
  if (rc.checkpoint.empty()) throw ConfigError("--checkpoint is required");
  std::mt19937_64 rng(rc.seed);
  CheckpointData data;
  auto model = load_model<T>(rc.checkpoint, rc.model, rng, &data);
  const ModelSpec spec = spec_from_json(data.config);
  auto samples = scan(rc, out);
  if (!rc.split_file.empty()) {
    const auto record = nlohmann::json::parse(read_text(rc.split_file));
    if (!record.contains(rc.split_part)) throw ConfigError("split record has no '" + rc.split_part + "' list");
    std::set<std::string> keep;
    for (const auto& p : record.at(rc.split_part)) keep.insert(p.get<std::string>());
    std::erase_if(samples, [&](const SampleDescriptor& s) { return !keep.count(s.path); });
    if (samples.empty()) throw DataError("none of the " + rc.split_part + " paths in " + rc.split_file + " were found");
  }
  const auto loaded = load_samples(samples, spec.image_size);
  const LossForm form = data.config.contains("loss_form")
                            ? parse_loss_form(data.config["loss_form"].get<std::string>())
                            : LossForm::kCategorical;
  const auto eval = evaluate(*model, loaded, rc.batch_size, form);
  fs::create_directories(rc.out);
  std::string title = spec.pairing + " on " + std::to_string(loaded.size()) + " samples";
  if (!rc.magnification.empty()) title += " at " + rc.magnification;
  out << fmt::format("loss {:.6f} accuracy {:.4f}\n", eval.loss, eval.accuracy);
  write_reports(rc.out, eval, title, out);
  return kOk;
}

int synth_impl(const RunConfig& rc, std::ostream& out) {
  SyntheticSpec spec;
  spec.images_per_class = rc.images_per_class;
  spec.resolution = rc.resolution;
  spec.noise = rc.noise;
  spec.seed = rc.seed;
  spec.validate();
  const auto files = generate_synthetic(spec, rc.out);
  out << "wrote " << files.size() << " images to " << rc.out << "\n";
  return kOk;
}

void add_data_options(CLI::App* cmd, RunConfig& rc) {
  cmd->add_option("--data", rc.data, "Dataset root (directory tree or manifest CSV)");
  cmd->add_option("--layout", rc.layout, "breakhis-tree | manifest");
  cmd->add_option("--magnification", rc.magnification, "Restrict to 40X, 100X, 200X or 400X");
  cmd->add_option("--out", rc.out, "Output directory");
  cmd->add_option("--seed", rc.seed, "Seed for splits, initialization, shuffling and dropout");
  cmd->add_option("--batch-size", rc.batch_size, "Mini-batch size");
}

/// Inserts config-file tokens right after the subcommand so later flags win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::vector<std::string> file_tokens;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ConfigError("--config needs a file path");
      const auto tokens = config_file_tokens(args[++i]);
      file_tokens.insert(file_tokens.end(), tokens.begin(), tokens.end());
    } else if (args[i].rfind("--config=", 0) == 0) {
      const auto tokens = config_file_tokens(args[i].substr(9));
      file_tokens.insert(file_tokens.end(), tokens.begin(), tokens.end());
    } else {
      out.push_back(args[i]);
    }
  }
  if (!out.empty()) out.insert(out.begin() + 1, file_tokens.begin(), file_tokens.end());
  return out;
}

}  // namespace

std::vector<std::string> config_file_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::vector<std::string> tokens;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string text = trim(line);
    if (text.empty() || text[0] == '#' || text[0] == '[') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(text.substr(0, eq));
    std::string value = trim(text.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    } else if (const auto hash = value.find('#'); hash != std::string::npos) {
      value = trim(value.substr(0, hash));
    }
    std::replace(key.begin(), key.end(), '_', '-');
    tokens.push_back("--" + key);
    tokens.push_back(value);
  }
  return tokens;
}

int gradcheck(const std::vector<GradcheckCase>& cases, const GradcheckOptions& options, std::ostream& out,
              std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  const auto rows = run_gradcheck_suite(cases, options);
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::size_t width = 9;
  for (const auto& r : rows) width = std::max(width, r.component.size());
  out << fmt::format("{:<{}}  {:>12}  {:>8}  {:>8}  {}\n", "component", width, "max rel err", "entries", "seconds",
                     "result");
  std::vector<std::string> failed;
  for (const auto& r : rows) {
    out << fmt::format("{:<{}}  {:>12.3e}  {:>8}  {:>8.3f}  {}\n", r.component, width, r.max_relative_error,
                       r.entries_checked, r.seconds, r.passed ? "PASS" : "FAIL");
    if (!r.error.empty()) out << "  error: " << r.error << "\n";
    if (!r.passed) failed.push_back(r.component);
  }
  out << fmt::format("tolerance {:.0e}, epsilon {:.0e}, total {:.2f} s\n", options.tolerance, options.epsilon, total);
  if (!failed.empty()) {
    std::string names;
    for (const auto& f : failed) names += (names.empty() ? "" : ", ") + f;
    err << "gradcheck failed: " << names << "\n";
    return kNumericFailure;
  }
  return kOk;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  CLI::App app{"MultiNet-ViT hybrid classifier"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* train_cmd = app.add_subcommand("train", "Train a model and write checkpoint, log, split and report");
  add_data_options(train_cmd, rc);
  train_cmd->add_option("--model", rc.model, "vit, deit, multinet, resnet-style, efficient-style or a+b");
  train_cmd->add_option("--preset", rc.preset, "tiny | base | micro");
  train_cmd->add_option("--image-size", rc.image_size, "Square input resolution");
  train_cmd->add_option("--patch", rc.patch, "ViT patch size");
  train_cmd->add_option("--dropout", rc.dropout, "Dropout rate");
  train_cmd->add_option("--precision", rc.precision, "f32 | f64");
  train_cmd->add_option("--split", rc.split, "train/val/test ratios, e.g. 70/15/15");
  train_cmd->add_option("--lr", rc.lr, "Adam learning rate");
  train_cmd->add_option("--beta1", rc.beta1, "Adam beta1");
  train_cmd->add_option("--beta2", rc.beta2, "Adam beta2");
  train_cmd->add_option("--epochs", rc.epochs, "Training epochs");
  train_cmd->add_option("--loss-form", rc.loss_form, "categorical | eq3-literal");
  train_cmd->add_option("--distill", rc.distill, "off | hard | soft | soft:<temperature>");
  train_cmd->add_option("--teacher-model", rc.teacher_model, "Teacher pairing (defaults to the checkpoint's)");
  train_cmd->add_option("--teacher-checkpoint", rc.teacher_checkpoint, "Teacher weights for distillation");
  train_cmd->add_option("--init-from", rc.init_from, "Checkpoint to initialize matching tensors from");
  train_cmd->add_option("--init-source-prefix", rc.init_source_prefix, "Only load tensors with this prefix");
  train_cmd->add_option("--init-target-prefix", rc.init_target_prefix, "Replacement for the source prefix");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint and write reports");
  add_data_options(eval_cmd, rc);
  eval_cmd->add_option("--checkpoint", rc.checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--model", rc.model, "Expected pairing; must match the checkpoint");
  eval_cmd->add_option("--split-file", rc.split_file, "split.json restricting the evaluated paths");
  eval_cmd->add_option("--split-part", rc.split_part, "train | val | test list of the split file");

  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic 8-class texture dataset");
  synth_cmd->add_option("--out", rc.out, "Output directory");
  synth_cmd->add_option("--seed", rc.seed, "Noise seed");
  synth_cmd->add_option("--images-per-class", rc.images_per_class, "Images per class");
  synth_cmd->add_option("--resolution", rc.resolution, "Image side in pixels");
  synth_cmd->add_option("--noise", rc.noise, "Gaussian noise std-dev in [0,1] intensity units");

  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of every layer and model");
  grad_cmd->add_option("--seed", rc.seed, "Seed for inputs and parameters");
  grad_cmd->add_option("--max-entries", rc.max_entries, "Entries probed per tensor (0 = all)");

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kOk;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << "\n";
      return kConfigFailure;
    }
    if (!rc.model.empty() && (train_cmd->parsed() || eval_cmd->count("--model"))) canonical_pairing(rc.model);
    if (train_cmd->parsed()) {
      check_precision(rc.precision);
      const std::string echo = train_cmd->config_to_str(true, false);
      return rc.precision == "f64" ? train_impl<double>(rc, echo, out) : train_impl<float>(rc, echo, out);
    }
    if (eval_cmd->parsed()) {
      const auto dtype = read_checkpoint(rc.checkpoint).dtype;
      if (!eval_cmd->count("--model")) rc.model.clear();
      return dtype == "f64" ? eval_impl<double>(rc, out) : eval_impl<float>(rc, out);
    }
    if (synth_cmd->parsed()) return synth_impl(rc, out);
    GradcheckOptions options;
    options.seed = rc.seed;
    options.max_entries_per_tensor = rc.max_entries;
    return gradcheck(default_gradcheck_cases(), options, out, err);
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumericFailure;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataFailure;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << "\n";
    return kDataFailure;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataFailure;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const nlohmann::json::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kDataFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kConfigFailure;
  }
}

}  // namespace multinet::cli
