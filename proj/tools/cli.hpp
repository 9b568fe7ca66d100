// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "multinet/gradcheck.hpp"

namespace multinet::cli {

enum ExitCode : int { kOk = 0, kConfigFailure = 1, kDataFailure = 2, kNumericFailure = 3 };

/// Full command-line entry point: `multinet <train|eval|synth|gradcheck> [flags]`.
/// Every failure is reported as one line on `err` and mapped to an exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Gradient-check command over an explicit case list (tests inject faulty cases).
int gradcheck(const std::vector<GradcheckCase>& cases, const GradcheckOptions& options, std::ostream& out,
              std::ostream& err);

/// Flat `key = value` lines, '#' comments, optional quotes, optional [section]
/// headers ignored. Returns the entries as `--key value` tokens.
std::vector<std::string> config_file_tokens(const std::string& path);

}  // namespace multinet::cli
