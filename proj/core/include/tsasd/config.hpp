// Copyright 2026 The tsasd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TSASD_CONFIG_HPP_
#define TSASD_CONFIG_HPP_

#include <string>

#include "tsasd/model.hpp"

namespace tsasd {

struct OptimizerConfig {
  double lr = 1e-4;
  double epoch_decay = 0.05;  // multiplicative 5% decay per epoch
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  int epochs = 5;
  int batch_size = 4;
  bool augment = true;
  bool force_null_enroll = false;
  bool allow_self_enroll = false;
  uint64_t seed = 1;
  uint64_t eval_enroll_seed = 1234;
};

struct PathsConfig {
  std::string manifest;
  std::string library;
  std::string out_dir = "runs/default";
  std::string data_root;  // empty = manifest directory
};

/// Everything a run needs; serialized beside every run's outputs.
struct RunConfig {
  ModelConfig model;
  OptimizerConfig optimizer;
  TrainConfig train;
  PathsConfig paths;
  std::string speaker_backend = "stub";

  std::string to_json_string(int indent = 2) const;
  static RunConfig from_json_string(const std::string& text);
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;
};

}  // namespace tsasd

#endif  // TSASD_CONFIG_HPP_
