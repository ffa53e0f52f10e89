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

#ifndef TSASD_TRAINER_HPP_
#define TSASD_TRAINER_HPP_

#include <optional>
#include <string>
#include <vector>

#include "tsasd/config.hpp"
#include "tsasd/dataset.hpp"
#include "tsasd/metrics.hpp"
#include "tsasd/model.hpp"

namespace tsasd {

struct EvalSummary {
  double map = 0.0;  // pooled AP (single detection class)
  double ap = 0.0;
  std::optional<double> auc;
  std::optional<double> eer;
  StratifiedReport stratified;
  std::vector<TrackPairs> track_pairs;
  uint64_t enroll_seed = 0;
  int n_tracks = 0;
  int n_frames = 0;
};

/// Scores every track of a split in eval mode with a fixed enrollment seed
/// and computes the pooled metrics plus the stratified report.
EvalSummary evaluate_split(AsdModel& model, const Manifest& manifest,
                           const std::string& split,
                           const FaceSpeakerLibrary* library,
                           const SpeakerEncoderInterface& speaker_encoder,
                           const FaceEmbedderInterface& face_embedder,
                           uint64_t enroll_seed, bool force_null,
                           bool allow_self_enroll = false);

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_ap = 0.0;
  std::optional<double> val_auc;
  std::optional<double> val_eer;
};

struct TrainResult {
  std::vector<EpochLog> epochs;
  std::string checkpoint_path;  // best-val checkpoint
  double best_val_ap = 0.0;
  int best_epoch = 0;
  std::string log_path;
};

/// Full training run: per-epoch Adam with 5% learning-rate decay,
/// per-epoch enrollment resampling, best-val checkpoint retention,
/// structured JSONL epoch log. Deterministic given the config seeds.
TrainResult train_run(const RunConfig& cfg, const Manifest& manifest,
                      const FaceSpeakerLibrary* library,
                      const std::string& out_dir);

/// Learning rate for a 1-based epoch under multiplicative decay.
double epoch_learning_rate(double lr0, double decay, int epoch);

}  // namespace tsasd

#endif  // TSASD_TRAINER_HPP_
