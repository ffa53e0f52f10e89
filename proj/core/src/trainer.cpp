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

#include "tsasd/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "tsasd/error.hpp"

namespace fs = std::filesystem;

namespace tsasd {

using json = nlohmann::json;

double epoch_learning_rate(double lr0, double decay, int epoch) {
  return lr0 * std::pow(1.0 - decay, epoch - 1);
}

EvalSummary evaluate_split(AsdModel& model, const Manifest& manifest,
                           const std::string& split,
                           const FaceSpeakerLibrary* library,
                           const SpeakerEncoderInterface& speaker_encoder,
                           const FaceEmbedderInterface& face_embedder,
                           uint64_t enroll_seed, bool force_null,
                           bool allow_self_enroll) {
  EvalSummary summary;
  summary.enroll_seed = enroll_seed;

  ExampleOptions opts;
  opts.augment = false;
  opts.enroll_seed = enroll_seed;
  opts.force_null_enroll = force_null;
  opts.enroll.allow_self_enroll = allow_self_enroll;

  std::vector<EvalPair> pooled;
  for (const TrackManifestEntry* entry : manifest.split_entries(split)) {
    TrainingExample ex = load_example(manifest, *entry, library,
                                      speaker_encoder, face_embedder, opts);
    ScoreSequence scores =
        model.forward_scores(ex.faces, ex.aligned, ex.speaker);
    TrackPairs track;
    track.track_id = entry->track_id;
    for (size_t i = 0; i < scores.probs.size(); ++i) {
      EvalPair pair;
      pair.score = scores.probs[i];
      pair.label = ex.labels[i];
      pair.track_id = entry->track_id;
      pair.frame_index = static_cast<int>(i);
      track.pairs.push_back(pair);
      pooled.push_back(std::move(pair));
    }
    summary.track_pairs.push_back(std::move(track));
    ++summary.n_tracks;
  }
  summary.n_frames = static_cast<int>(pooled.size());
  if (!pooled.empty()) {
    summary.map = mean_average_precision(pooled);
    summary.ap = summary.map;
    try {
      summary.auc = auc(pooled);
    } catch (const UndefinedMetricError&) {
    }
    try {
      summary.eer = eer(pooled);
    } catch (const UndefinedMetricError&) {
    }
    summary.stratified = stratified_report(summary.track_pairs);
  }
  return summary;
}

TrainResult train_run(const RunConfig& cfg, const Manifest& manifest,
                      const FaceSpeakerLibrary* library,
                      const std::string& out_dir) {
  auto train_entries = manifest.split_entries("train");
  if (train_entries.empty()) {
    throw ConfigError("train: manifest has no train-split tracks");
  }
  bool has_val = !manifest.split_entries("val").empty();

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir)) {
    throw IoError("cannot create run directory: " + out_dir);
  }

  auto speaker_encoder = load_speaker_encoder(
      cfg.speaker_backend, cfg.model.encoder.speaker_dim);
  auto face_embedder = make_stub_face_embedder();

  AsdModel model(cfg.model, cfg.train.seed);

  // archive the exact config beside the outputs
  cfg.save((fs::path(out_dir) / "config.json").string());

  TrainResult result;
  result.log_path = (fs::path(out_dir) / "train_log.jsonl").string();
  result.checkpoint_path = (fs::path(out_dir) / "best.ckpt").string();
  std::ofstream log(result.log_path);
  if (!log) throw IoError("cannot write training log: " + result.log_path);

  long global_step = 0;
  double best_ap = -1.0;
  for (int epoch = 1; epoch <= cfg.train.epochs; ++epoch) {
    double lr =
        epoch_learning_rate(cfg.optimizer.lr, cfg.optimizer.epoch_decay, epoch);

    ExampleOptions opts;
    opts.augment = cfg.train.augment;
    opts.augment_seed = hash_seed(cfg.train.seed, 0xa6, epoch);
    // fresh enrollment draw each epoch
    opts.enroll_seed = hash_seed(cfg.train.seed, 0xe7, epoch);
    opts.force_null_enroll = cfg.train.force_null_enroll;
    opts.enroll.allow_self_enroll = cfg.train.allow_self_enroll;

    BatchStream stream(manifest, train_entries, cfg.train.batch_size,
                       hash_seed(cfg.train.seed, 0xba, epoch), library,
                       speaker_encoder, face_embedder, opts);
    std::mt19937_64 dropout_rng(hash_seed(cfg.train.seed, 0xd0, epoch));

    double loss_sum = 0.0;
    size_t example_count = 0;
    while (auto batch = stream.next()) {
      model.params().zero_grads();
      double batch_loss = 0.0;
      for (const TrainingExample& ex : *batch) {
        batch_loss += model.forward_backward(ex.faces, ex.aligned, ex.speaker,
                                             ex.labels, dropout_rng);
      }
      double inv = 1.0 / static_cast<double>(batch->size());
      for (Param* p : model.params().all()) {
        if (p->trainable) p->grad *= inv;
      }
      model.params().adam_step(lr, cfg.optimizer.beta1, cfg.optimizer.beta2,
                               cfg.optimizer.eps, ++global_step);
      loss_sum += batch_loss;
      example_count += batch->size();
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.lr = lr;
    entry.train_loss = loss_sum / static_cast<double>(example_count);

    json record;
    record["epoch"] = epoch;
    record["lr"] = lr;
    record["train_loss"] = entry.train_loss;
    if (has_val) {
      EvalSummary val = evaluate_split(
          model, manifest, "val", library, *speaker_encoder, *face_embedder,
          cfg.train.eval_enroll_seed, cfg.train.force_null_enroll,
          cfg.train.allow_self_enroll);
      entry.val_ap = val.ap;
      entry.val_auc = val.auc;
      entry.val_eer = val.eer;
      record["val_ap"] = val.ap;
      if (val.auc) record["val_auc"] = *val.auc;
      if (val.eer) record["val_eer"] = *val.eer;
      if (val.ap > best_ap) {
        best_ap = val.ap;
        result.best_epoch = epoch;
        save_checkpoint(result.checkpoint_path, model.params(),
                        cfg.to_json_string(0));
      }
    }
    log << record.dump() << "\n";
    log.flush();
    result.epochs.push_back(entry);
  }

  if (!has_val) {
    // no validation split: keep the final parameters
    save_checkpoint(result.checkpoint_path, model.params(),
                    cfg.to_json_string(0));
    result.best_epoch = cfg.train.epochs;
  }
  result.best_val_ap = std::max(best_ap, 0.0);
  return result;
}

}  // namespace tsasd
