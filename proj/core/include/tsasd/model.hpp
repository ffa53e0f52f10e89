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

#ifndef TSASD_MODEL_HPP_
#define TSASD_MODEL_HPP_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tsasd/attention.hpp"
#include "tsasd/autograd.hpp"
#include "tsasd/encoders.hpp"
#include "tsasd/features.hpp"

namespace tsasd {

/// How the replicated speaker embedding joins the audio-visual stream.
enum class FusionMode { kFus1, kFus2, kConcat };

FusionMode parse_fusion_mode(const std::string& name);
std::string fusion_mode_name(FusionMode mode);

/// Per-video-frame speaking probabilities for one track.
struct ScoreSequence {
  std::vector<double> probs;
  std::string track_ref;
};

struct ModelConfig {
  EncoderConfig encoder;
  FusionMode mode = FusionMode::kConcat;
  AttentionConfig attention;
  int ffn_mult = 2;
  double loss_clip = 1e-7;
};

/// Mean binary cross-entropy with probabilities clipped to
/// [eps, 1 - eps], eps = 1e-7.
double asd_loss(const ScoreSequence& pred, const std::vector<int>& labels);

/// Projects a speaker embedding through a bias-free linear map and repeats
/// it over T rows (evaluation helper; the training path runs on the tape).
Mat replicate_speaker(const SpeakerEmbedding& speaker, int t_len,
                      const Mat& projection);

constexpr double kLossClip = 1e-7;

/// The full detector: frontends, cross-attention synchronization, speaker
/// fusion, self-attention classifier.
class AsdModel {
 public:
  AsdModel(const ModelConfig& config, uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }

  /// Evaluation-mode scores. `ablate_speaker` replaces the replicated
  /// speaker sequence with hard zeros (the speaker-free pipeline).
  ScoreSequence forward_scores(const FaceFrameSequence& faces,
                               const AlignedMfcc& aligned,
                               const SpeakerEmbedding& speaker,
                               bool train = false,
                               bool ablate_speaker = false,
                               std::vector<Mat>* attention_maps = nullptr);

  /// Training-path loss on a recording tape. Gradients land in the store
  /// after tape.backward + binding scatter (both done here).
  double forward_backward(const FaceFrameSequence& faces,
                          const AlignedMfcc& aligned,
                          const SpeakerEmbedding& speaker,
                          const std::vector<int>& labels,
                          std::mt19937_64& dropout_rng);

  /// Loss without the backward pass (any mode).
  double forward_loss(const FaceFrameSequence& faces,
                      const AlignedMfcc& aligned,
                      const SpeakerEmbedding& speaker,
                      const std::vector<int>& labels, bool train = false);

  int classifier_dim() const { return classifier_dim_; }

 private:
  ag::Var forward_var(ag::Tape& tape, Binding& bind,
                      const FaceFrameSequence& faces,
                      const AlignedMfcc& aligned,
                      const SpeakerEmbedding& speaker, bool train,
                      bool ablate_speaker, std::mt19937_64* dropout_rng,
                      std::vector<ag::Var>* attention_vars);

  ModelConfig cfg_;
  ParamStore store_;
  std::unique_ptr<VisualEncoder> visual_;
  std::unique_ptr<AudioEncoder> audio_;
  std::unique_ptr<CrossAttentionPair> sync_;
  std::unique_ptr<MultiHeadAttention> fuse_from_stream_;   // Fus1/Fus2
  std::unique_ptr<MultiHeadAttention> fuse_from_speaker_;  // Fus1/Fus2
  std::unique_ptr<TransformerEncoderLayer> classifier_;
  int classifier_dim_ = 0;
};

// --- checkpoints -----------------------------------------------------------

/// Versioned binary checkpoint: config JSON string + every named tensor in
/// the store (values only).
void save_checkpoint(const std::string& path, const ParamStore& store,
                     const std::string& config_json);

/// The config JSON stored in a checkpoint (read without loading tensors).
std::string read_checkpoint_config(const std::string& path);

/// Loads tensors into an existing store; name/shape mismatches raise
/// ConfigError.
void load_checkpoint_params(const std::string& path, ParamStore& store);

}  // namespace tsasd

#endif  // TSASD_MODEL_HPP_
