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

#ifndef TSASD_ENCODERS_HPP_
#define TSASD_ENCODERS_HPP_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tsasd/autograd.hpp"
#include "tsasd/features.hpp"

namespace tsasd {

/// T x D sequence of embeddings at a fixed frame rate.
struct EmbeddingSequence {
  Mat values;
  double frame_rate = 25.0;
};

/// Fixed-dimension speaker embedding; is_null <=> all-zero no-enrollment
/// sentinel.
struct SpeakerEmbedding {
  Eigen::VectorXd values;
  bool is_null = false;

  static SpeakerEmbedding null_embedding(int dim) {
    return {Eigen::VectorXd::Zero(dim), true};
  }
};

struct ConvSpec {
  int out_channels = 8;
  int kernel = 3;
  int stride = 2;
};

struct VisualEncoderConfig {
  // Per-frame spatial stack (VALID padding), followed by global average
  // pooling to one vector per frame.
  std::vector<ConvSpec> frontend = {{8, 5, 4}, {16, 3, 2}, {32, 3, 2}};
  int temporal_blocks = 5;
  int temporal_kernel = 3;
};

struct AudioEncoderConfig {
  int stem_channels = 64;
  int blocks = 2;
  int kernel = 3;
  int se_reduction = 4;
};

struct EncoderConfig {
  int embed_dim = 128;
  VisualEncoderConfig visual;
  AudioEncoderConfig audio;
  int speaker_dim = 192;
  bool normalize_speaker = false;
  int mfcc_dim = 13;
  int align_group = 4;  // audio frames per video frame
};

/// Batch normalization over the time axis (rows), one statistic per channel.
/// Running statistics live in the ParamStore as non-trainable tensors.
class BatchNorm {
 public:
  BatchNorm(ParamStore& store, const std::string& prefix, int channels);
  ag::Var forward(ag::Tape& tape, Binding& bind, const ag::Var& x,
                  bool train);

 private:
  Param* gamma_;
  Param* beta_;
  Param* run_mean_;
  Param* run_var_;
  double momentum_ = 0.1;
  double eps_ = 1e-5;
};

/// Spatial conv stack per frame + global average pooling, then residual
/// depthwise-separable temporal conv blocks, then a 1-D conv to embed_dim.
class VisualEncoder {
 public:
  VisualEncoder(ParamStore& store, const std::string& prefix,
                const EncoderConfig& cfg, std::mt19937_64& rng);

  ag::Var forward(ag::Tape& tape, Binding& bind,
                  const FaceFrameSequence& faces, bool train);
  /// Standalone eval-mode pass.
  EmbeddingSequence encode(const FaceFrameSequence& faces, bool train = false);

 private:
  EncoderConfig cfg_;
  std::string prefix_;
  ParamStore* store_;
  std::vector<std::unique_ptr<BatchNorm>> temporal_bns_;
  int frame_channels_ = 0;  // channels after the spatial stack
};

/// 1-D SE-ResNet over the aligned MFCC tensor; output matches the video
/// frame count.
class AudioEncoder {
 public:
  AudioEncoder(ParamStore& store, const std::string& prefix,
               const EncoderConfig& cfg, std::mt19937_64& rng);

  ag::Var forward(ag::Tape& tape, Binding& bind, const AlignedMfcc& aligned,
                  bool train);
  EmbeddingSequence encode(const AlignedMfcc& aligned, bool train = false);

 private:
  EncoderConfig cfg_;
  std::string prefix_;
  ParamStore* store_;
  std::vector<std::unique_ptr<BatchNorm>> bns_;
};

/// Frozen speaker encoder; implementations must be deterministic and
/// immutable after load.
class SpeakerEncoderInterface {
 public:
  virtual ~SpeakerEncoderInterface() = default;
  virtual int dim() const = 0;
  virtual Eigen::VectorXd encode(const AudioClip& clip) const = 0;
  virtual std::string id() const = 0;
  /// Raw parameter bytes, for freeze auditing.
  virtual std::vector<uint8_t> parameter_bytes() const = 0;
};

/// Backends: "stub" (hash-seeded projection of the clip's band-energy
/// statistics) or a path to a projection file written by
/// write_speaker_projection.
std::shared_ptr<SpeakerEncoderInterface> load_speaker_encoder(
    const std::string& spec, int dim = 192);

void write_speaker_projection(const std::string& path, const Mat& projection);

constexpr double kMinEnrollSeconds = 0.5;

/// Null enrollment maps to the zero-vector embedding with is_null set;
/// clips shorter than kMinEnrollSeconds raise ShortEnrollmentError.
SpeakerEmbedding speaker_encode(const std::optional<AudioClip>& enrollment,
                                const SpeakerEncoderInterface& encoder);

}  // namespace tsasd

#endif  // TSASD_ENCODERS_HPP_
