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

#include "tsasd/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "tsasd/error.hpp"

namespace tsasd {

using ag::Var;

FusionMode parse_fusion_mode(const std::string& name) {
  if (name == "fus1") return FusionMode::kFus1;
  if (name == "fus2") return FusionMode::kFus2;
  if (name == "concat") return FusionMode::kConcat;
  throw ConfigError("unknown fusion mode: " + name);
}

std::string fusion_mode_name(FusionMode mode) {
  switch (mode) {
    case FusionMode::kFus1:
      return "fus1";
    case FusionMode::kFus2:
      return "fus2";
    case FusionMode::kConcat:
      return "concat";
  }
  throw ConfigError("unknown fusion mode value");
}

double asd_loss(const ScoreSequence& pred, const std::vector<int>& labels) {
  if (pred.probs.size() != labels.size()) {
    throw AlignmentError("asd_loss: prediction/label length mismatch");
  }
  ag::Tape tape(false);
  Mat col(static_cast<Eigen::Index>(pred.probs.size()), 1);
  for (size_t i = 0; i < pred.probs.size(); ++i) {
    col(static_cast<Eigen::Index>(i), 0) = pred.probs[i];
  }
  Var probs = tape.leaf(std::move(col));
  return ag::bce_mean(probs, labels, kLossClip).value()(0, 0);
}

Mat replicate_speaker(const SpeakerEmbedding& speaker, int t_len,
                      const Mat& projection) {
  if (t_len < 1) throw Error("replicate_speaker: T must be >= 1");
  if (speaker.values.size() != projection.rows()) {
    throw ConfigError("replicate_speaker: projection shape mismatch");
  }
  if (speaker.is_null) {
    return Mat::Zero(t_len, projection.cols());
  }
  Eigen::RowVectorXd row = speaker.values.transpose() * projection;
  Mat out(t_len, projection.cols());
  out.rowwise() = row;
  return out;
}

AsdModel::AsdModel(const ModelConfig& config, uint64_t seed) : cfg_(config) {
  const int d = cfg_.encoder.embed_dim;
  if (cfg_.attention.heads < 1 || d % cfg_.attention.heads != 0) {
    throw ConfigError("embed dim must be divisible by attention heads");
  }
  switch (cfg_.mode) {
    case FusionMode::kFus1:
      classifier_dim_ = 3 * d;  // [stream-attended | speaker-attended | F_v->a]
      break;
    case FusionMode::kFus2:
      classifier_dim_ = 2 * d;  // two fusion attention outputs
      break;
    case FusionMode::kConcat:
      classifier_dim_ = 3 * d;  // [F_av | replicated speaker]
      break;
  }
  if (classifier_dim_ % cfg_.attention.heads != 0) {
    throw ConfigError("classifier dim must be divisible by attention heads");
  }

  std::mt19937_64 rng(seed);
  visual_ = std::make_unique<VisualEncoder>(store_, "visual", cfg_.encoder,
                                            rng);
  audio_ = std::make_unique<AudioEncoder>(store_, "audio", cfg_.encoder, rng);
  sync_ = std::make_unique<CrossAttentionPair>(store_, "sync", d,
                                               cfg_.attention.heads, rng);
  // speaker projection has no bias so the null embedding stays exactly zero
  Mat spk_proj(cfg_.encoder.speaker_dim, d);
  init_gaussian(spk_proj, rng, 1.0 / std::sqrt(cfg_.encoder.speaker_dim));
  store_.create("spk.proj", std::move(spk_proj));

  if (cfg_.mode == FusionMode::kFus1) {
    fuse_from_stream_ = std::make_unique<MultiHeadAttention>(
        store_, "fuse.stream", d, /*q_in=*/d, /*kv_in=*/d,
        cfg_.attention.heads, rng);
    fuse_from_speaker_ = std::make_unique<MultiHeadAttention>(
        store_, "fuse.speaker", d, /*q_in=*/d, /*kv_in=*/d,
        cfg_.attention.heads, rng);
  } else if (cfg_.mode == FusionMode::kFus2) {
    fuse_from_stream_ = std::make_unique<MultiHeadAttention>(
        store_, "fuse.stream", d, /*q_in=*/2 * d, /*kv_in=*/d,
        cfg_.attention.heads, rng);
    fuse_from_speaker_ = std::make_unique<MultiHeadAttention>(
        store_, "fuse.speaker", d, /*q_in=*/d, /*kv_in=*/2 * d,
        cfg_.attention.heads, rng);
  }

  classifier_ = std::make_unique<TransformerEncoderLayer>(
      store_, "clf", classifier_dim_, cfg_.attention.heads,
      cfg_.ffn_mult * classifier_dim_, rng);
  // zero-initialized head: untrained output is exactly chance level
  store_.create("head.w", Mat::Zero(classifier_dim_, 2));
  store_.create("head.b", Mat::Zero(1, 2));
}

Var AsdModel::forward_var(ag::Tape& tape, Binding& bind,
                          const FaceFrameSequence& faces,
                          const AlignedMfcc& aligned,
                          const SpeakerEmbedding& speaker, bool train,
                          bool ablate_speaker, std::mt19937_64* dropout_rng,
                          std::vector<Var>* attention_vars) {
  const int d = cfg_.encoder.embed_dim;
  const int t_len = faces.length();
  if (aligned.values.rows() != t_len) {
    throw AlignmentError("forward: audio/video frame count mismatch");
  }
  if (speaker.values.size() != cfg_.encoder.speaker_dim) {
    throw ConfigError("forward: speaker embedding dim mismatch");
  }
  double p = cfg_.attention.dropout;

  Var f_v = visual_->forward(tape, bind, faces, train);
  Var f_a = audio_->forward(tape, bind, aligned, train);
  CrossAttentionPair::Result sync =
      sync_->forward(tape, bind, f_a, f_v, p, dropout_rng, train);
  if (attention_vars != nullptr) {
    attention_vars->insert(attention_vars->end(), sync.weights.begin(),
                           sync.weights.end());
  }
  Var f_av = ag::concat_cols({sync.audio_to_visual, sync.visual_to_audio});

  // Replicated speaker row, projected to the attention dim. The projection
  // has no bias, so the null embedding maps to exact zeros; is_null takes
  // the same code path as ablation to keep that reduction bit-exact.
  Var s_hat;
  if (ablate_speaker || speaker.is_null) {
    s_hat = tape.leaf(Mat::Zero(t_len, d));
  } else {
    Eigen::VectorXd spk = speaker.values;
    if (cfg_.encoder.normalize_speaker) {
      double n = spk.norm();
      if (n > 1e-12) spk /= n;
    }
    Var spk_row = tape.leaf(Mat(spk.transpose()));
    Var spk_proj = ag::matmul(spk_row, bind(store_.at("spk.proj")));
    s_hat = ag::replicate_row(spk_proj, t_len);
  }

  Var f_avs;
  switch (cfg_.mode) {
    case FusionMode::kFus1: {
      AttentionOut from_stream = fuse_from_stream_->forward(
          tape, bind, /*query=*/sync.audio_to_visual, /*kv=*/s_hat, p,
          dropout_rng, train);
      AttentionOut from_speaker = fuse_from_speaker_->forward(
          tape, bind, /*query=*/s_hat, /*kv=*/sync.audio_to_visual, p,
          dropout_rng, train);
      if (attention_vars != nullptr) {
        attention_vars->insert(attention_vars->end(),
                               from_stream.weights.begin(),
                               from_stream.weights.end());
        attention_vars->insert(attention_vars->end(),
                               from_speaker.weights.begin(),
                               from_speaker.weights.end());
      }
      f_avs = ag::concat_cols(
          {from_stream.out, from_speaker.out, sync.visual_to_audio});
      break;
    }
    case FusionMode::kFus2: {
      AttentionOut from_stream = fuse_from_stream_->forward(
          tape, bind, /*query=*/f_av, /*kv=*/s_hat, p, dropout_rng, train);
      AttentionOut from_speaker = fuse_from_speaker_->forward(
          tape, bind, /*query=*/s_hat, /*kv=*/f_av, p, dropout_rng, train);
      if (attention_vars != nullptr) {
        attention_vars->insert(attention_vars->end(),
                               from_stream.weights.begin(),
                               from_stream.weights.end());
        attention_vars->insert(attention_vars->end(),
                               from_speaker.weights.begin(),
                               from_speaker.weights.end());
      }
      f_avs = ag::concat_cols({from_stream.out, from_speaker.out});
      break;
    }
    case FusionMode::kConcat:
      f_avs = ag::concat_cols({f_av, s_hat});
      break;
  }

  if (cfg_.attention.positional_encoding) {
    Var pe = tape.leaf(sinusoidal_positions(t_len, classifier_dim_));
    f_avs = ag::add(f_avs, pe);
  }
  Var encoded = classifier_->forward(tape, bind, f_avs, p, dropout_rng, train,
                                     attention_vars);
  Var logits = ag::add_rowvec(ag::matmul(encoded, bind(store_.at("head.w"))),
                              bind(store_.at("head.b")));
  Var probs = ag::softmax_rows(logits);
  if (attention_vars != nullptr) {
    attention_vars->push_back(probs);  // softmax rows also sum to one
  }
  return ag::slice_cols(probs, 1, 1);
}

ScoreSequence AsdModel::forward_scores(const FaceFrameSequence& faces,
                                       const AlignedMfcc& aligned,
                                       const SpeakerEmbedding& speaker,
                                       bool train, bool ablate_speaker,
                                       std::vector<Mat>* attention_maps) {
  ag::Tape tape(false);
  Binding bind(&tape);
  std::vector<Var> attn;
  Var scores =
      forward_var(tape, bind, faces, aligned, speaker, train, ablate_speaker,
                  nullptr, attention_maps != nullptr ? &attn : nullptr);
  if (attention_maps != nullptr) {
    for (const Var& w : attn) attention_maps->push_back(w.value());
  }
  ScoreSequence out;
  out.probs.resize(scores.rows());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    out.probs[static_cast<size_t>(i)] = scores.value()(i, 0);
  }
  return out;
}

double AsdModel::forward_backward(const FaceFrameSequence& faces,
                                  const AlignedMfcc& aligned,
                                  const SpeakerEmbedding& speaker,
                                  const std::vector<int>& labels,
                                  std::mt19937_64& dropout_rng) {
  if (static_cast<int>(labels.size()) != faces.length()) {
    throw AlignmentError("forward_backward: label/frame count mismatch");
  }
  ag::Tape tape(true);
  Binding bind(&tape);
  Var scores = forward_var(tape, bind, faces, aligned, speaker, /*train=*/true,
                           /*ablate_speaker=*/false, &dropout_rng, nullptr);
  Var loss = ag::bce_mean(scores, labels, cfg_.loss_clip);
  tape.backward(loss);
  bind.scatter_grads();
  return loss.value()(0, 0);
}

double AsdModel::forward_loss(const FaceFrameSequence& faces,
                              const AlignedMfcc& aligned,
                              const SpeakerEmbedding& speaker,
                              const std::vector<int>& labels, bool train) {
  ScoreSequence scores = forward_scores(faces, aligned, speaker, train);
  return asd_loss(scores, labels);
}

// ---------------------------------------------------------------------------
// checkpoints

namespace {

constexpr uint32_t kCheckpointMagic = 0x4b435354;  // "TSCK"
constexpr uint32_t kCheckpointVersion = 1;

template <typename T>
void write_le(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& store,
                     const std::string& config_json) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  write_le<uint32_t>(out, kCheckpointMagic);
  write_le<uint32_t>(out, kCheckpointVersion);
  write_le<uint64_t>(out, config_json.size());
  out.write(config_json.data(),
            static_cast<std::streamsize>(config_json.size()));
  auto params = store.all();
  write_le<uint32_t>(out, static_cast<uint32_t>(params.size()));
  for (const Param* p : params) {
    write_le<uint32_t>(out, static_cast<uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    write_le<uint32_t>(out, static_cast<uint32_t>(p->value.rows()));
    write_le<uint32_t>(out, static_cast<uint32_t>(p->value.cols()));
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(sizeof(double)) * p->value.size());
  }
  if (!out) throw IoError("short write to checkpoint: " + path);
}

std::string read_checkpoint_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  uint32_t magic = read_le<uint32_t>(in);
  uint32_t version = read_le<uint32_t>(in);
  if (!in || magic != kCheckpointMagic) {
    throw ConfigError("not a checkpoint file: " + path);
  }
  if (version != kCheckpointVersion) {
    throw ConfigError("unsupported checkpoint version in " + path);
  }
  uint64_t len = read_le<uint64_t>(in);
  std::string json(len, '\0');
  in.read(json.data(), static_cast<std::streamsize>(len));
  if (!in) throw ConfigError("truncated checkpoint: " + path);
  return json;
}

void load_checkpoint_params(const std::string& path, ParamStore& store) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  uint32_t magic = read_le<uint32_t>(in);
  uint32_t version = read_le<uint32_t>(in);
  if (!in || magic != kCheckpointMagic || version != kCheckpointVersion) {
    throw ConfigError("not a loadable checkpoint: " + path);
  }
  uint64_t json_len = read_le<uint64_t>(in);
  in.seekg(static_cast<std::streamoff>(json_len), std::ios::cur);
  uint32_t n = read_le<uint32_t>(in);
  size_t loaded = 0;
  for (uint32_t i = 0; i < n; ++i) {
    uint32_t name_len = read_le<uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    uint32_t rows = read_le<uint32_t>(in);
    uint32_t cols = read_le<uint32_t>(in);
    Param* p = store.find(name);
    if (p == nullptr) {
      throw ConfigError("checkpoint tensor " + name +
                        " does not exist in this model");
    }
    if (p->value.rows() != static_cast<Eigen::Index>(rows) ||
        p->value.cols() != static_cast<Eigen::Index>(cols)) {
      throw ConfigError("checkpoint tensor " + name + " has shape " +
                        std::to_string(rows) + "x" + std::to_string(cols) +
                        ", model expects " + std::to_string(p->value.rows()) +
                        "x" + std::to_string(p->value.cols()));
    }
    in.read(reinterpret_cast<char*>(p->value.data()),
            static_cast<std::streamsize>(sizeof(double)) * p->value.size());
    ++loaded;
  }
  if (!in) throw ConfigError("truncated checkpoint: " + path);
  if (loaded != store.all().size()) {
    throw ConfigError("checkpoint does not cover every model tensor");
  }
}

}  // namespace tsasd
