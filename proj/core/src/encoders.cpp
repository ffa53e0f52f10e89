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

#include "tsasd/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "tsasd/error.hpp"

namespace tsasd {

using ag::Var;

namespace {

Mat gaussian(std::mt19937_64& rng, int rows, int cols, double std_dev) {
  Mat m(rows, cols);
  init_gaussian(m, rng, std_dev);
  return m;
}

// Index table mapping (frame, out_y, out_x, tap) to a row of the stacked
// (T*H*W) x C activation; -1 marks out-of-bounds (VALID padding never hits
// it, kept for safety).
std::vector<int> conv2d_index(int t_frames, int h, int w, int k, int stride,
                              int& out_h, int& out_w) {
  out_h = (h - k) / stride + 1;
  out_w = (w - k) / stride + 1;
  if (out_h < 1 || out_w < 1) {
    throw ConfigError("conv2d: kernel larger than input plane");
  }
  std::vector<int> index;
  index.reserve(static_cast<size_t>(t_frames) * out_h * out_w * k * k);
  for (int t = 0; t < t_frames; ++t) {
    int base = t * h * w;
    for (int oy = 0; oy < out_h; ++oy) {
      for (int ox = 0; ox < out_w; ++ox) {
        for (int ky = 0; ky < k; ++ky) {
          for (int kx = 0; kx < k; ++kx) {
            int y = oy * stride + ky;
            int x = ox * stride + kx;
            index.push_back(base + y * w + x);
          }
        }
      }
    }
  }
  return index;
}

}  // namespace

// ---------------------------------------------------------------------------
// BatchNorm

BatchNorm::BatchNorm(ParamStore& store, const std::string& prefix,
                     int channels) {
  gamma_ = &store.create(prefix + ".gamma", Mat::Ones(1, channels));
  beta_ = &store.create(prefix + ".beta", Mat::Zero(1, channels));
  run_mean_ = &store.create(prefix + ".running_mean", Mat::Zero(1, channels),
                            /*trainable=*/false);
  run_var_ = &store.create(prefix + ".running_var", Mat::Ones(1, channels),
                           /*trainable=*/false);
}

Var BatchNorm::forward(ag::Tape& tape, Binding& bind, const Var& x,
                       bool train) {
  Var gamma = bind(*gamma_);
  Var beta = bind(*beta_);
  if (train) {
    Var mu = ag::mean_rows(x);
    Var centered = ag::sub_rowvec(x, mu);
    Var variance = ag::mean_rows(ag::hadamard(centered, centered));
    Var inv_std = ag::rsqrt(variance, eps_);
    Var normalized = ag::mul_rowvec(centered, inv_std);
    // running stats track the batch statistics outside the graph
    run_mean_->value = (1.0 - momentum_) * run_mean_->value +
                       momentum_ * mu.value();
    run_var_->value = (1.0 - momentum_) * run_var_->value +
                      momentum_ * variance.value();
    return ag::add_rowvec(ag::mul_rowvec(normalized, gamma), beta);
  }
  Var mu = tape.leaf(run_mean_->value);
  Var inv_std = ag::rsqrt(tape.leaf(run_var_->value), eps_);
  Var normalized = ag::mul_rowvec(ag::sub_rowvec(x, mu), inv_std);
  return ag::add_rowvec(ag::mul_rowvec(normalized, gamma), beta);
}

// ---------------------------------------------------------------------------
// VisualEncoder

VisualEncoder::VisualEncoder(ParamStore& store, const std::string& prefix,
                             const EncoderConfig& cfg, std::mt19937_64& rng)
    : cfg_(cfg), prefix_(prefix), store_(&store) {
  if (cfg.visual.frontend.empty()) {
    throw ConfigError("visual encoder needs at least one frontend conv");
  }
  int in_c = 1;
  int h = kFaceSize, w = kFaceSize;
  for (size_t i = 0; i < cfg.visual.frontend.size(); ++i) {
    const ConvSpec& spec = cfg.visual.frontend[i];
    int fan_in = spec.kernel * spec.kernel * in_c;
    store.create(prefix + ".front" + std::to_string(i) + ".w",
                 gaussian(rng, fan_in, spec.out_channels,
                          1.0 / std::sqrt(fan_in)));
    store.create(prefix + ".front" + std::to_string(i) + ".b",
                 Mat::Zero(1, spec.out_channels));
    h = (h - spec.kernel) / spec.stride + 1;
    w = (w - spec.kernel) / spec.stride + 1;
    if (h < 1 || w < 1) {
      throw ConfigError("visual frontend shrinks the plane to nothing");
    }
    in_c = spec.out_channels;
  }
  frame_channels_ = in_c;

  int k = cfg.visual.temporal_kernel;
  for (int b = 0; b < cfg.visual.temporal_blocks; ++b) {
    std::string p = prefix + ".temp" + std::to_string(b);
    store.create(p + ".dw.w",
                 gaussian(rng, k, frame_channels_, 1.0 / std::sqrt(k)));
    store.create(p + ".dw.b", Mat::Zero(1, frame_channels_));
    store.create(p + ".pw.w",
                 gaussian(rng, frame_channels_, frame_channels_,
                          1.0 / std::sqrt(frame_channels_)));
    store.create(p + ".pw.b", Mat::Zero(1, frame_channels_));
    temporal_bns_.push_back(
        std::make_unique<BatchNorm>(store, p + ".bn", frame_channels_));
  }
  store.create(prefix + ".out.w",
               gaussian(rng, frame_channels_, cfg.embed_dim,
                        1.0 / std::sqrt(frame_channels_)));
  store.create(prefix + ".out.b", Mat::Zero(1, cfg.embed_dim));
}

Var VisualEncoder::forward(ag::Tape& tape, Binding& bind,
                           const FaceFrameSequence& faces, bool train) {
  int t_frames = faces.length();
  if (t_frames == 0) throw EmptyTrackError("visual_encode: empty track");
  for (const Mat& f : faces.frames) {
    if (f.rows() != kFaceSize || f.cols() != kFaceSize) {
      throw ConfigError("visual_encode: frames must be 112x112");
    }
  }
  // stack frames into (T*H*W) x 1
  Mat stacked(static_cast<Eigen::Index>(t_frames) * kFaceSize * kFaceSize, 1);
  for (int t = 0; t < t_frames; ++t) {
    for (int r = 0; r < kFaceSize; ++r) {
      for (int c = 0; c < kFaceSize; ++c) {
        stacked(static_cast<Eigen::Index>(t) * kFaceSize * kFaceSize +
                    r * kFaceSize + c,
                0) = faces.frames[t](r, c);
      }
    }
  }
  Var act = tape.leaf(std::move(stacked));
  int h = kFaceSize, w = kFaceSize;
  for (size_t i = 0; i < cfg_.visual.frontend.size(); ++i) {
    const ConvSpec& spec = cfg_.visual.frontend[i];
    int out_h = 0, out_w = 0;
    std::vector<int> index =
        conv2d_index(t_frames, h, w, spec.kernel, spec.stride, out_h, out_w);
    Var patches =
        ag::gather_rows(act, std::move(index), spec.kernel * spec.kernel);
    Var w_var = bind(store_->at(prefix_ + ".front" + std::to_string(i) + ".w"));
    Var b_var = bind(store_->at(prefix_ + ".front" + std::to_string(i) + ".b"));
    act = ag::relu(ag::add_rowvec(ag::matmul(patches, w_var), b_var));
    h = out_h;
    w = out_w;
  }
  Var seq = ag::block_mean_rows(act, h * w);  // T x C

  for (int b = 0; b < cfg_.visual.temporal_blocks; ++b) {
    std::string p = prefix_ + ".temp" + std::to_string(b);
    Var dw = ag::depthwise_conv1d_same(seq, bind(store_->at(p + ".dw.w")),
                                       bind(store_->at(p + ".dw.b")));
    Var pw = ag::add_rowvec(ag::matmul(dw, bind(store_->at(p + ".pw.w"))),
                            bind(store_->at(p + ".pw.b")));
    Var bn = temporal_bns_[b]->forward(tape, bind, pw, train);
    seq = ag::relu(ag::add(seq, bn));
  }
  return ag::add_rowvec(
      ag::matmul(seq, bind(store_->at(prefix_ + ".out.w"))),
      bind(store_->at(prefix_ + ".out.b")));
}

EmbeddingSequence VisualEncoder::encode(const FaceFrameSequence& faces,
                                        bool train) {
  ag::Tape tape(false);
  Binding bind(&tape);
  Var out = forward(tape, bind, faces, train);
  return {out.value(), faces.fps};
}

// ---------------------------------------------------------------------------
// AudioEncoder

AudioEncoder::AudioEncoder(ParamStore& store, const std::string& prefix,
                           const EncoderConfig& cfg, std::mt19937_64& rng)
    : cfg_(cfg), prefix_(prefix), store_(&store) {
  int in_dim = cfg.align_group * cfg.mfcc_dim;
  int c = cfg.audio.stem_channels;
  int k = cfg.audio.kernel;
  store.create(prefix + ".stem.w",
               gaussian(rng, k * in_dim, c, 1.0 / std::sqrt(k * in_dim)));
  store.create(prefix + ".stem.b", Mat::Zero(1, c));
  bns_.push_back(std::make_unique<BatchNorm>(store, prefix + ".stem.bn", c));

  int r = std::max(1, c / cfg.audio.se_reduction);
  for (int b = 0; b < cfg.audio.blocks; ++b) {
    std::string p = prefix + ".block" + std::to_string(b);
    store.create(p + ".conv1.w",
                 gaussian(rng, k * c, c, 1.0 / std::sqrt(k * c)));
    store.create(p + ".conv1.b", Mat::Zero(1, c));
    bns_.push_back(std::make_unique<BatchNorm>(store, p + ".bn1", c));
    store.create(p + ".conv2.w",
                 gaussian(rng, k * c, c, 1.0 / std::sqrt(k * c)));
    store.create(p + ".conv2.b", Mat::Zero(1, c));
    bns_.push_back(std::make_unique<BatchNorm>(store, p + ".bn2", c));
    store.create(p + ".se.fc1.w", gaussian(rng, c, r, 1.0 / std::sqrt(c)));
    store.create(p + ".se.fc1.b", Mat::Zero(1, r));
    store.create(p + ".se.fc2.w", gaussian(rng, r, c, 1.0 / std::sqrt(r)));
    store.create(p + ".se.fc2.b", Mat::Zero(1, c));
  }
  store.create(prefix + ".out.w",
               gaussian(rng, c, cfg.embed_dim, 1.0 / std::sqrt(c)));
  store.create(prefix + ".out.b", Mat::Zero(1, cfg.embed_dim));
}

Var AudioEncoder::forward(ag::Tape& tape, Binding& bind,
                          const AlignedMfcc& aligned, bool train) {
  int in_dim = cfg_.align_group * cfg_.mfcc_dim;
  if (aligned.group != cfg_.align_group ||
      aligned.values.cols() != in_dim) {
    throw ConfigError("audio_encode: aligned tensor does not match config");
  }
  int k = cfg_.audio.kernel;
  Var x = tape.leaf(aligned.values);
  size_t bn_idx = 0;
  Var stem = ag::conv1d_same(x, bind(store_->at(prefix_ + ".stem.w")),
                             bind(store_->at(prefix_ + ".stem.b")), k);
  Var seq = ag::relu(bns_[bn_idx++]->forward(tape, bind, stem, train));

  for (int b = 0; b < cfg_.audio.blocks; ++b) {
    std::string p = prefix_ + ".block" + std::to_string(b);
    Var h1 = ag::conv1d_same(seq, bind(store_->at(p + ".conv1.w")),
                             bind(store_->at(p + ".conv1.b")), k);
    Var a1 = ag::relu(bns_[bn_idx++]->forward(tape, bind, h1, train));
    Var h2 = ag::conv1d_same(a1, bind(store_->at(p + ".conv2.w")),
                             bind(store_->at(p + ".conv2.b")), k);
    Var a2 = bns_[bn_idx++]->forward(tape, bind, h2, train);
    // squeeze-excitation gate
    Var squeeze = ag::mean_rows(a2);
    Var e1 = ag::relu(ag::add_rowvec(
        ag::matmul(squeeze, bind(store_->at(p + ".se.fc1.w"))),
        bind(store_->at(p + ".se.fc1.b"))));
    Var gate = ag::sigmoid(ag::add_rowvec(
        ag::matmul(e1, bind(store_->at(p + ".se.fc2.w"))),
        bind(store_->at(p + ".se.fc2.b"))));
    Var scaled = ag::mul_rowvec(a2, gate);
    seq = ag::relu(ag::add(seq, scaled));
  }
  return ag::add_rowvec(
      ag::matmul(seq, bind(store_->at(prefix_ + ".out.w"))),
      bind(store_->at(prefix_ + ".out.b")));
}

EmbeddingSequence AudioEncoder::encode(const AlignedMfcc& aligned,
                                       bool train) {
  ag::Tape tape(false);
  Binding bind(&tape);
  Var out = forward(tape, bind, aligned, train);
  return {out.value(), 25.0};
}

// ---------------------------------------------------------------------------
// Speaker encoders

namespace {

// Log band-energy statistics of a clip: 24-band triangular mel profile,
// loudness-invariant (median-centered, rectified), with a scaled spread
// profile appended.
Eigen::VectorXd band_stats(const AudioClip& clip) {
  constexpr int kBands = 24;
  constexpr int kFrame = 512;
  constexpr int kHop = 256;
  auto hz_to_mel = [](double hz) {
    return 2595.0 * std::log10(1.0 + hz / 700.0);
  };
  auto mel_to_hz = [](double mel) {
    return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
  };
  int n = static_cast<int>(clip.samples.size());
  int n_frames = n >= kFrame ? (n - kFrame) / kHop + 1 : 0;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(kBands);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(kBands);
  if (n_frames == 0) return Eigen::VectorXd::Zero(2 * kBands);

  int n_bins = kFrame / 2 + 1;
  Mat fb = Mat::Zero(kBands, n_bins);
  double mel_hi = hz_to_mel(clip.sample_rate / 2.0);
  std::vector<double> edges(kBands + 2);
  for (int i = 0; i < kBands + 2; ++i) {
    edges[i] = mel_to_hz(mel_hi * i / (kBands + 1));
  }
  for (int m = 0; m < kBands; ++m) {
    for (int b = 0; b < n_bins; ++b) {
      double f = b * clip.sample_rate / kFrame;
      if (f > edges[m] && f < edges[m + 1]) {
        fb(m, b) = (f - edges[m]) / (edges[m + 1] - edges[m]);
      } else if (f >= edges[m + 1] && f < edges[m + 2]) {
        fb(m, b) = (edges[m + 2] - f) / (edges[m + 2] - edges[m + 1]);
      }
    }
  }

  std::vector<std::complex<double>> buf(kFrame);
  Eigen::VectorXd power(n_bins);
  for (int f = 0; f < n_frames; ++f) {
    for (int i = 0; i < kFrame; ++i) {
      buf[i] = {clip.samples(f * kHop + i), 0.0};
    }
    fft_radix2(buf);
    for (int b = 0; b < n_bins; ++b) power(b) = std::norm(buf[b]);
    Eigen::VectorXd logmel = (fb * power).array().max(1e-12).log().matrix();
    mean += logmel;
    sq += logmel.cwiseProduct(logmel);
  }
  mean /= n_frames;
  Eigen::VectorXd variance =
      (sq / n_frames - mean.cwiseProduct(mean)).cwiseMax(0.0);
  Eigen::VectorXd spread = variance.cwiseSqrt();

  auto rectify_center = [](Eigen::VectorXd v) {
    std::vector<double> sorted(v.data(), v.data() + v.size());
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                     sorted.end());
    double med = sorted[sorted.size() / 2];
    return Eigen::VectorXd((v.array() - med).max(0.0));
  };
  Eigen::VectorXd out(2 * kBands);
  out.head(kBands) = rectify_center(mean);
  out.tail(kBands) = 0.25 * rectify_center(spread);
  return out;
}

class ProjectionSpeakerEncoder : public SpeakerEncoderInterface {
 public:
  ProjectionSpeakerEncoder(Mat projection, std::string id)
      : projection_(std::move(projection)), id_(std::move(id)) {}

  int dim() const override { return static_cast<int>(projection_.rows()); }

  Eigen::VectorXd encode(const AudioClip& clip) const override {
    Eigen::VectorXd stats = band_stats(clip);
    if (stats.size() != projection_.cols()) {
      throw ConfigError("speaker encoder: unexpected feature size");
    }
    Eigen::VectorXd y = projection_ * stats;
    double norm = y.norm();
    if (norm > 1e-12) y /= norm;
    return y;
  }

  std::string id() const override { return id_; }

  std::vector<uint8_t> parameter_bytes() const override {
    const auto* begin = reinterpret_cast<const uint8_t*>(projection_.data());
    return std::vector<uint8_t>(begin,
                                begin + projection_.size() * sizeof(double));
  }

 private:
  Mat projection_;
  std::string id_;
};

constexpr uint32_t kProjMagic = 0x4a505354;  // "TSPJ"

Mat read_projection_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("speaker encoder weights not found: " + path);
  uint32_t magic = 0, rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&magic), 4);
  in.read(reinterpret_cast<char*>(&rows), 4);
  in.read(reinterpret_cast<char*>(&cols), 4);
  if (!in || magic != kProjMagic || rows == 0 || cols == 0) {
    throw ConfigError("invalid speaker projection file: " + path);
  }
  Mat m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double)) * m.size());
  if (!in) throw ConfigError("truncated speaker projection file: " + path);
  return m;
}

}  // namespace

void write_speaker_projection(const std::string& path, const Mat& projection) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write projection file: " + path);
  uint32_t magic = kProjMagic;
  uint32_t rows = static_cast<uint32_t>(projection.rows());
  uint32_t cols = static_cast<uint32_t>(projection.cols());
  out.write(reinterpret_cast<const char*>(&magic), 4);
  out.write(reinterpret_cast<const char*>(&rows), 4);
  out.write(reinterpret_cast<const char*>(&cols), 4);
  out.write(reinterpret_cast<const char*>(projection.data()),
            static_cast<std::streamsize>(sizeof(double)) * projection.size());
}

std::shared_ptr<SpeakerEncoderInterface> load_speaker_encoder(
    const std::string& spec, int dim) {
  if (spec == "stub") {
    std::mt19937_64 rng(0x5caff01dULL);
    Mat projection(dim, 48);
    init_gaussian(projection, rng, 1.0 / std::sqrt(48.0));
    return std::make_shared<ProjectionSpeakerEncoder>(std::move(projection),
                                                      "stub");
  }
  if (std::filesystem::exists(spec)) {
    return std::make_shared<ProjectionSpeakerEncoder>(
        read_projection_file(spec), "file:" + spec);
  }
  throw ConfigError("unknown speaker encoder backend: " + spec);
}

SpeakerEmbedding speaker_encode(const std::optional<AudioClip>& enrollment,
                                const SpeakerEncoderInterface& encoder) {
  if (!enrollment.has_value()) {
    return SpeakerEmbedding::null_embedding(encoder.dim());
  }
  if (enrollment->duration() < kMinEnrollSeconds) {
    throw ShortEnrollmentError("enrollment clip shorter than " +
                               std::to_string(kMinEnrollSeconds) + " s");
  }
  return {encoder.encode(*enrollment), false};
}

}  // namespace tsasd
