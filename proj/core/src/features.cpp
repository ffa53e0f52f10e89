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

#include "tsasd/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "tsasd/error.hpp"

namespace tsasd {

namespace {

constexpr double kPi = std::numbers::pi;

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Triangular mel filterbank over FFT bins [0, n_fft/2].
Mat mel_filterbank(int n_mels, int n_fft, double sample_rate) {
  int n_bins = n_fft / 2 + 1;
  Mat fb = Mat::Zero(n_mels, n_bins);
  double mel_lo = hz_to_mel(0.0);
  double mel_hi = hz_to_mel(sample_rate / 2.0);
  std::vector<double> hz(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i) {
    double mel = mel_lo + (mel_hi - mel_lo) * i / (n_mels + 1);
    hz[i] = mel_to_hz(mel);
  }
  for (int m = 0; m < n_mels; ++m) {
    double lo = hz[m], mid = hz[m + 1], hi = hz[m + 2];
    for (int b = 0; b < n_bins; ++b) {
      double f = b * sample_rate / n_fft;
      if (f > lo && f < mid) {
        fb(m, b) = (f - lo) / (mid - lo);
      } else if (f >= mid && f < hi) {
        fb(m, b) = (hi - f) / (hi - mid);
      }
    }
  }
  return fb;
}

}  // namespace

void fft_radix2(std::vector<std::complex<double>>& data) {
  size_t n = data.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw Error("fft_radix2: size must be a power of two");
  }
  // bit-reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = -2.0 * kPi / static_cast<double>(len);
    std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; ++j) {
        std::complex<double> u = data[i + j];
        std::complex<double> v = data[i + j + len / 2] * w;
        data[i + j] = u + v;
        data[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

MfccSequence extract_mfcc(const AudioClip& clip, double hop, double window) {
  MfccParams p;
  p.hop = hop;
  p.window = window;
  return extract_mfcc(clip, p);
}

MfccSequence extract_mfcc(const AudioClip& clip, const MfccParams& p) {
  if (clip.sample_rate <= 0.0) {
    throw InvalidAudioError("extract_mfcc: non-positive sample rate");
  }
  if (!clip.samples.allFinite()) {
    throw InvalidAudioError("extract_mfcc: samples contain NaN/Inf");
  }
  int win_len = static_cast<int>(std::lround(p.window * clip.sample_rate));
  int hop_len = static_cast<int>(std::lround(p.hop * clip.sample_rate));
  if (clip.samples.size() < win_len) {
    throw ShortInputError("extract_mfcc: clip shorter than one window");
  }
  int n_frames =
      static_cast<int>((clip.samples.size() - win_len) / hop_len) + 1;
  int n_fft = next_pow2(win_len);
  int n_bins = n_fft / 2 + 1;

  Eigen::VectorXd hamming(win_len);
  for (int i = 0; i < win_len; ++i) {
    hamming(i) = 0.54 - 0.46 * std::cos(2.0 * kPi * i / (win_len - 1));
  }
  Mat fb = mel_filterbank(p.n_mels, n_fft, clip.sample_rate);

  // Orthonormal DCT-II basis, first n_coeffs rows.
  Mat dct(p.n_coeffs, p.n_mels);
  for (int k = 0; k < p.n_coeffs; ++k) {
    double norm = (k == 0) ? std::sqrt(1.0 / p.n_mels)
                           : std::sqrt(2.0 / p.n_mels);
    for (int m = 0; m < p.n_mels; ++m) {
      dct(k, m) = norm * std::cos(kPi * k * (2.0 * m + 1.0) / (2.0 * p.n_mels));
    }
  }

  Mat out(n_frames, p.n_coeffs);
  std::vector<std::complex<double>> buf(n_fft);
  Eigen::VectorXd power(n_bins);
  for (int f = 0; f < n_frames; ++f) {
    int start = f * hop_len;
    for (int i = 0; i < win_len; ++i) {
      double s = clip.samples(start + i);
      double prev = (start + i > 0) ? clip.samples(start + i - 1) : 0.0;
      buf[i] = {(s - p.preemphasis * prev) * hamming(i), 0.0};
    }
    for (int i = win_len; i < n_fft; ++i) buf[i] = {0.0, 0.0};
    fft_radix2(buf);
    for (int b = 0; b < n_bins; ++b) power(b) = std::norm(buf[b]);
    Eigen::VectorXd mel = fb * power;
    Eigen::VectorXd logmel =
        (mel.array().max(p.log_floor)).log().matrix();
    out.row(f) = (dct * logmel).transpose();
  }
  MfccSequence seq;
  seq.frames = std::move(out);
  seq.hop = p.hop;
  seq.window = p.window;
  return seq;
}

Mat bilinear_resize(const Mat& src, int out_rows, int out_cols) {
  if (src.rows() == out_rows && src.cols() == out_cols) return src;
  Mat dst(out_rows, out_cols);
  double sy = static_cast<double>(src.rows()) / out_rows;
  double sx = static_cast<double>(src.cols()) / out_cols;
  for (int r = 0; r < out_rows; ++r) {
    double fy = (r + 0.5) * sy - 0.5;
    int y0 = static_cast<int>(std::floor(fy));
    double wy = fy - y0;
    int y0c = std::clamp(y0, 0, static_cast<int>(src.rows()) - 1);
    int y1c = std::clamp(y0 + 1, 0, static_cast<int>(src.rows()) - 1);
    for (int c = 0; c < out_cols; ++c) {
      double fx = (c + 0.5) * sx - 0.5;
      int x0 = static_cast<int>(std::floor(fx));
      double wx = fx - x0;
      int x0c = std::clamp(x0, 0, static_cast<int>(src.cols()) - 1);
      int x1c = std::clamp(x0 + 1, 0, static_cast<int>(src.cols()) - 1);
      double top = (1.0 - wx) * src(y0c, x0c) + wx * src(y0c, x1c);
      double bot = (1.0 - wx) * src(y1c, x0c) + wx * src(y1c, x1c);
      dst(r, c) = (1.0 - wy) * top + wy * bot;
    }
  }
  return dst;
}

FaceFrameSequence preprocess_faces(const std::vector<Mat>& raw_frames,
                                   double fps, double input_max) {
  if (raw_frames.empty()) {
    throw EmptyTrackError("preprocess_faces: no frames");
  }
  double white = input_max;
  if (white <= 0.0) {
    white = 1.0;
    for (const Mat& f : raw_frames) {
      if (f.size() > 0 && f.maxCoeff() > 1.0 + 1e-9) {
        white = 255.0;
        break;
      }
    }
  }
  FaceFrameSequence out;
  out.fps = fps;
  out.frames.reserve(raw_frames.size());
  for (const Mat& f : raw_frames) {
    if (f.size() == 0) {
      throw EmptyTrackError("preprocess_faces: empty frame");
    }
    if (f.rows() == kFaceSize && f.cols() == kFaceSize && white == 1.0) {
      out.frames.push_back(f);
      continue;
    }
    Mat scaled = (white == 1.0) ? f : Mat(f / white);
    out.frames.push_back(bilinear_resize(scaled, kFaceSize, kFaceSize));
  }
  return out;
}

namespace {

// Inverse-map affine sample with clamp-to-edge bilinear interpolation.
// Maps output pixel centers through rotation by -theta about the image
// center and a zoom into the crop window.
Mat warp_frame(const Mat& src, double theta, double zoom, double cx_off,
               double cy_off) {
  int n = static_cast<int>(src.rows());
  Mat dst(n, src.cols());
  double c = std::cos(theta), s = std::sin(theta);
  double center = (n - 1) / 2.0;
  for (int r = 0; r < n; ++r) {
    for (int q = 0; q < static_cast<int>(src.cols()); ++q) {
      // output -> crop window -> rotated source
      double x = (q - center) / zoom + cx_off;
      double y = (r - center) / zoom + cy_off;
      double sx = c * x + s * y + center;
      double sy = -s * x + c * y + center;
      int x0 = static_cast<int>(std::floor(sx));
      int y0 = static_cast<int>(std::floor(sy));
      double wx = sx - x0, wy = sy - y0;
      int x0c = std::clamp(x0, 0, static_cast<int>(src.cols()) - 1);
      int x1c = std::clamp(x0 + 1, 0, static_cast<int>(src.cols()) - 1);
      int y0c = std::clamp(y0, 0, n - 1);
      int y1c = std::clamp(y0 + 1, 0, n - 1);
      double top = (1.0 - wx) * src(y0c, x0c) + wx * src(y0c, x1c);
      double bot = (1.0 - wx) * src(y1c, x0c) + wx * src(y1c, x1c);
      dst(r, q) = (1.0 - wy) * top + wy * bot;
    }
  }
  return dst;
}

}  // namespace

FaceFrameSequence augment_visual(const FaceFrameSequence& frames,
                                 uint64_t rng_seed,
                                 const AugmentParams& params) {
  std::mt19937_64 rng(rng_seed);
  bool do_flip = false;
  double theta = 0.0;
  double zoom = 1.0, cx_off = 0.0, cy_off = 0.0;
  if (params.flip) {
    do_flip = std::bernoulli_distribution(0.5)(rng);
  }
  if (params.rotate) {
    std::uniform_real_distribution<double> rot(-params.max_rotate_deg,
                                               params.max_rotate_deg);
    theta = rot(rng) * kPi / 180.0;
  }
  if (params.crop) {
    std::uniform_real_distribution<double> area(params.min_crop_area, 1.0);
    double side = std::sqrt(area(rng));  // retained side fraction
    zoom = 1.0 / side;
    double slack = (1.0 - side) * (kFaceSize - 1) / 2.0;
    std::uniform_real_distribution<double> off(-slack, slack);
    cx_off = off(rng);
    cy_off = off(rng);
  }

  bool warp = params.rotate || params.crop;
  FaceFrameSequence out;
  out.fps = frames.fps;
  out.frames.reserve(frames.frames.size());
  for (const Mat& f : frames.frames) {
    Mat g = f;
    if (do_flip) g = g.rowwise().reverse().eval();
    if (warp) g = warp_frame(g, theta, zoom, cx_off, cy_off);
    out.frames.push_back(std::move(g));
  }
  return out;
}

AlignedMfcc align_audio_to_video(const MfccSequence& mfcc, int video_frames,
                                 double fps) {
  if (video_frames < 1) {
    throw AlignmentError("align_audio_to_video: no video frames");
  }
  if (fps <= 0.0 || mfcc.hop <= 0.0) {
    throw AlignmentError("align_audio_to_video: invalid rates");
  }
  int group = static_cast<int>(std::lround((1.0 / fps) / mfcc.hop));
  if (group < 1) {
    throw AlignmentError("align_audio_to_video: hop exceeds frame period");
  }
  int needed = video_frames * group;
  int have = static_cast<int>(mfcc.frames.rows());
  if (2 * have < needed) {
    throw AlignmentError(
        "align_audio_to_video: audio covers less than half the video");
  }
  int dim = static_cast<int>(mfcc.frames.cols());
  AlignedMfcc out;
  out.group = group;
  out.values = Mat::Zero(video_frames, group * dim);
  for (int t = 0; t < video_frames; ++t) {
    for (int j = 0; j < group; ++j) {
      int src = t * group + j;
      if (src < have) {
        out.values.block(t, j * dim, 1, dim) = mfcc.frames.row(src);
      }
    }
  }
  return out;
}

}  // namespace tsasd
