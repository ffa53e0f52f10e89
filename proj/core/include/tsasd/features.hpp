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

#ifndef TSASD_FEATURES_HPP_
#define TSASD_FEATURES_HPP_

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

namespace tsasd {

using Mat = Eigen::MatrixXd;

/// Mono PCM audio in [-1, 1].
struct AudioClip {
  Eigen::VectorXd samples;
  double sample_rate = 16000.0;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// 13-coefficient MFCC frames, one per analysis hop.
struct MfccSequence {
  Mat frames;            // T_a x 13
  double hop = 0.010;    // seconds
  double window = 0.025; // seconds
};

/// Grayscale 112x112 face crops in [0, 1] at a fixed frame rate.
struct FaceFrameSequence {
  std::vector<Mat> frames;  // each 112x112
  double fps = 25.0;

  int length() const { return static_cast<int>(frames.size()); }
};

/// MFCC frames regrouped to the video frame rate: row t holds the k
/// consecutive audio frames for video frame t, sub-frame-major
/// (column j*13 + c is coefficient c of sub-frame j).
struct AlignedMfcc {
  Mat values;  // T_v x (k*13)
  int group = 4;
};

struct MfccParams {
  double hop = 0.010;
  double window = 0.025;
  int n_mels = 40;
  int n_coeffs = 13;
  double preemphasis = 0.97;
  double log_floor = 1e-10;
};

/// MFCC extraction: pre-emphasis, Hamming window, power spectrum,
/// mel filterbank, log, orthonormal DCT-II, first 13 coefficients kept.
MfccSequence extract_mfcc(const AudioClip& clip, double hop = 0.010,
                          double window = 0.025);
MfccSequence extract_mfcc(const AudioClip& clip, const MfccParams& params);

constexpr int kFaceSize = 112;

/// Grayscale conversion handled upstream; resizes each frame to 112x112
/// with bilinear interpolation and scales intensities to [0, 1].
/// `input_max` is the white level of the input (0 = infer: 255 when any
/// pixel exceeds 1, else already normalized).
FaceFrameSequence preprocess_faces(const std::vector<Mat>& raw_frames,
                                   double fps, double input_max = 0.0);

struct AugmentParams {
  bool flip = true;
  bool rotate = true;
  bool crop = true;
  double max_rotate_deg = 15.0;
  double min_crop_area = 0.8;
};

/// Training-time visual augmentation. One transform is drawn per call and
/// applied to every frame (temporal coherence); the same seed always yields
/// the same output. All transforms disabled is the identity.
FaceFrameSequence augment_visual(const FaceFrameSequence& frames,
                                 uint64_t rng_seed,
                                 const AugmentParams& params = {});

/// Groups round((1/fps)/hop) MFCC frames per video frame; tail shortfall is
/// zero-padded, surplus audio frames are dropped. Throws AlignmentError when
/// the audio covers less than half the video duration.
AlignedMfcc align_audio_to_video(const MfccSequence& mfcc, int video_frames,
                                 double fps = 25.0);

/// Bilinear resize with half-pixel centers, clamp-to-edge sampling.
Mat bilinear_resize(const Mat& src, int out_rows, int out_cols);

/// Iterative radix-2 FFT used by the MFCC path; n must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& data);

}  // namespace tsasd

#endif  // TSASD_FEATURES_HPP_
