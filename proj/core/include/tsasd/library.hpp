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

#ifndef TSASD_LIBRARY_HPP_
#define TSASD_LIBRARY_HPP_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tsasd/features.hpp"

namespace tsasd {

/// A face track: cropped frames with aligned per-frame activity labels.
struct FaceTrack {
  std::string track_id;
  std::string video_id;
  FaceFrameSequence frames;
  std::vector<int> labels;
  double fps = 25.0;
};

/// Unit-normalized face-recognition embedding of a track.
struct FaceSignature {
  Eigen::VectorXd vector;
  std::string source_track;
};

/// An active-speech span harvested from a track's audio.
struct SpeechSegment {
  std::string source_track;
  double start = 0.0;  // seconds
  double end = 0.0;
  std::string audio_path;  // set when built from a manifest
  AudioClip clip;          // populated when built in memory
};

/// Maps face frames to an identity embedding. Implementations must be
/// deterministic.
class FaceEmbedderInterface {
 public:
  virtual ~FaceEmbedderInterface() = default;
  virtual int dim() const = 0;
  virtual Eigen::VectorXd embed_frame(const Mat& frame) const = 0;
  virtual std::string id() const = 0;
};

/// Deterministic stand-in for a pretrained face recognizer: pools the upper
/// half of the frame into a coarse grid, removes the mean, and projects
/// through a fixed seeded matrix. The upper half is used so lip-region
/// occlusion does not disturb identity.
std::shared_ptr<FaceEmbedderInterface> make_stub_face_embedder(int dim = 128);

/// Mean of per-frame embeddings, renormalized to unit length.
FaceSignature face_signature(const FaceTrack& track,
                             const FaceEmbedderInterface& embedder);

/// Maximal runs of consecutive active frames mapped to audio spans
/// [first/fps, (last+1)/fps); runs shorter than min_duration are dropped.
std::vector<SpeechSegment> extract_active_segments(
    const FaceTrack& track, const AudioClip& audio,
    double min_duration = 0.2);

struct LibraryCluster {
  FaceSignature representative;             // the founding track's signature
  std::vector<FaceSignature> members;
  std::vector<SpeechSegment> segments;
};

struct FaceSpeakerLibrary {
  std::vector<LibraryCluster> clusters;
  double threshold = 0.7;
  std::string embedder_id;
  int version = 1;

  int total_segments() const {
    int n = 0;
    for (const auto& c : clusters) n += static_cast<int>(c.segments.size());
    return n;
  }
};

/// Greedy clustering: tracks in sorted-id order join the first cluster whose
/// representative similarity is >= threshold (cosine), otherwise found a new
/// cluster. Each cluster accumulates its tracks' active segments.
FaceSpeakerLibrary build_library(const std::vector<FaceTrack>& tracks,
                                 const std::vector<AudioClip>& audios,
                                 const FaceEmbedderInterface& embedder,
                                 double threshold = 0.7,
                                 double min_segment_duration = 0.2);

struct EnrollOptions {
  bool allow_self_enroll = false;
  double min_duration = 0.0;  // skip segments shorter than this
};

/// Picks one enrollable segment for the query track: argmax-similarity
/// cluster at >= threshold, uniform choice among segments not sourced from
/// the query itself. No cluster or no candidates -> nullopt (callers map
/// that to the zero-vector embedding).
std::optional<SpeechSegment> enroll_lookup(const FaceTrack& query,
                                           const FaceSpeakerLibrary& library,
                                           uint64_t rng_seed,
                                           const FaceEmbedderInterface& embedder,
                                           const EnrollOptions& opts = {});

/// Same lookup from a precomputed signature.
std::optional<SpeechSegment> enroll_lookup(const FaceSignature& query_sig,
                                           const FaceSpeakerLibrary& library,
                                           uint64_t rng_seed,
                                           const EnrollOptions& opts = {});

/// Resolves a segment to audio samples: uses the in-memory clip when
/// present, otherwise slices the span out of audio_path.
AudioClip resolve_segment(const SpeechSegment& segment);

// --- persistence (JSON) ----------------------------------------------------

void save_library(const std::string& path, const FaceSpeakerLibrary& library);
FaceSpeakerLibrary load_library(const std::string& path);

}  // namespace tsasd

#endif  // TSASD_LIBRARY_HPP_
