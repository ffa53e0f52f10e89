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

#ifndef TSASD_DATASET_HPP_
#define TSASD_DATASET_HPP_

#include <optional>
#include <string>
#include <vector>

#include "tsasd/encoders.hpp"
#include "tsasd/features.hpp"
#include "tsasd/library.hpp"

namespace tsasd {

struct TrackManifestEntry {
  std::string track_id;
  std::string video_id;
  std::string face_frames_path;  // relative to the manifest root
  std::string audio_path;
  double fps = 25.0;
  std::vector<int> labels;
  std::string split = "train";
};

/// A manifest plus the directory its relative paths resolve against.
struct Manifest {
  std::vector<TrackManifestEntry> entries;
  std::string root;

  std::vector<const TrackManifestEntry*> split_entries(
      const std::string& split) const;
};

/// Line-delimited JSON records. Validates label/frame-count agreement and
/// media resolvability; `data_root` overrides the default root (the
/// manifest's directory).
Manifest load_manifest(const std::string& path,
                       const std::string& data_root = "",
                       bool check_media = true);

void save_manifest(const std::string& path,
                   const std::vector<TrackManifestEntry>& entries);

std::string resolve_path(const std::string& root, const std::string& path);

FaceTrack load_track(const Manifest& manifest,
                     const TrackManifestEntry& entry);
AudioClip load_track_audio(const Manifest& manifest,
                           const TrackManifestEntry& entry);

/// Builds the face-speaker library over a manifest (optionally one split);
/// persisted segments reference absolute audio paths.
FaceSpeakerLibrary build_library_from_manifest(
    const Manifest& manifest, const std::string& split_filter,
    const FaceEmbedderInterface& embedder, double threshold = 0.7,
    double min_segment_duration = 0.2);

// --- synthetic corpus ------------------------------------------------------

struct SyntheticCorpusSpec {
  int n_identities = 8;
  int tracks_per_identity = 6;
  int track_length = 200;  // video frames
  double occlusion_rate = 0.0;
  double noise_snr_db = 20.0;
  uint64_t seed = 1;
  // chance that an inactive stretch carries speech from another identity
  double distractor_prob = 0.65;
  double fps = 25.0;
  double sample_rate = 16000.0;
};

struct TrackStats {
  std::string track_id;
  int n_frames = 0;
  int n_active = 0;
  int n_occluded_active = 0;
  int n_occluded_inactive = 0;
  std::optional<double> lip_audio_corr;  // over unoccluded active frames
};

struct GenerateResult {
  std::string manifest_path;
  std::string stats_path;
  std::vector<TrackStats> stats;
  int n_tracks = 0;
};

/// Procedural corpus: each identity has a fixed spectral voice signature and
/// a fixed face texture; lip opening tracks the audio envelope on active
/// frames; occlusion zeroes the lip half of the frame on an exact fraction
/// of active and inactive frames. Deterministic given the seed.
GenerateResult generate_synthetic(const SyntheticCorpusSpec& spec,
                                  const std::string& out_dir);

// --- batching --------------------------------------------------------------

struct TrainingExample {
  std::string track_id;
  FaceFrameSequence faces;
  AlignedMfcc aligned;
  std::vector<int> labels;
  SpeakerEmbedding speaker;
};

/// Deterministic shuffle + chunk of [0, n) into batches.
std::vector<std::vector<size_t>> plan_batches(size_t n, int batch_size,
                                              uint64_t seed);

struct ExampleOptions {
  bool augment = false;
  uint64_t augment_seed = 0;
  uint64_t enroll_seed = 0;
  bool force_null_enroll = false;
  EnrollOptions enroll;
  AugmentParams augment_params;
};

/// Loads one track into model-ready tensors, drawing an enrollment through
/// the library when one is given.
TrainingExample load_example(const Manifest& manifest,
                             const TrackManifestEntry& entry,
                             const FaceSpeakerLibrary* library,
                             const SpeakerEncoderInterface& speaker_encoder,
                             const FaceEmbedderInterface& face_embedder,
                             const ExampleOptions& opts);

/// Iterator over shuffled batches of training examples; order is a pure
/// function of the seed.
class BatchStream {
 public:
  BatchStream(const Manifest& manifest,
              std::vector<const TrackManifestEntry*> entries, int batch_size,
              uint64_t seed, const FaceSpeakerLibrary* library,
              std::shared_ptr<SpeakerEncoderInterface> speaker_encoder,
              std::shared_ptr<FaceEmbedderInterface> face_embedder,
              ExampleOptions opts);

  std::optional<std::vector<TrainingExample>> next();
  size_t n_batches() const { return plan_.size(); }
  void reset();

 private:
  const Manifest* manifest_;
  std::vector<const TrackManifestEntry*> entries_;
  std::vector<std::vector<size_t>> plan_;
  size_t cursor_ = 0;
  const FaceSpeakerLibrary* library_;
  std::shared_ptr<SpeakerEncoderInterface> speaker_encoder_;
  std::shared_ptr<FaceEmbedderInterface> face_embedder_;
  ExampleOptions opts_;
};

// --- annotation adapters ---------------------------------------------------

struct ConvertOptions {
  std::string frames_template = "frames/{video}/{track}.frames";
  std::string audio_template = "audio/{video}.wav";
  double fps = 25.0;
  std::string split = "val";
};

/// AVA-ActiveSpeaker CSV rows
/// (video_id,frame_timestamp,x1,y1,x2,y2,label,entity_id[,...]) grouped by
/// entity into per-frame label sequences. SPEAKING_AUDIBLE maps to 1.
int convert_ava_csv(const std::string& csv_path,
                    const std::string& out_manifest,
                    const ConvertOptions& opts);

/// Frame-level ASW export rows (video_id,track_id,frame_timestamp,label)
/// with numeric 0/1 labels.
int convert_asw_csv(const std::string& csv_path,
                    const std::string& out_manifest,
                    const ConvertOptions& opts);

}  // namespace tsasd

#endif  // TSASD_DATASET_HPP_
