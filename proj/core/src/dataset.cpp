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

#include "tsasd/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tsasd/error.hpp"
#include "tsasd/io.hpp"

namespace fs = std::filesystem;

namespace tsasd {

using json = nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::vector<const TrackManifestEntry*> Manifest::split_entries(
    const std::string& split) const {
  std::vector<const TrackManifestEntry*> out;
  for (const TrackManifestEntry& e : entries) {
    if (split == "all" || e.split == split) out.push_back(&e);
  }
  return out;
}

std::string resolve_path(const std::string& root, const std::string& path) {
  fs::path p(path);
  if (p.is_absolute() || root.empty()) return path;
  return (fs::path(root) / p).string();
}

Manifest load_manifest(const std::string& path, const std::string& data_root,
                       bool check_media) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);
  Manifest manifest;
  manifest.root =
      data_root.empty() ? fs::path(path).parent_path().string() : data_root;

  std::set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": " +
                       e.what());
    }
    TrackManifestEntry entry;
    try {
      entry.track_id = record.at("track_id").get<std::string>();
      entry.video_id = record.at("video_id").get<std::string>();
      entry.face_frames_path = record.at("frames").get<std::string>();
      entry.audio_path = record.at("audio").get<std::string>();
      entry.fps = record.at("fps").get<double>();
      entry.labels = record.at("labels").get<std::vector<int>>();
      entry.split = record.at("split").get<std::string>();
    } catch (const json::exception& e) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": " +
                       e.what());
    }
    if (entry.split != "train" && entry.split != "val" &&
        entry.split != "test") {
      throw ParseError("manifest line " + std::to_string(line_no) +
                       ": unknown split '" + entry.split + "'");
    }
    for (int l : entry.labels) {
      if (l != 0 && l != 1) {
        throw ParseError("manifest line " + std::to_string(line_no) +
                         ": non-binary label in track " + entry.track_id);
      }
    }
    if (!seen_ids.insert(entry.track_id).second) {
      throw ParseError("manifest line " + std::to_string(line_no) +
                       ": duplicate track id " + entry.track_id);
    }
    if (check_media) {
      std::string frames = resolve_path(manifest.root, entry.face_frames_path);
      std::string audio = resolve_path(manifest.root, entry.audio_path);
      if (!fs::exists(frames)) {
        throw MissingAssetError("track " + entry.track_id +
                                ": missing frames file " + frames);
      }
      if (!fs::exists(audio)) {
        throw MissingAssetError("track " + entry.track_id +
                                ": missing audio file " + audio);
      }
      int n_frames = fs::is_directory(frames)
                         ? -1  // image-sequence directories checked on load
                         : frames_file_length(frames);
      if (n_frames >= 0 &&
          n_frames != static_cast<int>(entry.labels.size())) {
        throw ParseError("track " + entry.track_id + ": " +
                         std::to_string(entry.labels.size()) + " labels but " +
                         std::to_string(n_frames) + " frames");
      }
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

void save_manifest(const std::string& path,
                   const std::vector<TrackManifestEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path);
  for (const TrackManifestEntry& e : entries) {
    json record;
    record["track_id"] = e.track_id;
    record["video_id"] = e.video_id;
    record["frames"] = e.face_frames_path;
    record["audio"] = e.audio_path;
    record["fps"] = e.fps;
    record["labels"] = e.labels;
    record["split"] = e.split;
    out << record.dump() << "\n";
  }
  if (!out) throw IoError("short write to manifest: " + path);
}

FaceTrack load_track(const Manifest& manifest,
                     const TrackManifestEntry& entry) {
  FaceTrack track;
  track.track_id = entry.track_id;
  track.video_id = entry.video_id;
  track.fps = entry.fps;
  track.labels = entry.labels;
  track.frames = load_face_track(
      resolve_path(manifest.root, entry.face_frames_path), entry.fps);
  if (track.frames.length() != static_cast<int>(entry.labels.size())) {
    throw ParseError("track " + entry.track_id +
                     ": label/frame count mismatch at load");
  }
  return track;
}

AudioClip load_track_audio(const Manifest& manifest,
                           const TrackManifestEntry& entry) {
  return read_wav(resolve_path(manifest.root, entry.audio_path));
}

FaceSpeakerLibrary build_library_from_manifest(
    const Manifest& manifest, const std::string& split_filter,
    const FaceEmbedderInterface& embedder, double threshold,
    double min_segment_duration) {
  std::vector<FaceTrack> tracks;
  std::vector<AudioClip> audios;
  std::map<std::string, std::string> audio_paths;
  for (const TrackManifestEntry* e : manifest.split_entries(split_filter)) {
    tracks.push_back(load_track(manifest, *e));
    audios.push_back(load_track_audio(manifest, *e));
    audio_paths[e->track_id] =
        fs::absolute(resolve_path(manifest.root, e->audio_path)).string();
  }
  FaceSpeakerLibrary lib =
      build_library(tracks, audios, embedder, threshold, min_segment_duration);
  for (LibraryCluster& c : lib.clusters) {
    for (SpeechSegment& s : c.segments) {
      s.audio_path = audio_paths.at(s.source_track);
    }
  }
  return lib;
}

// ---------------------------------------------------------------------------
// synthetic corpus

namespace {

struct IdentityProfile {
  double freq1 = 0.0;
  double freq2 = 0.0;
  Mat texture;  // 56 x 112 upper-half pattern
};

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}
double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

IdentityProfile make_identity(int index, double sample_rate,
                              std::mt19937_64& rng) {
  IdentityProfile p;
  // two tones at distinct band centers of a 24-band mel split; identities
  // beyond ten reuse bands with a small detune
  double mel_hi = hz_to_mel(sample_rate / 2.0);
  int slot = index % 10;
  double detune = 1.0 + 0.013 * (index / 10);
  p.freq1 = mel_to_hz(mel_hi * (3 + 2 * slot + 1) / 25.0) * detune;
  p.freq2 = mel_to_hz(mel_hi * (4 + 2 * slot + 1) / 25.0) * detune;

  std::uniform_real_distribution<double> level(0.2, 0.8);
  Mat grid(14, 28);
  for (int r = 0; r < 14; ++r) {
    for (int c = 0; c < 28; ++c) grid(r, c) = level(rng);
  }
  p.texture.resize(56, 112);
  for (int r = 0; r < 56; ++r) {
    for (int c = 0; c < 112; ++c) p.texture(r, c) = grid(r / 4, c / 4);
  }
  return p;
}

// Exact-count mask selection in temporally contiguous blocks.
std::vector<char> pick_block_mask(const std::vector<int>& indices, int quota,
                                  int total_frames, std::mt19937_64& rng) {
  std::vector<char> mask(total_frames, 0);
  if (quota <= 0 || indices.empty()) return mask;
  constexpr int kBlock = 12;
  std::vector<std::vector<int>> blocks;
  for (size_t i = 0; i < indices.size(); i += kBlock) {
    std::vector<int> block;
    for (size_t j = i; j < std::min(indices.size(), i + kBlock); ++j) {
      block.push_back(indices[j]);
    }
    blocks.push_back(std::move(block));
  }
  std::shuffle(blocks.begin(), blocks.end(), rng);
  int placed = 0;
  for (const auto& block : blocks) {
    for (int idx : block) {
      if (placed >= quota) return mask;
      mask[idx] = 1;
      ++placed;
    }
  }
  return mask;
}

struct TrackPlan {
  std::vector<int> labels;     // 1 = target speaking
  std::vector<int> voice;      // identity speaking this frame, -1 = silence
  std::vector<double> envelope;  // syllabic envelope of the active voice
  std::vector<int> run_id;     // run index per frame
};

TrackPlan plan_track(int n_frames, int identity, int n_identities,
                     double distractor_prob, double fps,
                     std::mt19937_64& rng) {
  TrackPlan plan;
  plan.labels.assign(n_frames, 0);
  plan.voice.assign(n_frames, -1);
  plan.envelope.assign(n_frames, 0.0);
  plan.run_id.assign(n_frames, 0);

  std::uniform_real_distribution<double> p_dist(0.1, 0.9);
  double p_active = p_dist(rng);
  std::uniform_real_distribution<double> len_base(14.0, 40.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> syllable(2.5, 4.5);
  std::uniform_int_distribution<int> other(0, std::max(0, n_identities - 2));

  bool active = unit(rng) < p_active;
  int f = 0;
  int run = 0;
  while (f < n_frames) {
    double scale = active ? p_active / 0.5 : (1.0 - p_active) / 0.5;
    int len = std::max(8, static_cast<int>(std::lround(len_base(rng) * scale)));
    len = std::min(len, n_frames - f);
    int voice = -1;
    if (active) {
      voice = identity;
    } else if (n_identities > 1 && unit(rng) < distractor_prob) {
      int pick = other(rng);
      voice = pick >= identity ? pick + 1 : pick;
    }
    double rate = syllable(rng);
    double phase = unit(rng) * 2.0 * kPi;
    for (int i = 0; i < len; ++i) {
      plan.run_id[f + i] = run;
      if (voice >= 0) {
        plan.voice[f + i] = voice;
        plan.labels[f + i] = active ? 1 : 0;
        double t = static_cast<double>(i);
        plan.envelope[f + i] =
            0.55 + 0.45 * std::sin(2.0 * kPi * rate * t / fps + phase);
      }
    }
    f += len;
    ++run;
    active = !active;
  }
  return plan;
}

}  // namespace

GenerateResult generate_synthetic(const SyntheticCorpusSpec& spec,
                                  const std::string& out_dir) {
  if (spec.n_identities < 1 || spec.tracks_per_identity < 1 ||
      spec.track_length < 1) {
    throw ConfigError("generate_synthetic: counts must be >= 1");
  }
  if (spec.occlusion_rate < 0.0 || spec.occlusion_rate > 1.0) {
    throw ConfigError("generate_synthetic: occlusion_rate must be in [0,1]");
  }
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "media", ec);
  if (ec || !fs::is_directory(fs::path(out_dir) / "media")) {
    throw IoError("cannot create output directory: " + out_dir);
  }

  std::vector<IdentityProfile> identities;
  for (int i = 0; i < spec.n_identities; ++i) {
    std::mt19937_64 rng(hash_seed(spec.seed, 0x1dULL, i));
    identities.push_back(make_identity(i, spec.sample_rate, rng));
  }

  GenerateResult result;
  std::vector<TrackManifestEntry> entries;
  int spf = static_cast<int>(std::lround(spec.sample_rate / spec.fps));

  for (int id = 0; id < spec.n_identities; ++id) {
    for (int tr = 0; tr < spec.tracks_per_identity; ++tr) {
      std::mt19937_64 rng(hash_seed(spec.seed, id, tr));
      std::string track_id = "id" + std::to_string(id) + "_t" +
                             std::to_string(tr);
      TrackPlan plan = plan_track(spec.track_length, id, spec.n_identities,
                                  spec.distractor_prob, spec.fps, rng);
      int n = spec.track_length;

      // --- audio ---
      Eigen::VectorXd wave = Eigen::VectorXd::Zero(n * spf);
      std::uniform_real_distribution<double> unit(0.0, 2.0 * kPi);
      double ph1 = 0.0, ph2 = 0.0;
      int prev_run = -1;
      double voiced_power = 0.0;
      int voiced_count = 0;
      for (int f_idx = 0; f_idx < n; ++f_idx) {
        int v = plan.voice[f_idx];
        if (v < 0) {
          prev_run = plan.run_id[f_idx];
          continue;
        }
        if (plan.run_id[f_idx] != prev_run) {
          ph1 = unit(rng);
          ph2 = unit(rng);
          prev_run = plan.run_id[f_idx];
        }
        const IdentityProfile& voice = identities[v];
        double e0 = plan.envelope[f_idx];
        bool same_next = f_idx + 1 < n &&
                         plan.run_id[f_idx + 1] == plan.run_id[f_idx] &&
                         plan.voice[f_idx + 1] == v;
        double e1 = same_next ? plan.envelope[f_idx + 1] : e0;
        for (int s = 0; s < spf; ++s) {
          double frac = static_cast<double>(s) / spf;
          double amp = 0.28 * (e0 + (e1 - e0) * frac);
          double t = (f_idx * spf + s) / spec.sample_rate;
          double x = amp * 0.5 *
                     (std::sin(2.0 * kPi * voice.freq1 * t + ph1) +
                      std::sin(2.0 * kPi * voice.freq2 * t + ph2));
          wave(f_idx * spf + s) = x;
          voiced_power += x * x;
          ++voiced_count;
        }
      }
      if (voiced_count > 0 && spec.noise_snr_db < 200.0) {
        double p_sig = voiced_power / voiced_count;
        double noise_std =
            std::sqrt(p_sig / std::pow(10.0, spec.noise_snr_db / 10.0));
        std::normal_distribution<double> noise(0.0, noise_std);
        for (Eigen::Index s = 0; s < wave.size(); ++s) {
          wave(s) = std::clamp(wave(s) + noise(rng), -0.99, 0.99);
        }
      }

      // --- frames ---
      const IdentityProfile& self = identities[id];
      std::normal_distribution<double> pixel_noise(0.0, 0.015);
      std::vector<Mat> frames;
      frames.reserve(n);
      for (int f_idx = 0; f_idx < n; ++f_idx) {
        Mat frame(kFaceSize, kFaceSize);
        frame.topRows(56) = self.texture;
        frame.bottomRows(56).setConstant(0.25);
        double open =
            plan.labels[f_idx] == 1 ? plan.envelope[f_idx] : 0.0;
        if (open > 0.0) {
          int h = 2 + static_cast<int>(std::lround(26.0 * open));
          int r0 = std::max(56, 83 - h / 2);
          int r1 = std::min(kFaceSize - 1, 83 + h / 2);
          frame.block(r0, 30, r1 - r0 + 1, 53).setConstant(0.9);
        } else {
          frame.block(82, 30, 3, 53).setConstant(0.85);
        }
        for (int r = 0; r < kFaceSize; ++r) {
          for (int c = 0; c < kFaceSize; ++c) {
            frame(r, c) =
                std::clamp(frame(r, c) + pixel_noise(rng), 0.0, 1.0);
          }
        }
        frames.push_back(std::move(frame));
      }

      // --- occlusion (exact per-class counts, contiguous blocks) ---
      std::vector<int> active_idx, inactive_idx;
      for (int f_idx = 0; f_idx < n; ++f_idx) {
        (plan.labels[f_idx] == 1 ? active_idx : inactive_idx).push_back(f_idx);
      }
      int quota_active = static_cast<int>(
          std::lround(spec.occlusion_rate * active_idx.size()));
      int quota_inactive = static_cast<int>(
          std::lround(spec.occlusion_rate * inactive_idx.size()));
      std::vector<char> occ_a =
          pick_block_mask(active_idx, quota_active, n, rng);
      std::vector<char> occ_i =
          pick_block_mask(inactive_idx, quota_inactive, n, rng);
      std::vector<char> occluded(n, 0);
      for (int f_idx = 0; f_idx < n; ++f_idx) {
        occluded[f_idx] = occ_a[f_idx] || occ_i[f_idx];
        if (occluded[f_idx]) frames[f_idx].bottomRows(56).setZero();
      }

      // --- stats ---
      TrackStats stats;
      stats.track_id = track_id;
      stats.n_frames = n;
      std::vector<double> open_vals, rms_vals;
      for (int f_idx = 0; f_idx < n; ++f_idx) {
        bool active = plan.labels[f_idx] == 1;
        stats.n_active += active ? 1 : 0;
        if (occluded[f_idx]) {
          (active ? stats.n_occluded_active : stats.n_occluded_inactive) += 1;
        }
        if (active && !occluded[f_idx]) {
          double sum_sq =
              wave.segment(f_idx * spf, spf).squaredNorm() / spf;
          open_vals.push_back(plan.envelope[f_idx]);
          rms_vals.push_back(std::sqrt(sum_sq));
        }
      }
      if (open_vals.size() >= 2) {
        double mo = 0.0, mr = 0.0;
        for (size_t i = 0; i < open_vals.size(); ++i) {
          mo += open_vals[i];
          mr += rms_vals[i];
        }
        mo /= open_vals.size();
        mr /= rms_vals.size();
        double cov = 0.0, vo = 0.0, vr = 0.0;
        for (size_t i = 0; i < open_vals.size(); ++i) {
          cov += (open_vals[i] - mo) * (rms_vals[i] - mr);
          vo += (open_vals[i] - mo) * (open_vals[i] - mo);
          vr += (rms_vals[i] - mr) * (rms_vals[i] - mr);
        }
        if (vo > 1e-12 && vr > 1e-12) {
          stats.lip_audio_corr = cov / std::sqrt(vo * vr);
        }
      }
      result.stats.push_back(stats);

      // --- write media + manifest entry ---
      std::string frames_rel = "media/" + track_id + ".frames";
      std::string audio_rel = "media/" + track_id + ".wav";
      FaceFrameSequence seq;
      seq.fps = spec.fps;
      seq.frames = std::move(frames);
      write_frames_file((fs::path(out_dir) / frames_rel).string(), seq);
      AudioClip clip;
      clip.sample_rate = spec.sample_rate;
      clip.samples = std::move(wave);
      write_wav((fs::path(out_dir) / audio_rel).string(), clip);

      TrackManifestEntry entry;
      entry.track_id = track_id;
      entry.video_id = "id" + std::to_string(id);
      entry.face_frames_path = frames_rel;
      entry.audio_path = audio_rel;
      entry.fps = spec.fps;
      entry.labels = plan.labels;
      if (spec.tracks_per_identity == 1) {
        entry.split = "train";
      } else if (spec.tracks_per_identity == 2) {
        entry.split = tr == 0 ? "train" : "val";
      } else {
        int n_train = spec.tracks_per_identity - 2;
        entry.split = tr < n_train ? "train"
                      : tr == n_train ? "val"
                                      : "test";
      }
      entries.push_back(std::move(entry));
    }
  }

  result.manifest_path = (fs::path(out_dir) / "manifest.jsonl").string();
  save_manifest(result.manifest_path, entries);
  result.n_tracks = static_cast<int>(entries.size());

  json jstats;
  jstats["spec"] = {{"n_identities", spec.n_identities},
                    {"tracks_per_identity", spec.tracks_per_identity},
                    {"track_length", spec.track_length},
                    {"occlusion_rate", spec.occlusion_rate},
                    {"noise_snr_db", spec.noise_snr_db},
                    {"distractor_prob", spec.distractor_prob},
                    {"seed", spec.seed}};
  json per_track = json::array();
  double corr_sum = 0.0;
  int corr_n = 0;
  for (const TrackStats& s : result.stats) {
    json js;
    js["track_id"] = s.track_id;
    js["n_frames"] = s.n_frames;
    js["n_active"] = s.n_active;
    js["n_occluded_active"] = s.n_occluded_active;
    js["n_occluded_inactive"] = s.n_occluded_inactive;
    if (s.lip_audio_corr) {
      js["lip_audio_corr"] = *s.lip_audio_corr;
      corr_sum += *s.lip_audio_corr;
      ++corr_n;
    } else {
      js["lip_audio_corr"] = nullptr;
    }
    per_track.push_back(std::move(js));
  }
  jstats["tracks"] = std::move(per_track);
  if (corr_n > 0) jstats["mean_lip_audio_corr"] = corr_sum / corr_n;
  result.stats_path = (fs::path(out_dir) / "stats.json").string();
  std::ofstream sout(result.stats_path);
  if (!sout) throw IoError("cannot write stats file");
  sout << jstats.dump(2) << "\n";

  return result;
}

// ---------------------------------------------------------------------------
// batching

std::vector<std::vector<size_t>> plan_batches(size_t n, int batch_size,
                                              uint64_t seed) {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<size_t>> batches;
  for (size_t i = 0; i < n; i += batch_size) {
    batches.emplace_back(order.begin() + i,
                         order.begin() + std::min(n, i + batch_size));
  }
  return batches;
}

TrainingExample load_example(const Manifest& manifest,
                             const TrackManifestEntry& entry,
                             const FaceSpeakerLibrary* library,
                             const SpeakerEncoderInterface& speaker_encoder,
                             const FaceEmbedderInterface& face_embedder,
                             const ExampleOptions& opts) {
  TrainingExample ex;
  ex.track_id = entry.track_id;
  ex.labels = entry.labels;

  FaceTrack track = load_track(manifest, entry);
  AudioClip audio = load_track_audio(manifest, entry);
  MfccSequence mfcc = extract_mfcc(audio);
  ex.aligned = align_audio_to_video(mfcc, track.frames.length(), entry.fps);

  std::optional<AudioClip> enrollment;
  if (!opts.force_null_enroll && library != nullptr) {
    EnrollOptions lookup = opts.enroll;
    lookup.min_duration = std::max(lookup.min_duration, kMinEnrollSeconds);
    std::optional<SpeechSegment> seg = enroll_lookup(
        track, *library, hash_seed(opts.enroll_seed, fnv1a(entry.track_id)),
        face_embedder, lookup);
    if (seg) enrollment = resolve_segment(*seg);
  }
  ex.speaker = speaker_encode(enrollment, speaker_encoder);

  if (opts.augment) {
    ex.faces = augment_visual(
        track.frames, hash_seed(opts.augment_seed, fnv1a(entry.track_id)),
        opts.augment_params);
  } else {
    ex.faces = std::move(track.frames);
  }
  return ex;
}

BatchStream::BatchStream(
    const Manifest& manifest, std::vector<const TrackManifestEntry*> entries,
    int batch_size, uint64_t seed, const FaceSpeakerLibrary* library,
    std::shared_ptr<SpeakerEncoderInterface> speaker_encoder,
    std::shared_ptr<FaceEmbedderInterface> face_embedder, ExampleOptions opts)
    : manifest_(&manifest),
      entries_(std::move(entries)),
      library_(library),
      speaker_encoder_(std::move(speaker_encoder)),
      face_embedder_(std::move(face_embedder)),
      opts_(std::move(opts)) {
  plan_ = plan_batches(entries_.size(), batch_size, seed);
}

std::optional<std::vector<TrainingExample>> BatchStream::next() {
  if (cursor_ >= plan_.size()) return std::nullopt;
  std::vector<TrainingExample> batch;
  for (size_t idx : plan_[cursor_]) {
    batch.push_back(load_example(*manifest_, *entries_[idx], library_,
                                 *speaker_encoder_, *face_embedder_, opts_));
  }
  ++cursor_;
  return batch;
}

void BatchStream::reset() { cursor_ = 0; }

// ---------------------------------------------------------------------------
// annotation adapters

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

std::string sanitize_id(std::string s) {
  for (char& c : s) {
    if (c == ':' || c == '/' || c == ' ') c = '_';
  }
  return s;
}

std::string fill_template(const std::string& tmpl, const std::string& video,
                          const std::string& track) {
  std::string out = tmpl;
  auto replace_all = [&out](const std::string& key, const std::string& value) {
    size_t pos = 0;
    while ((pos = out.find(key, pos)) != std::string::npos) {
      out.replace(pos, key.size(), value);
      pos += value.size();
    }
  };
  replace_all("{video}", video);
  replace_all("{track}", track);
  return out;
}

struct RawTrack {
  std::string video_id;
  std::vector<std::pair<double, int>> frames;  // (timestamp, label)
};

int write_converted(const std::map<std::string, RawTrack>& tracks,
                    const std::string& out_manifest,
                    const ConvertOptions& opts) {
  std::vector<TrackManifestEntry> entries;
  for (const auto& [track_id, raw] : tracks) {
    std::vector<std::pair<double, int>> frames = raw.frames;
    std::stable_sort(frames.begin(), frames.end(),
                     [](const auto& a, const auto& b) {
                       return a.first < b.first;
                     });
    TrackManifestEntry entry;
    entry.track_id = track_id;
    entry.video_id = raw.video_id;
    entry.fps = opts.fps;
    entry.split = opts.split;
    entry.face_frames_path = fill_template(opts.frames_template, raw.video_id,
                                           track_id);
    entry.audio_path = fill_template(opts.audio_template, raw.video_id,
                                     track_id);
    entry.labels.reserve(frames.size());
    for (const auto& [ts, label] : frames) entry.labels.push_back(label);
    entries.push_back(std::move(entry));
  }
  save_manifest(out_manifest, entries);
  return static_cast<int>(entries.size());
}

}  // namespace

int convert_ava_csv(const std::string& csv_path,
                    const std::string& out_manifest,
                    const ConvertOptions& opts) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot open CSV: " + csv_path);
  std::map<std::string, RawTrack> tracks;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() < 8) {
      throw ParseError("AVA CSV line " + std::to_string(line_no) +
                       ": expected >= 8 columns");
    }
    double ts = 0.0;
    try {
      ts = std::stod(f[1]);
    } catch (const std::exception&) {
      if (line_no == 1) continue;  // header row
      throw ParseError("AVA CSV line " + std::to_string(line_no) +
                       ": bad timestamp '" + f[1] + "'");
    }
    std::string track_id = sanitize_id(f[7]);
    RawTrack& t = tracks[track_id];
    t.video_id = f[0];
    t.frames.emplace_back(ts, f[6] == "SPEAKING_AUDIBLE" ? 1 : 0);
  }
  return write_converted(tracks, out_manifest, opts);
}

int convert_asw_csv(const std::string& csv_path,
                    const std::string& out_manifest,
                    const ConvertOptions& opts) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot open CSV: " + csv_path);
  std::map<std::string, RawTrack> tracks;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() < 4) {
      throw ParseError("ASW CSV line " + std::to_string(line_no) +
                       ": expected >= 4 columns");
    }
    double ts = 0.0;
    int label = 0;
    try {
      ts = std::stod(f[2]);
      label = std::stoi(f[3]);
    } catch (const std::exception&) {
      if (line_no == 1) continue;  // header row
      throw ParseError("ASW CSV line " + std::to_string(line_no) +
                       ": bad timestamp/label");
    }
    if (label != 0 && label != 1) {
      throw ParseError("ASW CSV line " + std::to_string(line_no) +
                       ": label must be 0/1");
    }
    std::string track_id = sanitize_id(f[1]);
    RawTrack& t = tracks[track_id];
    t.video_id = f[0];
    t.frames.emplace_back(ts, label);
  }
  return write_converted(tracks, out_manifest, opts);
}

}  // namespace tsasd
