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

#include "tsasd/library.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "tsasd/error.hpp"
#include "tsasd/io.hpp"

namespace tsasd {

using json = nlohmann::json;

namespace {

class StubFaceEmbedder : public FaceEmbedderInterface {
 public:
  explicit StubFaceEmbedder(int dim) : dim_(dim) {
    std::mt19937_64 rng(0xfacef00dULL);
    projection_.resize(dim, kGridRows * kGridCols);
    init_gaussian(projection_, rng,
                  1.0 / std::sqrt(double(kGridRows * kGridCols)));
  }

  int dim() const override { return dim_; }

  Eigen::VectorXd embed_frame(const Mat& frame) const override {
    if (frame.rows() < 2 || frame.cols() < 2) {
      throw EmptyTrackError("face embedder: degenerate frame");
    }
    // identity region = upper half of the crop
    int half_rows = static_cast<int>(frame.rows()) / 2;
    Eigen::VectorXd pooled(kGridRows * kGridCols);
    for (int gr = 0; gr < kGridRows; ++gr) {
      int r0 = gr * half_rows / kGridRows;
      int r1 = std::max(r0 + 1, (gr + 1) * half_rows / kGridRows);
      for (int gc = 0; gc < kGridCols; ++gc) {
        int c0 = gc * static_cast<int>(frame.cols()) / kGridCols;
        int c1 = std::max(c0 + 1,
                          (gc + 1) * static_cast<int>(frame.cols()) / kGridCols);
        pooled(gr * kGridCols + gc) =
            frame.block(r0, c0, r1 - r0, c1 - c0).mean();
      }
    }
    pooled.array() -= pooled.mean();  // drop the shared brightness component
    Eigen::VectorXd y = projection_ * pooled;
    double n = y.norm();
    if (n > 1e-12) y /= n;
    return y;
  }

  std::string id() const override { return "stub-face"; }

 private:
  static constexpr int kGridRows = 8;
  static constexpr int kGridCols = 16;
  int dim_;
  Mat projection_;
};

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double na = a.norm(), nb = b.norm();
  if (na < 1e-12 || nb < 1e-12) return 0.0;
  return a.dot(b) / (na * nb);
}

}  // namespace

std::shared_ptr<FaceEmbedderInterface> make_stub_face_embedder(int dim) {
  return std::make_shared<StubFaceEmbedder>(dim);
}

FaceSignature face_signature(const FaceTrack& track,
                             const FaceEmbedderInterface& embedder) {
  if (track.frames.frames.empty()) {
    throw EmptyTrackError("face_signature: empty track " + track.track_id);
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(embedder.dim());
  for (const Mat& frame : track.frames.frames) {
    mean += embedder.embed_frame(frame);
  }
  mean /= static_cast<double>(track.frames.frames.size());
  double n = mean.norm();
  if (n > 1e-12) mean /= n;
  return {mean, track.track_id};
}

std::vector<SpeechSegment> extract_active_segments(const FaceTrack& track,
                                                   const AudioClip& audio,
                                                   double min_duration) {
  std::vector<SpeechSegment> segments;
  double fps = track.fps;
  size_t n = track.labels.size();
  double audio_dur = audio.duration();
  size_t i = 0;
  while (i < n) {
    if (track.labels[i] != 1) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < n && track.labels[j] == 1) ++j;
    double start = static_cast<double>(i) / fps;
    double end = static_cast<double>(j) / fps;
    end = std::min(end, audio_dur);
    if (end - start >= min_duration && end > start) {
      SpeechSegment seg;
      seg.source_track = track.track_id;
      seg.start = start;
      seg.end = end;
      auto s0 = static_cast<Eigen::Index>(std::lround(start * audio.sample_rate));
      auto s1 = static_cast<Eigen::Index>(std::lround(end * audio.sample_rate));
      s1 = std::min(s1, audio.samples.size());
      seg.clip.sample_rate = audio.sample_rate;
      seg.clip.samples = audio.samples.segment(s0, s1 - s0);
      segments.push_back(std::move(seg));
    }
    i = j;
  }
  return segments;
}

FaceSpeakerLibrary build_library(const std::vector<FaceTrack>& tracks,
                                 const std::vector<AudioClip>& audios,
                                 const FaceEmbedderInterface& embedder,
                                 double threshold,
                                 double min_segment_duration) {
  if (tracks.size() != audios.size()) {
    throw AlignmentError("build_library: track/audio count mismatch");
  }
  std::vector<size_t> order(tracks.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return tracks[a].track_id < tracks[b].track_id;
  });

  FaceSpeakerLibrary lib;
  lib.threshold = threshold;
  lib.embedder_id = embedder.id();
  for (size_t idx : order) {
    const FaceTrack& track = tracks[idx];
    FaceSignature sig = face_signature(track, embedder);
    std::vector<SpeechSegment> segs =
        extract_active_segments(track, audios[idx], min_segment_duration);
    LibraryCluster* home = nullptr;
    for (LibraryCluster& c : lib.clusters) {
      if (cosine(sig.vector, c.representative.vector) >= threshold) {
        home = &c;
        break;
      }
    }
    if (home == nullptr) {
      lib.clusters.emplace_back();
      home = &lib.clusters.back();
      home->representative = sig;
    }
    home->members.push_back(sig);
    home->segments.insert(home->segments.end(),
                          std::make_move_iterator(segs.begin()),
                          std::make_move_iterator(segs.end()));
  }
  return lib;
}

std::optional<SpeechSegment> enroll_lookup(const FaceSignature& query_sig,
                                           const FaceSpeakerLibrary& library,
                                           uint64_t rng_seed,
                                           const EnrollOptions& opts) {
  const LibraryCluster* best = nullptr;
  double best_sim = library.threshold;
  for (const LibraryCluster& c : library.clusters) {
    double sim = cosine(query_sig.vector, c.representative.vector);
    if (sim >= best_sim) {
      best_sim = sim;
      best = &c;
    }
  }
  if (best == nullptr) return std::nullopt;
  std::vector<const SpeechSegment*> candidates;
  for (const SpeechSegment& s : best->segments) {
    if (!opts.allow_self_enroll && s.source_track == query_sig.source_track) {
      continue;
    }
    if (s.end - s.start < opts.min_duration) continue;
    candidates.push_back(&s);
  }
  if (candidates.empty()) return std::nullopt;
  std::mt19937_64 rng(rng_seed);
  std::uniform_int_distribution<size_t> pick(0, candidates.size() - 1);
  return *candidates[pick(rng)];
}

std::optional<SpeechSegment> enroll_lookup(const FaceTrack& query,
                                           const FaceSpeakerLibrary& library,
                                           uint64_t rng_seed,
                                           const FaceEmbedderInterface& embedder,
                                           const EnrollOptions& opts) {
  return enroll_lookup(face_signature(query, embedder), library, rng_seed,
                       opts);
}

AudioClip resolve_segment(const SpeechSegment& segment) {
  if (segment.clip.samples.size() > 0) return segment.clip;
  if (segment.audio_path.empty()) {
    throw MissingAssetError("segment has neither samples nor an audio path");
  }
  AudioClip whole = read_wav(segment.audio_path);
  auto s0 =
      static_cast<Eigen::Index>(std::lround(segment.start * whole.sample_rate));
  auto s1 =
      static_cast<Eigen::Index>(std::lround(segment.end * whole.sample_rate));
  s0 = std::clamp<Eigen::Index>(s0, 0, whole.samples.size());
  s1 = std::clamp<Eigen::Index>(s1, s0, whole.samples.size());
  AudioClip out;
  out.sample_rate = whole.sample_rate;
  out.samples = whole.samples.segment(s0, s1 - s0);
  return out;
}

void save_library(const std::string& path, const FaceSpeakerLibrary& library) {
  json root;
  root["version"] = library.version;
  root["threshold"] = library.threshold;
  root["embedder_id"] = library.embedder_id;
  json clusters = json::array();
  for (const LibraryCluster& c : library.clusters) {
    json jc;
    auto sig_to_json = [](const FaceSignature& s) {
      json js;
      js["track"] = s.source_track;
      js["vector"] = std::vector<double>(
          s.vector.data(), s.vector.data() + s.vector.size());
      return js;
    };
    jc["representative"] = sig_to_json(c.representative);
    json members = json::array();
    for (const FaceSignature& m : c.members) members.push_back(sig_to_json(m));
    jc["members"] = std::move(members);
    json segments = json::array();
    for (const SpeechSegment& s : c.segments) {
      json js;
      js["track"] = s.source_track;
      js["start"] = s.start;
      js["end"] = s.end;
      js["audio"] = s.audio_path;
      segments.push_back(std::move(js));
    }
    jc["segments"] = std::move(segments);
    clusters.push_back(std::move(jc));
  }
  root["clusters"] = std::move(clusters);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write library file: " + path);
  out << root.dump(2) << "\n";
  if (!out) throw IoError("short write to library file: " + path);
}

FaceSpeakerLibrary load_library(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open library file: " + path);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw ParseError("library file " + path + ": " + e.what());
  }
  FaceSpeakerLibrary lib;
  try {
    lib.version = root.at("version").get<int>();
    lib.threshold = root.at("threshold").get<double>();
    lib.embedder_id = root.at("embedder_id").get<std::string>();
    auto sig_from_json = [](const json& js) {
      FaceSignature s;
      s.source_track = js.at("track").get<std::string>();
      std::vector<double> v = js.at("vector").get<std::vector<double>>();
      s.vector = Eigen::Map<Eigen::VectorXd>(v.data(),
                                             static_cast<Eigen::Index>(v.size()));
      return s;
    };
    for (const json& jc : root.at("clusters")) {
      LibraryCluster c;
      c.representative = sig_from_json(jc.at("representative"));
      for (const json& jm : jc.at("members")) {
        c.members.push_back(sig_from_json(jm));
      }
      for (const json& js : jc.at("segments")) {
        SpeechSegment s;
        s.source_track = js.at("track").get<std::string>();
        s.start = js.at("start").get<double>();
        s.end = js.at("end").get<double>();
        s.audio_path = js.at("audio").get<std::string>();
        c.segments.push_back(std::move(s));
      }
      lib.clusters.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw ParseError("library file " + path + ": " + e.what());
  }
  return lib;
}

}  // namespace tsasd
