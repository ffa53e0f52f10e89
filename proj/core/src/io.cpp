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

#include "tsasd/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "tsasd/error.hpp"

namespace fs = std::filesystem;

namespace tsasd {

namespace {

constexpr uint32_t kFramesMagic = 0x52465354;  // "TSFR" little-endian

template <typename T>
T read_le(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

template <typename T>
void write_le(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

AudioClip read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open WAV file: " + path);

  char riff[4], wave[4];
  in.read(riff, 4);
  uint32_t riff_size = read_le<uint32_t>(in);
  (void)riff_size;
  in.read(wave, 4);
  if (!in || std::memcmp(riff, "RIFF", 4) != 0 ||
      std::memcmp(wave, "WAVE", 4) != 0) {
    throw IoError("not a RIFF/WAVE file: " + path);
  }

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  std::vector<int16_t> pcm;
  bool got_fmt = false, got_data = false;
  while (in && !(got_fmt && got_data)) {
    char id[4];
    in.read(id, 4);
    if (!in) break;
    uint32_t size = read_le<uint32_t>(in);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      format = read_le<uint16_t>(in);
      channels = read_le<uint16_t>(in);
      sample_rate = read_le<uint32_t>(in);
      read_le<uint32_t>(in);  // byte rate
      read_le<uint16_t>(in);  // block align
      bits = read_le<uint16_t>(in);
      if (size > 16) in.seekg(size - 16, std::ios::cur);
      got_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      pcm.resize(size / 2);
      in.read(reinterpret_cast<char*>(pcm.data()), size);
      got_data = true;
    } else {
      in.seekg(size + (size & 1), std::ios::cur);
    }
  }
  if (!got_fmt || !got_data) throw IoError("truncated WAV file: " + path);
  if (format != 1 || bits != 16) {
    throw IoError("expected 16-bit PCM WAV: " + path);
  }
  if (channels != 1) {
    throw IoError("expected mono WAV (got " + std::to_string(channels) +
                  " channels): " + path);
  }
  AudioClip clip;
  clip.sample_rate = static_cast<double>(sample_rate);
  clip.samples.resize(static_cast<Eigen::Index>(pcm.size()));
  for (size_t i = 0; i < pcm.size(); ++i) {
    clip.samples(static_cast<Eigen::Index>(i)) = pcm[i] / 32767.0;
  }
  return clip;
}

void write_wav(const std::string& path, const AudioClip& clip) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write WAV file: " + path);
  uint32_t n = static_cast<uint32_t>(clip.samples.size());
  uint32_t data_size = n * 2;
  out.write("RIFF", 4);
  write_le<uint32_t>(out, 36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_le<uint32_t>(out, 16);
  write_le<uint16_t>(out, 1);  // PCM
  write_le<uint16_t>(out, 1);  // mono
  uint32_t sr = static_cast<uint32_t>(std::lround(clip.sample_rate));
  write_le<uint32_t>(out, sr);
  write_le<uint32_t>(out, sr * 2);
  write_le<uint16_t>(out, 2);
  write_le<uint16_t>(out, 16);
  out.write("data", 4);
  write_le<uint32_t>(out, data_size);
  for (uint32_t i = 0; i < n; ++i) {
    double v = std::clamp(clip.samples(i), -1.0, 1.0);
    write_le<int16_t>(out, static_cast<int16_t>(std::lround(v * 32767.0)));
  }
  if (!out) throw IoError("short write to WAV file: " + path);
}

FaceFrameSequence read_frames_file(const std::string& path, double fps) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open frames file: " + path);
  uint32_t magic = read_le<uint32_t>(in);
  uint16_t version = read_le<uint16_t>(in);
  uint16_t dtype = read_le<uint16_t>(in);
  uint32_t t = read_le<uint32_t>(in);
  uint32_t h = read_le<uint32_t>(in);
  uint32_t w = read_le<uint32_t>(in);
  if (!in || magic != kFramesMagic) {
    throw IoError("not a frames file: " + path);
  }
  if (version != 1 || dtype != 1) {
    throw IoError("unsupported frames file version/dtype: " + path);
  }
  FaceFrameSequence seq;
  seq.fps = fps;
  seq.frames.reserve(t);
  std::vector<uint8_t> row(w);
  for (uint32_t i = 0; i < t; ++i) {
    Mat frame(h, w);
    for (uint32_t r = 0; r < h; ++r) {
      in.read(reinterpret_cast<char*>(row.data()), w);
      for (uint32_t c = 0; c < w; ++c) frame(r, c) = row[c] / 255.0;
    }
    seq.frames.push_back(std::move(frame));
  }
  if (!in) throw IoError("truncated frames file: " + path);
  return seq;
}

void write_frames_file(const std::string& path,
                       const FaceFrameSequence& frames) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write frames file: " + path);
  uint32_t t = static_cast<uint32_t>(frames.frames.size());
  uint32_t h = t ? static_cast<uint32_t>(frames.frames[0].rows()) : 0;
  uint32_t w = t ? static_cast<uint32_t>(frames.frames[0].cols()) : 0;
  write_le<uint32_t>(out, kFramesMagic);
  write_le<uint16_t>(out, 1);
  write_le<uint16_t>(out, 1);
  write_le<uint32_t>(out, t);
  write_le<uint32_t>(out, h);
  write_le<uint32_t>(out, w);
  std::vector<uint8_t> row(w);
  for (const Mat& frame : frames.frames) {
    for (uint32_t r = 0; r < h; ++r) {
      for (uint32_t c = 0; c < w; ++c) {
        double v = std::clamp(frame(r, c), 0.0, 1.0);
        row[c] = static_cast<uint8_t>(std::lround(v * 255.0));
      }
      out.write(reinterpret_cast<const char*>(row.data()), w);
    }
  }
  if (!out) throw IoError("short write to frames file: " + path);
}

int frames_file_length(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open frames file: " + path);
  uint32_t magic = read_le<uint32_t>(in);
  read_le<uint16_t>(in);
  read_le<uint16_t>(in);
  uint32_t t = read_le<uint32_t>(in);
  if (!in || magic != kFramesMagic) {
    throw IoError("not a frames file: " + path);
  }
  return static_cast<int>(t);
}

Mat read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open PGM file: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw IoError("expected binary PGM (P5): " + path);
  auto next_int = [&in, &path]() {
    // skip whitespace and '#' comments
    int c = in.peek();
    while (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '#') {
      if (c == '#') {
        std::string line;
        std::getline(in, line);
      } else {
        in.get();
      }
      c = in.peek();
    }
    int v = 0;
    if (!(in >> v)) throw IoError("malformed PGM header: " + path);
    return v;
  };
  int w = next_int();
  int h = next_int();
  int maxval = next_int();
  if (maxval <= 0 || maxval > 255) {
    throw IoError("unsupported PGM maxval: " + path);
  }
  in.get();  // single whitespace after header
  std::vector<uint8_t> data(static_cast<size_t>(w) * h);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size()));
  if (!in) throw IoError("truncated PGM file: " + path);
  Mat m(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      m(r, c) = static_cast<double>(data[static_cast<size_t>(r) * w + c]);
    }
  }
  return m;
}

FaceFrameSequence load_face_track(const std::string& path, double fps) {
  if (fs::is_directory(path)) {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.path().extension() == ".pgm") {
        names.push_back(entry.path().string());
      }
    }
    std::sort(names.begin(), names.end());
    if (names.empty()) {
      throw EmptyTrackError("no .pgm frames in directory: " + path);
    }
    std::vector<Mat> raw;
    raw.reserve(names.size());
    for (const std::string& n : names) raw.push_back(read_pgm(n));
    return preprocess_faces(raw, fps, 255.0);
  }
  FaceFrameSequence seq = read_frames_file(path, fps);
  if (!seq.frames.empty() && (seq.frames[0].rows() != kFaceSize ||
                              seq.frames[0].cols() != kFaceSize)) {
    return preprocess_faces(seq.frames, fps, 1.0);
  }
  return seq;
}

}  // namespace tsasd
