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

#ifndef TSASD_IO_HPP_
#define TSASD_IO_HPP_

#include <string>
#include <vector>

#include "tsasd/features.hpp"

namespace tsasd {

/// 16-bit mono PCM WAV.
AudioClip read_wav(const std::string& path);
void write_wav(const std::string& path, const AudioClip& clip);

/// Packed grayscale frame tensor ("TSFR"): little-endian header
/// {magic u32, version u16, dtype u16 (1 = u8), T u32, H u32, W u32}
/// followed by T*H*W row-major bytes. Values map to [0, 1] via /255.
FaceFrameSequence read_frames_file(const std::string& path, double fps);
void write_frames_file(const std::string& path,
                       const FaceFrameSequence& frames);
/// Frame count from the header only (no pixel data read).
int frames_file_length(const std::string& path);

/// Binary 8-bit PGM (P5).
Mat read_pgm(const std::string& path);

/// Loads a face track from either a packed tensor file or a directory of
/// .pgm images (sorted by filename).
FaceFrameSequence load_face_track(const std::string& path, double fps);

}  // namespace tsasd

#endif  // TSASD_IO_HPP_
