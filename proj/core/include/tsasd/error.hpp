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

#ifndef TSASD_ERROR_HPP_
#define TSASD_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace tsasd {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Audio clip shorter than one analysis window.
class ShortInputError : public Error {
 public:
  using Error::Error;
};

/// Audio contains NaN/Inf samples or an invalid sample rate.
class InvalidAudioError : public Error {
 public:
  using Error::Error;
};

/// Face track with no frames (or an empty frame).
class EmptyTrackError : public Error {
 public:
  using Error::Error;
};

/// Temporal lengths of two streams cannot be reconciled.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or unknown configuration (dims, modes, backends, checkpoints).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Enrollment clip shorter than the speaker-encoder minimum.
class ShortEnrollmentError : public Error {
 public:
  using Error::Error;
};

/// Malformed record in a manifest or annotation file.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A path referenced by a manifest does not resolve to a file.
class MissingAssetError : public Error {
 public:
  using Error::Error;
};

/// Filesystem read/write failure.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Metric is mathematically undefined for the given inputs.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace tsasd

#endif  // TSASD_ERROR_HPP_
