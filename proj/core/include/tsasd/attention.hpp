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

#ifndef TSASD_ATTENTION_HPP_
#define TSASD_ATTENTION_HPP_

#include <memory>
#include <string>
#include <vector>

#include "tsasd/autograd.hpp"

namespace tsasd {

struct AttentionConfig {
  int heads = 8;
  int layers = 1;
  double dropout = 0.0;
  bool positional_encoding = false;
};

/// Output of one attention pass; `weights` holds the per-head softmax maps
/// (rows are probability distributions over key positions).
struct AttentionOut {
  ag::Var out;
  std::vector<ag::Var> weights;
};

/// Scaled dot-product multi-head attention without an output projection:
/// out = softmax(Q K^T / sqrt(d_head)) V, per head, heads concatenated.
/// Q is projected from the query stream, K and V from the key/value stream.
class MultiHeadAttention {
 public:
  MultiHeadAttention(ParamStore& store, const std::string& prefix, int dim,
                     int q_in_dim, int kv_in_dim, int heads,
                     std::mt19937_64& rng);

  AttentionOut forward(ag::Tape& tape, Binding& bind, const ag::Var& query_in,
                       const ag::Var& kv_in, double dropout_p,
                       std::mt19937_64* dropout_rng, bool train);

  int dim() const { return dim_; }

 private:
  ParamStore* store_;
  std::string prefix_;
  int dim_;
  int heads_;
};

/// The synchronization core: two attention passes over the audio and visual
/// streams. `audio_to_visual` carries audio values re-timed by visual
/// queries; `visual_to_audio` is the mirror image.
class CrossAttentionPair {
 public:
  CrossAttentionPair(ParamStore& store, const std::string& prefix, int dim,
                     int heads, std::mt19937_64& rng);

  struct Result {
    ag::Var audio_to_visual;  // queries from the visual stream
    ag::Var visual_to_audio;  // queries from the audio stream
    std::vector<ag::Var> weights;
  };

  Result forward(ag::Tape& tape, Binding& bind, const ag::Var& audio,
                 const ag::Var& visual, double dropout_p,
                 std::mt19937_64* dropout_rng, bool train);

 private:
  std::unique_ptr<MultiHeadAttention> to_visual_;  // Eq. 1 direction
  std::unique_ptr<MultiHeadAttention> to_audio_;   // Eq. 2 direction
};

/// Post-norm transformer encoder layer: self-attention with output
/// projection, then a ReLU feed-forward block, residuals and layer norm
/// around both.
class TransformerEncoderLayer {
 public:
  TransformerEncoderLayer(ParamStore& store, const std::string& prefix,
                          int dim, int heads, int ffn_dim,
                          std::mt19937_64& rng);

  ag::Var forward(ag::Tape& tape, Binding& bind, const ag::Var& x,
                  double dropout_p, std::mt19937_64* dropout_rng, bool train,
                  std::vector<ag::Var>* attention_maps = nullptr);

 private:
  ParamStore* store_;
  std::string prefix_;
  std::unique_ptr<MultiHeadAttention> attn_;
  int dim_;
};

/// Sinusoidal positional encoding table (T x dim).
Mat sinusoidal_positions(int t_len, int dim);

}  // namespace tsasd

#endif  // TSASD_ATTENTION_HPP_
