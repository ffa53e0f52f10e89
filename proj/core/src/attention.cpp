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

#include "tsasd/attention.hpp"

#include <cmath>

#include "tsasd/error.hpp"

namespace tsasd {

using ag::Var;

namespace {

Mat gaussian(std::mt19937_64& rng, int rows, int cols, double std_dev) {
  Mat m(rows, cols);
  init_gaussian(m, rng, std_dev);
  return m;
}

}  // namespace

MultiHeadAttention::MultiHeadAttention(ParamStore& store,
                                       const std::string& prefix, int dim,
                                       int q_in_dim, int kv_in_dim, int heads,
                                       std::mt19937_64& rng)
    : store_(&store), prefix_(prefix), dim_(dim), heads_(heads) {
  if (heads < 1 || dim % heads != 0) {
    throw ConfigError("attention dim must be divisible by heads");
  }
  store.create(prefix + ".wq",
               gaussian(rng, q_in_dim, dim, 1.0 / std::sqrt(q_in_dim)));
  store.create(prefix + ".bq", Mat::Zero(1, dim));
  store.create(prefix + ".wk",
               gaussian(rng, kv_in_dim, dim, 1.0 / std::sqrt(kv_in_dim)));
  store.create(prefix + ".bk", Mat::Zero(1, dim));
  store.create(prefix + ".wv",
               gaussian(rng, kv_in_dim, dim, 1.0 / std::sqrt(kv_in_dim)));
  store.create(prefix + ".bv", Mat::Zero(1, dim));
}

AttentionOut MultiHeadAttention::forward(ag::Tape& tape, Binding& bind,
                                         const Var& query_in, const Var& kv_in,
                                         double dropout_p,
                                         std::mt19937_64* dropout_rng,
                                         bool train) {
  (void)tape;
  Var q = ag::add_rowvec(ag::matmul(query_in, bind(store_->at(prefix_ + ".wq"))),
                         bind(store_->at(prefix_ + ".bq")));
  Var k = ag::add_rowvec(ag::matmul(kv_in, bind(store_->at(prefix_ + ".wk"))),
                         bind(store_->at(prefix_ + ".bk")));
  Var v = ag::add_rowvec(ag::matmul(kv_in, bind(store_->at(prefix_ + ".wv"))),
                         bind(store_->at(prefix_ + ".bv")));
  int d_head = dim_ / heads_;
  double scale = 1.0 / std::sqrt(static_cast<double>(d_head));

  AttentionOut result;
  std::vector<Var> head_outs;
  head_outs.reserve(heads_);
  for (int h = 0; h < heads_; ++h) {
    Var qh = ag::slice_cols(q, h * d_head, d_head);
    Var kh = ag::slice_cols(k, h * d_head, d_head);
    Var vh = ag::slice_cols(v, h * d_head, d_head);
    Var logits = ag::scale(ag::matmul(qh, ag::transpose(kh)), scale);
    Var weights = ag::softmax_rows(logits);
    result.weights.push_back(weights);
    if (train && dropout_p > 0.0 && dropout_rng != nullptr) {
      weights = ag::dropout(weights, dropout_p, *dropout_rng, train);
    }
    head_outs.push_back(ag::matmul(weights, vh));
  }
  result.out = (heads_ == 1) ? head_outs[0] : ag::concat_cols(head_outs);
  return result;
}

CrossAttentionPair::CrossAttentionPair(ParamStore& store,
                                       const std::string& prefix, int dim,
                                       int heads, std::mt19937_64& rng) {
  to_visual_ = std::make_unique<MultiHeadAttention>(
      store, prefix + ".av", dim, /*q_in=*/dim, /*kv_in=*/dim, heads, rng);
  to_audio_ = std::make_unique<MultiHeadAttention>(
      store, prefix + ".va", dim, /*q_in=*/dim, /*kv_in=*/dim, heads, rng);
}

CrossAttentionPair::Result CrossAttentionPair::forward(
    ag::Tape& tape, Binding& bind, const Var& audio, const Var& visual,
    double dropout_p, std::mt19937_64* dropout_rng, bool train) {
  if (audio.rows() != visual.rows()) {
    throw AlignmentError("cross_attention: sequence length mismatch");
  }
  if (audio.cols() != visual.cols()) {
    throw AlignmentError("cross_attention: embedding dim mismatch");
  }
  Result r;
  // audio values re-timed by visual queries
  AttentionOut av = to_visual_->forward(tape, bind, /*query=*/visual,
                                        /*kv=*/audio, dropout_p, dropout_rng,
                                        train);
  // visual values re-timed by audio queries
  AttentionOut va = to_audio_->forward(tape, bind, /*query=*/audio,
                                       /*kv=*/visual, dropout_p, dropout_rng,
                                       train);
  r.audio_to_visual = av.out;
  r.visual_to_audio = va.out;
  r.weights = av.weights;
  r.weights.insert(r.weights.end(), va.weights.begin(), va.weights.end());
  return r;
}

TransformerEncoderLayer::TransformerEncoderLayer(ParamStore& store,
                                                 const std::string& prefix,
                                                 int dim, int heads,
                                                 int ffn_dim,
                                                 std::mt19937_64& rng)
    : store_(&store), prefix_(prefix), dim_(dim) {
  attn_ = std::make_unique<MultiHeadAttention>(store, prefix + ".self", dim,
                                               dim, dim, heads, rng);
  store.create(prefix + ".wo", gaussian(rng, dim, dim, 1.0 / std::sqrt(dim)));
  store.create(prefix + ".bo", Mat::Zero(1, dim));
  store.create(prefix + ".ln1.gamma", Mat::Ones(1, dim));
  store.create(prefix + ".ln1.beta", Mat::Zero(1, dim));
  store.create(prefix + ".ffn.w1",
               gaussian(rng, dim, ffn_dim, 1.0 / std::sqrt(dim)));
  store.create(prefix + ".ffn.b1", Mat::Zero(1, ffn_dim));
  store.create(prefix + ".ffn.w2",
               gaussian(rng, ffn_dim, dim, 1.0 / std::sqrt(ffn_dim)));
  store.create(prefix + ".ffn.b2", Mat::Zero(1, dim));
  store.create(prefix + ".ln2.gamma", Mat::Ones(1, dim));
  store.create(prefix + ".ln2.beta", Mat::Zero(1, dim));
}

Var TransformerEncoderLayer::forward(ag::Tape& tape, Binding& bind,
                                     const Var& x, double dropout_p,
                                     std::mt19937_64* dropout_rng, bool train,
                                     std::vector<Var>* attention_maps) {
  AttentionOut sa =
      attn_->forward(tape, bind, x, x, dropout_p, dropout_rng, train);
  if (attention_maps != nullptr) {
    attention_maps->insert(attention_maps->end(), sa.weights.begin(),
                           sa.weights.end());
  }
  Var projected =
      ag::add_rowvec(ag::matmul(sa.out, bind(store_->at(prefix_ + ".wo"))),
                     bind(store_->at(prefix_ + ".bo")));
  if (train && dropout_p > 0.0 && dropout_rng != nullptr) {
    projected = ag::dropout(projected, dropout_p, *dropout_rng, train);
  }
  Var h = ag::layer_norm_rows(ag::add(x, projected),
                              bind(store_->at(prefix_ + ".ln1.gamma")),
                              bind(store_->at(prefix_ + ".ln1.beta")));
  Var f1 = ag::relu(
      ag::add_rowvec(ag::matmul(h, bind(store_->at(prefix_ + ".ffn.w1"))),
                     bind(store_->at(prefix_ + ".ffn.b1"))));
  if (train && dropout_p > 0.0 && dropout_rng != nullptr) {
    f1 = ag::dropout(f1, dropout_p, *dropout_rng, train);
  }
  Var f2 =
      ag::add_rowvec(ag::matmul(f1, bind(store_->at(prefix_ + ".ffn.w2"))),
                     bind(store_->at(prefix_ + ".ffn.b2")));
  return ag::layer_norm_rows(ag::add(h, f2),
                             bind(store_->at(prefix_ + ".ln2.gamma")),
                             bind(store_->at(prefix_ + ".ln2.beta")));
}

Mat sinusoidal_positions(int t_len, int dim) {
  Mat pe = Mat::Zero(t_len, dim);
  for (int t = 0; t < t_len; ++t) {
    for (int i = 0; i < dim / 2; ++i) {
      double rate = std::pow(10000.0, -2.0 * i / dim);
      pe(t, 2 * i) = std::sin(t * rate);
      if (2 * i + 1 < dim) pe(t, 2 * i + 1) = std::cos(t * rate);
    }
  }
  return pe;
}

}  // namespace tsasd
