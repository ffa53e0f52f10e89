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

#ifndef TSASD_AUTOGRAD_HPP_
#define TSASD_AUTOGRAD_HPP_

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace tsasd {

using Mat = Eigen::MatrixXd;

namespace ag {

class Tape;

/// Lightweight handle to a node on a Tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int idx) : tape_(tape), idx_(idx) {}

  const Mat& value() const;
  const Mat& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  bool valid() const { return tape_ != nullptr; }

  Tape* tape() const { return tape_; }
  int index() const { return idx_; }

 private:
  Tape* tape_ = nullptr;
  int idx_ = -1;
};

/// Arena of forward values plus the reverse pass. Nodes are appended in
/// computation order, so reverse iteration is a valid topological order.
class Tape {
 public:
  explicit Tape(bool recording = true) : recording_(recording) {
    nodes_.reserve(256);
  }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_; }

  /// New leaf node. `needs_grad` marks it as a differentiation target.
  Var leaf(Mat value, bool needs_grad = false);

  /// Runs the reverse pass from a 1x1 node, seeding its gradient with 1.
  void backward(const Var& scalar);

  // --- internal node access ---
  struct Node {
    Mat value;
    Mat grad;  // empty until touched
    bool needs_grad = false;
    std::function<void(Tape&)> backprop;  // empty for leaves
  };

  const Mat& value(int idx) const { return nodes_[idx].value; }
  Mat& grad(int idx);
  bool node_needs_grad(int idx) const { return nodes_[idx].needs_grad; }
  Var emit(Mat value, bool needs_grad, std::function<void(Tape&)> backprop);
  size_t size() const { return nodes_.size(); }

 private:
  std::vector<Node> nodes_;
  bool recording_;
};

// ---- elementwise / linear algebra ----
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var hadamard(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var relu(const Var& a);
Var sigmoid(const Var& a);
/// Elementwise (x + eps)^(-1/2).
Var rsqrt(const Var& a, double eps);

// ---- broadcasts (r is 1xC, c is Tx1) ----
Var add_rowvec(const Var& x, const Var& r);
Var sub_rowvec(const Var& x, const Var& r);
Var mul_rowvec(const Var& x, const Var& r);
Var add_colvec(const Var& x, const Var& c);
Var sub_colvec(const Var& x, const Var& c);
Var mul_colvec(const Var& x, const Var& c);

// ---- reductions / shape ----
Var mean_rows(const Var& x);           // 1xC, mean over rows
Var mean_cols(const Var& x);           // Tx1, mean over columns
Var softmax_rows(const Var& x);        // row-wise softmax (max-subtracted)
Var concat_cols(const std::vector<Var>& xs);
Var slice_cols(const Var& x, int start, int n);
Var slice_rows(const Var& x, int start, int n);
Var replicate_row(const Var& r, int t);           // 1xC -> TxC
/// Rows shifted by `offset` (positive shifts content down); vacated rows zero.
Var shift_rows(const Var& x, int offset);
/// Consecutive groups of `block` rows averaged into one row each.
Var block_mean_rows(const Var& x, int block);

/// Gathered row blocks: out.row(i) is the concatenation over taps j of
/// x.row(index[i*taps+j]) (zeros where index < 0). The linear op behind
/// im2col-style convolution lowering. The index vector is moved into the
/// node, so pass with std::move for large tables.
Var gather_rows(const Var& x, std::vector<int> index, int taps);

/// Inverted-dropout. Identity when !train or p == 0.
Var dropout(const Var& x, double p, std::mt19937_64& rng, bool train);

/// Mean binary cross-entropy over a Tx1 probability column. Probabilities
/// are clipped to [eps_clip, 1 - eps_clip] before the logs.
Var bce_mean(const Var& probs, const std::vector<int>& labels,
             double eps_clip);

// ---- composed layers ----
/// Row-wise layer norm with learnable gain/bias (both 1xC).
Var layer_norm_rows(const Var& x, const Var& gamma, const Var& beta,
                    double eps = 1e-5);

/// 1-D convolution along rows with SAME zero padding.
/// x: TxCin, w: (k*Cin)xCout laid out tap-major, b: 1xCout.
Var conv1d_same(const Var& x, const Var& w, const Var& b, int k);

/// Depthwise 1-D convolution along rows, SAME zero padding.
/// x: TxC, w: kxC (one temporal filter per channel), b: 1xC.
Var depthwise_conv1d_same(const Var& x, const Var& w, const Var& b);

}  // namespace ag

/// Named trainable tensor plus its gradient and Adam state.
struct Param {
  std::string name;
  Mat value;
  Mat grad;
  Mat adam_m;
  Mat adam_v;
  bool trainable = true;
};

/// Owns parameters; names are unique and creation order is the canonical
/// iteration order (checkpoints and optimizer steps rely on it).
class ParamStore {
 public:
  Param& create(const std::string& name, int rows, int cols);
  Param& create(const std::string& name, Mat init, bool trainable = true);
  Param* find(const std::string& name);
  const Param* find(const std::string& name) const;
  Param& at(const std::string& name);

  std::vector<Param*> all();
  std::vector<const Param*> all() const;

  void zero_grads();
  /// One Adam update over all trainable params; `step` counts from 1.
  void adam_step(double lr, double beta1, double beta2, double eps,
                 long step);

 private:
  std::vector<std::unique_ptr<Param>> params_;
};

/// Binds params to tape leaves for one forward pass and scatters gradients
/// back after tape.backward().
class Binding {
 public:
  explicit Binding(ag::Tape* tape) : tape_(tape) {}
  ag::Var operator()(Param& p);
  void scatter_grads();

 private:
  ag::Tape* tape_;
  std::vector<std::pair<Param*, ag::Var>> bound_;
};

/// splitmix64; used to derive independent RNG streams from (seed, salt...).
uint64_t hash_seed(uint64_t a, uint64_t b = 0x9e3779b97f4a7c15ULL,
                   uint64_t c = 0);

/// Gaussian init with std = 1/sqrt(fan_in).
void init_gaussian(Mat& m, std::mt19937_64& rng, double std_dev);

}  // namespace tsasd

#endif  // TSASD_AUTOGRAD_HPP_
