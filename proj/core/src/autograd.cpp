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

#include "tsasd/autograd.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "tsasd/error.hpp"

namespace tsasd {
namespace ag {

const Mat& Var::value() const { return tape_->value(idx_); }
const Mat& Var::grad() const { return const_cast<Tape*>(tape_)->grad(idx_); }

Var Tape::leaf(Mat value, bool needs_grad) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad && recording_;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Mat& Tape::grad(int idx) {
  Node& n = nodes_[idx];
  if (n.grad.size() == 0) {
    n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  }
  return n.grad;
}

Var Tape::emit(Mat value, bool needs_grad,
               std::function<void(Tape&)> backprop) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad && recording_;
  if (n.needs_grad) n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::backward(const Var& scalar) {
  if (!recording_) {
    throw Error("Tape::backward called on a non-recording tape");
  }
  if (scalar.rows() != 1 || scalar.cols() != 1) {
    throw Error("Tape::backward expects a 1x1 node");
  }
  grad(scalar.index())(0, 0) += 1.0;
  for (int i = scalar.index(); i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.needs_grad && n.backprop && n.grad.size() != 0) {
      n.backprop(*this);
    }
  }
}

namespace {

bool wants_grad(const Var& a) {
  return a.tape()->recording() && a.tape()->node_needs_grad(a.index());
}

bool wants_grad(const Var& a, const Var& b) {
  return wants_grad(a) || wants_grad(b);
}

void check_same_tape(const Var& a, const Var& b) {
  if (a.tape() != b.tape()) {
    throw Error("autograd ops require operands on the same tape");
  }
}

}  // namespace

namespace {

template <typename Fwd, typename Bwd>
Var unary_op(const Var& a, Fwd&& fwd, Bwd&& bwd) {
  Tape* tape = a.tape();
  Mat out = fwd(a.value());
  bool ng = wants_grad(a);
  int ia = a.index();
  int iout = static_cast<int>(tape->size());
  return tape->emit(std::move(out), ng, [ia, iout, bwd](Tape& t) {
    bwd(t, t.grad(iout), ia);
  });
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  check_same_tape(a, b);
  if (a.cols() != b.rows()) throw Error("matmul: inner dimension mismatch");
  Mat out = a.value() * b.value();
  Tape* tape = a.tape();
  int ia = a.index(), ib = b.index();
  int iout = static_cast<int>(tape->size());
  return tape->emit(std::move(out), wants_grad(a, b),
                    [ia, ib, iout](Tape& t) {
                      const Mat& g = t.grad(iout);
                      if (t.node_needs_grad(ia)) {
                        t.grad(ia) += g * t.value(ib).transpose();
                      }
                      if (t.node_needs_grad(ib)) {
                        t.grad(ib) += t.value(ia).transpose() * g;
                      }
                    });
}

Var transpose(const Var& a) {
  return unary_op(
      a, [](const Mat& v) { return Mat(v.transpose()); },
      [](Tape& t, const Mat& g, int ia) { t.grad(ia) += g.transpose(); });
}

Var scale(const Var& a, double s) {
  return unary_op(
      a, [s](const Mat& v) { return Mat(v * s); },
      [s](Tape& t, const Mat& g, int ia) { t.grad(ia) += g * s; });
}

Var relu(const Var& a) {
  Tape* tape = a.tape();
  Mat out = a.value().cwiseMax(0.0);
  int ia = a.index();
  int iout = static_cast<int>(tape->size());
  return tape->emit(std::move(out), wants_grad(a), [ia, iout](Tape& t) {
    const Mat& v = t.value(ia);
    t.grad(ia).array() +=
        t.grad(iout).array() * (v.array() > 0.0).cast<double>();
  });
}

Var sigmoid(const Var& a) {
  Tape* tape = a.tape();
  Mat out = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  int ia = a.index();
  int iout = static_cast<int>(tape->size());
  return tape->emit(std::move(out), wants_grad(a), [ia, iout](Tape& t) {
    const Mat& y = t.value(iout);
    t.grad(ia).array() +=
        t.grad(iout).array() * y.array() * (1.0 - y.array());
  });
}

Var rsqrt(const Var& a, double eps) {
  Tape* tape = a.tape();
  Mat out = (a.value().array() + eps).rsqrt().matrix();
  int ia = a.index();
  int iout = static_cast<int>(tape->size());
  return tape->emit(std::move(out), wants_grad(a), [ia, iout, eps](Tape& t) {
    const Mat& v = t.value(ia);
    t.grad(ia).array() += t.grad(iout).array() *
                          (-0.5 * (v.array() + eps).pow(-1.5));
  });
}

namespace {

Var binary_same_shape(const Var& a, const Var& b, Mat out,
                      std::function<void(Tape&, const Mat&, int, int)> bwd) {
  check_same_tape(a, b);
  Tape* tape = a.tape();
  int ia = a.index(), ib = b.index();
  int iout = static_cast<int>(tape->size());
  return tape->emit(std::move(out), wants_grad(a, b),
                    [ia, ib, iout, bwd](Tape& t) {
                      bwd(t, t.grad(iout), ia, ib);
                    });
}

}  // namespace

Var add(const Var& a, const Var& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error("add: shape mismatch");
  }
  return binary_same_shape(a, b, a.value() + b.value(),
                           [](Tape& t, const Mat& g, int ia, int ib) {
                             t.grad(ia) += g;
                             t.grad(ib) += g;
                           });
}

Var sub(const Var& a, const Var& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error("sub: shape mismatch");
  }
  return binary_same_shape(a, b, a.value() - b.value(),
                           [](Tape& t, const Mat& g, int ia, int ib) {
                             t.grad(ia) += g;
                             t.grad(ib) -= g;
                           });
}

Var hadamard(const Var& a, const Var& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error("hadamard: shape mismatch");
  }
  return binary_same_shape(
      a, b, a.value().cwiseProduct(b.value()),
      [](Tape& t, const Mat& g, int ia, int ib) {
        t.grad(ia).array() += g.array() * t.value(ib).array();
        t.grad(ib).array() += g.array() * t.value(ia).array();
      });
}

Var add_rowvec(const Var& x, const Var& r) {
  if (r.rows() != 1 || r.cols() != x.cols()) {
    throw Error("add_rowvec: expected 1xC row vector");
  }
  Mat out = x.value();
  out.rowwise() += r.value().row(0);
  return binary_same_shape(x, r, std::move(out),
                           [](Tape& t, const Mat& g, int ix, int ir) {
                             t.grad(ix) += g;
                             t.grad(ir) += g.colwise().sum();
                           });
}

Var sub_rowvec(const Var& x, const Var& r) {
  if (r.rows() != 1 || r.cols() != x.cols()) {
    throw Error("sub_rowvec: expected 1xC row vector");
  }
  Mat out = x.value();
  out.rowwise() -= r.value().row(0);
  return binary_same_shape(x, r, std::move(out),
                           [](Tape& t, const Mat& g, int ix, int ir) {
                             t.grad(ix) += g;
                             t.grad(ir) -= g.colwise().sum();
                           });
}

Var mul_rowvec(const Var& x, const Var& r) {
  if (r.rows() != 1 || r.cols() != x.cols()) {
    throw Error("mul_rowvec: expected 1xC row vector");
  }
  Mat out = x.value().array().rowwise() * r.value().row(0).array();
  return binary_same_shape(
      x, r, std::move(out), [](Tape& t, const Mat& g, int ix, int ir) {
        t.grad(ix).array() +=
            g.array().rowwise() * t.value(ir).row(0).array();
        t.grad(ir) += (g.array() * t.value(ix).array()).colwise().sum().matrix();
      });
}

Var add_colvec(const Var& x, const Var& c) {
  if (c.cols() != 1 || c.rows() != x.rows()) {
    throw Error("add_colvec: expected Tx1 column vector");
  }
  Mat out = x.value();
  out.colwise() += c.value().col(0);
  return binary_same_shape(x, c, std::move(out),
                           [](Tape& t, const Mat& g, int ix, int ic) {
                             t.grad(ix) += g;
                             t.grad(ic) += g.rowwise().sum();
                           });
}

Var sub_colvec(const Var& x, const Var& c) {
  if (c.cols() != 1 || c.rows() != x.rows()) {
    throw Error("sub_colvec: expected Tx1 column vector");
  }
  Mat out = x.value();
  out.colwise() -= c.value().col(0);
  return binary_same_shape(x, c, std::move(out),
                           [](Tape& t, const Mat& g, int ix, int ic) {
                             t.grad(ix) += g;
                             t.grad(ic) -= g.rowwise().sum();
                           });
}

Var mul_colvec(const Var& x, const Var& c) {
  if (c.cols() != 1 || c.rows() != x.rows()) {
    throw Error("mul_colvec: expected Tx1 column vector");
  }
  Mat out = x.value().array().colwise() * c.value().col(0).array();
  return binary_same_shape(
      x, c, std::move(out), [](Tape& t, const Mat& g, int ix, int ic) {
        t.grad(ix).array() +=
            g.array().colwise() * t.value(ic).col(0).array();
        t.grad(ic) += (g.array() * t.value(ix).array()).rowwise().sum().matrix();
      });
}

Var mean_rows(const Var& x) {
  Tape* tape = x.tape();
  Mat out = x.value().colwise().mean();
  int ix = x.index();
  int iout = static_cast<int>(tape->size());
  double inv = 1.0 / static_cast<double>(x.rows());
  return tape->emit(std::move(out), wants_grad(x), [ix, iout, inv](Tape& t) {
    const Mat& g = t.grad(iout);
    t.grad(ix).rowwise() += (g.row(0) * inv).eval();
  });
}

Var mean_cols(const Var& x) {
  Tape* tape = x.tape();
  Mat out = x.value().rowwise().mean();
  int ix = x.index();
  int iout = static_cast<int>(tape->size());
  double inv = 1.0 / static_cast<double>(x.cols());
  return tape->emit(std::move(out), wants_grad(x), [ix, iout, inv](Tape& t) {
    const Mat& g = t.grad(iout);
    t.grad(ix).colwise() += (g.col(0) * inv).eval();
  });
}

Var softmax_rows(const Var& x) {
  Tape* tape = x.tape();
  Mat out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double m = x.value().row(i).maxCoeff();
    Eigen::ArrayXd e = (x.value().row(i).array() - m).exp();
    out.row(i) = (e / e.sum()).matrix();
  }
  int ix = x.index();
  int iout = static_cast<int>(tape->size());
  return tape->emit(std::move(out), wants_grad(x), [ix, iout](Tape& t) {
    const Mat& y = t.value(iout);
    const Mat& g = t.grad(iout);
    // dx = (g - rowsum(g .* y)) .* y
    Eigen::VectorXd dots = (g.array() * y.array()).rowwise().sum();
    t.grad(ix).array() +=
        (g.array().colwise() - dots.array()) * y.array();
  });
}

Var concat_cols(const std::vector<Var>& xs) {
  if (xs.empty()) throw Error("concat_cols: empty input");
  Tape* tape = xs[0].tape();
  Eigen::Index rows = xs[0].rows();
  Eigen::Index cols = 0;
  bool ng = false;
  for (const Var& x : xs) {
    if (x.tape() != tape) throw Error("concat_cols: mixed tapes");
    if (x.rows() != rows) throw Error("concat_cols: row count mismatch");
    cols += x.cols();
    ng = ng || wants_grad(x);
  }
  Mat out(rows, cols);
  std::vector<int> idx;
  std::vector<int> width;
  Eigen::Index off = 0;
  for (const Var& x : xs) {
    out.middleCols(off, x.cols()) = x.value();
    idx.push_back(x.index());
    width.push_back(static_cast<int>(x.cols()));
    off += x.cols();
  }
  int iout = static_cast<int>(tape->size());
  return tape->emit(std::move(out), ng, [idx, width, iout](Tape& t) {
    const Mat& g = t.grad(iout);
    int off = 0;
    for (size_t j = 0; j < idx.size(); ++j) {
      t.grad(idx[j]) += g.middleCols(off, width[j]);
      off += width[j];
    }
  });
}

Var slice_cols(const Var& x, int start, int n) {
  if (start < 0 || n < 0 || start + n > x.cols()) {
    throw Error("slice_cols: out of range");
  }
  Tape* tape = x.tape();
  Mat out = x.value().middleCols(start, n);
  int ix = x.index();
  int iout = static_cast<int>(tape->size());
  return tape->emit(std::move(out), wants_grad(x), [ix, iout, start, n](Tape& t) {
    t.grad(ix).middleCols(start, n) += t.grad(iout);
  });
}

Var slice_rows(const Var& x, int start, int n) {
  if (start < 0 || n < 0 || start + n > x.rows()) {
    throw Error("slice_rows: out of range");
  }
  Tape* tape = x.tape();
  Mat out = x.value().middleRows(start, n);
  int ix = x.index();
  int iout = static_cast<int>(tape->size());
  return tape->emit(std::move(out), wants_grad(x), [ix, iout, start, n](Tape& t) {
    t.grad(ix).middleRows(start, n) += t.grad(iout);
  });
}

Var replicate_row(const Var& r, int t_rows) {
  if (r.rows() != 1) throw Error("replicate_row: expected a 1xC row");
  if (t_rows < 1) throw Error("replicate_row: T must be >= 1");
  Tape* tape = r.tape();
  Mat out = r.value().replicate(t_rows, 1);
  int ir = r.index();
  int iout = static_cast<int>(tape->size());
  return tape->emit(std::move(out), wants_grad(r), [ir, iout](Tape& t) {
    t.grad(ir) += t.grad(iout).colwise().sum();
  });
}

Var shift_rows(const Var& x, int offset) {
  Tape* tape = x.tape();
  Eigen::Index rows = x.rows();
  Mat out = Mat::Zero(rows, x.cols());
  for (Eigen::Index i = 0; i < rows; ++i) {
    Eigen::Index src = i - offset;
    if (src >= 0 && src < rows) out.row(i) = x.value().row(src);
  }
  int ix = x.index();
  int iout = static_cast<int>(tape->size());
  return tape->emit(std::move(out), wants_grad(x), [ix, iout, offset](Tape& t) {
    const Mat& g = t.grad(iout);
    Mat& gx = t.grad(ix);
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      Eigen::Index src = i - offset;
      if (src >= 0 && src < g.rows()) gx.row(src) += g.row(i);
    }
  });
}

Var block_mean_rows(const Var& x, int block) {
  if (block <= 0 || x.rows() % block != 0) {
    throw Error("block_mean_rows: row count not divisible by block");
  }
  Tape* tape = x.tape();
  Eigen::Index groups = x.rows() / block;
  Mat out(groups, x.cols());
  for (Eigen::Index g = 0; g < groups; ++g) {
    out.row(g) = x.value().middleRows(g * block, block).colwise().mean();
  }
  int ix = x.index();
  int iout = static_cast<int>(tape->size());
  double inv = 1.0 / block;
  return tape->emit(std::move(out), wants_grad(x),
                    [ix, iout, block, inv](Tape& t) {
                      const Mat& g = t.grad(iout);
                      Mat& gx = t.grad(ix);
                      for (Eigen::Index r = 0; r < g.rows(); ++r) {
                        gx.middleRows(r * block, block).rowwise() +=
                            (g.row(r) * inv).eval();
                      }
                    });
}

Var gather_rows(const Var& x, std::vector<int> index, int taps) {
  if (taps <= 0 || index.size() % static_cast<size_t>(taps) != 0) {
    throw Error("gather_rows: index size not divisible by taps");
  }
  Tape* tape = x.tape();
  Eigen::Index out_rows = static_cast<Eigen::Index>(index.size()) / taps;
  Eigen::Index c = x.cols();
  Mat out = Mat::Zero(out_rows, static_cast<Eigen::Index>(taps) * c);
  for (Eigen::Index i = 0; i < out_rows; ++i) {
    for (int j = 0; j < taps; ++j) {
      int src = index[static_cast<size_t>(i) * taps + j];
      if (src >= 0) out.block(i, static_cast<Eigen::Index>(j) * c, 1, c) =
          x.value().row(src);
    }
  }
  int ix = x.index();
  int iout = static_cast<int>(tape->size());
  return tape->emit(
      std::move(out), wants_grad(x),
      [ix, iout, index = std::move(index), taps, c](Tape& t) {
        if (!t.node_needs_grad(ix)) return;
        const Mat& g = t.grad(iout);
        Mat& gx = t.grad(ix);
        for (Eigen::Index i = 0; i < g.rows(); ++i) {
          for (int j = 0; j < taps; ++j) {
            int src = index[static_cast<size_t>(i) * taps + j];
            if (src >= 0) {
              gx.row(src) += g.block(i, static_cast<Eigen::Index>(j) * c, 1, c);
            }
          }
        }
      });
}

Var dropout(const Var& x, double p, std::mt19937_64& rng, bool train) {
  if (!train || p <= 0.0) return x;
  if (p >= 1.0) throw Error("dropout: p must be < 1");
  Tape* tape = x.tape();
  std::bernoulli_distribution keep(1.0 - p);
  Mat mask(x.rows(), x.cols());
  double s = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < mask.rows(); ++i) {
    for (Eigen::Index j = 0; j < mask.cols(); ++j) {
      mask(i, j) = keep(rng) ? s : 0.0;
    }
  }
  Mat out = x.value().cwiseProduct(mask);
  int ix = x.index();
  int iout = static_cast<int>(tape->size());
  return tape->emit(std::move(out), wants_grad(x),
                    [ix, iout, mask](Tape& t) {
                      t.grad(ix).array() += t.grad(iout).array() * mask.array();
                    });
}

Var bce_mean(const Var& probs, const std::vector<int>& labels,
             double eps_clip) {
  if (probs.cols() != 1) throw Error("bce_mean: expected a Tx1 column");
  if (static_cast<size_t>(probs.rows()) != labels.size()) {
    throw AlignmentError("bce_mean: probability/label length mismatch");
  }
  Tape* tape = probs.tape();
  Eigen::Index t_len = probs.rows();
  double acc = 0.0;
  Eigen::VectorXd clipped(t_len);
  for (Eigen::Index i = 0; i < t_len; ++i) {
    double p = std::min(std::max(probs.value()(i, 0), eps_clip),
                        1.0 - eps_clip);
    clipped(i) = p;
    acc += labels[i] ? std::log(p) : std::log(1.0 - p);
  }
  Mat out(1, 1);
  out(0, 0) = -acc / static_cast<double>(t_len);
  int ip = probs.index();
  int iout = static_cast<int>(tape->size());
  return tape->emit(
      std::move(out), wants_grad(probs),
      [ip, iout, labels, clipped, eps_clip, t_len](Tape& t) {
        double g = t.grad(iout)(0, 0) / static_cast<double>(t_len);
        Mat& gp = t.grad(ip);
        for (Eigen::Index i = 0; i < t_len; ++i) {
          double raw = t.value(ip)(i, 0);
          if (raw <= eps_clip || raw >= 1.0 - eps_clip) continue;  // clipped
          double p = clipped(i);
          gp(i, 0) += labels[i] ? g * (-1.0 / p) : g * (1.0 / (1.0 - p));
        }
      });
}

Var layer_norm_rows(const Var& x, const Var& gamma, const Var& beta,
                    double eps) {
  Var mu = mean_cols(x);
  Var centered = sub_colvec(x, mu);
  Var variance = mean_cols(hadamard(centered, centered));
  Var inv_std = rsqrt(variance, eps);
  Var normalized = mul_colvec(centered, inv_std);
  return add_rowvec(mul_rowvec(normalized, gamma), beta);
}

Var conv1d_same(const Var& x, const Var& w, const Var& b, int k) {
  int t_len = static_cast<int>(x.rows());
  int c_in = static_cast<int>(x.cols());
  if (w.rows() != static_cast<Eigen::Index>(k) * c_in) {
    throw Error("conv1d_same: weight rows must equal k*Cin");
  }
  std::vector<int> index(static_cast<size_t>(t_len) * k);
  int half = k / 2;
  for (int t = 0; t < t_len; ++t) {
    for (int j = 0; j < k; ++j) {
      int src = t + j - half;
      index[static_cast<size_t>(t) * k + j] =
          (src >= 0 && src < t_len) ? src : -1;
    }
  }
  Var patches = gather_rows(x, index, k);
  return add_rowvec(matmul(patches, w), b);
}

Var depthwise_conv1d_same(const Var& x, const Var& w, const Var& b) {
  int k = static_cast<int>(w.rows());
  int half = k / 2;
  Var acc;
  for (int j = 0; j < k; ++j) {
    Var term = mul_rowvec(shift_rows(x, half - j), slice_rows(w, j, 1));
    acc = (j == 0) ? term : add(acc, term);
  }
  return add_rowvec(acc, b);
}

}  // namespace ag

// ---------------------------------------------------------------------------

Param& ParamStore::create(const std::string& name, int rows, int cols) {
  return create(name, Mat::Zero(rows, cols));
}

Param& ParamStore::create(const std::string& name, Mat init, bool trainable) {
  if (find(name) != nullptr) {
    throw Error("ParamStore: duplicate parameter name " + name);
  }
  auto p = std::make_unique<Param>();
  p->name = name;
  p->value = std::move(init);
  p->grad = Mat::Zero(p->value.rows(), p->value.cols());
  p->adam_m = Mat::Zero(p->value.rows(), p->value.cols());
  p->adam_v = Mat::Zero(p->value.rows(), p->value.cols());
  p->trainable = trainable;
  params_.push_back(std::move(p));
  return *params_.back();
}

Param* ParamStore::find(const std::string& name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

const Param* ParamStore::find(const std::string& name) const {
  for (const auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

Param& ParamStore::at(const std::string& name) {
  Param* p = find(name);
  if (!p) throw Error("ParamStore: unknown parameter " + name);
  return *p;
}

std::vector<Param*> ParamStore::all() {
  std::vector<Param*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Param*> ParamStore::all() const {
  std::vector<const Param*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

void ParamStore::zero_grads() {
  for (auto& p : params_) p->grad.setZero();
}

void ParamStore::adam_step(double lr, double beta1, double beta2, double eps,
                           long step) {
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  for (auto& p : params_) {
    if (!p->trainable) continue;
    p->adam_m = beta1 * p->adam_m + (1.0 - beta1) * p->grad;
    p->adam_v =
        (beta2 * p->adam_v.array() + (1.0 - beta2) * p->grad.array().square())
            .matrix();
    Eigen::ArrayXXd m_hat = p->adam_m.array() / bc1;
    Eigen::ArrayXXd v_hat = p->adam_v.array() / bc2;
    p->value.array() -= lr * m_hat / (v_hat.sqrt() + eps);
  }
}

ag::Var Binding::operator()(Param& p) {
  ag::Var v = tape_->leaf(p.value, p.trainable);
  bound_.emplace_back(&p, v);
  return v;
}

void Binding::scatter_grads() {
  for (auto& [p, v] : bound_) {
    if (p->trainable) p->grad += v.grad();
  }
}

uint64_t hash_seed(uint64_t a, uint64_t b, uint64_t c) {
  uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1) + 0x94d049bb133111ebULL * (c + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void init_gaussian(Mat& m, std::mt19937_64& rng, double std_dev) {
  std::normal_distribution<double> dist(0.0, std_dev);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = dist(rng);
    }
  }
}

}  // namespace tsasd
