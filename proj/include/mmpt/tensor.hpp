// Copyright 2026 the mmpt authors.
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

#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

namespace mmpt {

// Dense row-major f64 matrix; vectors are 1-by-n or n-by-1, scalars 1-by-1.
struct Tensor {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(size_t r, size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  static Tensor scalar(double v) {
    Tensor t(1, 1);
    t.data[0] = v;
    return t;
  }

  double& at(size_t r, size_t c) { return data[r * cols + c]; }
  double at(size_t r, size_t c) const { return data[r * cols + c]; }
  double* row(size_t r) { return data.data() + r * cols; }
  const double* row(size_t r) const { return data.data() + r * cols; }
  size_t size() const { return data.size(); }
  void zero() { std::fill(data.begin(), data.end(), 0.0); }
};

// Trainable tensor with persistent gradient and AdamW state. Gradients
// accumulate across backward calls until zero_grad.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor m, v;        // AdamW moments
  bool decay = false; // decoupled weight decay applies
};

using NodeId = int32_t;

// Reverse-mode tape over Tensor ops. Each op records the values needed by
// its backward rule; Graph::backward sweeps the tape once in reverse
// creation order, which is a valid topological order by construction.
// One Graph instance is one forward trace; build a fresh one per step.
class Graph {
 public:
  // Leaves.
  NodeId input(Tensor v);          // constant, no gradient
  // Copies p.value in; backward adds to p.grad. Memoized per graph, so
  // repeated uses of one parameter share a node.
  NodeId param(Param& p);

  // Arithmetic.
  NodeId add(NodeId a, NodeId b);            // same shape
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);            // elementwise
  NodeId add_rowvec(NodeId a, NodeId b);     // [m,n] + [1,n]
  NodeId scale(NodeId a, double s);
  NodeId mul_scalar(NodeId a, NodeId s);     // s is 1x1
  NodeId matmul(NodeId a, NodeId b);         // [m,k]x[k,n]
  NodeId matmul_nt(NodeId a, NodeId b);      // [m,k] x [n,k]^T
  NodeId transpose(NodeId a);

  // Shape plumbing.
  NodeId rows(NodeId a, size_t r0, size_t r1);
  NodeId cols(NodeId a, size_t c0, size_t c1);
  NodeId concat_rows(const std::vector<NodeId>& parts);
  NodeId concat_cols(const std::vector<NodeId>& parts);

  // Nonlinearities and norms.
  NodeId gelu(NodeId a);
  NodeId exp(NodeId a);
  NodeId layer_norm(NodeId x, NodeId gain, NodeId bias, double eps = 1e-5);
  NodeId softmax_rows(NodeId a);
  NodeId l2_normalize_rows(NodeId a, double eps = 1e-12);

  // Constant additive bias per column (attention key masking); gradients
  // pass through unchanged.
  NodeId add_colbias_const(NodeId a, const std::vector<double>& bias);

  // Embedding gather: out row i = table row ids[i].
  NodeId embedding(NodeId table, const std::vector<int>& ids);

  // out row i = masked[i] ? row : x row i. Replaced rows pass no gradient
  // to x; `row` receives the sum of replaced-row gradients.
  NodeId replace_rows(NodeId x, const std::vector<uint8_t>& masked, NodeId row);

  // Reductions.
  NodeId sum_all(NodeId a);                  // -> 1x1
  NodeId diag(NodeId a);                     // [n,n] -> [n,1]
  NodeId logsumexp_rows(NodeId a);           // [m,n] -> [m,1]

  // Mean over selected rows of CE(softmax(logits_r), target_r); rows with
  // select=0 contribute nothing. Targets are column indices.
  NodeId cross_entropy_rows(NodeId logits, const std::vector<int>& targets,
                            const std::vector<uint8_t>& select);

  // (1/omega) * sum over masked rows of |target - recon|_1; the
  // subgradient at exact ties is 0.
  NodeId l1_masked_rows(NodeId recon, const Tensor& target,
                        const std::vector<uint8_t>& masked, double omega);

  // Runs the reverse sweep from `loss` (must be 1x1), accumulating into
  // bound Param::grad. May be called once per graph.
  void backward(NodeId loss);

  const Tensor& val(NodeId id) const { return nodes_[id].value; }
  Tensor& grad(NodeId id) { return nodes_[id].grad; }
  size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<NodeId> parents;
    std::function<void()> back;  // empty for leaves/constants
    Param* bound = nullptr;
  };

  NodeId emplace(Tensor value, std::vector<NodeId> parents,
                 std::function<void()> back);
  void check_same_shape(NodeId a, NodeId b, const char* op) const;

  std::deque<Node> nodes_;
  std::unordered_map<const Param*, NodeId> param_nodes_;
  bool ran_backward_ = false;
};

}  // namespace mmpt
