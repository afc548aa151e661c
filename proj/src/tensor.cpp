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

#include "mmpt/tensor.hpp"

#include <cmath>
#include <memory>

#include "mmpt/error.hpp"
#include "mmpt/kernels.hpp"

namespace mmpt {

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace

NodeId Graph::emplace(Tensor value, std::vector<NodeId> parents,
                      std::function<void()> back) {
  Node n;
  n.value = std::move(value);
  n.parents = std::move(parents);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

void Graph::check_same_shape(NodeId a, NodeId b, const char* op) const {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  if (ta.rows != tb.rows || ta.cols != tb.cols)
    throw Error(ErrorCode::dimension, std::string(op) + ": shape mismatch");
}

NodeId Graph::input(Tensor v) { return emplace(std::move(v), {}, {}); }

NodeId Graph::param(Param& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return it->second;
  NodeId id = emplace(p.value, {}, {});
  nodes_[id].bound = &p;
  param_nodes_.emplace(&p, id);
  return id;
}

NodeId Graph::add(NodeId a, NodeId b) {
  check_same_shape(a, b, "add");
  Tensor out(nodes_[a].value.rows, nodes_[a].value.cols);
  kernels::vadd(nodes_[a].value.data.data(), nodes_[b].value.data.data(),
                out.data.data(), out.size());
  NodeId id = emplace(std::move(out), {a, b}, {});
  nodes_[id].back = [this, id, a, b] {
    kernels::axpy(1.0, nodes_[id].grad.data.data(), nodes_[a].grad.data.data(),
                  nodes_[id].grad.size());
    kernels::axpy(1.0, nodes_[id].grad.data.data(), nodes_[b].grad.data.data(),
                  nodes_[id].grad.size());
  };
  return id;
}

NodeId Graph::sub(NodeId a, NodeId b) {
  check_same_shape(a, b, "sub");
  Tensor out(nodes_[a].value.rows, nodes_[a].value.cols);
  kernels::vsub(nodes_[a].value.data.data(), nodes_[b].value.data.data(),
                out.data.data(), out.size());
  NodeId id = emplace(std::move(out), {a, b}, {});
  nodes_[id].back = [this, id, a, b] {
    kernels::axpy(1.0, nodes_[id].grad.data.data(), nodes_[a].grad.data.data(),
                  nodes_[id].grad.size());
    kernels::axpy(-1.0, nodes_[id].grad.data.data(), nodes_[b].grad.data.data(),
                  nodes_[id].grad.size());
  };
  return id;
}

NodeId Graph::mul(NodeId a, NodeId b) {
  check_same_shape(a, b, "mul");
  Tensor out(nodes_[a].value.rows, nodes_[a].value.cols);
  kernels::vmul(nodes_[a].value.data.data(), nodes_[b].value.data.data(),
                out.data.data(), out.size());
  NodeId id = emplace(std::move(out), {a, b}, {});
  nodes_[id].back = [this, id, a, b] {
    const Tensor& g = nodes_[id].grad;
    const Tensor& va = nodes_[a].value;
    const Tensor& vb = nodes_[b].value;
    for (size_t i = 0; i < g.size(); ++i) {
      nodes_[a].grad.data[i] = std::fma(g.data[i], vb.data[i], nodes_[a].grad.data[i]);
      nodes_[b].grad.data[i] = std::fma(g.data[i], va.data[i], nodes_[b].grad.data[i]);
    }
  };
  return id;
}

NodeId Graph::add_rowvec(NodeId a, NodeId b) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  if (tb.rows != 1 || tb.cols != ta.cols)
    throw Error(ErrorCode::dimension, "add_rowvec: bias must be 1 x cols");
  Tensor out = ta;
  for (size_t r = 0; r < ta.rows; ++r)
    kernels::axpy(1.0, tb.data.data(), out.row(r), ta.cols);
  NodeId id = emplace(std::move(out), {a, b}, {});
  nodes_[id].back = [this, id, a, b] {
    const Tensor& g = nodes_[id].grad;
    kernels::axpy(1.0, g.data.data(), nodes_[a].grad.data.data(), g.size());
    for (size_t r = 0; r < g.rows; ++r)
      kernels::axpy(1.0, g.row(r), nodes_[b].grad.data.data(), g.cols);
  };
  return id;
}

NodeId Graph::scale(NodeId a, double s) {
  Tensor out = nodes_[a].value;
  kernels::scal(s, out.data.data(), out.size());
  NodeId id = emplace(std::move(out), {a}, {});
  nodes_[id].back = [this, id, a, s] {
    kernels::axpy(s, nodes_[id].grad.data.data(), nodes_[a].grad.data.data(),
                  nodes_[id].grad.size());
  };
  return id;
}

NodeId Graph::mul_scalar(NodeId a, NodeId s) {
  if (nodes_[s].value.size() != 1)
    throw Error(ErrorCode::dimension, "mul_scalar: scalar must be 1x1");
  double sv = nodes_[s].value.data[0];
  Tensor out = nodes_[a].value;
  kernels::scal(sv, out.data.data(), out.size());
  NodeId id = emplace(std::move(out), {a, s}, {});
  nodes_[id].back = [this, id, a, s, sv] {
    const Tensor& g = nodes_[id].grad;
    kernels::axpy(sv, g.data.data(), nodes_[a].grad.data.data(), g.size());
    nodes_[s].grad.data[0] +=
        kernels::dot(g.data.data(), nodes_[a].value.data.data(), g.size());
  };
  return id;
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  if (ta.cols != tb.rows)
    throw Error(ErrorCode::dimension, "matmul: inner dimensions differ");
  Tensor out(ta.rows, tb.cols);
  kernels::matmul(ta.rows, ta.cols, tb.cols, ta.data.data(), tb.data.data(),
                  out.data.data(), false);
  NodeId id = emplace(std::move(out), {a, b}, {});
  nodes_[id].back = [this, id, a, b] {
    const Tensor& g = nodes_[id].grad;
    const Tensor& va = nodes_[a].value;
    const Tensor& vb = nodes_[b].value;
    // dA += G B^T ; dB += A^T G
    kernels::matmul_a_bt(va.rows, vb.cols, vb.rows, g.data.data(),
                         vb.data.data(), nodes_[a].grad.data.data(), true);
    kernels::matmul_at_b(va.cols, va.rows, g.cols, va.data.data(),
                         g.data.data(), nodes_[b].grad.data.data(), true);
  };
  return id;
}

NodeId Graph::matmul_nt(NodeId a, NodeId b) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  if (ta.cols != tb.cols)
    throw Error(ErrorCode::dimension, "matmul_nt: inner dimensions differ");
  Tensor out(ta.rows, tb.rows);
  kernels::matmul_a_bt(ta.rows, ta.cols, tb.rows, ta.data.data(),
                       tb.data.data(), out.data.data(), false);
  NodeId id = emplace(std::move(out), {a, b}, {});
  nodes_[id].back = [this, id, a, b] {
    const Tensor& g = nodes_[id].grad;  // [m, n]
    const Tensor& va = nodes_[a].value; // [m, k]
    const Tensor& vb = nodes_[b].value; // [n, k]
    // dA += G B ; dB += G^T A
    kernels::matmul(g.rows, g.cols, vb.cols, g.data.data(), vb.data.data(),
                    nodes_[a].grad.data.data(), true);
    kernels::matmul_at_b(g.cols, g.rows, va.cols, g.data.data(),
                         va.data.data(), nodes_[b].grad.data.data(), true);
  };
  return id;
}

NodeId Graph::transpose(NodeId a) {
  const Tensor& ta = nodes_[a].value;
  Tensor out(ta.cols, ta.rows);
  for (size_t r = 0; r < ta.rows; ++r)
    for (size_t c = 0; c < ta.cols; ++c) out.at(c, r) = ta.at(r, c);
  NodeId id = emplace(std::move(out), {a}, {});
  nodes_[id].back = [this, id, a] {
    const Tensor& g = nodes_[id].grad;
    Tensor& ga = nodes_[a].grad;
    for (size_t r = 0; r < g.rows; ++r)
      for (size_t c = 0; c < g.cols; ++c) ga.at(c, r) += g.at(r, c);
  };
  return id;
}

NodeId Graph::rows(NodeId a, size_t r0, size_t r1) {
  const Tensor& ta = nodes_[a].value;
  if (r0 >= r1 || r1 > ta.rows)
    throw Error(ErrorCode::dimension, "rows: bad range");
  Tensor out(r1 - r0, ta.cols);
  std::copy(ta.row(r0), ta.row(r0) + out.size(), out.data.data());
  NodeId id = emplace(std::move(out), {a}, {});
  nodes_[id].back = [this, id, a, r0] {
    const Tensor& g = nodes_[id].grad;
    kernels::axpy(1.0, g.data.data(), nodes_[a].grad.row(r0), g.size());
  };
  return id;
}

NodeId Graph::cols(NodeId a, size_t c0, size_t c1) {
  const Tensor& ta = nodes_[a].value;
  if (c0 >= c1 || c1 > ta.cols)
    throw Error(ErrorCode::dimension, "cols: bad range");
  Tensor out(ta.rows, c1 - c0);
  for (size_t r = 0; r < ta.rows; ++r)
    std::copy(ta.row(r) + c0, ta.row(r) + c1, out.row(r));
  NodeId id = emplace(std::move(out), {a}, {});
  nodes_[id].back = [this, id, a, c0] {
    const Tensor& g = nodes_[id].grad;
    Tensor& ga = nodes_[a].grad;
    for (size_t r = 0; r < g.rows; ++r)
      kernels::axpy(1.0, g.row(r), ga.row(r) + c0, g.cols);
  };
  return id;
}

NodeId Graph::concat_rows(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw Error(ErrorCode::dimension, "concat_rows: empty");
  size_t cols_n = nodes_[parts[0]].value.cols;
  size_t total = 0;
  for (NodeId p : parts) {
    if (nodes_[p].value.cols != cols_n)
      throw Error(ErrorCode::dimension, "concat_rows: column mismatch");
    total += nodes_[p].value.rows;
  }
  Tensor out(total, cols_n);
  size_t r = 0;
  for (NodeId p : parts) {
    const Tensor& tp = nodes_[p].value;
    std::copy(tp.data.begin(), tp.data.end(), out.row(r));
    r += tp.rows;
  }
  NodeId id = emplace(std::move(out), parts, {});
  std::vector<NodeId> ps = parts;
  nodes_[id].back = [this, id, ps] {
    const Tensor& g = nodes_[id].grad;
    size_t r = 0;
    for (NodeId p : ps) {
      Tensor& gp = nodes_[p].grad;
      kernels::axpy(1.0, g.row(r), gp.data.data(), gp.size());
      r += gp.rows;
    }
  };
  return id;
}

NodeId Graph::concat_cols(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw Error(ErrorCode::dimension, "concat_cols: empty");
  size_t rows_n = nodes_[parts[0]].value.rows;
  size_t total = 0;
  for (NodeId p : parts) {
    if (nodes_[p].value.rows != rows_n)
      throw Error(ErrorCode::dimension, "concat_cols: row mismatch");
    total += nodes_[p].value.cols;
  }
  Tensor out(rows_n, total);
  size_t c = 0;
  for (NodeId p : parts) {
    const Tensor& tp = nodes_[p].value;
    for (size_t r = 0; r < rows_n; ++r)
      std::copy(tp.row(r), tp.row(r) + tp.cols, out.row(r) + c);
    c += tp.cols;
  }
  NodeId id = emplace(std::move(out), parts, {});
  std::vector<NodeId> ps = parts;
  nodes_[id].back = [this, id, ps] {
    const Tensor& g = nodes_[id].grad;
    size_t c = 0;
    for (NodeId p : ps) {
      Tensor& gp = nodes_[p].grad;
      for (size_t r = 0; r < g.rows; ++r)
        kernels::axpy(1.0, g.row(r) + c, gp.row(r), gp.cols);
      c += gp.cols;
    }
  };
  return id;
}

NodeId Graph::gelu(NodeId a) {
  const Tensor& ta = nodes_[a].value;
  Tensor out(ta.rows, ta.cols);
  for (size_t i = 0; i < ta.size(); ++i) {
    double x = ta.data[i];
    double t = std::tanh(kGeluC * (x + kGeluA * x * x * x));
    out.data[i] = 0.5 * x * (1.0 + t);
  }
  NodeId id = emplace(std::move(out), {a}, {});
  nodes_[id].back = [this, id, a] {
    const Tensor& g = nodes_[id].grad;
    const Tensor& x = nodes_[a].value;
    Tensor& ga = nodes_[a].grad;
    for (size_t i = 0; i < g.size(); ++i) {
      double xi = x.data[i];
      double u = kGeluC * (xi + kGeluA * xi * xi * xi);
      double t = std::tanh(u);
      double du = kGeluC * (1.0 + 3.0 * kGeluA * xi * xi);
      double d = 0.5 * (1.0 + t) + 0.5 * xi * (1.0 - t * t) * du;
      ga.data[i] = std::fma(g.data[i], d, ga.data[i]);
    }
  };
  return id;
}

NodeId Graph::exp(NodeId a) {
  const Tensor& ta = nodes_[a].value;
  Tensor out(ta.rows, ta.cols);
  for (size_t i = 0; i < ta.size(); ++i) out.data[i] = std::exp(ta.data[i]);
  NodeId id = emplace(std::move(out), {a}, {});
  nodes_[id].back = [this, id, a] {
    const Tensor& g = nodes_[id].grad;
    const Tensor& y = nodes_[id].value;
    Tensor& ga = nodes_[a].grad;
    for (size_t i = 0; i < g.size(); ++i)
      ga.data[i] = std::fma(g.data[i], y.data[i], ga.data[i]);
  };
  return id;
}

NodeId Graph::layer_norm(NodeId x, NodeId gain, NodeId bias, double eps) {
  const Tensor& tx = nodes_[x].value;
  const Tensor& tg = nodes_[gain].value;
  const Tensor& tb = nodes_[bias].value;
  if (tg.rows != 1 || tg.cols != tx.cols || tb.rows != 1 || tb.cols != tx.cols)
    throw Error(ErrorCode::dimension, "layer_norm: gain/bias must be 1 x cols");
  size_t n = tx.cols;
  Tensor out(tx.rows, n);
  // Saved for backward: normalized activations and 1/std per row.
  auto xhat = std::make_shared<Tensor>(tx.rows, n);
  auto inv_std = std::make_shared<std::vector<double>>(tx.rows);
  for (size_t r = 0; r < tx.rows; ++r) {
    const double* px = tx.row(r);
    double mean = kernels::vsum(px, n) / n;
    double var = 0.0;
    for (size_t c = 0; c < n; ++c) {
      double d = px[c] - mean;
      var += d * d;
    }
    var /= n;
    double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = is;
    for (size_t c = 0; c < n; ++c) {
      double xh = (px[c] - mean) * is;
      xhat->at(r, c) = xh;
      out.at(r, c) = std::fma(xh, tg.data[c], tb.data[c]);
    }
  }
  NodeId id = emplace(std::move(out), {x, gain, bias}, {});
  nodes_[id].back = [this, id, x, gain, bias, xhat, inv_std] {
    const Tensor& g = nodes_[id].grad;
    const Tensor& tg = nodes_[gain].value;
    Tensor& gx = nodes_[x].grad;
    Tensor& gg = nodes_[gain].grad;
    Tensor& gb = nodes_[bias].grad;
    size_t n = g.cols;
    for (size_t r = 0; r < g.rows; ++r) {
      const double* gr = g.row(r);
      const double* xh = xhat->row(r);
      double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
      for (size_t c = 0; c < n; ++c) {
        gg.data[c] = std::fma(gr[c], xh[c], gg.data[c]);
        gb.data[c] += gr[c];
        double dxh = gr[c] * tg.data[c];
        sum_dxhat += dxh;
        sum_dxhat_xhat = std::fma(dxh, xh[c], sum_dxhat_xhat);
      }
      double is = (*inv_std)[r];
      double m1 = sum_dxhat / n;
      double m2 = sum_dxhat_xhat / n;
      double* gxr = gx.row(r);
      for (size_t c = 0; c < n; ++c) {
        double dxh = gr[c] * tg.data[c];
        gxr[c] += is * (dxh - m1 - xh[c] * m2);
      }
    }
  };
  return id;
}

NodeId Graph::softmax_rows(NodeId a) {
  const Tensor& ta = nodes_[a].value;
  Tensor out(ta.rows, ta.cols);
  for (size_t r = 0; r < ta.rows; ++r) {
    const double* pr = ta.row(r);
    double mx = kernels::vmax(pr, ta.cols);
    double sum = 0.0;
    double* po = out.row(r);
    for (size_t c = 0; c < ta.cols; ++c) {
      po[c] = std::exp(pr[c] - mx);
      sum += po[c];
    }
    kernels::scal(1.0 / sum, po, ta.cols);
  }
  NodeId id = emplace(std::move(out), {a}, {});
  nodes_[id].back = [this, id, a] {
    const Tensor& g = nodes_[id].grad;
    const Tensor& p = nodes_[id].value;
    Tensor& ga = nodes_[a].grad;
    for (size_t r = 0; r < g.rows; ++r) {
      const double* gr = g.row(r);
      const double* pr = p.row(r);
      double dotv = kernels::dot(gr, pr, g.cols);
      double* gar = ga.row(r);
      for (size_t c = 0; c < g.cols; ++c)
        gar[c] = std::fma(pr[c], gr[c] - dotv, gar[c]);
    }
  };
  return id;
}

NodeId Graph::l2_normalize_rows(NodeId a, double eps) {
  const Tensor& ta = nodes_[a].value;
  Tensor out(ta.rows, ta.cols);
  auto inv_norm = std::make_shared<std::vector<double>>(ta.rows);
  for (size_t r = 0; r < ta.rows; ++r) {
    const double* pr = ta.row(r);
    double nrm = std::sqrt(kernels::dot(pr, pr, ta.cols) + eps);
    double in = 1.0 / nrm;
    (*inv_norm)[r] = in;
    for (size_t c = 0; c < ta.cols; ++c) out.at(r, c) = pr[c] * in;
  }
  NodeId id = emplace(std::move(out), {a}, {});
  nodes_[id].back = [this, id, a, inv_norm] {
    const Tensor& g = nodes_[id].grad;
    const Tensor& z = nodes_[id].value;
    Tensor& ga = nodes_[a].grad;
    for (size_t r = 0; r < g.rows; ++r) {
      const double* gr = g.row(r);
      const double* zr = z.row(r);
      double dotv = kernels::dot(gr, zr, g.cols);
      double in = (*inv_norm)[r];
      double* gar = ga.row(r);
      for (size_t c = 0; c < g.cols; ++c)
        gar[c] += in * (gr[c] - zr[c] * dotv);
    }
  };
  return id;
}

NodeId Graph::add_colbias_const(NodeId a, const std::vector<double>& bias) {
  const Tensor& ta = nodes_[a].value;
  if (bias.size() != ta.cols)
    throw Error(ErrorCode::dimension, "add_colbias_const: size mismatch");
  Tensor out = ta;
  for (size_t r = 0; r < ta.rows; ++r)
    kernels::axpy(1.0, bias.data(), out.row(r), ta.cols);
  NodeId id = emplace(std::move(out), {a}, {});
  nodes_[id].back = [this, id, a] {
    kernels::axpy(1.0, nodes_[id].grad.data.data(), nodes_[a].grad.data.data(),
                  nodes_[id].grad.size());
  };
  return id;
}

NodeId Graph::embedding(NodeId table, const std::vector<int>& ids) {
  const Tensor& tt = nodes_[table].value;
  Tensor out(ids.size(), tt.cols);
  for (size_t r = 0; r < ids.size(); ++r) {
    int tok = ids[r];
    if (tok < 0 || static_cast<size_t>(tok) >= tt.rows)
      throw Error(ErrorCode::dimension, "embedding: id out of range");
    std::copy(tt.row(tok), tt.row(tok) + tt.cols, out.row(r));
  }
  NodeId id = emplace(std::move(out), {table}, {});
  std::vector<int> ids_copy = ids;
  nodes_[id].back = [this, id, table, ids_copy] {
    const Tensor& g = nodes_[id].grad;
    Tensor& gt = nodes_[table].grad;
    for (size_t r = 0; r < ids_copy.size(); ++r)
      kernels::axpy(1.0, g.row(r), gt.row(ids_copy[r]), g.cols);
  };
  return id;
}

NodeId Graph::replace_rows(NodeId x, const std::vector<uint8_t>& masked,
                           NodeId row) {
  const Tensor& tx = nodes_[x].value;
  const Tensor& tr = nodes_[row].value;
  if (masked.size() != tx.rows)
    throw Error(ErrorCode::dimension, "replace_rows: flag count mismatch");
  if (tr.rows != 1 || tr.cols != tx.cols)
    throw Error(ErrorCode::dimension, "replace_rows: row must be 1 x cols");
  Tensor out = tx;
  for (size_t r = 0; r < tx.rows; ++r)
    if (masked[r]) std::copy(tr.data.begin(), tr.data.end(), out.row(r));
  NodeId id = emplace(std::move(out), {x, row}, {});
  std::vector<uint8_t> m = masked;
  nodes_[id].back = [this, id, x, row, m] {
    const Tensor& g = nodes_[id].grad;
    Tensor& gx = nodes_[x].grad;
    Tensor& grow = nodes_[row].grad;
    for (size_t r = 0; r < g.rows; ++r) {
      if (m[r])
        kernels::axpy(1.0, g.row(r), grow.data.data(), g.cols);
      else
        kernels::axpy(1.0, g.row(r), gx.row(r), g.cols);
    }
  };
  return id;
}

NodeId Graph::sum_all(NodeId a) {
  Tensor out = Tensor::scalar(
      kernels::vsum(nodes_[a].value.data.data(), nodes_[a].value.size()));
  NodeId id = emplace(std::move(out), {a}, {});
  nodes_[id].back = [this, id, a] {
    double g = nodes_[id].grad.data[0];
    Tensor& ga = nodes_[a].grad;
    for (size_t i = 0; i < ga.size(); ++i) ga.data[i] += g;
  };
  return id;
}

NodeId Graph::diag(NodeId a) {
  const Tensor& ta = nodes_[a].value;
  if (ta.rows != ta.cols)
    throw Error(ErrorCode::dimension, "diag: matrix must be square");
  Tensor out(ta.rows, 1);
  for (size_t r = 0; r < ta.rows; ++r) out.data[r] = ta.at(r, r);
  NodeId id = emplace(std::move(out), {a}, {});
  nodes_[id].back = [this, id, a] {
    const Tensor& g = nodes_[id].grad;
    Tensor& ga = nodes_[a].grad;
    for (size_t r = 0; r < g.rows; ++r) ga.at(r, r) += g.data[r];
  };
  return id;
}

NodeId Graph::logsumexp_rows(NodeId a) {
  const Tensor& ta = nodes_[a].value;
  Tensor out(ta.rows, 1);
  // softmax of each row saved for backward
  auto probs = std::make_shared<Tensor>(ta.rows, ta.cols);
  for (size_t r = 0; r < ta.rows; ++r) {
    const double* pr = ta.row(r);
    double mx = kernels::vmax(pr, ta.cols);
    double sum = 0.0;
    double* pp = probs->row(r);
    for (size_t c = 0; c < ta.cols; ++c) {
      pp[c] = std::exp(pr[c] - mx);
      sum += pp[c];
    }
    kernels::scal(1.0 / sum, pp, ta.cols);
    out.data[r] = mx + std::log(sum);
  }
  NodeId id = emplace(std::move(out), {a}, {});
  nodes_[id].back = [this, id, a, probs] {
    const Tensor& g = nodes_[id].grad;
    Tensor& ga = nodes_[a].grad;
    for (size_t r = 0; r < g.rows; ++r)
      kernels::axpy(g.data[r], probs->row(r), ga.row(r), ga.cols);
  };
  return id;
}

NodeId Graph::cross_entropy_rows(NodeId logits, const std::vector<int>& targets,
                                 const std::vector<uint8_t>& select) {
  const Tensor& tl = nodes_[logits].value;
  if (targets.size() != tl.rows || select.size() != tl.rows)
    throw Error(ErrorCode::dimension, "cross_entropy_rows: row count mismatch");
  size_t count = 0;
  for (uint8_t s : select) count += s;
  if (count == 0)
    throw Error(ErrorCode::domain, "cross_entropy_rows: no rows selected");
  auto probs = std::make_shared<Tensor>(tl.rows, tl.cols);
  double loss = 0.0;
  for (size_t r = 0; r < tl.rows; ++r) {
    if (!select[r]) continue;
    int t = targets[r];
    if (t < 0 || static_cast<size_t>(t) >= tl.cols)
      throw Error(ErrorCode::dimension, "cross_entropy_rows: bad target");
    const double* pr = tl.row(r);
    double mx = kernels::vmax(pr, tl.cols);
    double sum = 0.0;
    double* pp = probs->row(r);
    for (size_t c = 0; c < tl.cols; ++c) {
      pp[c] = std::exp(pr[c] - mx);
      sum += pp[c];
    }
    kernels::scal(1.0 / sum, pp, tl.cols);
    loss += mx + std::log(sum) - pr[t];
  }
  loss /= count;
  NodeId id = emplace(Tensor::scalar(loss), {logits}, {});
  std::vector<int> t_copy = targets;
  std::vector<uint8_t> s_copy = select;
  nodes_[id].back = [this, id, logits, t_copy, s_copy, probs, count] {
    double g = nodes_[id].grad.data[0] / count;
    Tensor& gl = nodes_[logits].grad;
    for (size_t r = 0; r < gl.rows; ++r) {
      if (!s_copy[r]) continue;
      kernels::axpy(g, probs->row(r), gl.row(r), gl.cols);
      gl.at(r, t_copy[r]) -= g;
    }
  };
  return id;
}

NodeId Graph::l1_masked_rows(NodeId recon, const Tensor& target,
                             const std::vector<uint8_t>& masked, double omega) {
  const Tensor& tr = nodes_[recon].value;
  if (target.rows != tr.rows || target.cols != tr.cols)
    throw Error(ErrorCode::dimension, "l1_masked_rows: target shape mismatch");
  if (masked.size() != tr.rows)
    throw Error(ErrorCode::dimension, "l1_masked_rows: flag count mismatch");
  if (omega <= 0.0)
    throw Error(ErrorCode::domain, "l1_masked_rows: omega must be positive");
  double loss = 0.0;
  for (size_t r = 0; r < tr.rows; ++r) {
    if (!masked[r]) continue;
    const double* pr = tr.row(r);
    const double* pt = target.row(r);
    for (size_t c = 0; c < tr.cols; ++c) loss += std::abs(pt[c] - pr[c]);
  }
  loss /= omega;
  NodeId id = emplace(Tensor::scalar(loss), {recon}, {});
  auto tgt = std::make_shared<Tensor>(target);
  std::vector<uint8_t> m = masked;
  nodes_[id].back = [this, id, recon, tgt, m, omega] {
    double g = nodes_[id].grad.data[0] / omega;
    const Tensor& vr = nodes_[recon].value;
    Tensor& gr = nodes_[recon].grad;
    for (size_t r = 0; r < vr.rows; ++r) {
      if (!m[r]) continue;
      const double* pr = vr.row(r);
      const double* pt = tgt->row(r);
      double* pg = gr.row(r);
      for (size_t c = 0; c < vr.cols; ++c) {
        double d = pt[c] - pr[c];
        // d(|t - x|)/dx = -sign(t - x), 0 at the tie
        if (d > 0.0)
          pg[c] -= g;
        else if (d < 0.0)
          pg[c] += g;
      }
    }
  };
  return id;
}

void Graph::backward(NodeId loss) {
  if (ran_backward_)
    throw Error(ErrorCode::usage, "backward already ran on this graph");
  ran_backward_ = true;
  if (nodes_[loss].value.size() != 1)
    throw Error(ErrorCode::usage, "backward: loss must be a scalar node");
  // Reachability from the loss, then one reverse sweep of the tape.
  std::vector<uint8_t> reach(nodes_.size(), 0);
  std::vector<NodeId> stack = {loss};
  reach[loss] = 1;
  while (!stack.empty()) {
    NodeId n = stack.back();
    stack.pop_back();
    for (NodeId p : nodes_[n].parents) {
      if (!reach[p]) {
        reach[p] = 1;
        stack.push_back(p);
      }
    }
  }
  for (size_t i = 0; i < nodes_.size(); ++i) {
    if (!reach[i]) continue;
    Node& n = nodes_[i];
    n.grad = Tensor(n.value.rows, n.value.cols);
  }
  nodes_[loss].grad.data[0] = 1.0;
  for (size_t i = nodes_.size(); i-- > 0;) {
    if (!reach[i]) continue;
    Node& n = nodes_[i];
    if (n.back) n.back();
    if (n.bound)
      kernels::axpy(1.0, n.grad.data.data(), n.bound->grad.data.data(),
                    n.grad.size());
  }
}

}  // namespace mmpt
