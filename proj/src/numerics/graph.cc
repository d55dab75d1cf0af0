/* Copyright 2026 The DICM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "dicm/numerics/graph.h"

#include <algorithm>
#include <cmath>

#include "dicm/common/error.h"
#include "dicm/numerics/ops.h"

namespace dicm::numerics {

const Graph::Node& Graph::node(Var v) const {
  if (v.id >= nodes_.size()) throw ContractError("invalid graph variable");
  return nodes_[v.id];
}

Graph::Node& Graph::node(Var v) {
  if (v.id >= nodes_.size()) throw ContractError("invalid graph variable");
  return nodes_[v.id];
}

Tensor& Graph::grad_of(uint32_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Tensor(value(id).shape());
    n.has_grad = true;
  }
  return n.grad;
}

Var Graph::Push(Tensor value, bool requires_grad,
                std::function<void(Graph&, uint32_t)> backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<uint32_t>(nodes_.size() - 1)};
}

bool Graph::AnyRequiresGrad(std::span<const Var> vars) const {
  return std::any_of(vars.begin(), vars.end(),
                     [this](Var v) { return node(v).requires_grad; });
}

Var Graph::Constant(Tensor value) { return Push(std::move(value), false, {}); }

Var Graph::Input(Tensor value) { return Push(std::move(value), true, {}); }

Var Graph::Param(const Tensor& value) {
  Node n;
  n.borrowed = &value;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var{static_cast<uint32_t>(nodes_.size() - 1)};
}

Var Graph::ConstantRef(const Tensor& value) {
  Node n;
  n.borrowed = &value;
  nodes_.push_back(std::move(n));
  return Var{static_cast<uint32_t>(nodes_.size() - 1)};
}

const Tensor& Graph::Value(Var v) const {
  node(v);
  return value(v.id);
}

Var Graph::Linear(Var x, Var weight, Var bias) {
  Tensor y = numerics::Linear(Value(x), Value(weight), Value(bias));
  const Var in[] = {x, weight, bias};
  return Push(std::move(y), AnyRequiresGrad(in), [x, weight, bias](Graph& g, uint32_t self) {
    const Tensor& gy = g.nodes_[self].grad;
    const Tensor& xv = g.value(x.id);
    const Tensor& w = g.value(weight.id);
    const size_t m = w.rows();
    const size_t n = w.cols();
    const size_t batch = xv.size() / n;
    const bool want_x = g.nodes_[x.id].requires_grad;
    const bool want_w = g.nodes_[weight.id].requires_grad;
    const bool want_b = g.nodes_[bias.id].requires_grad;
    double* gx = want_x ? g.grad_of(x.id).data().data() : nullptr;
    double* gw = want_w ? g.grad_of(weight.id).data().data() : nullptr;
    double* gb = want_b ? g.grad_of(bias.id).data().data() : nullptr;
    const double* wp = w.data().data();
    for (size_t r = 0; r < batch; ++r) {
      const double* xr = xv.data().data() + r * n;
      const double* gyr = gy.data().data() + r * m;
      for (size_t i = 0; i < m; ++i) {
        const double gi = gyr[i];
        if (gi == 0.0) continue;
        if (gb) gb[i] += gi;
        if (gx) {
          const double* wr = wp + i * n;
          double* gxr = gx + r * n;
          for (size_t j = 0; j < n; ++j) gxr[j] += wr[j] * gi;
        }
        if (gw) {
          double* gwr = gw + i * n;
          for (size_t j = 0; j < n; ++j) gwr[j] += gi * xr[j];
        }
      }
    }
  });
}

Var Graph::PRelu(Var x, Var alpha) {
  Tensor y = numerics::PRelu(Value(x), Value(alpha));
  const Var in[] = {x, alpha};
  return Push(std::move(y), AnyRequiresGrad(in), [x, alpha](Graph& g, uint32_t self) {
    const Tensor& gy = g.nodes_[self].grad;
    const Tensor& xv = g.value(x.id);
    const Tensor& a = g.value(alpha.id);
    const size_t period = PReluPeriod(xv, a);
    if (g.nodes_[x.id].requires_grad) {
      Tensor& gx = g.grad_of(x.id);
      for (size_t i = 0; i < xv.size(); ++i) {
        gx[i] += xv[i] > 0.0 ? gy[i] : gy[i] * a[i % period];
      }
    }
    if (g.nodes_[alpha.id].requires_grad) {
      Tensor& ga = g.grad_of(alpha.id);
      for (size_t i = 0; i < xv.size(); ++i) {
        if (xv[i] < 0.0) ga[i % period] += gy[i] * xv[i];
      }
    }
  });
}

Var Graph::SigmoidCrossEntropy(Var logit, double label) {
  const Tensor& z = Value(logit);
  if (!z.is_scalar()) {
    throw DimensionError("sigmoid cross-entropy expects a scalar logit, got " +
                         z.ShapeString());
  }
  double loss = numerics::SigmoidCrossEntropy(z[0], label);
  const Var in[] = {logit};
  return Push(Tensor::Scalar(loss), AnyRequiresGrad(in),
              [logit, label](Graph& g, uint32_t self) {
                double gy = g.nodes_[self].grad[0];
                double zv = g.value(logit.id)[0];
                g.grad_of(logit.id)[0] += gy * (Sigmoid(zv) - label);
              });
}

Var Graph::Softmax(Var v) {
  Tensor y = numerics::Softmax(Value(v));
  const Var in[] = {v};
  return Push(std::move(y), AnyRequiresGrad(in), [v](Graph& g, uint32_t self) {
    const Tensor& gy = g.nodes_[self].grad;
    const Tensor& y = g.nodes_[self].value;
    double inner = 0.0;
    for (size_t i = 0; i < y.size(); ++i) inner += gy[i] * y[i];
    Tensor& gv = g.grad_of(v.id);
    for (size_t i = 0; i < y.size(); ++i) gv[i] += y[i] * (gy[i] - inner);
  });
}

Var Graph::Concat(std::span<const Var> parts) {
  size_t total = 0;
  for (Var p : parts) total += Value(p).size();
  Tensor y({total});
  size_t off = 0;
  for (Var p : parts) {
    const Tensor& pv = Value(p);
    std::copy(pv.data().begin(), pv.data().end(), y.data().begin() + off);
    off += pv.size();
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return Push(std::move(y), AnyRequiresGrad(parts), [ps = std::move(ps)](Graph& g, uint32_t self) {
    const Tensor& gy = g.nodes_[self].grad;
    size_t off = 0;
    for (Var p : ps) {
      const size_t n = g.value(p.id).size();
      if (g.nodes_[p.id].requires_grad) {
        Tensor& gp = g.grad_of(p.id);
        for (size_t i = 0; i < n; ++i) gp[i] += gy[off + i];
      }
      off += n;
    }
  });
}

Var Graph::Add(Var a, Var b) {
  const Var in[] = {a, b};
  return Sum(in);
}

Var Graph::Sum(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("sum of zero tensors");
  Tensor y = Value(parts[0]);
  for (size_t k = 1; k < parts.size(); ++k) {
    const Tensor& pv = Value(parts[k]);
    if (pv.size() != y.size()) {
      throw DimensionError("sum: " + pv.ShapeString() + " vs " + y.ShapeString());
    }
    y.AddInPlace(pv);
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return Push(std::move(y), AnyRequiresGrad(parts), [ps = std::move(ps)](Graph& g, uint32_t self) {
    for (Var p : ps) {
      if (!g.nodes_[p.id].requires_grad) continue;
      // Re-fetch: grad_of may grow nothing, but keep the reference local.
      g.grad_of(p.id).AddInPlace(g.nodes_[self].grad);
    }
  });
}

Var Graph::Max(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("max of zero tensors");
  const size_t n = Value(parts[0]).size();
  Tensor y = Value(parts[0]);
  std::vector<uint32_t> argmax(n, 0);
  for (size_t k = 1; k < parts.size(); ++k) {
    const Tensor& pv = Value(parts[k]);
    if (pv.size() != n) {
      throw DimensionError("max: " + pv.ShapeString() + " vs " + y.ShapeString());
    }
    for (size_t i = 0; i < n; ++i) {
      if (pv[i] > y[i]) {
        y[i] = pv[i];
        argmax[i] = static_cast<uint32_t>(k);
      }
    }
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return Push(std::move(y), AnyRequiresGrad(parts),
              [ps = std::move(ps), argmax = std::move(argmax)](Graph& g, uint32_t self) {
                const Tensor& gy = g.nodes_[self].grad;
                for (size_t i = 0; i < argmax.size(); ++i) {
                  Var p = ps[argmax[i]];
                  if (g.nodes_[p.id].requires_grad) g.grad_of(p.id)[i] += gy[i];
                }
              });
}

Var Graph::Scale(Var x, double factor) {
  Tensor y = Value(x);
  y.ScaleInPlace(factor);
  const Var in[] = {x};
  return Push(std::move(y), AnyRequiresGrad(in), [x, factor](Graph& g, uint32_t self) {
    const Tensor& gy = g.nodes_[self].grad;
    Tensor& gx = g.grad_of(x.id);
    for (size_t i = 0; i < gy.size(); ++i) gx[i] += factor * gy[i];
  });
}

Var Graph::WeightedSum(Var weights, std::span<const Var> values) {
  const Tensor& w = Value(weights);
  if (values.empty() || w.size() != values.size()) {
    throw DimensionError("weighted sum: " + std::to_string(w.size()) +
                         " weights for " + std::to_string(values.size()) +
                         " values");
  }
  const size_t n = Value(values[0]).size();
  Tensor y({n});
  for (size_t k = 0; k < values.size(); ++k) {
    const Tensor& vk = Value(values[k]);
    if (vk.size() != n) {
      throw DimensionError("weighted sum: value " + vk.ShapeString() +
                           " vs " + y.ShapeString());
    }
    for (size_t i = 0; i < n; ++i) y[i] += w[k] * vk[i];
  }
  std::vector<Var> vs(values.begin(), values.end());
  const bool rg = node(weights).requires_grad || AnyRequiresGrad(values);
  return Push(std::move(y), rg, [weights, vs = std::move(vs)](Graph& g, uint32_t self) {
    const Tensor& gy = g.nodes_[self].grad;
    const Tensor& w = g.value(weights.id);
    const bool wg = g.nodes_[weights.id].requires_grad;
    for (size_t k = 0; k < vs.size(); ++k) {
      const Tensor& vk = g.value(vs[k].id);
      if (wg) {
        double s = 0.0;
        for (size_t i = 0; i < vk.size(); ++i) s += gy[i] * vk[i];
        g.grad_of(weights.id)[k] += s;
      }
      if (g.nodes_[vs[k].id].requires_grad) {
        Tensor& gv = g.grad_of(vs[k].id);
        for (size_t i = 0; i < vk.size(); ++i) gv[i] += w[k] * gy[i];
      }
    }
  });
}

Var Graph::Dot(Var a, Var b) {
  double s = numerics::Dot(Value(a), Value(b));
  const Var in[] = {a, b};
  return Push(Tensor::Scalar(s), AnyRequiresGrad(in), [a, b](Graph& g, uint32_t self) {
    const double gy = g.nodes_[self].grad[0];
    const Tensor& av = g.value(a.id);
    const Tensor& bv = g.value(b.id);
    if (g.nodes_[a.id].requires_grad) {
      Tensor& ga = g.grad_of(a.id);
      for (size_t i = 0; i < av.size(); ++i) ga[i] += gy * bv[i];
    }
    if (g.nodes_[b.id].requires_grad) {
      Tensor& gb = g.grad_of(b.id);
      for (size_t i = 0; i < bv.size(); ++i) gb[i] += gy * av[i];
    }
  });
}

Var Graph::Stack(std::span<const Var> scalars) {
  Tensor y({scalars.size()});
  for (size_t k = 0; k < scalars.size(); ++k) {
    const Tensor& s = Value(scalars[k]);
    if (!s.is_scalar()) {
      throw DimensionError("stack expects scalars, got " + s.ShapeString());
    }
    y[k] = s[0];
  }
  std::vector<Var> ss(scalars.begin(), scalars.end());
  return Push(std::move(y), AnyRequiresGrad(scalars), [ss = std::move(ss)](Graph& g, uint32_t self) {
    const Tensor& gy = g.nodes_[self].grad;
    for (size_t k = 0; k < ss.size(); ++k) {
      if (g.nodes_[ss[k].id].requires_grad) g.grad_of(ss[k].id)[0] += gy[k];
    }
  });
}

Var Graph::GatherSum(Var table, std::span<const uint64_t> rows) {
  Tensor y = numerics::GatherSum(Value(table), rows);
  std::vector<uint64_t> rs(rows.begin(), rows.end());
  const Var in[] = {table};
  return Push(std::move(y), AnyRequiresGrad(in), [table, rs = std::move(rs)](Graph& g, uint32_t self) {
    const Tensor& gy = g.nodes_[self].grad;
    Tensor& gt = g.grad_of(table.id);
    for (uint64_t r : rs) {
      auto dst = gt.row(static_cast<size_t>(r));
      for (size_t j = 0; j < dst.size(); ++j) dst[j] += gy[j];
    }
  });
}

Var Graph::StackRows(std::span<const Var> rows) {
  if (rows.empty()) throw DimensionError("stack rows: no rows");
  const size_t n = Value(rows[0]).size();
  Tensor y({rows.size(), n});
  for (size_t k = 0; k < rows.size(); ++k) {
    const Tensor& r = Value(rows[k]);
    if (r.size() != n) {
      throw DimensionError("stack rows: row " + r.ShapeString() + " vs width " +
                           std::to_string(n));
    }
    std::copy(r.data().begin(), r.data().end(), y.row(k).begin());
  }
  std::vector<Var> rs(rows.begin(), rows.end());
  return Push(std::move(y), AnyRequiresGrad(rows), [rs = std::move(rs)](Graph& g, uint32_t self) {
    const Tensor& gy = g.nodes_[self].grad;
    for (size_t k = 0; k < rs.size(); ++k) {
      if (!g.nodes_[rs[k].id].requires_grad) continue;
      Tensor& gr = g.grad_of(rs[k].id);
      auto src = gy.row(k);
      for (size_t j = 0; j < src.size(); ++j) gr[j] += src[j];
    }
  });
}

Var Graph::Flatten(Var x) {
  const Tensor& xv = Value(x);
  Tensor y({xv.size()}, xv.values());
  const Var in[] = {x};
  return Push(std::move(y), AnyRequiresGrad(in), [x](Graph& g, uint32_t self) {
    const Tensor& gy = g.nodes_[self].grad;
    Tensor& gx = g.grad_of(x.id);
    for (size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
  });
}

Var Graph::WeightedRows(Var weights, Var matrix) {
  const Tensor& w = Value(weights);
  const Tensor& mv = Value(matrix);
  if (mv.rank() != 2 || w.size() != mv.rows()) {
    throw DimensionError("weighted rows: weights " + w.ShapeString() +
                         " vs matrix " + mv.ShapeString());
  }
  const size_t n = mv.cols();
  Tensor y({n});
  for (size_t k = 0; k < mv.rows(); ++k) {
    auto r = mv.row(k);
    for (size_t i = 0; i < n; ++i) y[i] += w[k] * r[i];
  }
  const Var in[] = {weights, matrix};
  return Push(std::move(y), AnyRequiresGrad(in), [weights, matrix](Graph& g, uint32_t self) {
    const Tensor& gy = g.nodes_[self].grad;
    const Tensor& w = g.value(weights.id);
    const Tensor& mv = g.value(matrix.id);
    const size_t n = mv.cols();
    if (g.nodes_[weights.id].requires_grad) {
      Tensor& gw = g.grad_of(weights.id);
      for (size_t k = 0; k < mv.rows(); ++k) {
        auto r = mv.row(k);
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) s += gy[i] * r[i];
        gw[k] += s;
      }
    }
    if (g.nodes_[matrix.id].requires_grad) {
      Tensor& gm = g.grad_of(matrix.id);
      for (size_t k = 0; k < mv.rows(); ++k) {
        auto r = gm.row(k);
        for (size_t i = 0; i < n; ++i) r[i] += w[k] * gy[i];
      }
    }
  });
}

void Graph::RunBackward(uint32_t last) {
  for (uint32_t id = last + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.has_grad || !n.backward) continue;
    n.backward(*this, id);
  }
}

void Graph::Backward(Var loss) {
  const Tensor& lv = Value(loss);
  if (!lv.is_scalar()) {
    throw ContractError("backward requires a scalar loss, got shape " +
                        lv.ShapeString());
  }
  const std::pair<Var, Tensor> seed[] = {{loss, Tensor::Scalar(1.0)}};
  Backward(seed);
}

void Graph::Backward(std::span<const std::pair<Var, Tensor>> seeds) {
  for (Node& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor();
  }
  uint32_t last = 0;
  for (const auto& [v, seed] : seeds) {
    Node& n = node(v);
    if (seed.size() != value(v.id).size()) {
      throw DimensionError("gradient seed " + seed.ShapeString() +
                           " does not match node " + value(v.id).ShapeString());
    }
    if (!n.requires_grad) continue;
    grad_of(v.id).AddInPlace(seed);
    last = std::max(last, v.id);
  }
  if (!nodes_.empty()) RunBackward(last);
}

Tensor Graph::Grad(Var v) const {
  const Node& n = node(v);
  if (n.has_grad) return n.grad;
  return Tensor(value(v.id).shape());
}

Var Binder::operator()(const Tensor& param) const {
  auto it = vars_.find(&param);
  if (it == vars_.end()) throw ContractError("parameter not bound to graph");
  return it->second;
}

}  // namespace dicm::numerics
