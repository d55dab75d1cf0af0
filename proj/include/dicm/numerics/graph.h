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

#ifndef DICM_NUMERICS_GRAPH_H_
#define DICM_NUMERICS_GRAPH_H_

#include <cstdint>
#include <functional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dicm/numerics/tensor.h"

namespace dicm::numerics {

// Handle to a node of one Graph.
struct Var {
  uint32_t id = UINT32_MAX;
  bool valid() const { return id != UINT32_MAX; }
};

// Tape-based reverse-mode autodiff. Nodes are appended in evaluation order,
// so reverse creation order is a valid topological order for backward.
// A Graph is single-threaded; independent graphs may live on different
// threads and share read-only parameter tensors.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Leaves.
  Var Constant(Tensor value);
  Var Input(Tensor value);                 // differentiable leaf, owned
  Var Param(const Tensor& value);          // differentiable leaf, borrowed
  Var ConstantRef(const Tensor& value);    // non-differentiable, borrowed

  // Operations.
  Var Linear(Var x, Var weight, Var bias);
  Var PRelu(Var x, Var alpha);
  Var SigmoidCrossEntropy(Var logit, double label);
  Var Softmax(Var v);
  Var Concat(std::span<const Var> parts);
  Var Add(Var a, Var b);
  Var Sum(std::span<const Var> parts);     // elementwise
  Var Max(std::span<const Var> parts);     // elementwise, ties go to first
  Var Scale(Var x, double factor);
  Var WeightedSum(Var weights, std::span<const Var> values);
  Var Dot(Var a, Var b);
  Var Stack(std::span<const Var> scalars);
  Var GatherSum(Var table, std::span<const uint64_t> rows);
  Var StackRows(std::span<const Var> rows);  // equal-size vectors -> matrix
  Var Flatten(Var x);                        // any shape -> vector
  Var WeightedRows(Var weights, Var matrix); // sum_k w[k] * row k

  const Tensor& Value(Var v) const;
  bool RequiresGrad(Var v) const { return node(v).requires_grad; }

  // Reverse pass from a scalar loss seeded with 1.
  void Backward(Var loss);
  // Reverse pass from arbitrary seeds (e.g. upstream gradients of outputs).
  void Backward(std::span<const std::pair<Var, Tensor>> seeds);

  // Gradient accumulated into |v| by the last backward pass; zeros if the
  // node was not reached.
  Tensor Grad(Var v) const;

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    const Tensor* borrowed = nullptr;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    std::function<void(Graph&, uint32_t)> backward;
  };

  const Node& node(Var v) const;
  Node& node(Var v);
  const Tensor& value(uint32_t id) const {
    const Node& n = nodes_[id];
    return n.borrowed ? *n.borrowed : n.value;
  }
  Tensor& grad_of(uint32_t id);
  Var Push(Tensor value, bool requires_grad,
           std::function<void(Graph&, uint32_t)> backward);
  bool AnyRequiresGrad(std::span<const Var> vars) const;
  void RunBackward(uint32_t last);

  std::vector<Node> nodes_;
};

// Maps parameter tensors (by address) to the graph leaves bound to them.
class Binder {
 public:
  void Bind(const Tensor& param, Var v) { vars_[&param] = v; }
  Var operator()(const Tensor& param) const;
  bool Contains(const Tensor& param) const { return vars_.count(&param) > 0; }

 private:
  std::unordered_map<const Tensor*, Var> vars_;
};

}  // namespace dicm::numerics

#endif  // DICM_NUMERICS_GRAPH_H_
