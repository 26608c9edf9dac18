// Copyright 2026 The ckad Authors.
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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ckad {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

struct TensorImpl;

// One recorded operation. The node lives on its output tensor and keeps its
// inputs alive; `seq` is the global recording index, so sorting reachable
// nodes by descending `seq` yields a valid reverse topological order.
struct Node {
  std::uint64_t seq = 0;
  std::vector<std::shared_ptr<TensorImpl>> inputs;
  // Receives the output grad; adds into the grads of `inputs`.
  std::function<void(std::span<const double> grad_out)> backward;
};

struct TensorImpl {
  Shape shape;
  std::shared_ptr<std::vector<double>> data;
  std::vector<double> grad;  // empty until first accumulated
  bool requires_grad = false;
  std::shared_ptr<Node> node;  // null for leaves

  // Grad buffer, allocated (zeroed) on first use.
  std::vector<double>& grad_buffer();
};

// Reference-semantics handle to a 64-bit float array that can take part in
// reverse-mode differentiation. Copies share storage; use `clone()` for a
// deep copy.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0, bool requires_grad = false);
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor scalar(double v, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t dim(std::size_t i) const;
  std::size_t ndim() const { return shape().size(); }
  std::size_t numel() const;

  std::span<const double> data() const;
  // Mutable access to the values; never call on a tensor whose graph is
  // still going to be differentiated.
  std::span<double> mutable_data();
  double item() const;
  double at(std::size_t flat) const { return data()[flat]; }

  bool requires_grad() const;
  // Leaf-only switch; tensors produced by ops inherit from their inputs.
  Tensor& set_requires_grad(bool on);
  bool has_grad() const;
  // Zeros when nothing has been accumulated yet.
  std::vector<double> grad() const;
  std::span<const double> grad_view() const;
  void zero_grad();

  // Shares values, drops the graph and the grad.
  Tensor detach() const;
  Tensor clone() const;

  bool is_leaf() const;
  const std::shared_ptr<TensorImpl>& impl() const { return impl_; }
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<TensorImpl> impl_;
};

// Runs reverse-mode accumulation from a one-element tensor. Leaf grads
// accumulate across calls; intermediate grads are released as they are
// consumed.
void backward(const Tensor& loss);

// Disables graph recording while alive (thread-local).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

namespace detail {

// Builds an op output. Records `backward_fn` when grad mode is on and any
// input requires grad. Throws NumericError on non-finite values.
Tensor make_result(const char* op, Shape shape, std::vector<double> values,
                   std::vector<Tensor> inputs,
                   std::function<void(std::span<const double>)> backward_fn);

// Grad buffer of an input inside a backward closure, or nullptr when that
// input does not need a grad.
double* grad_of(const std::shared_ptr<TensorImpl>& impl);

}  // namespace detail

}  // namespace ckad
