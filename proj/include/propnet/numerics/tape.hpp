#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "propnet/numerics/tensor.hpp"

namespace propnet {

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; valid while the
// owning tape is alive. value() references stay valid until the next
// node is recorded.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t id() const noexcept { return id_; }
  Tape* tape() const noexcept { return tape_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Trainable tensor living outside any tape. Gradients from every tape that
// used the parameter are summed into `grad` until zero_grad().
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor value);

  void zero_grad();

  std::string name;
  Tensor value;
  Tensor grad;
};

// Reverse-mode differentiation tape. Operations append nodes in evaluation
// order, so the node list is topologically sorted by construction and
// backward() only has to walk it in reverse. A tape is single-threaded.
class Tape {
 public:
  // Receives the gradient of the node's output and scatters it into the
  // inputs through grad_target().
  using BackwardFn = std::function<void(Tape&, const Tensor& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);
  Var parameter(Parameter& param);

  // Append an operation node. The node requires a gradient iff any input does.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var record(Tensor value, const std::vector<Var>& inputs, BackwardFn backward);

  // Propagate d(loss)/d(node) for every node, then add parameter-leaf
  // gradients into their Parameter. A second call without
  // reset_gradients() throws.
  void backward(Var loss);
  void reset_gradients();

  bool requires_grad(Var v) const;
  // Zero-filled tensor of the right shape if no gradient reached the node.
  Tensor grad(Var v) const;

  // For backward rules: gradient buffer of `input`, allocated on first use,
  // or nullptr when the input does not participate in differentiation.
  Tensor* grad_target(Var input);

  const Tensor& value(std::size_t id) const;
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };

  void check_owned(Var v, const char* what) const;

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace propnet
