#include "propnet/numerics/tape.hpp"

#include "propnet/error.hpp"

namespace propnet {

const Tensor& Var::value() const {
  if (!tape_) throw TapeError("use of an unbound Var");
  return tape_->value(id_);
}

Parameter::Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

void Parameter::zero_grad() {
  if (grad.shape() != value.shape()) {
    grad = Tensor(value.shape());
  } else {
    grad.fill(0.0);
  }
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, nullptr, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::variable(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, nullptr, true});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& param) {
  nodes_.push_back(Node{param.value, {}, {}, &param, true});
  return Var(this, nodes_.size() - 1);
}

void Tape::check_owned(Var v, const char* what) const {
  if (v.tape_ != this || v.id_ >= nodes_.size()) {
    throw TapeError(std::string("dangling node: ") + what + " does not belong to this tape");
  }
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  return record(std::move(value), std::vector<Var>(inputs), std::move(backward));
}

Var Tape::record(Tensor value, const std::vector<Var>& inputs, BackwardFn backward) {
  bool needs = false;
  for (const Var& in : inputs) {
    check_owned(in, "operation input");
    needs = needs || nodes_[in.id_].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(backward) : BackwardFn{}, nullptr, needs});
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(Var loss) {
  check_owned(loss, "loss");
  if (backward_done_) throw TapeError("backward() called twice without reset_gradients()");
  Node& root = nodes_[loss.id_];
  if (root.value.size() != 1) {
    throw TapeError("backward() needs a scalar loss, got shape " + shape_to_string(root.value.shape()));
  }
  backward_done_ = true;
  if (!root.requires_grad) return;
  root.grad = Tensor(root.value.shape(), 1.0);
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.requires_grad || node.grad.empty()) continue;
    if (node.backward) node.backward(*this, node.grad);
    if (node.param) {
      Parameter& p = *node.param;
      if (p.grad.shape() != p.value.shape()) p.grad = Tensor(p.value.shape());
      auto dst = p.grad.data();
      auto src = node.grad.data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }
}

void Tape::reset_gradients() {
  for (Node& n : nodes_) n.grad = Tensor();
  backward_done_ = false;
}

bool Tape::requires_grad(Var v) const {
  check_owned(v, "query");
  return nodes_[v.id_].requires_grad;
}

Tensor Tape::grad(Var v) const {
  check_owned(v, "query");
  const Node& n = nodes_[v.id_];
  if (n.grad.empty()) return Tensor(n.value.shape());
  return n.grad;
}

Tensor* Tape::grad_target(Var input) {
  Node& n = nodes_[input.id_];
  if (!n.requires_grad) return nullptr;
  if (n.grad.empty()) n.grad = Tensor(n.value.shape());
  return &n.grad;
}

const Tensor& Tape::value(std::size_t id) const {
  if (id >= nodes_.size()) throw TapeError("dangling node id " + std::to_string(id));
  return nodes_[id].value;
}

}  // namespace propnet
