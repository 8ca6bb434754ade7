#include "bhs/ad/graph.hpp"

#include <atomic>

#include "bhs/error.hpp"

namespace bhs::ad {

namespace {

std::uint64_t next_epoch() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

}  // namespace

Parameter::Parameter(std::string n, Tensor v)
    : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

void Parameter::zero_grad() {
  if (grad.shape() != value.shape()) {
    grad = Tensor(value.shape());
  } else {
    grad.fill(0.0);
  }
}

bool Var::valid() const {
  return graph_ != nullptr && epoch_ == graph_->epoch_ && id_ < graph_->nodes_.size();
}

const Tensor& Var::value() const { return graph().node(*this).value; }

const Tensor& Var::grad() const {
  Graph& g = graph();
  Graph::Node& n = g.nodes_[id_];
  return g.grad_buffer(n);
}

Graph& Var::graph() const {
  if (!valid()) {
    throw Error(Errc::kGraphNotRecorded, "variable does not belong to a live graph");
  }
  return *graph_;
}

Graph::Graph(Mode mode, std::uint64_t seed) : mode_(mode), rng_(seed), epoch_(next_epoch()) {}

Var Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1), epoch_);
}

void Graph::check(const Var& v) const {
  if (v.graph_ != this || !v.valid()) {
    throw Error(Errc::kGraphNotRecorded, "variable was not recorded on this graph");
  }
}

const Graph::Node& Graph::node(const Var& v) const {
  check(v);
  return nodes_[v.id_];
}

Tensor& Graph::grad_buffer(Node& n) {
  Tensor& g = n.param != nullptr ? n.param->grad : n.grad;
  if (g.shape() != n.value.shape()) {
    g = Tensor(n.value.shape());
  }
  return g;
}

Var Graph::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Graph::variable(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Graph::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) {
    return Var(this, it->second, epoch_);
  }
  Node n;
  n.value = p.value;
  n.param = &p;
  n.requires_grad = true;
  Var v = push(std::move(n));
  param_nodes_.emplace(&p, v.id_);
  return v;
}

Var Graph::record(std::string_view op, Tensor value, std::initializer_list<Var> parents,
                  BackwardFn backward) {
  return record(op, std::move(value), std::vector<Var>(parents), std::move(backward));
}

Var Graph::record(std::string_view op, Tensor value, const std::vector<Var>& parents,
                  BackwardFn backward) {
  bool needs_grad = false;
  for (const Var& p : parents) {
    check(p);
    needs_grad = needs_grad || nodes_[p.id_].requires_grad;
  }
  if (checked_ && !value.all_finite()) {
    throw Error(Errc::kNonFinite, std::string(op) + " produced a non-finite value");
  }
  Node n;
  n.value = std::move(value);
  n.requires_grad = needs_grad;
  if (needs_grad) {
    n.backward = std::move(backward);
  }
  return push(std::move(n));
}

Tensor* Graph::grad_sink(const Var& v) {
  Node& n = nodes_[v.id_];
  if (!n.requires_grad) {
    return nullptr;
  }
  return &grad_buffer(n);
}

void Graph::backward(const Var& loss) {
  check(loss);
  if (nodes_[loss.id_].value.size() != 1) {
    throw Error(Errc::kShapeMismatch, "backward() needs a one-element loss, got " +
                                          shape_string(nodes_[loss.id_].value.shape()));
  }
  for (Node& n : nodes_) {
    if (n.param == nullptr) {
      n.grad = Tensor();
    }
  }
  Node& root = nodes_[loss.id_];
  if (!root.requires_grad) {
    return;
  }
  grad_buffer(root)[0] += 1.0;
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.empty()) {
      continue;
    }
    n.backward(n.value, n.grad);
  }
}

void Graph::clear() {
  nodes_.clear();
  param_nodes_.clear();
  epoch_ = next_epoch();
}

}  // namespace bhs::ad
