#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>

#include "bhs/ad/tensor.hpp"

namespace bhs::ad {

/// A learnable tensor. Gradients from every graph that uses it accumulate
/// into `grad` until zero_grad().
struct Parameter {
  Parameter(std::string name, Tensor value);

  void zero_grad();

  std::string name;
  Tensor value;
  Tensor grad;
};

class Graph;

/// Handle to a node recorded on a Graph. A handle outlives clear() safely:
/// using it afterwards raises Error(kGraphNotRecorded). It must not outlive
/// the Graph object itself.
class Var {
 public:
  Var() = default;

  bool valid() const;
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t dim(std::size_t axis) const { return value().dim(axis); }

  /// Gradient of the last backward() loss with respect to this node; zeros
  /// when nothing flowed into it.
  const Tensor& grad() const;

  Graph& graph() const;
  std::uint32_t id() const { return id_; }

 private:
  friend class Graph;
  Var(Graph* g, std::uint32_t id, std::uint64_t epoch) : graph_(g), id_(id), epoch_(epoch) {}

  Graph* graph_ = nullptr;
  std::uint32_t id_ = 0;
  std::uint64_t epoch_ = 0;
};

enum class Mode { kTrain, kEval };

/// Tape of operations for one forward pass. Nodes are appended in execution
/// order, so reverse iteration is a valid topological order for backward().
class Graph {
 public:
  /// Receives the node's own output and the gradient flowing into it.
  using BackwardFn = std::function<void(const Tensor& y, const Tensor& dy)>;

  explicit Graph(Mode mode = Mode::kEval, std::uint64_t seed = 0);
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Mode mode() const { return mode_; }
  bool training() const { return mode_ == Mode::kTrain; }

  /// When on (the default) every op output is checked for NaN/Inf and
  /// Error(kNonFinite) names the offending op.
  bool checked() const { return checked_; }
  void set_checked(bool on) { checked_ = on; }

  /// Source of dropout masks for this pass.
  std::mt19937_64& rng() { return rng_; }

  Var constant(Tensor value);
  Var variable(Tensor value);
  Var param(Parameter& p);

  /// Appends an op result. `backward` is dropped when no parent needs a
  /// gradient.
  Var record(std::string_view op, Tensor value, std::initializer_list<Var> parents,
             BackwardFn backward);
  Var record(std::string_view op, Tensor value, const std::vector<Var>& parents,
             BackwardFn backward);

  /// Gradient buffer of a node for accumulation from a child's backward
  /// function; nullptr when the node needs no gradient.
  Tensor* grad_sink(const Var& v);

  /// Seeds d(loss)/d(loss) = 1 and propagates to every recorded node.
  /// Throws Error(kGraphNotRecorded) for a handle that is not on this tape
  /// and Error(kShapeMismatch) unless the loss has exactly one element.
  void backward(const Var& loss);

  /// Drops every node; handles issued before become invalid.
  void clear();

  std::size_t node_count() const { return nodes_.size(); }

 private:
  friend class Var;

  struct Node {
    Tensor value;
    Tensor grad;
    Parameter* param = nullptr;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var push(Node node);
  void check(const Var& v) const;
  Tensor& grad_buffer(Node& n);
  const Node& node(const Var& v) const;

  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, std::uint32_t> param_nodes_;
  Mode mode_;
  bool checked_ = true;
  std::mt19937_64 rng_;
  std::uint64_t epoch_;
};

}  // namespace bhs::ad
