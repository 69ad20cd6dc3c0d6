#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptmaml/autodiff/tensor.hpp"

namespace ptmaml::ad {

struct NodeId {
  std::uint32_t index = 0;
  friend bool operator==(NodeId, NodeId) = default;
};

enum class Op : std::uint8_t {
  Input,
  Constant,
  Parameter,
  MatMul,
  Add,
  Sub,
  Mul,
  Scale,
  Tanh,
  Sigmoid,
  Softmax,
  Log,
  Concat,
  Stack,
  Slice,
  Gather,
  Sum,
  Max,
  Embedding,
};

const char* op_name(Op op);

class NonFiniteError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using Bindings = std::map<std::string, Tensor, std::less<>>;

/// Define-by-run tape. Every builder call evaluates its node immediately, so
/// values are available while the graph is still growing (greedy decoding
/// depends on this). `forward` replays the whole tape from the leaves, which
/// is what finite-difference checks and rebinding use.
///
/// Parameter leaves read straight from the bound ParamSet; the graph never
/// copies or mutates it.
class Graph {
public:
  explicit Graph(const ParamSet* params = nullptr) : params_(params) {}

  NodeId input(std::string name, Tensor value);
  NodeId constant(Tensor value);
  /// Leaf for params[index]; repeated calls return the same node.
  NodeId parameter(std::size_t index);
  NodeId parameter(std::string_view name);

  /// a (m x n) times b (n x p) or b (n). With transpose_a, a is (n x m).
  NodeId matmul(NodeId a, NodeId b, bool transpose_a = false);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId a, double factor);
  NodeId tanh(NodeId a);
  NodeId sigmoid(NodeId a);
  /// Softmax over the last axis.
  NodeId softmax(NodeId a);
  NodeId log(NodeId a);
  /// Concatenates rank-1 tensors.
  NodeId concat(std::span<const NodeId> parts);
  /// Stacks equal-length rank-1 tensors as the rows of a matrix.
  NodeId stack(std::span<const NodeId> rows);
  NodeId slice(NodeId a, std::size_t offset, std::size_t length);
  NodeId gather(NodeId a, std::vector<std::size_t> indices);
  NodeId sum(NodeId a);
  NodeId max(NodeId a);
  /// Row `row` of a rank-2 table.
  NodeId embedding(NodeId table, std::size_t row);

  const Tensor& value(NodeId id) const;
  double scalar(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }
  const ParamSet* params() const { return params_; }

  /// Rebinds the named inputs and re-evaluates every node in order.
  const Tensor& forward(NodeId output, const Bindings& bindings = {});

  /// Accumulates d(loss)/d(param) into `grads`, which must be laid out like
  /// the bound parameter set.
  void backward_into(NodeId loss, GradStore& grads) const;

private:
  struct Node {
    Op op = Op::Constant;
    std::vector<NodeId> inputs;
    Tensor value;
    std::vector<std::size_t> indices;  // gather indices, or {offset} for slice, {row} for embedding
    double factor = 0.0;               // scale
    bool flag = false;                 // matmul transpose_a
    std::size_t param = 0;
    std::size_t argmax = 0;            // max
    std::string name;                  // input
  };

  static Node make_node(Op op, std::vector<NodeId> inputs) {
    Node n;
    n.op = op;
    n.inputs = std::move(inputs);
    return n;
  }
  NodeId push(Node node);
  void evaluate(Node& node);
  const Tensor& value_of(const Node& node) const;
  [[noreturn]] void fail(const Node& node, const std::string& what) const;

  const ParamSet* params_;
  std::vector<Node> nodes_;
  std::vector<std::int64_t> param_nodes_;
};

/// Re-evaluates `graph` under `bindings` and returns the output value.
Tensor eval_graph(Graph& graph, NodeId output, const Bindings& bindings = {});

/// Gradients of a scalar loss w.r.t. every parameter in the bound set.
GradStore backward(const Graph& graph, NodeId loss);

/// Max over all parameter coordinates of
/// |analytic - numeric| / max(1, |analytic|, |numeric|) using central
/// differences with step h. `params` must be the set the graph is bound to;
/// it is perturbed in place and restored.
double grad_check(Graph& graph, NodeId loss, ParamSet& params, double h);

} // namespace ptmaml::ad
