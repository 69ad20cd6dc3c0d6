#include "ptmaml/autodiff/graph.hpp"

#include <algorithm>
#include <cmath>

namespace ptmaml::ad {

const char* op_name(Op op) {
  switch (op) {
    case Op::Input: return "input";
    case Op::Constant: return "constant";
    case Op::Parameter: return "parameter";
    case Op::MatMul: return "matmul";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Scale: return "scale";
    case Op::Tanh: return "tanh";
    case Op::Sigmoid: return "sigmoid";
    case Op::Softmax: return "softmax";
    case Op::Log: return "log";
    case Op::Concat: return "concat";
    case Op::Stack: return "stack";
    case Op::Slice: return "slice";
    case Op::Gather: return "gather";
    case Op::Sum: return "sum";
    case Op::Max: return "max";
    case Op::Embedding: return "embedding";
  }
  return "?";
}

namespace {

// Four independent partial sums; the order is fixed, so results are
// reproducible.
double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

bool is_leaf(Op op) { return op == Op::Input || op == Op::Constant || op == Op::Parameter; }

void softmax_rows(const double* in, double* out, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = in + r * cols;
    double* y = out + r * cols;
    double hi = *std::max_element(x, x + cols);
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      y[c] = std::exp(x[c] - hi);
      z += y[c];
    }
    for (std::size_t c = 0; c < cols; ++c) y[c] /= z;
  }
}

} // namespace

[[noreturn]] void Graph::fail(const Node& node, const std::string& what) const {
  auto index = static_cast<std::size_t>(&node - nodes_.data());
  if (index >= nodes_.size()) index = nodes_.size();
  throw ShapeError("node " + std::to_string(index) + " (" + op_name(node.op) + "): " + what);
}

const Tensor& Graph::value_of(const Node& node) const {
  if (node.op == Op::Parameter) return (*params_)[node.param];
  return node.value;
}

const Tensor& Graph::value(NodeId id) const { return value_of(nodes_.at(id.index)); }

double Graph::scalar(NodeId id) const {
  const Tensor& t = value(id);
  if (t.size() != 1) throw ShapeError("value is not scalar: " + shape_string(t.shape()));
  return t[0];
}

NodeId Graph::push(Node node) {
  for (NodeId in : node.inputs) {
    if (in.index >= nodes_.size()) throw std::out_of_range("graph input refers to a later node");
  }
  nodes_.push_back(std::move(node));
  Node& added = nodes_.back();
  try {
    evaluate(added);
  } catch (...) {
    nodes_.pop_back();
    throw;
  }
  return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

NodeId Graph::input(std::string name, Tensor value) {
  Node n = make_node(Op::Input, {});
  n.value = std::move(value);
  n.name = std::move(name);
  return push(std::move(n));
}

NodeId Graph::constant(Tensor value) {
  Node n = make_node(Op::Constant, {});
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Graph::parameter(std::size_t index) {
  if (params_ == nullptr || index >= params_->size()) {
    throw std::out_of_range("graph has no parameter " + std::to_string(index));
  }
  if (param_nodes_.empty()) param_nodes_.assign(params_->size(), -1);
  if (param_nodes_[index] >= 0) return NodeId{static_cast<std::uint32_t>(param_nodes_[index])};
  Node n = make_node(Op::Parameter, {});
  n.param = index;
  NodeId id = push(std::move(n));
  param_nodes_[index] = id.index;
  return id;
}

NodeId Graph::parameter(std::string_view name) {
  if (params_ == nullptr) throw std::out_of_range("graph has no parameter set");
  return parameter(params_->index_of(name));
}

NodeId Graph::matmul(NodeId a, NodeId b, bool transpose_a) {
  Node n = make_node(Op::MatMul, {a, b});
  n.flag = transpose_a;
  return push(std::move(n));
}

NodeId Graph::add(NodeId a, NodeId b) { return push(make_node(Op::Add, {a, b})); }
NodeId Graph::sub(NodeId a, NodeId b) { return push(make_node(Op::Sub, {a, b})); }
NodeId Graph::mul(NodeId a, NodeId b) { return push(make_node(Op::Mul, {a, b})); }

NodeId Graph::scale(NodeId a, double factor) {
  Node n = make_node(Op::Scale, {a});
  n.factor = factor;
  return push(std::move(n));
}

NodeId Graph::tanh(NodeId a) { return push(make_node(Op::Tanh, {a})); }
NodeId Graph::sigmoid(NodeId a) { return push(make_node(Op::Sigmoid, {a})); }
NodeId Graph::softmax(NodeId a) { return push(make_node(Op::Softmax, {a})); }
NodeId Graph::log(NodeId a) { return push(make_node(Op::Log, {a})); }

NodeId Graph::concat(std::span<const NodeId> parts) {
  return push(make_node(Op::Concat, {parts.begin(), parts.end()}));
}

NodeId Graph::stack(std::span<const NodeId> rows) {
  return push(make_node(Op::Stack, {rows.begin(), rows.end()}));
}

NodeId Graph::slice(NodeId a, std::size_t offset, std::size_t length) {
  Node n = make_node(Op::Slice, {a});
  n.indices = {offset, length};
  return push(std::move(n));
}

NodeId Graph::gather(NodeId a, std::vector<std::size_t> indices) {
  Node n = make_node(Op::Gather, {a});
  n.indices = std::move(indices);
  return push(std::move(n));
}

NodeId Graph::sum(NodeId a) { return push(make_node(Op::Sum, {a})); }
NodeId Graph::max(NodeId a) { return push(make_node(Op::Max, {a})); }

NodeId Graph::embedding(NodeId table, std::size_t row) {
  Node n = make_node(Op::Embedding, {table});
  n.indices = {row};
  return push(std::move(n));
}

void Graph::evaluate(Node& node) {
  auto in = [&](std::size_t k) -> const Tensor& { return value_of(nodes_[node.inputs[k].index]); };
  auto same_shape = [&]() {
    if (in(0).shape() != in(1).shape()) {
      fail(node, "shape mismatch " + shape_string(in(0).shape()) + " vs " +
                     shape_string(in(1).shape()));
    }
  };

  switch (node.op) {
    case Op::Input:
    case Op::Constant:
    case Op::Parameter:
      break;

    case Op::MatMul: {
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      if (a.rank() != 2 || (b.rank() != 1 && b.rank() != 2)) {
        fail(node, "unsupported ranks " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
      }
      std::size_t ar = a.shape()[0], ac = a.shape()[1];
      std::size_t m = node.flag ? ac : ar;
      std::size_t n = node.flag ? ar : ac;
      std::size_t p = b.rank() == 2 ? b.shape()[1] : 1;
      if (b.shape()[0] != n) {
        fail(node, "inner dimensions differ " + shape_string(a.shape()) +
                       (node.flag ? "^T" : "") + " x " + shape_string(b.shape()));
      }
      Tensor out(b.rank() == 2 ? Shape{m, p} : Shape{m}, 0.0);
      const double* A = a.data();
      const double* B = b.data();
      double* Y = out.data();
      if (p == 1 && !node.flag) {
        for (std::size_t i = 0; i < m; ++i) Y[i] = dot(A + i * ac, B, n);
      } else if (!node.flag) {
        for (std::size_t i = 0; i < m; ++i) {
          const double* arow = A + i * ac;
          double* yrow = Y + i * p;
          for (std::size_t k = 0; k < n; ++k) {
            double av = arow[k];
            const double* brow = B + k * p;
            for (std::size_t j = 0; j < p; ++j) yrow[j] += av * brow[j];
          }
        }
      } else {
        // Y[j, :] = sum_i A[i, j] * B[i, :]
        for (std::size_t i = 0; i < n; ++i) {
          const double* arow = A + i * ac;
          const double* brow = B + i * p;
          for (std::size_t j = 0; j < m; ++j) {
            double av = arow[j];
            double* yrow = Y + j * p;
            for (std::size_t q = 0; q < p; ++q) yrow[q] += av * brow[q];
          }
        }
      }
      node.value = std::move(out);
      break;
    }

    case Op::Add:
    case Op::Sub:
    case Op::Mul: {
      same_shape();
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      Tensor out(a.shape(), 0.0);
      for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = node.op == Op::Add ? a[i] + b[i] : node.op == Op::Sub ? a[i] - b[i] : a[i] * b[i];
      }
      node.value = std::move(out);
      break;
    }

    case Op::Scale:
    case Op::Tanh:
    case Op::Sigmoid:
    case Op::Log: {
      const Tensor& a = in(0);
      Tensor out(a.shape(), 0.0);
      for (std::size_t i = 0; i < a.size(); ++i) {
        double x = a[i];
        switch (node.op) {
          case Op::Scale: out[i] = node.factor * x; break;
          case Op::Tanh: out[i] = std::tanh(x); break;
          case Op::Sigmoid: out[i] = 1.0 / (1.0 + std::exp(-x)); break;
          default: out[i] = std::log(x); break;
        }
      }
      node.value = std::move(out);
      break;
    }

    case Op::Softmax: {
      const Tensor& a = in(0);
      if (a.rank() < 1 || a.rank() > 2 || a.size() == 0) {
        fail(node, "softmax needs a non-empty vector or matrix, got " + shape_string(a.shape()));
      }
      Tensor out(a.shape(), 0.0);
      softmax_rows(a.data(), out.data(), a.rows(), a.cols());
      node.value = std::move(out);
      break;
    }

    case Op::Concat: {
      std::vector<double> v;
      for (std::size_t k = 0; k < node.inputs.size(); ++k) {
        const Tensor& t = in(k);
        if (t.rank() != 1) fail(node, "concat part " + std::to_string(k) + " is not rank 1");
        v.insert(v.end(), t.values().begin(), t.values().end());
      }
      node.value = Tensor::vector(std::move(v));
      break;
    }

    case Op::Stack: {
      if (node.inputs.empty()) fail(node, "stack of zero rows");
      std::size_t cols = in(0).size();
      std::vector<double> v;
      v.reserve(cols * node.inputs.size());
      for (std::size_t k = 0; k < node.inputs.size(); ++k) {
        const Tensor& t = in(k);
        if (t.rank() != 1 || t.size() != cols) {
          fail(node, "row " + std::to_string(k) + " has shape " + shape_string(t.shape()));
        }
        v.insert(v.end(), t.values().begin(), t.values().end());
      }
      node.value = Tensor::matrix(node.inputs.size(), cols, std::move(v));
      break;
    }

    case Op::Slice: {
      const Tensor& a = in(0);
      std::size_t off = node.indices[0], len = node.indices[1];
      if (a.rank() != 1 || off + len > a.size()) {
        fail(node, "slice [" + std::to_string(off) + "," + std::to_string(off + len) +
                       ") out of " + shape_string(a.shape()));
      }
      node.value = Tensor::vector(std::vector<double>(a.data() + off, a.data() + off + len));
      break;
    }

    case Op::Gather: {
      const Tensor& a = in(0);
      if (a.rank() != 1) fail(node, "gather source must be rank 1");
      std::vector<double> v(node.indices.size());
      for (std::size_t k = 0; k < v.size(); ++k) {
        if (node.indices[k] >= a.size()) fail(node, "gather index out of range");
        v[k] = a[node.indices[k]];
      }
      node.value = Tensor::vector(std::move(v));
      break;
    }

    case Op::Sum: {
      double s = 0.0;
      for (double x : in(0).values()) s += x;
      node.value = Tensor::scalar(s);
      break;
    }

    case Op::Max: {
      const Tensor& a = in(0);
      if (a.size() == 0) fail(node, "max of empty tensor");
      auto it = std::max_element(a.values().begin(), a.values().end());
      node.argmax = static_cast<std::size_t>(it - a.values().begin());
      node.value = Tensor::scalar(*it);
      break;
    }

    case Op::Embedding: {
      const Tensor& t = in(0);
      std::size_t row = node.indices[0];
      if (t.rank() != 2 || row >= t.shape()[0]) {
        fail(node, "row " + std::to_string(row) + " outside table " + shape_string(t.shape()));
      }
      std::size_t c = t.shape()[1];
      node.value = Tensor::vector(std::vector<double>(t.data() + row * c, t.data() + (row + 1) * c));
      break;
    }
  }

  if (!is_leaf(node.op) && !node.value.all_finite()) {
    auto index = static_cast<std::size_t>(&node - nodes_.data());
    throw NonFiniteError("node " + std::to_string(index) + " (" + op_name(node.op) +
                         ") produced a non-finite value");
  }
}

const Tensor& Graph::forward(NodeId output, const Bindings& bindings) {
  for (const auto& [name, tensor] : bindings) {
    bool found = false;
    for (auto& node : nodes_) {
      if (node.op == Op::Input && node.name == name) {
        node.value = tensor;
        found = true;
      }
    }
    if (!found) throw std::invalid_argument("no graph input named " + name);
  }
  for (auto& node : nodes_) evaluate(node);
  return value(output);
}

void Graph::backward_into(NodeId loss, GradStore& grads) const {
  const Node& root = nodes_.at(loss.index);
  if (value_of(root).size() != 1) {
    throw ShapeError("backward: loss node " + std::to_string(loss.index) + " is not scalar (" +
                     shape_string(value_of(root).shape()) + ")");
  }
  if (params_ != nullptr && !grads.same_layout(*params_)) {
    throw ShapeError("backward: gradient store does not match the parameter set");
  }

  // Only nodes that depend on a parameter carry gradient.
  std::vector<char> live(loss.index + 1, 0);
  for (std::size_t i = 0; i <= loss.index; ++i) {
    const Node& n = nodes_[i];
    if (n.op == Op::Parameter) {
      live[i] = 1;
      continue;
    }
    for (NodeId in : n.inputs) {
      if (live[in.index]) {
        live[i] = 1;
        break;
      }
    }
  }
  if (!live[loss.index]) return;

  std::vector<Tensor> g(loss.index + 1);
  std::vector<char> has(loss.index + 1, 0);
  auto grad_of = [&](NodeId id) -> Tensor& {
    const Node& n = nodes_[id.index];
    if (n.op == Op::Parameter) return grads[n.param];
    if (!has[id.index]) {
      g[id.index] = Tensor(value_of(n).shape(), 0.0);
      has[id.index] = 1;
    }
    return g[id.index];
  };

  grad_of(loss)[0] += 1.0;

  for (std::size_t idx = loss.index + 1; idx-- > 0;) {
    const Node& node = nodes_[idx];
    if (is_leaf(node.op) || !has[idx]) continue;
    const Tensor& dy = g[idx];
    const Tensor& y = node.value;
    auto in_live = [&](std::size_t k) { return live[node.inputs[k].index] != 0; };
    auto in_val = [&](std::size_t k) -> const Tensor& { return value_of(nodes_[node.inputs[k].index]); };

    switch (node.op) {
      case Op::MatMul: {
        const Tensor& a = in_val(0);
        const Tensor& b = in_val(1);
        std::size_t ar = a.shape()[0], ac = a.shape()[1];
        std::size_t p = b.rank() == 2 ? b.shape()[1] : 1;
        const double* A = a.data();
        const double* B = b.data();
        const double* D = dy.data();
        if (in_live(0)) {
          double* dA = grad_of(node.inputs[0]).data();
          if (p == 1) {
            // Outer product of dY and b; with transpose_a the roles swap.
            const double* u = node.flag ? B : D;
            const double* v = node.flag ? D : B;
            for (std::size_t i = 0; i < ar; ++i) {
              double s = u[i];
              double* row = dA + i * ac;
              for (std::size_t k = 0; k < ac; ++k) row[k] += s * v[k];
            }
          } else if (!node.flag) {
            // dA[i,k] += sum_j dY[i,j] B[k,j]
            for (std::size_t i = 0; i < ar; ++i)
              for (std::size_t k = 0; k < ac; ++k) {
                double s = 0.0;
                for (std::size_t j = 0; j < p; ++j) s += D[i * p + j] * B[k * p + j];
                dA[i * ac + k] += s;
              }
          } else {
            // A is (n x m), Y = A^T B: dA[i,j] += sum_q B[i,q] dY[j,q]
            for (std::size_t i = 0; i < ar; ++i)
              for (std::size_t j = 0; j < ac; ++j) {
                double s = 0.0;
                for (std::size_t q = 0; q < p; ++q) s += B[i * p + q] * D[j * p + q];
                dA[i * ac + j] += s;
              }
          }
        }
        if (in_live(1)) {
          double* dB = grad_of(node.inputs[1]).data();
          if (p == 1 && node.flag) {
            for (std::size_t i = 0; i < ar; ++i) dB[i] += dot(A + i * ac, D, ac);
          } else if (p == 1) {
            for (std::size_t i = 0; i < ar; ++i) {
              const double d = D[i];
              const double* arow = A + i * ac;
              for (std::size_t k = 0; k < ac; ++k) dB[k] += arow[k] * d;
            }
          } else if (!node.flag) {
            // dB[k,j] += sum_i A[i,k] dY[i,j]
            for (std::size_t i = 0; i < ar; ++i)
              for (std::size_t k = 0; k < ac; ++k) {
                double av = A[i * ac + k];
                for (std::size_t j = 0; j < p; ++j) dB[k * p + j] += av * D[i * p + j];
              }
          } else {
            // dB[i,q] += sum_j A[i,j] dY[j,q]
            for (std::size_t i = 0; i < ar; ++i)
              for (std::size_t j = 0; j < ac; ++j) {
                double av = A[i * ac + j];
                for (std::size_t q = 0; q < p; ++q) dB[i * p + q] += av * D[j * p + q];
              }
          }
        }
        break;
      }

      case Op::Add:
      case Op::Sub: {
        double sign = node.op == Op::Add ? 1.0 : -1.0;
        if (in_live(0)) {
          Tensor& da = grad_of(node.inputs[0]);
          for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i];
        }
        if (in_live(1)) {
          Tensor& db = grad_of(node.inputs[1]);
          for (std::size_t i = 0; i < dy.size(); ++i) db[i] += sign * dy[i];
        }
        break;
      }

      case Op::Mul: {
        const Tensor& a = in_val(0);
        const Tensor& b = in_val(1);
        if (in_live(0)) {
          Tensor& da = grad_of(node.inputs[0]);
          for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i] * b[i];
        }
        if (in_live(1)) {
          Tensor& db = grad_of(node.inputs[1]);
          for (std::size_t i = 0; i < dy.size(); ++i) db[i] += dy[i] * a[i];
        }
        break;
      }

      case Op::Scale:
      case Op::Tanh:
      case Op::Sigmoid:
      case Op::Log: {
        if (!in_live(0)) break;
        const Tensor& x = in_val(0);
        Tensor& dx = grad_of(node.inputs[0]);
        for (std::size_t i = 0; i < dy.size(); ++i) {
          double d;
          switch (node.op) {
            case Op::Scale: d = node.factor; break;
            case Op::Tanh: d = 1.0 - y[i] * y[i]; break;
            case Op::Sigmoid: d = y[i] * (1.0 - y[i]); break;
            default: d = 1.0 / x[i]; break;
          }
          dx[i] += dy[i] * d;
        }
        break;
      }

      case Op::Softmax: {
        if (!in_live(0)) break;
        Tensor& dx = grad_of(node.inputs[0]);
        std::size_t rows = y.rows(), cols = y.cols();
        for (std::size_t r = 0; r < rows; ++r) {
          double dot = 0.0;
          for (std::size_t c = 0; c < cols; ++c) dot += dy[r * cols + c] * y[r * cols + c];
          for (std::size_t c = 0; c < cols; ++c) {
            dx[r * cols + c] += y[r * cols + c] * (dy[r * cols + c] - dot);
          }
        }
        break;
      }

      case Op::Concat:
      case Op::Stack: {
        std::size_t off = 0;
        for (std::size_t k = 0; k < node.inputs.size(); ++k) {
          std::size_t len = in_val(k).size();
          if (in_live(k)) {
            Tensor& dx = grad_of(node.inputs[k]);
            for (std::size_t i = 0; i < len; ++i) dx[i] += dy[off + i];
          }
          off += len;
        }
        break;
      }

      case Op::Slice: {
        if (!in_live(0)) break;
        Tensor& dx = grad_of(node.inputs[0]);
        std::size_t off = node.indices[0];
        for (std::size_t i = 0; i < dy.size(); ++i) dx[off + i] += dy[i];
        break;
      }

      case Op::Gather: {
        if (!in_live(0)) break;
        Tensor& dx = grad_of(node.inputs[0]);
        for (std::size_t k = 0; k < node.indices.size(); ++k) dx[node.indices[k]] += dy[k];
        break;
      }

      case Op::Sum: {
        if (!in_live(0)) break;
        Tensor& dx = grad_of(node.inputs[0]);
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[0];
        break;
      }

      case Op::Max: {
        if (!in_live(0)) break;
        grad_of(node.inputs[0])[node.argmax] += dy[0];
        break;
      }

      case Op::Embedding: {
        if (!in_live(0)) break;
        Tensor& dt = grad_of(node.inputs[0]);
        std::size_t c = dy.size();
        double* row = dt.data() + node.indices[0] * c;
        for (std::size_t i = 0; i < c; ++i) row[i] += dy[i];
        break;
      }

      default:
        break;
    }
  }
}

Tensor eval_graph(Graph& graph, NodeId output, const Bindings& bindings) {
  return graph.forward(output, bindings);
}

GradStore backward(const Graph& graph, NodeId loss) {
  GradStore grads = graph.params() ? graph.params()->zeros_like() : GradStore{};
  graph.backward_into(loss, grads);
  return grads;
}

double grad_check(Graph& graph, NodeId loss, ParamSet& params, double h) {
  if (!(h >= 1e-7 && h <= 1e-3)) throw std::invalid_argument("grad_check: h must lie in [1e-7, 1e-3]");
  if (graph.params() != &params) {
    throw std::invalid_argument("grad_check: params are not the set bound to the graph");
  }
  graph.forward(loss);
  GradStore analytic = backward(graph, loss);

  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& t = params[p];
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double saved = t[k];
      t[k] = saved + h;
      double up = graph.forward(loss)[0];
      t[k] = saved - h;
      double down = graph.forward(loss)[0];
      t[k] = saved;
      double numeric = (up - down) / (2.0 * h);
      if (!std::isfinite(numeric)) {
        throw NonFiniteError("grad_check: non-finite numeric gradient for " + params.name(p) +
                             "[" + std::to_string(k) + "]");
      }
      double a = analytic[p][k];
      double err = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
      worst = std::max(worst, err);
    }
  }
  graph.forward(loss);
  return worst;
}

} // namespace ptmaml::ad
