// SPDX-License-Identifier: Apache-2.0
//
// Dense reverse-mode automatic differentiation.
//
// A Graph is an eager tape: every primitive is evaluated immediately and
// recorded in topological order, so backward() is a single reverse sweep.
// Parameters live outside the graph as Tensors; Graph::leaf() references them
// without copying and backward() accumulates into Tensor::grad when the
// tensor has requires_grad set. Graphs are cheap and meant to be rebuilt for
// every example or batch.
#pragma once

#include <Eigen/Core>

#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace dualre {

using Index = Eigen::Index;
using Shape = std::vector<Index>;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string to_string(const Shape& shape);
Index element_count(const Shape& shape);

/// Dense row-major array of doubles. Rank 0 (empty shape) is a scalar.
struct Tensor {
  Shape shape;
  Eigen::VectorXd data;
  bool requires_grad = false;
  std::optional<Eigen::VectorXd> grad;

  Tensor() : data(Eigen::VectorXd::Zero(1)) {}
  Tensor(Shape shape, Eigen::VectorXd data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor scalar(double value);
  static Tensor vector(const Eigen::VectorXd& values);
  static Tensor vector(std::initializer_list<double> values);
  static Tensor matrix(const RowMatrix& values);

  Index size() const { return data.size(); }
  Index rank() const { return static_cast<Index>(shape.size()); }
  double item() const;

  Eigen::Map<const RowMatrix> as_matrix() const;
  Eigen::Map<RowMatrix> as_matrix();

  void zero_grad() { grad.reset(); }
};

enum class Primitive {
  Leaf,
  Add,
  Subtract,
  Multiply,
  Divide,
  MatMul,
  Transpose,
  Reshape,
  Concat,
  Sum,
  Mean,
  Log,
  Exp,
  Tanh,
  Sigmoid,
  Softplus,
  Softmax,
  Scale,
  IndexSelect,
  Clamp,
};

const char* primitive_name(Primitive op);

/// Non-tensor operands of a primitive. Only the fields a primitive reads matter.
struct PrimitiveArgs {
  double scalar = 0.0;             // Scale
  double lower = 0.0;              // Clamp
  double upper = 0.0;              // Clamp
  std::vector<Index> indices;      // IndexSelect (axis 0)
  Shape shape;                     // Reshape
};

class Graph;

/// Handle to a node of a Graph.
struct Var {
  Graph* graph = nullptr;
  int id = -1;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape; }
  double item() const { return value().item(); }
};

class Graph {
public:
  /// With `record_gradients` false the graph only evaluates; backward() is a no-op.
  explicit Graph(bool record_gradients = true) : record_gradients_(record_gradients) {}

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// References `tensor` (which must outlive the graph). Repeated calls with the
  /// same tensor return the same node.
  Var leaf(Tensor& tensor);
  Var constant(Tensor tensor);
  Var constant(double value) { return constant(Tensor::scalar(value)); }

  Var apply(Primitive op, std::span<const Var> inputs, PrimitiveArgs args = {});

  const Tensor& value(Var v) const;

  /// Reverse sweep from a scalar output. Gradients accumulate into the grad
  /// field of every requires_grad leaf reachable from `output`.
  void backward(Var output);

  std::size_t size() const { return nodes_.size(); }

private:
  struct Node {
    Primitive op = Primitive::Leaf;
    std::vector<int> inputs;
    PrimitiveArgs args;
    Tensor value;
    Tensor* source = nullptr;
    bool needs_grad = false;
    Eigen::VectorXd grad;
  };

  const Tensor& node_value(const Node& node) const { return node.source ? *node.source : node.value; }
  Eigen::VectorXd& grad_of(int id);
  void propagate(const Node& node);

  bool record_gradients_;
  std::vector<Node> nodes_;
  std::unordered_map<const Tensor*, int> leaves_;
};

// Expression-style primitives. All inputs must belong to the same graph.
Var add(Var a, Var b);
Var subtract(Var a, Var b);
Var multiply(Var a, Var b);
Var divide(Var a, Var b);
Var matmul(Var a, Var b);
Var transpose(Var a);
Var reshape(Var a, Shape shape);
Var concat(std::span<const Var> parts);
Var sum(Var a);
Var mean(Var a);
Var log(Var a);
Var exp(Var a);
Var tanh(Var a);
Var sigmoid(Var a);
Var softplus(Var a);
Var softmax(Var a);
Var scale(Var a, double factor);
Var index_select(Var a, std::vector<Index> indices);
Var clamp(Var a, double lower, double upper);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return subtract(a, b); }
inline Var operator*(Var a, Var b) { return multiply(a, b); }
inline Var operator/(Var a, Var b) { return divide(a, b); }
inline Var operator-(Var a) { return scale(a, -1.0); }
inline Var operator*(double c, Var a) { return scale(a, c); }

/// Builds a scalar-valued graph from leaves bound to the checked inputs.
using GraphBuilder = std::function<Var(Graph&, std::span<const Var>)>;

/// Max over all input coordinates of |analytic - central difference| / max(1, |analytic|).
double grad_check(const GraphBuilder& build, std::span<Tensor* const> inputs, double step);

}  // namespace dualre
