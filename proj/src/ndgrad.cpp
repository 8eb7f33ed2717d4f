// SPDX-License-Identifier: Apache-2.0
#include "dualre/ndgrad.hpp"

#include "dualre/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dualre {

std::string to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

Index element_count(const Shape& shape) {
  Index n = 1;
  for (Index d : shape) n *= d;
  return n;
}

Tensor::Tensor(Shape shape_, Eigen::VectorXd data_, bool requires_grad_)
    : shape(std::move(shape_)), data(std::move(data_)), requires_grad(requires_grad_) {
  for (Index d : shape) {
    if (d <= 0) throw ShapeError("tensor: non-positive dimension in shape " + to_string(shape));
  }
  if (element_count(shape) != data.size()) {
    throw ShapeError("tensor: shape " + to_string(shape) + " does not match " +
                     std::to_string(data.size()) + " values");
  }
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const Index n = element_count(shape);
  return Tensor(std::move(shape), Eigen::VectorXd::Zero(n), requires_grad);
}

Tensor Tensor::scalar(double value) { return Tensor({}, Eigen::VectorXd::Constant(1, value)); }

Tensor Tensor::vector(const Eigen::VectorXd& values) { return Tensor({values.size()}, values); }

Tensor Tensor::vector(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v[i++] = x;
  return vector(v);
}

Tensor Tensor::matrix(const RowMatrix& values) {
  Eigen::VectorXd flat = Eigen::Map<const Eigen::VectorXd>(values.data(), values.size());
  return Tensor({values.rows(), values.cols()}, std::move(flat));
}

double Tensor::item() const {
  if (data.size() != 1) throw ContractError("item: tensor of shape " + to_string(shape) + " is not a scalar");
  return data[0];
}

Eigen::Map<const RowMatrix> Tensor::as_matrix() const {
  if (rank() != 2) throw ShapeError("as_matrix: rank-2 tensor required, got " + to_string(shape));
  return {data.data(), shape[0], shape[1]};
}

Eigen::Map<RowMatrix> Tensor::as_matrix() {
  if (rank() != 2) throw ShapeError("as_matrix: rank-2 tensor required, got " + to_string(shape));
  return {data.data(), shape[0], shape[1]};
}

const char* primitive_name(Primitive op) {
  switch (op) {
    case Primitive::Leaf: return "leaf";
    case Primitive::Add: return "add";
    case Primitive::Subtract: return "subtract";
    case Primitive::Multiply: return "multiply";
    case Primitive::Divide: return "divide";
    case Primitive::MatMul: return "matmul";
    case Primitive::Transpose: return "transpose";
    case Primitive::Reshape: return "reshape";
    case Primitive::Concat: return "concat";
    case Primitive::Sum: return "sum";
    case Primitive::Mean: return "mean";
    case Primitive::Log: return "log";
    case Primitive::Exp: return "exp";
    case Primitive::Tanh: return "tanh";
    case Primitive::Sigmoid: return "sigmoid";
    case Primitive::Softplus: return "softplus";
    case Primitive::Softmax: return "softmax";
    case Primitive::Scale: return "scale";
    case Primitive::IndexSelect: return "index_select";
    case Primitive::Clamp: return "clamp";
  }
  return "unknown";
}

const Tensor& Var::value() const {
  if (!graph) throw ContractError("var: not bound to a graph");
  return graph->value(*this);
}

namespace {

[[noreturn]] void shape_error(Primitive op, const std::vector<const Tensor*>& in) {
  std::ostringstream out;
  out << primitive_name(op) << ": incompatible shapes";
  for (const Tensor* t : in) out << ' ' << to_string(t->shape);
  throw ShapeError(out.str());
}

// b broadcasts onto a when b's shape equals a's trailing dimensions (a scalar b always does).
bool broadcasts(const Shape& a, const Shape& b) {
  if (b.size() > a.size()) return false;
  return std::equal(b.begin(), b.end(), a.end() - static_cast<std::ptrdiff_t>(b.size()));
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

Index rows_for_last_axis(const Shape& s) {
  if (s.empty()) return 1;
  return element_count(s) / s.back();
}

Tensor evaluate(Primitive op, const std::vector<const Tensor*>& in, const PrimitiveArgs& args) {
  auto expect_arity = [&](std::size_t n) {
    if (in.size() != n) {
      throw ContractError(std::string(primitive_name(op)) + ": expected " + std::to_string(n) +
                          " inputs, got " + std::to_string(in.size()));
    }
  };

  switch (op) {
    case Primitive::Add:
    case Primitive::Subtract:
    case Primitive::Multiply:
    case Primitive::Divide: {
      expect_arity(2);
      const Tensor& a = *in[0];
      const Tensor& b = *in[1];
      if (!broadcasts(a.shape, b.shape)) shape_error(op, in);
      Eigen::VectorXd out(a.size());
      const Index m = b.size();
      for (Index i = 0; i < a.size(); ++i) {
        const double x = a.data[i];
        const double y = b.data[i % m];
        switch (op) {
          case Primitive::Add: out[i] = x + y; break;
          case Primitive::Subtract: out[i] = x - y; break;
          case Primitive::Multiply: out[i] = x * y; break;
          default:
            if (y == 0.0) throw DomainError("divide: division by zero");
            out[i] = x / y;
        }
      }
      return Tensor(a.shape, std::move(out));
    }
    case Primitive::MatMul: {
      expect_arity(2);
      const Tensor& a = *in[0];
      const Tensor& b = *in[1];
      if (a.rank() == 2 && b.rank() == 2) {
        if (a.shape[1] != b.shape[0]) shape_error(op, in);
        RowMatrix c = a.as_matrix() * b.as_matrix();
        return Tensor::matrix(c);
      }
      if (a.rank() == 2 && b.rank() == 1) {
        if (a.shape[1] != b.shape[0]) shape_error(op, in);
        Eigen::VectorXd y = a.as_matrix() * b.data;
        return Tensor::vector(y);
      }
      if (a.rank() == 1 && b.rank() == 2) {
        if (a.shape[0] != b.shape[0]) shape_error(op, in);
        Eigen::VectorXd y = b.as_matrix().transpose() * a.data;
        return Tensor::vector(y);
      }
      if (a.rank() == 1 && b.rank() == 1) {
        if (a.shape[0] != b.shape[0]) shape_error(op, in);
        return Tensor::scalar(a.data.dot(b.data));
      }
      shape_error(op, in);
    }
    case Primitive::Transpose: {
      expect_arity(1);
      if (in[0]->rank() != 2) shape_error(op, in);
      RowMatrix t = in[0]->as_matrix().transpose();
      return Tensor::matrix(t);
    }
    case Primitive::Reshape: {
      expect_arity(1);
      for (Index d : args.shape) {
        if (d <= 0) shape_error(op, in);
      }
      if (element_count(args.shape) != in[0]->size()) {
        throw ShapeError(std::string("reshape: cannot view ") + to_string(in[0]->shape) + " as " +
                         to_string(args.shape));
      }
      return Tensor(args.shape, in[0]->data);
    }
    case Primitive::Concat: {
      if (in.empty()) throw ContractError("concat: no inputs");
      Shape trailing = in[0]->rank() == 0 ? Shape{} : Shape(in[0]->shape.begin() + 1, in[0]->shape.end());
      Index rows = 0;
      Index total = 0;
      for (const Tensor* t : in) {
        Shape tail = t->rank() == 0 ? Shape{} : Shape(t->shape.begin() + 1, t->shape.end());
        if (tail != trailing) shape_error(op, in);
        rows += t->rank() == 0 ? 1 : t->shape[0];
        total += t->size();
      }
      Eigen::VectorXd out(total);
      Index offset = 0;
      for (const Tensor* t : in) {
        out.segment(offset, t->size()) = t->data;
        offset += t->size();
      }
      Shape shape{rows};
      shape.insert(shape.end(), trailing.begin(), trailing.end());
      return Tensor(std::move(shape), std::move(out));
    }
    case Primitive::Sum:
      expect_arity(1);
      return Tensor::scalar(in[0]->data.sum());
    case Primitive::Mean:
      expect_arity(1);
      return Tensor::scalar(in[0]->data.mean());
    case Primitive::Log: {
      expect_arity(1);
      const Tensor& a = *in[0];
      if ((a.data.array() <= 0.0).any()) {
        throw DomainError("log: non-positive input in tensor of shape " + to_string(a.shape));
      }
      return Tensor(a.shape, a.data.array().log().matrix());
    }
    case Primitive::Exp:
      expect_arity(1);
      return Tensor(in[0]->shape, in[0]->data.array().exp().matrix());
    case Primitive::Tanh:
      expect_arity(1);
      return Tensor(in[0]->shape, in[0]->data.array().tanh().matrix());
    case Primitive::Sigmoid:
      expect_arity(1);
      return Tensor(in[0]->shape, in[0]->data.unaryExpr(&stable_sigmoid));
    case Primitive::Softplus:
      expect_arity(1);
      return Tensor(in[0]->shape, in[0]->data.unaryExpr(&stable_softplus));
    case Primitive::Softmax: {
      expect_arity(1);
      const Tensor& a = *in[0];
      const Index rows = rows_for_last_axis(a.shape);
      const Index cols = a.size() / rows;
      Eigen::VectorXd out(a.size());
      for (Index r = 0; r < rows; ++r) {
        auto x = a.data.segment(r * cols, cols);
        auto y = out.segment(r * cols, cols);
        y = (x.array() - x.maxCoeff()).exp().matrix();
        y /= y.sum();
      }
      return Tensor(a.shape, std::move(out));
    }
    case Primitive::Scale:
      expect_arity(1);
      return Tensor(in[0]->shape, in[0]->data * args.scalar);
    case Primitive::IndexSelect: {
      expect_arity(1);
      const Tensor& a = *in[0];
      if (a.rank() == 0 || args.indices.empty()) shape_error(op, in);
      const Index rows = a.shape[0];
      const Index width = a.size() / rows;
      Eigen::VectorXd out(static_cast<Index>(args.indices.size()) * width);
      for (std::size_t k = 0; k < args.indices.size(); ++k) {
        const Index r = args.indices[k];
        if (r < 0 || r >= rows) {
          throw ShapeError("index_select: index " + std::to_string(r) + " out of range for shape " +
                           to_string(a.shape));
        }
        out.segment(static_cast<Index>(k) * width, width) = a.data.segment(r * width, width);
      }
      Shape shape = a.shape;
      shape[0] = static_cast<Index>(args.indices.size());
      return Tensor(std::move(shape), std::move(out));
    }
    case Primitive::Clamp:
      expect_arity(1);
      if (!(args.lower <= args.upper)) throw ContractError("clamp: lower bound exceeds upper bound");
      return Tensor(in[0]->shape, in[0]->data.cwiseMax(args.lower).cwiseMin(args.upper));
    case Primitive::Leaf:
      break;
  }
  throw ContractError("apply: leaf is not an applicable primitive");
}

}  // namespace

Var Graph::leaf(Tensor& tensor) {
  if (auto it = leaves_.find(&tensor); it != leaves_.end()) return {this, it->second};
  Node node;
  node.op = Primitive::Leaf;
  node.source = &tensor;
  node.needs_grad = record_gradients_ && tensor.requires_grad;
  nodes_.push_back(std::move(node));
  const int id = static_cast<int>(nodes_.size()) - 1;
  leaves_.emplace(&tensor, id);
  return {this, id};
}

Var Graph::constant(Tensor tensor) {
  Node node;
  node.op = Primitive::Leaf;
  node.value = std::move(tensor);
  node.value.requires_grad = false;
  node.value.grad.reset();
  nodes_.push_back(std::move(node));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

const Tensor& Graph::value(Var v) const {
  if (v.graph != this || v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
    throw ContractError("graph: variable does not belong to this graph");
  }
  return node_value(nodes_[static_cast<std::size_t>(v.id)]);
}

Var Graph::apply(Primitive op, std::span<const Var> inputs, PrimitiveArgs args) {
  std::vector<const Tensor*> values;
  std::vector<int> ids;
  values.reserve(inputs.size());
  ids.reserve(inputs.size());
  bool needs_grad = false;
  for (const Var& v : inputs) {
    values.push_back(&value(v));
    ids.push_back(v.id);
    needs_grad = needs_grad || nodes_[static_cast<std::size_t>(v.id)].needs_grad;
  }
  Node node;
  node.op = op;
  node.value = evaluate(op, values, args);
  node.inputs = std::move(ids);
  node.needs_grad = needs_grad;
  if (needs_grad) node.args = std::move(args);
  nodes_.push_back(std::move(node));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Eigen::VectorXd& Graph::grad_of(int id) {
  Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.grad.size() == 0) node.grad = Eigen::VectorXd::Zero(node_value(node).size());
  return node.grad;
}

void Graph::backward(Var output) {
  const Tensor& out = value(output);
  if (out.size() != 1) {
    throw ContractError("backward: output must be a scalar, got shape " + to_string(out.shape));
  }
  for (Node& node : nodes_) node.grad.resize(0);
  if (!nodes_[static_cast<std::size_t>(output.id)].needs_grad) return;
  grad_of(output.id).setOnes();

  for (int id = output.id; id >= 0; --id) {
    Node& node = nodes_[static_cast<std::size_t>(id)];
    if (!node.needs_grad || node.grad.size() == 0) continue;
    if (node.op == Primitive::Leaf) {
      if (node.source && node.source->requires_grad) {
        if (!node.source->grad) node.source->grad = Eigen::VectorXd::Zero(node.source->size());
        *node.source->grad += node.grad;
      }
      continue;
    }
    propagate(node);
  }
}

void Graph::propagate(const Node& node) {
  const Eigen::VectorXd& g = node.grad;
  const Tensor& y = node.value;
  auto input = [&](std::size_t k) -> const Tensor& { return node_value(nodes_[static_cast<std::size_t>(node.inputs[k])]); };
  auto wants = [&](std::size_t k) { return nodes_[static_cast<std::size_t>(node.inputs[k])].needs_grad; };
  auto accum = [&](std::size_t k) -> Eigen::VectorXd& { return grad_of(node.inputs[k]); };

  switch (node.op) {
    case Primitive::Add:
    case Primitive::Subtract:
    case Primitive::Multiply:
    case Primitive::Divide: {
      const Tensor& a = input(0);
      const Tensor& b = input(1);
      const Index m = b.size();
      if (wants(0)) {
        Eigen::VectorXd& ga = accum(0);
        for (Index i = 0; i < a.size(); ++i) {
          switch (node.op) {
            case Primitive::Multiply: ga[i] += g[i] * b.data[i % m]; break;
            case Primitive::Divide: ga[i] += g[i] / b.data[i % m]; break;
            default: ga[i] += g[i];
          }
        }
      }
      if (wants(1)) {
        Eigen::VectorXd& gb = accum(1);
        for (Index i = 0; i < a.size(); ++i) {
          const double bi = b.data[i % m];
          switch (node.op) {
            case Primitive::Add: gb[i % m] += g[i]; break;
            case Primitive::Subtract: gb[i % m] -= g[i]; break;
            case Primitive::Multiply: gb[i % m] += g[i] * a.data[i]; break;
            default: gb[i % m] -= g[i] * a.data[i] / (bi * bi);
          }
        }
      }
      break;
    }
    case Primitive::MatMul: {
      const Tensor& a = input(0);
      const Tensor& b = input(1);
      if (a.rank() == 2 && b.rank() == 2) {
        Eigen::Map<const RowMatrix> gc(g.data(), y.shape[0], y.shape[1]);
        if (wants(0)) {
          RowMatrix ga = gc * b.as_matrix().transpose();
          accum(0) += Eigen::Map<const Eigen::VectorXd>(ga.data(), ga.size());
        }
        if (wants(1)) {
          RowMatrix gb = a.as_matrix().transpose() * gc;
          accum(1) += Eigen::Map<const Eigen::VectorXd>(gb.data(), gb.size());
        }
      } else if (a.rank() == 2 && b.rank() == 1) {
        if (wants(0)) {
          RowMatrix ga = g * b.data.transpose();
          accum(0) += Eigen::Map<const Eigen::VectorXd>(ga.data(), ga.size());
        }
        if (wants(1)) accum(1) += a.as_matrix().transpose() * g;
      } else if (a.rank() == 1 && b.rank() == 2) {
        if (wants(0)) accum(0) += b.as_matrix() * g;
        if (wants(1)) {
          RowMatrix gb = a.data * g.transpose();
          accum(1) += Eigen::Map<const Eigen::VectorXd>(gb.data(), gb.size());
        }
      } else {
        if (wants(0)) accum(0) += g[0] * b.data;
        if (wants(1)) accum(1) += g[0] * a.data;
      }
      break;
    }
    case Primitive::Transpose: {
      if (!wants(0)) break;
      Eigen::Map<const RowMatrix> gt(g.data(), y.shape[0], y.shape[1]);
      RowMatrix ga = gt.transpose();
      accum(0) += Eigen::Map<const Eigen::VectorXd>(ga.data(), ga.size());
      break;
    }
    case Primitive::Reshape:
    case Primitive::Scale:
      if (wants(0)) accum(0) += node.op == Primitive::Scale ? Eigen::VectorXd(g * node.args.scalar) : g;
      break;
    case Primitive::Concat: {
      Index offset = 0;
      for (std::size_t k = 0; k < node.inputs.size(); ++k) {
        const Index n = input(k).size();
        if (wants(k)) accum(k) += g.segment(offset, n);
        offset += n;
      }
      break;
    }
    case Primitive::Sum:
      if (wants(0)) accum(0).array() += g[0];
      break;
    case Primitive::Mean:
      if (wants(0)) accum(0).array() += g[0] / static_cast<double>(input(0).size());
      break;
    case Primitive::Log:
      if (wants(0)) accum(0).array() += g.array() / input(0).data.array();
      break;
    case Primitive::Exp:
      if (wants(0)) accum(0).array() += g.array() * y.data.array();
      break;
    case Primitive::Tanh:
      if (wants(0)) accum(0).array() += g.array() * (1.0 - y.data.array().square());
      break;
    case Primitive::Sigmoid:
      if (wants(0)) accum(0).array() += g.array() * y.data.array() * (1.0 - y.data.array());
      break;
    case Primitive::Softplus:
      if (wants(0)) accum(0).array() += g.array() * input(0).data.unaryExpr(&stable_sigmoid).array();
      break;
    case Primitive::Softmax: {
      if (!wants(0)) break;
      const Index rows = rows_for_last_axis(y.shape);
      const Index cols = y.size() / rows;
      Eigen::VectorXd& ga = accum(0);
      for (Index r = 0; r < rows; ++r) {
        auto s = y.data.segment(r * cols, cols);
        auto gs = g.segment(r * cols, cols);
        const double dot = s.dot(gs);
        ga.segment(r * cols, cols).array() += s.array() * (gs.array() - dot);
      }
      break;
    }
    case Primitive::IndexSelect: {
      if (!wants(0)) break;
      const Tensor& a = input(0);
      const Index width = a.size() / a.shape[0];
      Eigen::VectorXd& ga = accum(0);
      for (std::size_t k = 0; k < node.args.indices.size(); ++k) {
        ga.segment(node.args.indices[k] * width, width) += g.segment(static_cast<Index>(k) * width, width);
      }
      break;
    }
    case Primitive::Clamp: {
      if (!wants(0)) break;
      const Tensor& a = input(0);
      Eigen::VectorXd& ga = accum(0);
      for (Index i = 0; i < a.size(); ++i) {
        if (a.data[i] >= node.args.lower && a.data[i] <= node.args.upper) ga[i] += g[i];
      }
      break;
    }
    case Primitive::Leaf:
      break;
  }
}

namespace {

Graph& owner(std::initializer_list<Var> vars) {
  Graph* g = vars.begin()->graph;
  for (const Var& v : vars) {
    if (v.graph == nullptr || v.graph != g) throw ContractError("primitive inputs belong to different graphs");
  }
  return *g;
}

Var unary(Primitive op, Var a, PrimitiveArgs args = {}) {
  const Var in[] = {a};
  return owner({a}).apply(op, in, std::move(args));
}

Var binary(Primitive op, Var a, Var b) {
  const Var in[] = {a, b};
  return owner({a, b}).apply(op, in);
}

}  // namespace

Var add(Var a, Var b) { return binary(Primitive::Add, a, b); }
Var subtract(Var a, Var b) { return binary(Primitive::Subtract, a, b); }
Var multiply(Var a, Var b) { return binary(Primitive::Multiply, a, b); }
Var divide(Var a, Var b) { return binary(Primitive::Divide, a, b); }
Var matmul(Var a, Var b) { return binary(Primitive::MatMul, a, b); }
Var transpose(Var a) { return unary(Primitive::Transpose, a); }

Var reshape(Var a, Shape shape) {
  PrimitiveArgs args;
  args.shape = std::move(shape);
  return unary(Primitive::Reshape, a, std::move(args));
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat: no inputs");
  Graph* g = parts.front().graph;
  for (const Var& v : parts) {
    if (v.graph != g || g == nullptr) throw ContractError("primitive inputs belong to different graphs");
  }
  return g->apply(Primitive::Concat, parts);
}

Var sum(Var a) { return unary(Primitive::Sum, a); }
Var mean(Var a) { return unary(Primitive::Mean, a); }
Var log(Var a) { return unary(Primitive::Log, a); }
Var exp(Var a) { return unary(Primitive::Exp, a); }
Var tanh(Var a) { return unary(Primitive::Tanh, a); }
Var sigmoid(Var a) { return unary(Primitive::Sigmoid, a); }
Var softplus(Var a) { return unary(Primitive::Softplus, a); }
Var softmax(Var a) { return unary(Primitive::Softmax, a); }

Var scale(Var a, double factor) {
  PrimitiveArgs args;
  args.scalar = factor;
  return unary(Primitive::Scale, a, std::move(args));
}

Var index_select(Var a, std::vector<Index> indices) {
  PrimitiveArgs args;
  args.indices = std::move(indices);
  return unary(Primitive::IndexSelect, a, std::move(args));
}

Var clamp(Var a, double lower, double upper) {
  PrimitiveArgs args;
  args.lower = lower;
  args.upper = upper;
  return unary(Primitive::Clamp, a, std::move(args));
}

double grad_check(const GraphBuilder& build, std::span<Tensor* const> inputs, double step) {
  if (!(step > 0.0)) throw ContractError("grad_check: step must be positive");

  std::vector<bool> saved_flags;
  std::vector<std::optional<Eigen::VectorXd>> saved_grads;
  for (Tensor* t : inputs) {
    saved_flags.push_back(t->requires_grad);
    saved_grads.push_back(t->grad);
    t->requires_grad = true;
    t->grad.reset();
  }

  auto evaluate_at = [&](bool with_backward) {
    Graph graph(with_backward);
    std::vector<Var> leaves;
    leaves.reserve(inputs.size());
    for (Tensor* t : inputs) leaves.push_back(graph.leaf(*t));
    Var out = build(graph, leaves);
    if (with_backward) graph.backward(out);
    return out.item();
  };

  evaluate_at(true);
  std::vector<Eigen::VectorXd> analytic;
  for (Tensor* t : inputs) analytic.push_back(t->grad ? *t->grad : Eigen::VectorXd::Zero(t->size()));

  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    Tensor& t = *inputs[k];
    for (Index i = 0; i < t.size(); ++i) {
      const double original = t.data[i];
      t.data[i] = original + step;
      const double up = evaluate_at(false);
      t.data[i] = original - step;
      const double down = evaluate_at(false);
      t.data[i] = original;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[k][i];
      worst = std::max(worst, std::abs(a - numeric) / std::max(1.0, std::abs(a)));
    }
  }

  for (std::size_t k = 0; k < inputs.size(); ++k) {
    inputs[k]->requires_grad = saved_flags[k];
    inputs[k]->grad = saved_grads[k];
  }
  return worst;
}

}  // namespace dualre
