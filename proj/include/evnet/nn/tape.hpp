#pragma once

// Reverse-mode automatic differentiation over dense double matrices.
//
// A Tape records every operation of one forward pass. Values are 2-D
// (sequence x feature); higher-rank intermediates are flattened row-major.
// Calling backward() on a 1x1 result accumulates gradients into every
// recorded node that depends on a parameter or variable leaf.

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace evnet::nn {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Named parameter tensors. Ordered by name so iteration is deterministic.
class ParamStore {
 public:
  void set(const std::string& name, Matrix value);
  const Matrix& get(const std::string& name) const;
  Matrix& get(const std::string& name);
  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }

  const std::map<std::string, Matrix>& tensors() const { return tensors_; }
  std::map<std::string, Matrix>& tensors() { return tensors_; }
  std::size_t size() const { return tensors_.size(); }
  std::size_t scalar_count() const;

 private:
  std::map<std::string, Matrix> tensors_;
};

using Gradients = std::map<std::string, Matrix>;

class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix& upstream)>;

  /// With gradients disabled, parameters enter as constants and no backward
  /// closures are kept (inference mode).
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  bool grad_enabled() const { return grad_enabled_; }

  Var constant(Matrix value);
  Var variable(Matrix value);
  /// Leaf bound to a named parameter; repeated lookups share one node so
  /// gradients from every use accumulate.
  Var param(const ParamStore& store, const std::string& name);

  /// Records an op result. `inputs` decide whether the node needs a
  /// gradient; `backward` is dropped when none of them does.
  Var record(Matrix value, const std::vector<Var>& inputs, Backward backward);

  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  void accumulate(Var v, const Matrix& delta);

  void backward(Var output);

  /// Gradient of the last backward() output with respect to `v`, zeros if
  /// `v` does not influence it.
  Matrix grad(Var v) const;
  Gradients param_grads() const;

  const Matrix& value(Var v) const { return nodes_[v.id()].value; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    bool has_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
  std::map<std::string, int> param_nodes_;
  bool grad_enabled_ = true;
};

// Elementwise and linear algebra ops. Shape mismatches throw
// std::invalid_argument.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double s);
/// a (n x c) plus a 1 x c row broadcast over every row.
Var add_row(Var a, Var row);
Var relu(Var a);
Var sum(Var a);
Var mean(Var a);
Var transpose(Var a);

Var concat_cols(const std::vector<Var>& parts);
Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
Var gather_rows(Var a, const std::vector<int>& rows);
/// Row-major flatten into 1 x (rows*cols) and its inverse.
Var flatten(Var a);
Var reshape(Var a, Eigen::Index rows, Eigen::Index cols);
Var tile_rows(Var row, Eigen::Index count);
/// Constant linear map applied from the left: weights * a.
Var left_multiply(const Matrix& weights, Var a);
/// Same value, no gradient flows back through it.
Var detach(Var a);

Var softmax_rows(Var a);
/// Per-row standardization with epsilon inside the square root, followed by
/// the affine gain and bias (both 1 x c).
Var layer_norm(Var a, Var gain, Var bias, double eps = 1e-5);
/// Euclidean norm of every row as an n x 1 column. The gradient at a zero
/// row is zero.
Var row_norms(Var a);

/// Unitary inverse DFT of an amplitude/phase spectrum (real part).
Var idft_amp_phase(Var spectrum);
/// Orthonormal single-level inverse Haar transform.
Var haar_inverse(Var spectrum);

/// Per row v: outer product v^T v, 2x2 max-pool with stride 2, row-major
/// flatten. Input n x e (e even), output n x (e/2)^2.
Var bilinear_pool(Var a);

}  // namespace evnet::nn
