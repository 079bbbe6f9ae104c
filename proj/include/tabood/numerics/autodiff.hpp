#pragma once

#include "tabood/numerics/types.hpp"

#include <functional>
#include <vector>

namespace tabood::ad {

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; only valid while the
/// owning tape is alive.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

/// Reverse-mode tape over dense matrices. Nodes are appended in evaluation
/// order, so a reverse sweep over the node list is a valid reverse
/// topological order.
class Tape {
public:
  using BackwardFn = std::function<void(Tape&, int self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that does not receive gradients.
  Var constant(Matrix value);
  /// Leaf that receives gradients.
  Var variable(Matrix value);

  /// Records a derived node. `backward` reads gradient(self) and calls
  /// accumulate() for each parent; it is skipped when no parent needs grads.
  Var record(Matrix value, std::initializer_list<Var> parents, BackwardFn backward);
  Var record(Matrix value, const std::vector<Var>& parents, BackwardFn backward);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }

  /// Seeds d(output)/d(output) = 1 and sweeps the tape backwards. Throws
  /// InvalidArgument if output is not 1x1.
  void backward(Var output);

  /// Gradient accumulated at v by the last backward(); zeros if v was never
  /// reached.
  Matrix gradient(Var v) const;

  /// Used inside backward functions.
  const Matrix& grad_of(int id) const { return nodes_[id].grad; }
  const Matrix& value_of(int id) const { return nodes_[id].value; }
  void accumulate(int id, const Matrix& contribution);
  template <typename Expr>
  void accumulate_expr(int id, const Expr& contribution) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) n.grad = contribution;
    else n.grad += contribution;
  }

  std::size_t size() const { return nodes_.size(); }

private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

// Elementwise and broadcasting arithmetic.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var neg(Var a);
/// a (n x m) + b (1 x m) broadcast down rows.
Var add_row(Var a, Var row);
/// a (n x m) .* b (1 x m) broadcast down rows.
Var mul_row(Var a, Var row);
/// a (n x m) + b (n x 1) broadcast across columns.
Var add_col(Var a, Var col);
/// a (n x m) .* b (n x 1) broadcast across columns.
Var mul_col(Var a, Var col);

Var matmul(Var a, Var b);
/// x W + b, with W stored (in x out) and b (1 x out).
Var linear(Var x, Var weight, Var bias);

// Pointwise nonlinearities.
Var relu(Var a);
Var tanh(Var a);
Var sigmoid(Var a);
Var exp(Var a);
Var log(Var a);
Var square(Var a);
/// a^p for a > 0 (used for rsqrt in normalization layers).
Var pow(Var a, double p);

// Reductions.
Var sum(Var a);
Var mean(Var a);
/// (n x m) -> (n x 1)
Var row_sum(Var a);
Var row_mean(Var a);
/// (n x m) -> (1 x m)
Var col_mean(Var a);

Var softmax_rows(Var a);
Var log_softmax_rows(Var a);

// Structural ops.
Var hcat(Var a, Var b);
Var select_cols(Var a, const IndexVector& cols);
Var take_rows(Var a, const IndexVector& rows);
/// A and B hold `groups` stacked blocks of equal height; returns the stacked
/// blocks A_g B_g^T.
Var batched_matmul_nt(Var a, Var b, Eigen::Index groups);
/// P holds stacked (r x r) blocks, V stacked (r x k) blocks; returns P_g V_g.
Var batched_matmul(Var p, Var v, Eigen::Index groups);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator-(Var a) { return neg(a); }
inline Var operator*(double s, Var a) { return scale(a, s); }
inline Var operator*(Var a, double s) { return scale(a, s); }

}  // namespace tabood::ad
