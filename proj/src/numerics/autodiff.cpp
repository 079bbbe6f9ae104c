#include "tabood/numerics/autodiff.hpp"

#include "tabood/error.hpp"

#include <cmath>
#include <string>

namespace tabood::ad {

namespace {

Tape& tape_of(Var a) {
  if (a.tape == nullptr) throw InvalidArgument("autodiff: unbound variable");
  return *a.tape;
}

Tape& tape_of(Var a, Var b) {
  if (a.tape != b.tape) throw InvalidArgument("autodiff: operands on different tapes");
  return tape_of(a);
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()) + ")");
}

// Backward for a pointwise map whose derivative depends on input and output.
template <typename Deriv>
Var pointwise(Var a, Matrix out, Deriv deriv) {
  Tape& t = tape_of(a);
  const int ia = a.id;
  return t.record(std::move(out), {a}, [ia, deriv](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    tp.accumulate_expr(ia, (g.array() * deriv(tp.value_of(ia), tp.value_of(self)).array()).matrix());
  });
}

}  // namespace

const Matrix& Var::value() const { return tape->value(*this); }

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), false, nullptr});
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Tape::variable(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), true, nullptr});
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Tape::record(Matrix value, std::initializer_list<Var> parents, BackwardFn backward) {
  return record(std::move(value), std::vector<Var>(parents), std::move(backward));
}

Var Tape::record(Matrix value, const std::vector<Var>& parents, BackwardFn backward) {
  bool needs = false;
  for (Var p : parents) {
    if (p.tape != this) throw InvalidArgument("autodiff: parent recorded on another tape");
    needs = needs || nodes_[p.id].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), Matrix(), needs, needs ? std::move(backward) : nullptr});
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

void Tape::accumulate(int id, const Matrix& contribution) { accumulate_expr(id, contribution); }

void Tape::backward(Var output) {
  if (output.tape != this) throw InvalidArgument("backward: output recorded on another tape");
  const Matrix& out = nodes_[output.id].value;
  if (out.rows() != 1 || out.cols() != 1)
    throw InvalidArgument("backward: output must be a scalar (1x1), got " +
                          std::to_string(out.rows()) + "x" + std::to_string(out.cols()));
  for (Node& n : nodes_) n.grad.resize(0, 0);
  if (!nodes_[output.id].requires_grad) return;
  nodes_[output.id].grad = Matrix::Ones(1, 1);
  for (int i = output.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.backward && n.grad.size() != 0) n.backward(*this, i);
  }
}

Matrix Tape::gradient(Var v) const {
  const Node& n = nodes_[v.id];
  if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "add");
  const int ia = a.id, ib = b.id;
  return t.record(a.value() + b.value(), {a, b}, [ia, ib](Tape& tp, int self) {
    tp.accumulate(ia, tp.grad_of(self));
    tp.accumulate(ib, tp.grad_of(self));
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  const int ia = a.id, ib = b.id;
  return t.record(a.value() - b.value(), {a, b}, [ia, ib](Tape& tp, int self) {
    tp.accumulate(ia, tp.grad_of(self));
    tp.accumulate_expr(ib, -tp.grad_of(self));
  });
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  const int ia = a.id, ib = b.id;
  return t.record(a.value().cwiseProduct(b.value()), {a, b}, [ia, ib](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    if (tp.requires_grad(ia)) tp.accumulate_expr(ia, g.cwiseProduct(tp.value_of(ib)));
    if (tp.requires_grad(ib)) tp.accumulate_expr(ib, g.cwiseProduct(tp.value_of(ia)));
  });
}

Var scale(Var a, double s) {
  Tape& t = tape_of(a);
  const int ia = a.id;
  return t.record(a.value() * s, {a},
                  [ia, s](Tape& tp, int self) { tp.accumulate_expr(ia, tp.grad_of(self) * s); });
}

Var add_scalar(Var a, double s) {
  Tape& t = tape_of(a);
  const int ia = a.id;
  return t.record((a.value().array() + s).matrix(), {a},
                  [ia](Tape& tp, int self) { tp.accumulate(ia, tp.grad_of(self)); });
}

Var neg(Var a) { return scale(a, -1.0); }

Var add_row(Var a, Var row) {
  Tape& t = tape_of(a, row);
  const Matrix& r = row.value();
  if (r.rows() != 1 || r.cols() != a.cols()) throw InvalidArgument("add_row: row must be 1 x cols");
  const int ia = a.id, ir = row.id;
  return t.record(a.value().rowwise() + r.row(0), {a, row}, [ia, ir](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    tp.accumulate(ia, g);
    if (tp.requires_grad(ir)) tp.accumulate_expr(ir, g.colwise().sum());
  });
}

Var mul_row(Var a, Var row) {
  Tape& t = tape_of(a, row);
  const Matrix& r = row.value();
  if (r.rows() != 1 || r.cols() != a.cols()) throw InvalidArgument("mul_row: row must be 1 x cols");
  const int ia = a.id, ir = row.id;
  Matrix out = a.value().array().rowwise() * r.row(0).array();
  return t.record(std::move(out), {a, row}, [ia, ir](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    if (tp.requires_grad(ia))
      tp.accumulate_expr(ia, (g.array().rowwise() * tp.value_of(ir).row(0).array()).matrix());
    if (tp.requires_grad(ir))
      tp.accumulate_expr(ir, g.cwiseProduct(tp.value_of(ia)).colwise().sum());
  });
}

Var add_col(Var a, Var col) {
  Tape& t = tape_of(a, col);
  const Matrix& c = col.value();
  if (c.cols() != 1 || c.rows() != a.rows()) throw InvalidArgument("add_col: col must be rows x 1");
  const int ia = a.id, ic = col.id;
  return t.record(a.value().colwise() + c.col(0), {a, col}, [ia, ic](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    tp.accumulate(ia, g);
    if (tp.requires_grad(ic)) tp.accumulate_expr(ic, g.rowwise().sum());
  });
}

Var mul_col(Var a, Var col) {
  Tape& t = tape_of(a, col);
  const Matrix& c = col.value();
  if (c.cols() != 1 || c.rows() != a.rows()) throw InvalidArgument("mul_col: col must be rows x 1");
  const int ia = a.id, ic = col.id;
  Matrix out = a.value().array().colwise() * c.col(0).array();
  return t.record(std::move(out), {a, col}, [ia, ic](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    if (tp.requires_grad(ia))
      tp.accumulate_expr(ia, (g.array().colwise() * tp.value_of(ic).col(0).array()).matrix());
    if (tp.requires_grad(ic))
      tp.accumulate_expr(ic, g.cwiseProduct(tp.value_of(ia)).rowwise().sum());
  });
}

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  if (a.cols() != b.rows())
    throw InvalidArgument("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                          std::to_string(b.rows()) + ")");
  const int ia = a.id, ib = b.id;
  Matrix out = a.value() * b.value();
  return t.record(std::move(out), {a, b}, [ia, ib](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    if (tp.requires_grad(ia)) tp.accumulate_expr(ia, g * tp.value_of(ib).transpose());
    if (tp.requires_grad(ib)) tp.accumulate_expr(ib, tp.value_of(ia).transpose() * g);
  });
}

Var linear(Var x, Var weight, Var bias) { return add_row(matmul(x, weight), bias); }

Var relu(Var a) {
  return pointwise(a, a.value().cwiseMax(0.0), [](const Matrix& in, const Matrix&) {
    return (in.array() > 0.0).cast<double>().matrix();
  });
}

Var tanh(Var a) {
  return pointwise(a, a.value().array().tanh().matrix(), [](const Matrix&, const Matrix& out) {
    return (1.0 - out.array().square()).matrix();
  });
}

Var sigmoid(Var a) {
  Matrix out = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return pointwise(a, std::move(out), [](const Matrix&, const Matrix& y) {
    return (y.array() * (1.0 - y.array())).matrix();
  });
}

Var exp(Var a) {
  return pointwise(a, a.value().array().exp().matrix(),
                   [](const Matrix&, const Matrix& out) { return out; });
}

Var log(Var a) {
  return pointwise(a, a.value().array().log().matrix(),
                   [](const Matrix& in, const Matrix&) { return in.cwiseInverse(); });
}

Var square(Var a) {
  return pointwise(a, a.value().array().square().matrix(),
                   [](const Matrix& in, const Matrix&) { return (2.0 * in).eval(); });
}

Var pow(Var a, double p) {
  return pointwise(a, a.value().array().pow(p).matrix(), [p](const Matrix& in, const Matrix&) {
    return (p * in.array().pow(p - 1.0)).matrix();
  });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  const int ia = a.id;
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return t.record(std::move(out), {a}, [ia](Tape& tp, int self) {
    const Matrix& in = tp.value_of(ia);
    tp.accumulate_expr(ia, Matrix::Constant(in.rows(), in.cols(), tp.grad_of(self)(0, 0)));
  });
}

Var mean(Var a) {
  const auto n = static_cast<double>(a.value().size());
  if (n == 0) throw InvalidArgument("mean: empty input");
  return scale(sum(a), 1.0 / n);
}

Var row_sum(Var a) {
  Tape& t = tape_of(a);
  const int ia = a.id;
  Matrix out = a.value().rowwise().sum();
  return t.record(std::move(out), {a}, [ia](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    const Eigen::Index cols = tp.value_of(ia).cols();
    tp.accumulate_expr(ia, g.col(0).replicate(1, cols));
  });
}

Var row_mean(Var a) { return scale(row_sum(a), 1.0 / static_cast<double>(a.cols())); }

Var col_mean(Var a) {
  Tape& t = tape_of(a);
  const int ia = a.id;
  const double inv = 1.0 / static_cast<double>(a.rows());
  Matrix out = a.value().colwise().sum() * inv;
  return t.record(std::move(out), {a}, [ia, inv](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    const Eigen::Index rows = tp.value_of(ia).rows();
    tp.accumulate_expr(ia, (g.row(0) * inv).replicate(rows, 1));
  });
}

Var softmax_rows(Var a) {
  Tape& t = tape_of(a);
  const int ia = a.id;
  Matrix out = a.value();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out.row(i) = (out.row(i).array() - out.row(i).maxCoeff()).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return t.record(std::move(out), {a}, [ia](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    const Matrix& y = tp.value_of(self);
    // dx = y .* (g - <g, y>) per row
    const Vector dot = g.cwiseProduct(y).rowwise().sum();
    tp.accumulate_expr(ia, (y.array() * (g.colwise() - dot).array()).matrix());
  });
}

Var log_softmax_rows(Var a) {
  Tape& t = tape_of(a);
  const int ia = a.id;
  Matrix out = a.value();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double m = out.row(i).maxCoeff();
    const double lse = m + std::log((out.row(i).array() - m).exp().sum());
    out.row(i).array() -= lse;
  }
  return t.record(std::move(out), {a}, [ia](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    const Matrix p = tp.value_of(self).array().exp().matrix();
    const Vector gsum = g.rowwise().sum();
    tp.accumulate_expr(ia, g - (p.array().colwise() * gsum.array()).matrix());
  });
}

Var hcat(Var a, Var b) {
  Tape& t = tape_of(a, b);
  if (a.rows() != b.rows()) throw InvalidArgument("hcat: row counts differ");
  const int ia = a.id, ib = b.id;
  const Eigen::Index ca = a.cols(), cb = b.cols();
  Matrix out(a.rows(), ca + cb);
  out << a.value(), b.value();
  return t.record(std::move(out), {a, b}, [ia, ib, ca, cb](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    if (tp.requires_grad(ia)) tp.accumulate_expr(ia, g.leftCols(ca));
    if (tp.requires_grad(ib)) tp.accumulate_expr(ib, g.rightCols(cb));
  });
}

Var select_cols(Var a, const IndexVector& cols) {
  Tape& t = tape_of(a);
  const Matrix& in = a.value();
  for (Eigen::Index c : cols)
    if (c < 0 || c >= in.cols()) throw InvalidArgument("select_cols: index out of range");
  const int ia = a.id;
  Matrix out(in.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = in.col(cols[j]);
  return t.record(std::move(out), {a}, [ia, cols](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    const Matrix& src = tp.value_of(ia);
    Matrix d = Matrix::Zero(src.rows(), src.cols());
    for (std::size_t j = 0; j < cols.size(); ++j) d.col(cols[j]) += g.col(static_cast<Eigen::Index>(j));
    tp.accumulate(ia, d);
  });
}

Var take_rows(Var a, const IndexVector& rows) {
  Tape& t = tape_of(a);
  const Matrix& in = a.value();
  for (Eigen::Index r : rows)
    if (r < 0 || r >= in.rows()) throw InvalidArgument("take_rows: index out of range");
  const int ia = a.id;
  Matrix out(static_cast<Eigen::Index>(rows.size()), in.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = in.row(rows[i]);
  return t.record(std::move(out), {a}, [ia, rows](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    const Matrix& src = tp.value_of(ia);
    Matrix d = Matrix::Zero(src.rows(), src.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) d.row(rows[i]) += g.row(static_cast<Eigen::Index>(i));
    tp.accumulate(ia, d);
  });
}

Var batched_matmul_nt(Var a, Var b, Eigen::Index groups) {
  Tape& t = tape_of(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (groups <= 0 || av.rows() % groups != 0 || bv.rows() != av.rows() || av.cols() != bv.cols())
    throw InvalidArgument("batched_matmul_nt: incompatible shapes");
  const Eigen::Index r = av.rows() / groups;
  Matrix out(av.rows(), r);
  for (Eigen::Index g = 0; g < groups; ++g)
    out.middleRows(g * r, r).noalias() = av.middleRows(g * r, r) * bv.middleRows(g * r, r).transpose();
  const int ia = a.id, ib = b.id;
  return t.record(std::move(out), {a, b}, [ia, ib, groups, r](Tape& tp, int self) {
    const Matrix& gr = tp.grad_of(self);
    const Matrix& av = tp.value_of(ia);
    const Matrix& bv = tp.value_of(ib);
    if (tp.requires_grad(ia)) {
      Matrix d(av.rows(), av.cols());
      for (Eigen::Index g = 0; g < groups; ++g)
        d.middleRows(g * r, r).noalias() = gr.middleRows(g * r, r) * bv.middleRows(g * r, r);
      tp.accumulate(ia, d);
    }
    if (tp.requires_grad(ib)) {
      Matrix d(bv.rows(), bv.cols());
      for (Eigen::Index g = 0; g < groups; ++g)
        d.middleRows(g * r, r).noalias() = gr.middleRows(g * r, r).transpose() * av.middleRows(g * r, r);
      tp.accumulate(ib, d);
    }
  });
}

Var batched_matmul(Var p, Var v, Eigen::Index groups) {
  Tape& t = tape_of(p, v);
  const Matrix& pv = p.value();
  const Matrix& vv = v.value();
  if (groups <= 0 || pv.rows() % groups != 0 || vv.rows() != pv.rows() || pv.cols() != pv.rows() / groups)
    throw InvalidArgument("batched_matmul: incompatible shapes");
  const Eigen::Index r = pv.rows() / groups;
  Matrix out(vv.rows(), vv.cols());
  for (Eigen::Index g = 0; g < groups; ++g)
    out.middleRows(g * r, r).noalias() = pv.middleRows(g * r, r) * vv.middleRows(g * r, r);
  const int ip = p.id, iv = v.id;
  return t.record(std::move(out), {p, v}, [ip, iv, groups, r](Tape& tp, int self) {
    const Matrix& gr = tp.grad_of(self);
    const Matrix& pv = tp.value_of(ip);
    const Matrix& vv = tp.value_of(iv);
    if (tp.requires_grad(ip)) {
      Matrix d(pv.rows(), pv.cols());
      for (Eigen::Index g = 0; g < groups; ++g)
        d.middleRows(g * r, r).noalias() = gr.middleRows(g * r, r) * vv.middleRows(g * r, r).transpose();
      tp.accumulate(ip, d);
    }
    if (tp.requires_grad(iv)) {
      Matrix d(vv.rows(), vv.cols());
      for (Eigen::Index g = 0; g < groups; ++g)
        d.middleRows(g * r, r).noalias() = pv.middleRows(g * r, r).transpose() * gr.middleRows(g * r, r);
      tp.accumulate(iv, d);
    }
  });
}

}  // namespace tabood::ad
