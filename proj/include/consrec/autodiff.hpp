#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "consrec/error.hpp"
#include "consrec/tensor.hpp"

namespace consrec {

// Handle to a node on a Tape.
struct Var {
  std::size_t id = 0;
  friend bool operator==(Var, Var) = default;
};

enum class OpKind {
  constant,
  parameter,
  matmul,
  sparse_dense_matmul,
  add,
  subtract,
  hadamard,
  concat_cols,
  concat_rows,
  row_slice,
  row_select,
  sigmoid,
  relu,
  ln_sigmoid,
  mean_over,
  segment_mean,
  scale,
  row_scale,
  sum,
  weighted_sum,
};

constexpr std::string_view op_name(OpKind k) {
  switch (k) {
    case OpKind::constant: return "constant";
    case OpKind::parameter: return "parameter";
    case OpKind::matmul: return "matmul";
    case OpKind::sparse_dense_matmul: return "sparse_dense_matmul";
    case OpKind::add: return "add";
    case OpKind::subtract: return "subtract";
    case OpKind::hadamard: return "hadamard";
    case OpKind::concat_cols: return "concat_cols";
    case OpKind::concat_rows: return "concat_rows";
    case OpKind::row_slice: return "row_slice";
    case OpKind::row_select: return "row_select";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::relu: return "relu";
    case OpKind::ln_sigmoid: return "ln_sigmoid";
    case OpKind::mean_over: return "mean_over";
    case OpKind::segment_mean: return "segment_mean";
    case OpKind::scale: return "scale";
    case OpKind::row_scale: return "row_scale";
    case OpKind::sum: return "sum";
    case OpKind::weighted_sum: return "weighted_sum";
  }
  return "?";
}

inline double logistic(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// ln(logistic(x)) without overflow for large |x|.
inline double log_logistic(double x) noexcept {
  return std::min(x, 0.0) - std::log1p(std::exp(-std::abs(x)));
}

// Append-only record of a computation for reverse-mode differentiation.
// Node ids are topologically ordered because inputs must exist before the
// node that consumes them is pushed.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Var constant(Matrix value) { return push(OpKind::constant, {}, std::move(value), false, {}); }

  Var parameter(Matrix value) {
    Var v = push(OpKind::parameter, {}, std::move(value), true, {});
    parameters_.push_back(v);
    return v;
  }

  const Matrix& value(Var v) const { return nodes_.at(v.id).value; }
  OpKind kind(Var v) const { return nodes_.at(v.id).kind; }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::span<const Var> parameters() const noexcept { return parameters_; }

  Var matmul(Var a, Var b) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    if (av.cols() != bv.rows()) mismatch(OpKind::matmul, av, bv);
    Matrix out(av.rows(), bv.cols());
    kernels::gemm_acc(av, bv, out);
    return push(OpKind::matmul, {a, b}, std::move(out), any_grad({a, b}),
                [a, b](Tape& t, std::size_t self) {
                  const Matrix& g = t.nodes_[self].grad;
                  if (t.needs(a)) kernels::gemm_nt_acc(g, t.value(b), t.grad_ref(a));
                  if (t.needs(b)) kernels::gemm_tn_acc(t.value(a), g, t.grad_ref(b));
                });
  }

  Var sparse_dense_matmul(std::shared_ptr<const SparseMatrix> s, Var b) {
    const Matrix& bv = value(b);
    if (s->cols() != bv.rows()) {
      throw ShapeError("sparse_dense_matmul: " + std::to_string(s->rows()) + "x" +
                       std::to_string(s->cols()) + " * " + shape_str(bv));
    }
    Matrix out(s->rows(), bv.cols());
    kernels::spmm_acc(*s, bv, out);
    return push(OpKind::sparse_dense_matmul, {b}, std::move(out), any_grad({b}),
                [s, b](Tape& t, std::size_t self) {
                  kernels::spmm_tn_acc(*s, t.nodes_[self].grad, t.grad_ref(b));
                });
  }

  Var add(Var a, Var b) { return linear2(OpKind::add, a, b, 1.0, 1.0); }
  Var subtract(Var a, Var b) { return linear2(OpKind::subtract, a, b, 1.0, -1.0); }

  Var hadamard(Var a, Var b) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    same_shape(OpKind::hadamard, av, bv);
    Matrix out = av;
    for (std::size_t k = 0; k < out.size(); ++k) out.data()[k] *= bv.data()[k];
    return push(OpKind::hadamard, {a, b}, std::move(out), any_grad({a, b}),
                [a, b](Tape& t, std::size_t self) {
                  const auto& g = t.nodes_[self].grad.data();
                  if (t.needs(a)) {
                    auto& ga = t.grad_ref(a).data();
                    const auto& bv = t.value(b).data();
                    for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * bv[k];
                  }
                  if (t.needs(b)) {
                    auto& gb = t.grad_ref(b).data();
                    const auto& av = t.value(a).data();
                    for (std::size_t k = 0; k < g.size(); ++k) gb[k] += g[k] * av[k];
                  }
                });
  }

  Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw ShapeError("concat_cols: no inputs");
    const std::size_t rows = value(parts[0]).rows();
    std::size_t cols = 0;
    for (Var p : parts) {
      if (value(p).rows() != rows) mismatch(OpKind::concat_cols, value(parts[0]), value(p));
      cols += value(p).cols();
    }
    Matrix out(rows, cols);
    std::size_t offset = 0;
    for (Var p : parts) {
      const Matrix& pv = value(p);
      for (std::size_t r = 0; r < rows; ++r) {
        std::copy(pv.row(r).begin(), pv.row(r).end(), out.row(r).begin() + offset);
      }
      offset += pv.cols();
    }
    return push(OpKind::concat_cols, parts, std::move(out), any_grad(parts),
                [parts](Tape& t, std::size_t self) {
                  const Matrix& g = t.nodes_[self].grad;
                  std::size_t offset = 0;
                  for (Var p : parts) {
                    const std::size_t c = t.value(p).cols();
                    if (t.needs(p)) {
                      Matrix& gp = t.grad_ref(p);
                      for (std::size_t r = 0; r < g.rows(); ++r) {
                        for (std::size_t j = 0; j < c; ++j) gp(r, j) += g(r, offset + j);
                      }
                    }
                    offset += c;
                  }
                });
  }

  Var concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw ShapeError("concat_rows: no inputs");
    const std::size_t cols = value(parts[0]).cols();
    std::size_t rows = 0;
    for (Var p : parts) {
      if (value(p).cols() != cols) mismatch(OpKind::concat_rows, value(parts[0]), value(p));
      rows += value(p).rows();
    }
    std::vector<double> data;
    data.reserve(rows * cols);
    for (Var p : parts) data.insert(data.end(), value(p).data().begin(), value(p).data().end());
    return push(OpKind::concat_rows, parts, Matrix(rows, cols, std::move(data)), any_grad(parts),
                [parts](Tape& t, std::size_t self) {
                  const auto& g = t.nodes_[self].grad.data();
                  std::size_t offset = 0;
                  for (Var p : parts) {
                    const std::size_t n = t.value(p).size();
                    if (t.needs(p)) {
                      auto& gp = t.grad_ref(p).data();
                      for (std::size_t k = 0; k < n; ++k) gp[k] += g[offset + k];
                    }
                    offset += n;
                  }
                });
  }

  // Rows [begin, begin + count) of a.
  Var row_slice(Var a, std::size_t begin, std::size_t count) {
    const Matrix& av = value(a);
    if (begin + count > av.rows()) {
      throw ShapeError("row_slice: rows [" + std::to_string(begin) + ", " +
                       std::to_string(begin + count) + ") of " + shape_str(av));
    }
    const auto first = av.data().begin() + static_cast<std::ptrdiff_t>(begin * av.cols());
    std::vector<double> data(first, first + static_cast<std::ptrdiff_t>(count * av.cols()));
    return push(OpKind::row_slice, {a}, Matrix(count, av.cols(), std::move(data)), any_grad({a}),
                [a, begin](Tape& t, std::size_t self) {
                  const auto& g = t.nodes_[self].grad.data();
                  auto& ga = t.grad_ref(a).data();
                  const std::size_t off = begin * t.value(a).cols();
                  for (std::size_t k = 0; k < g.size(); ++k) ga[off + k] += g[k];
                });
  }

  // Gathers rows of a; indices may repeat.
  Var row_select(Var a, std::vector<std::size_t> indices) {
    const Matrix& av = value(a);
    Matrix out(indices.size(), av.cols());
    for (std::size_t r = 0; r < indices.size(); ++r) {
      if (indices[r] >= av.rows()) {
        throw ShapeError("row_select: index " + std::to_string(indices[r]) + " out of " +
                         shape_str(av));
      }
      std::copy(av.row(indices[r]).begin(), av.row(indices[r]).end(), out.row(r).begin());
    }
    auto idx = std::make_shared<const std::vector<std::size_t>>(std::move(indices));
    return push(OpKind::row_select, {a}, std::move(out), any_grad({a}),
                [a, idx](Tape& t, std::size_t self) {
                  const Matrix& g = t.nodes_[self].grad;
                  Matrix& ga = t.grad_ref(a);
                  for (std::size_t r = 0; r < idx->size(); ++r) {
                    auto dst = ga.row((*idx)[r]);
                    auto src = g.row(r);
                    for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
                  }
                });
  }

  Var sigmoid(Var a) {
    Matrix out = value(a);
    for (auto& v : out.data()) v = logistic(v);
    return push(OpKind::sigmoid, {a}, std::move(out), any_grad({a}),
                [a](Tape& t, std::size_t self) {
                  const auto& y = t.nodes_[self].value.data();
                  const auto& g = t.nodes_[self].grad.data();
                  auto& ga = t.grad_ref(a).data();
                  for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * y[k] * (1.0 - y[k]);
                });
  }

  Var relu(Var a) {
    Matrix out = value(a);
    for (auto& v : out.data()) v = v > 0.0 ? v : 0.0;
    return push(OpKind::relu, {a}, std::move(out), any_grad({a}),
                [a](Tape& t, std::size_t self) {
                  const auto& x = t.value(a).data();
                  const auto& g = t.nodes_[self].grad.data();
                  auto& ga = t.grad_ref(a).data();
                  for (std::size_t k = 0; k < g.size(); ++k) {
                    if (x[k] > 0.0) ga[k] += g[k];
                  }
                });
  }

  Var ln_sigmoid(Var a) {
    Matrix out = value(a);
    for (auto& v : out.data()) v = log_logistic(v);
    return push(OpKind::ln_sigmoid, {a}, std::move(out), any_grad({a}),
                [a](Tape& t, std::size_t self) {
                  const auto& x = t.value(a).data();
                  const auto& g = t.nodes_[self].grad.data();
                  auto& ga = t.grad_ref(a).data();
                  for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * logistic(-x[k]);
                });
  }

  Var mean_over(const std::vector<Var>& parts) {
    if (parts.empty()) throw ShapeError("mean_over: no inputs");
    Matrix out(value(parts[0]).rows(), value(parts[0]).cols());
    const double w = 1.0 / static_cast<double>(parts.size());
    for (Var p : parts) {
      same_shape(OpKind::mean_over, out, value(p));
      const auto& pv = value(p).data();
      for (std::size_t k = 0; k < pv.size(); ++k) out.data()[k] += pv[k];
    }
    for (auto& v : out.data()) v *= w;
    return push(OpKind::mean_over, parts, std::move(out), any_grad(parts),
                [parts, w](Tape& t, std::size_t self) {
                  const auto& g = t.nodes_[self].grad.data();
                  for (Var p : parts) {
                    if (!t.needs(p)) continue;
                    auto& gp = t.grad_ref(p).data();
                    for (std::size_t k = 0; k < g.size(); ++k) gp[k] += w * g[k];
                  }
                });
  }

  // Row s of the result is the mean of b's rows listed in segment s; an empty
  // segment yields a zero row.
  Var segment_mean(std::shared_ptr<const Segments> seg, Var b) {
    const Matrix& bv = value(b);
    if (seg->source_rows() != bv.rows()) {
      throw ShapeError("segment_mean: segments over " + std::to_string(seg->source_rows()) +
                       " rows, input " + shape_str(bv));
    }
    Matrix out(seg->count(), bv.cols());
    for (std::size_t s = 0; s < seg->count(); ++s) {
      auto idx = seg->segment(s);
      if (idx.empty()) continue;
      auto o = out.row(s);
      for (auto i : idx) {
        auto src = bv.row(i);
        for (std::size_t j = 0; j < o.size(); ++j) o[j] += src[j];
      }
      const double w = 1.0 / static_cast<double>(idx.size());
      for (auto& v : o) v *= w;
    }
    return push(OpKind::segment_mean, {b}, std::move(out), any_grad({b}),
                [seg, b](Tape& t, std::size_t self) {
                  const Matrix& g = t.nodes_[self].grad;
                  Matrix& gb = t.grad_ref(b);
                  for (std::size_t s = 0; s < seg->count(); ++s) {
                    auto idx = seg->segment(s);
                    if (idx.empty()) continue;
                    const double w = 1.0 / static_cast<double>(idx.size());
                    auto src = g.row(s);
                    for (auto i : idx) {
                      auto dst = gb.row(i);
                      for (std::size_t j = 0; j < src.size(); ++j) dst[j] += w * src[j];
                    }
                  }
                });
  }

  Var scale(Var a, double c) {
    Matrix out = value(a);
    for (auto& v : out.data()) v *= c;
    return push(OpKind::scale, {a}, std::move(out), any_grad({a}),
                [a, c](Tape& t, std::size_t self) {
                  const auto& g = t.nodes_[self].grad.data();
                  auto& ga = t.grad_ref(a).data();
                  for (std::size_t k = 0; k < g.size(); ++k) ga[k] += c * g[k];
                });
  }

  // Row i of a multiplied by factors(i, 0); factors is a column vector.
  Var row_scale(Var a, Var factors) {
    const Matrix& av = value(a);
    const Matrix& fv = value(factors);
    if (fv.cols() != 1 || fv.rows() != av.rows()) mismatch(OpKind::row_scale, av, fv);
    Matrix out = av;
    for (std::size_t r = 0; r < out.rows(); ++r) {
      for (auto& v : out.row(r)) v *= fv(r, 0);
    }
    return push(OpKind::row_scale, {a, factors}, std::move(out), any_grad({a, factors}),
                [a, factors](Tape& t, std::size_t self) {
                  const Matrix& g = t.nodes_[self].grad;
                  const Matrix& av = t.value(a);
                  const Matrix& fv = t.value(factors);
                  const bool ga_needed = t.needs(a);
                  const bool gf_needed = t.needs(factors);
                  for (std::size_t r = 0; r < g.rows(); ++r) {
                    auto gr = g.row(r);
                    if (ga_needed) {
                      auto dst = t.grad_ref(a).row(r);
                      for (std::size_t j = 0; j < gr.size(); ++j) dst[j] += fv(r, 0) * gr[j];
                    }
                    if (gf_needed) {
                      double s = 0.0;
                      auto ar = av.row(r);
                      for (std::size_t j = 0; j < gr.size(); ++j) s += ar[j] * gr[j];
                      t.grad_ref(factors)(r, 0) += s;
                    }
                  }
                });
  }

  Var sum(Var a) {
    double s = 0.0;
    for (double v : value(a).data()) s += v;
    return push(OpKind::sum, {a}, Matrix(1, 1, s), any_grad({a}),
                [a](Tape& t, std::size_t self) {
                  const double g = t.nodes_[self].grad(0, 0);
                  for (auto& v : t.grad_ref(a).data()) v += g;
                });
  }

  // Scalar sum_k weights[k] * a.data[k] with constant weights.
  Var weighted_sum(Var a, std::vector<double> weights) {
    const Matrix& av = value(a);
    if (weights.size() != av.size()) {
      throw ShapeError("weighted_sum: " + std::to_string(weights.size()) + " weights for " +
                       shape_str(av));
    }
    double s = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) s += weights[k] * av.data()[k];
    auto w = std::make_shared<const std::vector<double>>(std::move(weights));
    return push(OpKind::weighted_sum, {a}, Matrix(1, 1, s), any_grad({a}),
                [a, w](Tape& t, std::size_t self) {
                  const double g = t.nodes_[self].grad(0, 0);
                  auto& ga = t.grad_ref(a).data();
                  for (std::size_t k = 0; k < w->size(); ++k) ga[k] += g * (*w)[k];
                });
  }

  // Reverse sweep from a scalar node. Returns one gradient per parameter slot
  // in registration order; parameters that do not reach the loss get zeros.
  std::vector<Matrix> backward(Var loss) {
    const Matrix& lv = value(loss);
    if (lv.rows() != 1 || lv.cols() != 1) {
      throw ShapeError("backward: loss must be 1x1, got " + shape_str(lv));
    }
    for (auto& n : nodes_) n.grad = Matrix();
    if (nodes_[loss.id].requires_grad) {
      nodes_[loss.id].grad = Matrix(1, 1, 1.0);
      for (std::size_t i = loss.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.backward || n.grad.size() == 0) continue;
        n.backward(*this, i);
      }
    }
    std::vector<Matrix> grads;
    grads.reserve(parameters_.size());
    for (Var p : parameters_) {
      const Node& n = nodes_[p.id];
      grads.push_back(n.grad.size() ? n.grad : Matrix(n.value.rows(), n.value.cols()));
    }
    return grads;
  }

 private:
  struct Node {
    OpKind kind;
    std::vector<Var> inputs;
    Matrix value;
    Matrix grad;
    bool requires_grad;
    BackwardFn backward;
  };

  Var push(OpKind kind, std::vector<Var> inputs, Matrix value, bool requires_grad,
           BackwardFn backward) {
    const std::size_t id = nodes_.size();
    for (Var in : inputs) {
      assert(in.id < id && "tape inputs must precede their consumer");
      if (in.id >= id) throw std::logic_error("Tape: input does not precede node");
    }
    if (!value.all_finite()) {
      throw NumericError(std::string("non-finite result in ") + std::string(op_name(kind)));
    }
    nodes_.push_back(Node{kind, std::move(inputs), std::move(value), Matrix(), requires_grad,
                          requires_grad ? std::move(backward) : BackwardFn{}});
    return Var{id};
  }

  bool any_grad(std::initializer_list<Var> vs) const {
    for (Var v : vs) {
      if (nodes_.at(v.id).requires_grad) return true;
    }
    return false;
  }
  bool any_grad(const std::vector<Var>& vs) const {
    for (Var v : vs) {
      if (nodes_.at(v.id).requires_grad) return true;
    }
    return false;
  }

  bool needs(Var v) const { return nodes_[v.id].requires_grad; }

  Matrix& grad_ref(Var v) {
    Node& n = nodes_[v.id];
    if (n.grad.size() == 0 && n.value.size() != 0) n.grad = Matrix(n.value.rows(), n.value.cols());
    return n.grad;
  }

  Var linear2(OpKind kind, Var a, Var b, double ca, double cb) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    same_shape(kind, av, bv);
    Matrix out = av;
    for (std::size_t k = 0; k < out.size(); ++k) out.data()[k] = ca * out.data()[k] + cb * bv.data()[k];
    return push(kind, {a, b}, std::move(out), any_grad({a, b}),
                [a, b, ca, cb](Tape& t, std::size_t self) {
                  const auto& g = t.nodes_[self].grad.data();
                  if (t.needs(a)) {
                    auto& ga = t.grad_ref(a).data();
                    for (std::size_t k = 0; k < g.size(); ++k) ga[k] += ca * g[k];
                  }
                  if (t.needs(b)) {
                    auto& gb = t.grad_ref(b).data();
                    for (std::size_t k = 0; k < g.size(); ++k) gb[k] += cb * g[k];
                  }
                });
  }

  [[noreturn]] static void mismatch(OpKind kind, const Matrix& a, const Matrix& b) {
    throw ShapeError(std::string(op_name(kind)) + ": incompatible shapes " + shape_str(a) +
                     " and " + shape_str(b));
  }
  static void same_shape(OpKind kind, const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) mismatch(kind, a, b);
  }

  std::vector<Node> nodes_;
  std::vector<Var> parameters_;
};

// Max over coordinates of |analytic - central difference| / max(1, |analytic|).
// `value_fn(params) -> double`, `grad_fn(params) -> std::vector<Matrix>`.
template <class ValueFn, class GradFn>
double finite_diff_check(ValueFn&& value_fn, GradFn&& grad_fn, std::vector<Matrix> params,
                         double h = 1e-5) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_check: step must be positive");
  const std::vector<Matrix> analytic = grad_fn(std::as_const(params));
  if (analytic.size() != params.size()) {
    throw ShapeError("finite_diff_check: gradient count does not match parameter count");
  }
  auto eval = [&]() {
    const double v = value_fn(std::as_const(params));
    if (!std::isfinite(v)) throw NumericError("finite_diff_check: non-finite function value");
    return v;
  };
  eval();
  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto& data = params[p].data();
    for (std::size_t k = 0; k < data.size(); ++k) {
      const double orig = data[k];
      data[k] = orig + h;
      const double up = eval();
      data[k] = orig - h;
      const double down = eval();
      data[k] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[p].data()[k];
      worst = std::max(worst, std::abs(a - numeric) / std::max(1.0, std::abs(a)));
    }
  }
  return worst;
}

}  // namespace consrec
