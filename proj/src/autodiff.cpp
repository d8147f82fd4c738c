#include "clar/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "clar/error.hpp"

namespace clar::ad {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(op) + ": " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                    " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

void require_scalar(const Tensor& s, const char* op) {
  if (s.rows() != 1 || s.cols() != 1) throw Error(ErrorCode::DimensionMismatch, std::string(op) + ": expected 1x1");
}

Matrix scalar(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return m;
}

}  // namespace

const Matrix& Tensor::value() const { return tape_->nodes_[id_].value; }
const Matrix& Tensor::grad() const { return tape_->nodes_[id_].grad; }
bool Tensor::requires_grad() const { return tape_->nodes_[id_].requires_grad; }

double Tensor::item() const {
  const auto& v = value();
  if (v.rows() != 1 || v.cols() != 1) throw Error(ErrorCode::DimensionMismatch, "item() on non-scalar");
  return v(0, 0);
}

Tensor Tape::leaf(Matrix value, bool requires_grad) {
  nodes_.push_back({std::move(value), Matrix(), requires_grad, nullptr});
  return Tensor(this, nodes_.size() - 1);
}

Tensor Tape::record(const char* op, Matrix value, bool requires_grad, Backward backward) {
  if (!value.allFinite()) throw Error(ErrorCode::NonFiniteLoss, std::string(op) + " produced a non-finite value");
  nodes_.push_back({std::move(value), Matrix(), requires_grad, requires_grad ? std::move(backward) : nullptr});
  return Tensor(this, nodes_.size() - 1);
}

void Tape::accumulate(std::size_t id, const Matrix& g) {
  auto& node = nodes_[id];
  if (!node.requires_grad) return;
  if (node.grad.size() == 0) {
    node.grad = g;
  } else {
    node.grad += g;
  }
}

void Tape::backward(const Tensor& root) {
  require_scalar(root, "backward");
  nodes_[root.id()].grad = scalar(1.0);
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    auto& node = nodes_[i];
    if (!node.backward || node.grad.size() == 0) continue;
    // Copy: the callback may append to other nodes' grads but never resizes nodes_.
    node.backward(*this, node.grad);
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "matmul: inner dimensions " + std::to_string(a.cols()) +
                                                  " and " + std::to_string(b.rows()));
  }
  const auto ia = a.id(), ib = b.id();
  const bool ga = a.requires_grad(), gb = b.requires_grad();
  return a.tape().record("matmul", a.value() * b.value(), ga || gb, [=](Tape& t, const Matrix& g) {
    if (ga) t.accumulate(ia, g * t.value(ib).transpose());
    if (gb) t.accumulate(ib, t.value(ia).transpose() * g);
  });
}

Tensor spmm(const SparseMatrix& p, const Tensor& b) {
  if (p.cols() != b.rows()) throw Error(ErrorCode::DimensionMismatch, "spmm: inner dimensions differ");
  const auto ib = b.id();
  return b.tape().record("spmm", p * b.value(), b.requires_grad(),
                         [ib, pt = SparseMatrix(p.transpose())](Tape& t, const Matrix& g) {
                           t.accumulate(ib, pt * g);
                         });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  const auto ia = a.id(), ib = b.id();
  return a.tape().record("add", a.value() + b.value(), a.requires_grad() || b.requires_grad(),
                         [ia, ib](Tape& t, const Matrix& g) {
                           t.accumulate(ia, g);
                           t.accumulate(ib, g);
                         });
}

Tensor add_row(const Tensor& a, const Tensor& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "add_row: bad row shape");
  const auto ia = a.id(), ir = row.id();
  Matrix out = a.value();
  out.rowwise() += row.value().row(0);
  return a.tape().record("add_row", std::move(out), a.requires_grad() || row.requires_grad(),
                         [ia, ir](Tape& t, const Matrix& g) {
                           t.accumulate(ia, g);
                           t.accumulate(ir, g.colwise().sum());
                         });
}

Tensor scale(const Tensor& a, double c) {
  const auto ia = a.id();
  return a.tape().record("scale", c * a.value(), a.requires_grad(),
                         [ia, c](Tape& t, const Matrix& g) { t.accumulate(ia, c * g); });
}

Tensor relu(const Tensor& a) {
  const auto ia = a.id();
  return a.tape().record("relu", a.value().cwiseMax(0.0), a.requires_grad(), [ia](Tape& t, const Matrix& g) {
    t.accumulate(ia, Matrix((t.value(ia).array() > 0.0).select(g.array(), 0.0)));
  });
}

Tensor log_softmax_rows(const Tensor& a) {
  const Matrix& x = a.value();
  const Eigen::VectorXd row_max = x.rowwise().maxCoeff();
  Matrix shifted = x.colwise() - row_max;
  const Eigen::VectorXd lse = shifted.array().exp().rowwise().sum().log();
  Matrix out = shifted.colwise() - lse;
  const auto ia = a.id();
  Matrix probs = out.array().exp();
  return a.tape().record("log_softmax_rows", std::move(out), a.requires_grad(),
                         [ia, probs = std::move(probs)](Tape& t, const Matrix& g) {
                           const Eigen::VectorXd row_sum = g.rowwise().sum();
                           t.accumulate(ia, g - probs.cwiseProduct(row_sum.replicate(1, probs.cols())));
                         });
}

Tensor nll_loss(const Tensor& log_probs, std::span<const int> labels, std::span<const std::uint8_t> mask) {
  const auto n = log_probs.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n || static_cast<Eigen::Index>(mask.size()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "nll_loss: labels/mask length differs from rows");
  }
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    if (labels[i] < 0 || labels[i] >= log_probs.cols()) throw Error(ErrorCode::OutOfRange, "nll_loss: label out of range");
    rows.push_back(i);
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyMask, "nll_loss: mask selects no rows");
  double total = 0.0;
  for (auto i : rows) total -= log_probs.value()(i, labels[i]);
  const double inv = 1.0 / static_cast<double>(rows.size());
  std::vector<int> picked;
  picked.reserve(rows.size());
  for (auto i : rows) picked.push_back(labels[i]);
  const auto ia = log_probs.id();
  const auto shape = std::pair{log_probs.rows(), log_probs.cols()};
  return log_probs.tape().record(
      "nll_loss", scalar(total * inv), log_probs.requires_grad(),
      [ia, shape, inv, rows = std::move(rows), picked = std::move(picked)](Tape& t, const Matrix& g) {
        Matrix d = Matrix::Zero(shape.first, shape.second);
        for (std::size_t k = 0; k < rows.size(); ++k) d(rows[k], picked[k]) = -inv * g(0, 0);
        t.accumulate(ia, d);
      });
}

namespace {

template <typename M>
Tensor trace_quad_impl(const Tensor& h, const M& m) {
  if (m.rows() != m.cols() || m.cols() != h.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "trace_quad: matrix is " + std::to_string(m.rows()) + "x" +
                                                  std::to_string(m.cols()) + ", h has " +
                                                  std::to_string(h.rows()) + " rows");
  }
  const Matrix mh = m * h.value();
  const double value = h.value().cwiseProduct(mh).sum();
  const auto ih = h.id();
  Matrix dh = mh + Matrix(m.transpose() * h.value());
  return h.tape().record("trace_quad", scalar(value), h.requires_grad(),
                         [ih, dh = std::move(dh)](Tape& t, const Matrix& g) { t.accumulate(ih, g(0, 0) * dh); });
}

}  // namespace

Tensor trace_quad(const Tensor& h, const Matrix& m) { return trace_quad_impl(h, m); }
Tensor trace_quad(const Tensor& h, const SparseMatrix& m) { return trace_quad_impl(h, m); }

Tensor clamp(const Tensor& s, double lo, double hi) {
  require_scalar(s, "clamp");
  const double v = s.item();
  const bool pass = v >= lo && v <= hi;
  const auto is = s.id();
  return s.tape().record("clamp", scalar(std::clamp(v, lo, hi)), s.requires_grad(),
                         [is, pass](Tape& t, const Matrix& g) {
                           t.accumulate(is, pass ? g : Matrix::Zero(1, 1));
                         });
}

Tensor mse_loss(const Tensor& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "mse_loss: target shape differs");
  }
  Matrix diff = pred.value() - target;
  const double inv = 1.0 / static_cast<double>(diff.size());
  const double value = diff.squaredNorm() * inv;
  const auto ip = pred.id();
  return pred.tape().record("mse_loss", scalar(value), pred.requires_grad(),
                            [ip, inv, diff = std::move(diff)](Tape& t, const Matrix& g) {
                              t.accumulate(ip, (2.0 * inv * g(0, 0)) * diff);
                            });
}

Tensor sum(const Tensor& a) {
  const auto ia = a.id();
  const auto shape = std::pair{a.rows(), a.cols()};
  return a.tape().record("sum", scalar(a.value().sum()), a.requires_grad(), [ia, shape](Tape& t, const Matrix& g) {
    t.accumulate(ia, Matrix::Constant(shape.first, shape.second, g(0, 0)));
  });
}

GradCheckResult grad_check(const ScalarFn& f, const Matrix& theta, double eps, std::uint64_t seed,
                           std::size_t min_coordinates) {
  if (!(eps >= 1e-6 && eps <= 1e-3)) throw Error(ErrorCode::InvalidArgument, "grad_check: eps must be in [1e-6, 1e-3]");

  Tape tape;
  const Tensor th = tape.leaf(theta, true);
  const Tensor loss = f(tape, th);
  if (!std::isfinite(loss.item())) throw Error(ErrorCode::NonFiniteLoss, "grad_check: loss is not finite");
  tape.backward(loss);
  const Matrix analytic = th.grad().size() ? th.grad() : Matrix::Zero(theta.rows(), theta.cols());

  auto eval = [&](const Matrix& point) {
    Tape t;
    const double v = f(t, t.leaf(point, false)).item();
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteLoss, "grad_check: perturbed loss is not finite");
    return v;
  };

  std::vector<Eigen::Index> coords(theta.size());
  std::iota(coords.begin(), coords.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(coords.begin(), coords.end(), rng);
  coords.resize(std::min<std::size_t>(coords.size(), std::max<std::size_t>(min_coordinates, 1)));

  GradCheckResult result;
  Matrix point = theta;
  for (auto k : coords) {
    const double orig = point.data()[k];
    point.data()[k] = orig + eps;
    const double up = eval(point);
    point.data()[k] = orig - eps;
    const double down = eval(point);
    point.data()[k] = orig;
    const double numeric = (up - down) / (2.0 * eps);
    const double a = analytic.data()[k];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    result.max_relative_error = std::max(result.max_relative_error, std::abs(a - numeric) / denom);
    ++result.coordinates_checked;
  }
  return result;
}

}  // namespace clar::ad
