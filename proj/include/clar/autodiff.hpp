#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "clar/graph.hpp"

namespace clar::ad {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Tensor {
 public:
  Tensor() = default;

  const Matrix& value() const;
  /// Accumulated gradient; empty (0x0) until backward reaches this node.
  const Matrix& grad() const;
  bool requires_grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  /// Value of a 1x1 tensor.
  double item() const;

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  Tensor(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Append-only record of primitive ops. Creation order is a topological
/// order, so backward simply walks the nodes in reverse.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix& out_grad)>;

  Tensor leaf(Matrix value, bool requires_grad = true);
  Tensor constant(Matrix value) { return leaf(std::move(value), false); }

  /// Records an op result. `backward` receives the gradient w.r.t. the result
  /// and must route it to the inputs via accumulate(). Throws NonFiniteLoss if
  /// `value` has non-finite entries.
  Tensor record(const char* op, Matrix value, bool requires_grad, Backward backward);

  /// Adds `g` into the gradient of node `id` if it requires one.
  void accumulate(std::size_t id, const Matrix& g);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }

  /// Seeds d(root)/d(root) = 1 and propagates. Root must be 1x1.
  void backward(const Tensor& root);

  std::size_t size() const { return nodes_.size(); }

 private:
  friend class Tensor;
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

Tensor matmul(const Tensor& a, const Tensor& b);
/// p * b for a constant sparse p (graph propagation).
Tensor spmm(const SparseMatrix& p, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
/// Adds a 1 x cols row vector to every row of a.
Tensor add_row(const Tensor& a, const Tensor& row);
Tensor scale(const Tensor& a, double c);
Tensor relu(const Tensor& a);
Tensor log_softmax_rows(const Tensor& a);
/// Mean negative log-likelihood over rows with mask[i] != 0. Throws EmptyMask.
Tensor nll_loss(const Tensor& log_probs, std::span<const int> labels, std::span<const std::uint8_t> mask);
/// tr(h^T m h); gradient (m + m^T) h.
Tensor trace_quad(const Tensor& h, const Matrix& m);
Tensor trace_quad(const Tensor& h, const SparseMatrix& m);
/// Scalar clamp to [lo, hi]; zero gradient outside the interval.
Tensor clamp(const Tensor& s, double lo, double hi);
/// Mean over all entries of (pred - target)^2.
Tensor mse_loss(const Tensor& pred, const Matrix& target);
Tensor sum(const Tensor& a);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates_checked = 0;
};

using ScalarFn = std::function<Tensor(Tape&, const Tensor& theta)>;

/// Compares the tape gradient of f at theta against central differences on a
/// random subset of at least 50 coordinates (all of them if fewer). Relative
/// error is |a - n| / max(|a|, |n|, 1e-8). Throws NonFiniteLoss.
GradCheckResult grad_check(const ScalarFn& f, const Matrix& theta, double eps, std::uint64_t seed,
                           std::size_t min_coordinates = 50);

}  // namespace clar::ad
