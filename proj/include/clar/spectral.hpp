#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include <Eigen/Core>

#include "clar/graph.hpp"

namespace clar {

/// Eigenpairs of a symmetric matrix, eigenvalues ascending, eigenvectors as
/// orthonormal columns in matching order.
struct EigenSystem {
  Eigen::VectorXd eigenvalues;
  Matrix eigenvectors;
};

/// Cyclic Jacobi eigensolver. Stops once the off-diagonal Frobenius norm falls
/// below 1e-10 * ||m||_F or after 100 sweeps.
EigenSystem eig_sym(const SymMatrix& m);
/// Same, for an unchecked matrix. Throws NonSymmetric.
EigenSystem eig_sym(const Matrix& m);

enum class FilterKind { HighPass, LowPass, BandPass, BandReject, Custom };

/// Scalar frequency response h(lambda), meaningful on [0, 2].
struct FilterFn {
  FilterKind kind = FilterKind::Custom;
  std::function<double(double)> response;

  double operator()(double lambda) const { return response(lambda); }
};

FilterFn custom_filter(std::function<double(double)> response);
FilterFn linear_combination(double a, const FilterFn& h1, double b, const FilterFn& h2);

/// HighPass 1-exp(-10 l^2), LowPass exp(-10 l^2), BandPass exp(-10 (l-1)^2),
/// BandReject 1-exp(-10 (l-1)^2). Custom is rejected with InvalidArgument.
FilterFn artificial_filter(FilterKind kind);

FilterKind parse_filter_kind(const std::string& name);
std::string to_string(FilterKind kind);

enum class ResponseKind { Gcn, NetworkLasso, PReg, MadReg, ClarHighPass };

/// Closed-form frequency responses of the propagation/regularization operators.
FilterFn frequency_response(ResponseKind kind);

/// U diag(h(lambda)) U^T x.
Matrix apply_spectral_filter(const EigenSystem& es, const Matrix& x, const FilterFn& h);
Matrix apply_spectral_filter(const Graph& g, LaplacianKind kind, const Matrix& x, const FilterFn& h);

/// Selects eigencomponents either by eigenvalue prefix (lambda <= threshold)
/// or by a window of `size` consecutive sorted components starting at `start`.
struct BandSelection {
  enum class Mode { Prefix, Window };
  Mode mode = Mode::Window;
  double threshold = 0.0;
  std::size_t start = 0;
  std::size_t size = 0;

  static BandSelection prefix(double threshold) { return {Mode::Prefix, threshold, 0, 0}; }
  static BandSelection window(std::size_t start, std::size_t size) { return {Mode::Window, 0.0, start, size}; }
};

/// U_sel U_sel^T x. Throws EmptySelection when no component is selected and
/// DimensionMismatch for windows past the end.
Matrix band_select(const EigenSystem& es, const Matrix& x, const BandSelection& sel);

}  // namespace clar
