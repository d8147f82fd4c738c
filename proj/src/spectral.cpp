#include "clar/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "clar/error.hpp"

namespace clar {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOffDiagTolerance = 1e-10;

double off_diagonal_norm(const Matrix& a) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < a.rows(); ++i) sum += 2.0 * a(i, j) * a(i, j);
  }
  return std::sqrt(sum);
}

EigenSystem jacobi(Matrix a) {
  const Eigen::Index n = a.rows();
  Matrix v = Matrix::Identity(n, n);
  const double target = kOffDiagTolerance * std::max(a.norm(), 1e-300);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= target) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        // A <- J^T A J touches only rows/columns p and q.
        for (Eigen::Index k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          a(p, k) = a(k, p);
          a(q, k) = a(k, q);
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;

        auto vp = v.col(p);
        auto vq = v.col(q);
        for (Eigen::Index k = 0; k < n; ++k) {
          const double x = vp(k);
          const double y = vq(k);
          vp(k) = c * x - s * y;
          vq(k) = s * x + c * y;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });
  EigenSystem es{Eigen::VectorXd(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    es.eigenvalues(k) = a(order[k], order[k]);
    es.eigenvectors.col(k) = v.col(order[k]);
  }
  return es;
}

}  // namespace

EigenSystem eig_sym(const SymMatrix& m) { return jacobi(m.matrix()); }

EigenSystem eig_sym(const Matrix& m) { return eig_sym(SymMatrix(m)); }

FilterFn custom_filter(std::function<double(double)> response) {
  return {FilterKind::Custom, std::move(response)};
}

FilterFn linear_combination(double a, const FilterFn& h1, double b, const FilterFn& h2) {
  return custom_filter([a, b, f = h1.response, g = h2.response](double l) { return a * f(l) + b * g(l); });
}

FilterFn artificial_filter(FilterKind kind) {
  switch (kind) {
    case FilterKind::HighPass:
      return {kind, [](double l) { return 1.0 - std::exp(-10.0 * l * l); }};
    case FilterKind::LowPass:
      return {kind, [](double l) { return std::exp(-10.0 * l * l); }};
    case FilterKind::BandPass:
      return {kind, [](double l) { return std::exp(-10.0 * (l - 1.0) * (l - 1.0)); }};
    case FilterKind::BandReject:
      return {kind, [](double l) { return 1.0 - std::exp(-10.0 * (l - 1.0) * (l - 1.0)); }};
    case FilterKind::Custom:
      break;
  }
  throw Error(ErrorCode::InvalidArgument, "custom filters have no artificial definition");
}

FilterKind parse_filter_kind(const std::string& name) {
  if (name == "highpass" || name == "high") return FilterKind::HighPass;
  if (name == "lowpass" || name == "low") return FilterKind::LowPass;
  if (name == "bandpass" || name == "band") return FilterKind::BandPass;
  if (name == "bandreject" || name == "reject") return FilterKind::BandReject;
  throw Error(ErrorCode::InvalidArgument, "unknown filter '" + name + "'");
}

std::string to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::HighPass: return "highpass";
    case FilterKind::LowPass: return "lowpass";
    case FilterKind::BandPass: return "bandpass";
    case FilterKind::BandReject: return "bandreject";
    case FilterKind::Custom: return "custom";
  }
  return "custom";
}

FilterFn frequency_response(ResponseKind kind) {
  switch (kind) {
    case ResponseKind::Gcn:
    case ResponseKind::NetworkLasso:
      return {FilterKind::LowPass, [](double l) { return 1.0 - l; }};
    case ResponseKind::PReg:
      return {FilterKind::LowPass, [](double l) { return 1.0 - l * l; }};
    case ResponseKind::MadReg:
      return {FilterKind::Custom, [](double l) { return -(std::pow(1.0 - l, 3) + std::pow(1.0 - l, 7)); }};
    case ResponseKind::ClarHighPass:
      return {FilterKind::HighPass, [](double l) { return -(1.0 - l); }};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown response kind");
}

Matrix apply_spectral_filter(const EigenSystem& es, const Matrix& x, const FilterFn& h) {
  if (x.rows() != es.eigenvectors.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "signal has " + std::to_string(x.rows()) +
                                                  " rows, graph has " +
                                                  std::to_string(es.eigenvectors.rows()) + " nodes");
  }
  Eigen::VectorXd gains(es.eigenvalues.size());
  for (Eigen::Index i = 0; i < gains.size(); ++i) gains(i) = h(es.eigenvalues(i));
  const Matrix coeffs = es.eigenvectors.transpose() * x;
  return es.eigenvectors * (gains.asDiagonal() * coeffs);
}

Matrix apply_spectral_filter(const Graph& g, LaplacianKind kind, const Matrix& x, const FilterFn& h) {
  if (x.rows() != static_cast<Eigen::Index>(g.num_nodes())) {
    throw Error(ErrorCode::DimensionMismatch, "signal rows differ from node count");
  }
  return apply_spectral_filter(eig_sym(laplacian(g, kind)), x, h);
}

Matrix band_select(const EigenSystem& es, const Matrix& x, const BandSelection& sel) {
  const Eigen::Index n = es.eigenvalues.size();
  if (x.rows() != n) throw Error(ErrorCode::DimensionMismatch, "signal rows differ from eigensystem size");
  Eigen::Index start = 0;
  Eigen::Index count = 0;
  if (sel.mode == BandSelection::Mode::Prefix) {
    // Eigenvalues are sorted; allow round-off around the threshold.
    while (count < n && es.eigenvalues(count) <= sel.threshold + 1e-9) ++count;
  } else {
    start = static_cast<Eigen::Index>(sel.start);
    count = static_cast<Eigen::Index>(sel.size);
    if (start + count > n) throw Error(ErrorCode::DimensionMismatch, "window extends past the spectrum");
  }
  if (count == 0) throw Error(ErrorCode::EmptySelection, "no eigencomponents selected");
  const auto basis = es.eigenvectors.middleCols(start, count);
  return basis * (basis.transpose() * x);
}

}  // namespace clar
