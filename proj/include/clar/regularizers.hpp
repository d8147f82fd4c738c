#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "clar/autodiff.hpp"
#include "clar/graph.hpp"
#include "clar/sampling.hpp"

namespace clar {

enum class RegKind { None, Clar, NetworkLasso, PReg, MadReg, DropEdge };

RegKind parse_reg_kind(const std::string& name);
std::string to_string(RegKind kind);

/// Which Laplacians CLAR builds. The complement term is either the normalized
/// Laplacian of A_s (default) or the Laplacian of the normalized adjacency of
/// A_s (`normalize_complement_first`).
struct ClarOptions {
  LaplacianKind ori_kind = LaplacianKind::SymNormalized;
  LaplacianKind com_kind = LaplacianKind::SymNormalized;
  bool normalize_complement_first = false;
};

struct RegularizerSpec {
  RegKind kind = RegKind::None;
  double alpha = 1.0;  ///< weight of the original-graph term (CLAR)
  double beta = 1.0;   ///< weight of the complement term (CLAR)
  double gamma = 0.1;  ///< weight of NL / P-reg / MADReg
  SampleStrategy strategy{};
  double clamp_hi = 1.0;  ///< CLAR and MADReg traces are clamped to [0, clamp_hi]
  double drop_rate = 0.5;
  bool resample_each_epoch = true;
  /// Divide CLAR and MADReg traces by the node count before clamping.
  bool per_node_trace = false;
  ClarOptions clar{};

  /// Network Lasso expressed as CLAR with alpha = 1, beta = 0 and no clamp.
  static RegularizerSpec network_lasso_as_clar();
  /// Throws InvalidArgument on out-of-range hyperparameters.
  void validate() const;
};

struct RegularizerOutput {
  std::optional<ad::Tensor> loss;                 ///< differentiable penalty, unweighted by gamma
  std::optional<SparseMatrix> transformed_prop;   ///< DropEdge only
};

/// Complement-term Laplacian for a sampled complement graph.
SparseMatrix complement_laplacian(const Graph& gs, const ClarOptions& opts);

/// beta * clamp(tr(h^T L_s h)) + alpha * clamp(tr(h^T L h)), both traces
/// clamped to [0, clamp_hi]. Throws NotAComplement if gs shares an edge with g.
ad::Tensor clar_loss(const ad::Tensor& h, const Graph& g, const SampledComplement& gs, double alpha, double beta,
                     double clamp_hi, const ClarOptions& opts = {});
/// Same with prebuilt Laplacians; no complement check. Traces are multiplied
/// by `trace_scale` before clamping.
ad::Tensor clar_loss(const ad::Tensor& h, const SparseMatrix& l_ori, const SparseMatrix& l_com, double alpha,
                     double beta, double clamp_hi, double trace_scale = 1.0);

/// tr(h^T L̂̃ h) with the self-loop normalized Laplacian.
ad::Tensor nl_loss(const ad::Tensor& h, const Graph& g);
/// tr(h^T L̂̃^T L̂̃ h).
ad::Tensor preg_loss(const ad::Tensor& h, const Graph& g);

/// (Q - L̃(Ã^7)) - L̃(Ã^3) with Q the ones matrix and Ã the self-loop
/// normalized adjacency; L̃ of a powered adjacency is its symmetric
/// normalized Laplacian.
Matrix madreg_matrix(const Graph& g);
ad::Tensor madreg_loss(const ad::Tensor& h, const Graph& g, double clamp_hi = std::numeric_limits<double>::infinity());

/// Keeps every edge independently with probability 1 - drop_rate.
Graph dropedge_transform(const Graph& g, double drop_rate, std::uint64_t seed);

/// cls + regularizer: CLAR adds its loss as is (alpha/beta inside), NL/P-reg/
/// MADReg add gamma * loss, None and DropEdge add nothing.
ad::Tensor total_loss(const ad::Tensor& cls, const RegularizerOutput& out, const RegularizerSpec& spec);

/// Per-run regularizer state: precomputed matrices for the training graph and
/// the per-epoch random draws (complement samples, dropped edges).
class Regularizer {
 public:
  Regularizer(const Graph& g, RegularizerSpec spec, std::uint64_t seed);

  const RegularizerSpec& spec() const { return spec_; }

  /// Propagation override for this epoch (DropEdge); call before the forward pass.
  std::optional<SparseMatrix> transformed_prop(std::size_t epoch) const;
  /// Penalty on the model output for this epoch.
  std::optional<ad::Tensor> loss(const ad::Tensor& h, std::size_t epoch);
  /// Complement sample used by the most recent CLAR loss.
  const std::optional<SampledComplement>& last_sample() const { return sample_; }

 private:
  const Graph* graph_;
  RegularizerSpec spec_;
  std::uint64_t seed_;
  SparseMatrix l_ori_;
  SparseMatrix l_com_;
  Matrix dense_;
  std::optional<SampledComplement> sample_;
};

}  // namespace clar
