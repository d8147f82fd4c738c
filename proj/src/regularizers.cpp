#include "clar/regularizers.hpp"

#include <cmath>
#include <random>

#include "clar/error.hpp"

namespace clar {

RegKind parse_reg_kind(const std::string& name) {
  if (name == "none") return RegKind::None;
  if (name == "clar") return RegKind::Clar;
  if (name == "nl" || name == "network_lasso") return RegKind::NetworkLasso;
  if (name == "preg" || name == "p-reg") return RegKind::PReg;
  if (name == "madreg" || name == "mr") return RegKind::MadReg;
  if (name == "dropedge" || name == "de") return RegKind::DropEdge;
  throw Error(ErrorCode::InvalidArgument, "unknown regularizer '" + name + "'");
}

std::string to_string(RegKind kind) {
  switch (kind) {
    case RegKind::None: return "none";
    case RegKind::Clar: return "clar";
    case RegKind::NetworkLasso: return "nl";
    case RegKind::PReg: return "preg";
    case RegKind::MadReg: return "madreg";
    case RegKind::DropEdge: return "dropedge";
  }
  return "none";
}

RegularizerSpec RegularizerSpec::network_lasso_as_clar() {
  RegularizerSpec spec;
  spec.kind = RegKind::Clar;
  spec.alpha = 1.0;
  spec.beta = 0.0;
  spec.clamp_hi = std::numeric_limits<double>::infinity();
  spec.clar.ori_kind = LaplacianKind::SelfLoopSymNormalized;
  return spec;
}

void RegularizerSpec::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(gamma)) fail("alpha, beta, gamma must be finite");
  if (kind == RegKind::Clar && strategy.s == 0) fail("CLAR needs a sampling multiple S >= 1");
  if (!(clamp_hi >= 0.0)) fail("clamp must be >= 0");
  if (kind == RegKind::DropEdge && !(drop_rate >= 0.0 && drop_rate < 1.0)) fail("drop rate must be in [0, 1)");
}

SparseMatrix complement_laplacian(const Graph& gs, const ClarOptions& opts) {
  if (!opts.normalize_complement_first) return sparse_laplacian(gs, opts.com_kind);
  const Matrix a = normalized_adjacency(gs, false);
  return laplacian_of_adjacency(a, LaplacianKind::Unnormalized).sparseView();
}

ad::Tensor clar_loss(const ad::Tensor& h, const SparseMatrix& l_ori, const SparseMatrix& l_com, double alpha,
                     double beta, double clamp_hi, double trace_scale) {
  const auto com = ad::clamp(ad::scale(ad::trace_quad(h, l_com), trace_scale), 0.0, clamp_hi);
  const auto ori = ad::clamp(ad::scale(ad::trace_quad(h, l_ori), trace_scale), 0.0, clamp_hi);
  return ad::add(ad::scale(com, beta), ad::scale(ori, alpha));
}

ad::Tensor clar_loss(const ad::Tensor& h, const Graph& g, const SampledComplement& gs, double alpha, double beta,
                     double clamp_hi, const ClarOptions& opts) {
  if (gs.graph.num_nodes() != g.num_nodes() || static_cast<std::size_t>(h.rows()) != g.num_nodes()) {
    throw Error(ErrorCode::DimensionMismatch, "clar_loss: node counts of h, graph and sample differ");
  }
  for (const auto& e : gs.graph.edges()) {
    if (g.has_edge(e.u, e.v)) {
      throw Error(ErrorCode::NotAComplement,
                  "sampled edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") is in the graph");
    }
  }
  return clar_loss(h, sparse_laplacian(g, opts.ori_kind), complement_laplacian(gs.graph, opts), alpha, beta,
                   clamp_hi);
}

namespace {

void check_rows(const ad::Tensor& h, const Graph& g, const char* op) {
  if (static_cast<std::size_t>(h.rows()) != g.num_nodes()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(op) + ": h rows differ from node count");
  }
}

SparseMatrix preg_matrix(const Graph& g) {
  const SparseMatrix l = sparse_laplacian(g, LaplacianKind::SelfLoopSymNormalized);
  return SparseMatrix(l.transpose()) * l;
}

Matrix matrix_power(const Matrix& a, int k) {
  Matrix out = Matrix::Identity(a.rows(), a.cols());
  Matrix base = a;
  while (k > 0) {
    if (k & 1) out = out * base;
    k >>= 1;
    if (k) base = base * base;
  }
  return out;
}

}  // namespace

ad::Tensor nl_loss(const ad::Tensor& h, const Graph& g) {
  check_rows(h, g, "nl_loss");
  return ad::trace_quad(h, sparse_laplacian(g, LaplacianKind::SelfLoopSymNormalized));
}

ad::Tensor preg_loss(const ad::Tensor& h, const Graph& g) {
  check_rows(h, g, "preg_loss");
  return ad::trace_quad(h, preg_matrix(g));
}

Matrix madreg_matrix(const Graph& g) {
  const Matrix a = normalized_adjacency(g, true);
  const Matrix a3 = matrix_power(a, 3);
  const Matrix a7 = a3 * a3 * a;
  const auto n = a.rows();
  Matrix m = Matrix::Ones(n, n);
  m -= laplacian_of_adjacency(a7, LaplacianKind::SymNormalized);
  m -= laplacian_of_adjacency(a3, LaplacianKind::SymNormalized);
  return m;
}

ad::Tensor madreg_loss(const ad::Tensor& h, const Graph& g, double clamp_hi) {
  check_rows(h, g, "madreg_loss");
  return ad::clamp(ad::trace_quad(h, madreg_matrix(g)), 0.0, clamp_hi);
}

Graph dropedge_transform(const Graph& g, double drop_rate, std::uint64_t seed) {
  if (!(drop_rate >= 0.0 && drop_rate < 1.0)) throw Error(ErrorCode::InvalidArgument, "drop rate must be in [0, 1)");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(1.0 - drop_rate);
  std::vector<Edge> kept;
  kept.reserve(g.num_edges());
  for (const auto& e : g.edges()) {
    if (keep(rng)) kept.push_back(e);
  }
  return build_graph(g.num_nodes(), std::span<const Edge>(kept));
}

ad::Tensor total_loss(const ad::Tensor& cls, const RegularizerOutput& out, const RegularizerSpec& spec) {
  if (!out.loss) return cls;
  switch (spec.kind) {
    case RegKind::None:
    case RegKind::DropEdge:
      return cls;
    case RegKind::Clar:
      return ad::add(cls, *out.loss);
    case RegKind::NetworkLasso:
    case RegKind::PReg:
    case RegKind::MadReg:
      return ad::add(cls, ad::scale(*out.loss, spec.gamma));
  }
  return cls;
}

Regularizer::Regularizer(const Graph& g, RegularizerSpec spec, std::uint64_t seed)
    : graph_(&g), spec_(std::move(spec)), seed_(seed) {
  spec_.validate();
  switch (spec_.kind) {
    case RegKind::Clar:
      l_ori_ = sparse_laplacian(g, spec_.clar.ori_kind);
      break;
    case RegKind::NetworkLasso:
      l_ori_ = sparse_laplacian(g, LaplacianKind::SelfLoopSymNormalized);
      break;
    case RegKind::PReg:
      l_ori_ = preg_matrix(g);
      break;
    case RegKind::MadReg:
      dense_ = madreg_matrix(g);
      break;
    case RegKind::None:
    case RegKind::DropEdge:
      break;
  }
}

std::optional<SparseMatrix> Regularizer::transformed_prop(std::size_t epoch) const {
  if (spec_.kind != RegKind::DropEdge) return std::nullopt;
  return gcn_propagation(dropedge_transform(*graph_, spec_.drop_rate, derive_seed(seed_, epoch)));
}

std::optional<ad::Tensor> Regularizer::loss(const ad::Tensor& h, std::size_t epoch) {
  const double scale = spec_.per_node_trace ? 1.0 / static_cast<double>(graph_->num_nodes()) : 1.0;
  switch (spec_.kind) {
    case RegKind::None:
    case RegKind::DropEdge:
      return std::nullopt;
    case RegKind::Clar:
      if (!sample_ || spec_.resample_each_epoch) {
        sample_ = sample_complement(*graph_, spec_.strategy, derive_seed(seed_, epoch));
        l_com_ = complement_laplacian(sample_->graph, spec_.clar);
      }
      return clar_loss(h, l_ori_, l_com_, spec_.alpha, spec_.beta, spec_.clamp_hi, scale);
    case RegKind::NetworkLasso:
    case RegKind::PReg:
      return ad::trace_quad(h, l_ori_);
    case RegKind::MadReg:
      return ad::clamp(ad::scale(ad::trace_quad(h, dense_), scale), 0.0, spec_.clamp_hi);
  }
  return std::nullopt;
}

}  // namespace clar
