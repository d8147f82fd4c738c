#include "clar/model.hpp"

#include <cmath>
#include <random>

#include "clar/error.hpp"

namespace clar {

Backbone parse_backbone(const std::string& name) {
  if (name == "gcn") return Backbone::Gcn;
  if (name == "mlp") return Backbone::Mlp;
  throw Error(ErrorCode::InvalidArgument, "unknown backbone '" + name + "'");
}

std::string to_string(Backbone b) { return b == Backbone::Gcn ? "gcn" : "mlp"; }

namespace {

std::size_t layer_in(const ModelSpec& s, std::size_t k) { return k == 0 ? s.in_dim : s.hidden_dim; }
std::size_t layer_out(const ModelSpec& s, std::size_t k) { return k + 1 == s.depth ? s.out_dim : s.hidden_dim; }

}  // namespace

Model::Model(const ModelSpec& spec, std::uint64_t seed) : spec_(spec) {
  if (spec.depth == 0 || spec.in_dim == 0 || spec.out_dim == 0 || (spec.depth > 1 && spec.hidden_dim == 0)) {
    throw Error(ErrorCode::InvalidArgument, "model dimensions and depth must be positive");
  }
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < spec.depth; ++k) {
    const auto in = layer_in(spec, k), out = layer_out(spec, k);
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix w(in, out);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
    }
    params_.push_back(std::move(w));
    if (spec.backbone == Backbone::Mlp) params_.push_back(Matrix::Zero(1, static_cast<Eigen::Index>(out)));
  }
}

Model::Model(const ModelSpec& spec, std::vector<Matrix> weights) : spec_(spec) {
  if (weights.size() != spec.depth) throw Error(ErrorCode::DimensionMismatch, "expected one weight per layer");
  for (auto& w : weights) {
    const auto out = w.cols();
    params_.push_back(std::move(w));
    if (spec.backbone == Backbone::Mlp) params_.push_back(Matrix::Zero(1, out));
  }
  check_dims();
}

void Model::check_dims() const {
  for (std::size_t k = 0; k < spec_.depth; ++k) {
    const auto& w = weight(k);
    if (static_cast<std::size_t>(w.rows()) != layer_in(spec_, k) ||
        static_cast<std::size_t>(w.cols()) != layer_out(spec_, k)) {
      throw Error(ErrorCode::DimensionMismatch, "layer " + std::to_string(k) + " weight has wrong shape");
    }
  }
}

ForwardPass forward(ad::Tape& tape, const Model& model, const Matrix& x, const SparseMatrix* prop) {
  const auto& spec = model.spec();
  if (static_cast<std::size_t>(x.cols()) != spec.in_dim) {
    throw Error(ErrorCode::DimensionMismatch, "features have " + std::to_string(x.cols()) +
                                                  " columns, model expects " + std::to_string(spec.in_dim));
  }
  const bool gcn = spec.backbone == Backbone::Gcn;
  if (gcn && (prop == nullptr || prop->rows() != x.rows() || prop->cols() != x.rows())) {
    throw Error(ErrorCode::DimensionMismatch, "propagation matrix must be n x n");
  }

  ForwardPass pass;
  for (const auto& p : model.parameters()) pass.parameters.push_back(tape.leaf(p, true));

  ad::Tensor h = tape.constant(x);
  const std::size_t stride = gcn ? 1 : 2;
  for (std::size_t k = 0; k < spec.depth; ++k) {
    h = ad::matmul(h, pass.parameters[k * stride]);
    if (gcn) {
      h = ad::spmm(*prop, h);
    } else {
      h = ad::add_row(h, pass.parameters[k * stride + 1]);
    }
    if (k + 1 < spec.depth) h = ad::relu(h);
  }
  pass.output = h;
  return pass;
}

ForwardPass gcn_forward(ad::Tape& tape, const Model& model, const Matrix& x, const SparseMatrix& prop) {
  if (model.spec().backbone != Backbone::Gcn) throw Error(ErrorCode::InvalidArgument, "gcn_forward needs a GCN model");
  return forward(tape, model, x, &prop);
}

ForwardPass gcn_forward(ad::Tape& tape, const Model& model, const Matrix& x, const SymMatrix& prop) {
  const SparseMatrix sp = prop.matrix().sparseView();
  return gcn_forward(tape, model, x, sp);
}

}  // namespace clar
