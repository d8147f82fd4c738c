#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "clar/autodiff.hpp"
#include "clar/graph.hpp"

namespace clar {

enum class Backbone { Gcn, Mlp };

Backbone parse_backbone(const std::string& name);
std::string to_string(Backbone b);

struct ModelSpec {
  Backbone backbone = Backbone::Gcn;
  std::size_t in_dim = 0;
  std::size_t hidden_dim = 16;
  std::size_t out_dim = 0;
  std::size_t depth = 2;  ///< number of layers K
};

/// Stack of K dense layers. GCN layers are bias-free and propagate with a
/// fixed matrix before the transform; MLP layers carry a bias. ReLU on every
/// layer but the last.
class Model {
 public:
  Model() = default;
  /// Glorot-uniform weights from `seed`, zero biases.
  Model(const ModelSpec& spec, std::uint64_t seed);
  /// Explicit weights (biases zero for MLP). Dimensions must chain.
  Model(const ModelSpec& spec, std::vector<Matrix> weights);

  const ModelSpec& spec() const { return spec_; }
  std::vector<Matrix>& parameters() { return params_; }
  const std::vector<Matrix>& parameters() const { return params_; }
  const Matrix& weight(std::size_t layer) const { return params_[layer * stride()]; }

 private:
  std::size_t stride() const { return spec_.backbone == Backbone::Mlp ? 2 : 1; }
  void check_dims() const;

  ModelSpec spec_;
  std::vector<Matrix> params_;
};

struct ForwardPass {
  ad::Tensor output;
  std::vector<ad::Tensor> parameters;  ///< tape handles, same order as Model::parameters()
};

/// Records the forward pass on `tape`. `prop` is required for GCN and ignored
/// for MLP.
ForwardPass forward(ad::Tape& tape, const Model& model, const Matrix& x, const SparseMatrix* prop);

/// H^{k+1} = ReLU(prop H^k W^{k+1}) for k < K-1, last layer linear.
ForwardPass gcn_forward(ad::Tape& tape, const Model& model, const Matrix& x, const SymMatrix& prop);
ForwardPass gcn_forward(ad::Tape& tape, const Model& model, const Matrix& x, const SparseMatrix& prop);

}  // namespace clar
