#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "clar/datasets.hpp"
#include "clar/model.hpp"
#include "clar/regularizers.hpp"

namespace clar {

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::size_t t = 0;
};

struct AdamOptions {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One Adam update with bias correction. Moments are lazily sized on the first
/// call. Throws DimensionMismatch and NonFiniteGrad.
void adam_step(std::vector<Matrix>& params, const std::vector<Matrix>& grads, AdamState& state,
               const AdamOptions& opts);

struct SplitSpec {
  enum class Kind { RandomFraction, PlanetoidStyle };
  Kind kind = Kind::RandomFraction;
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
  std::size_t per_class_train = 20;
  std::size_t val_count = 500;
  std::size_t test_count = 1000;

  static SplitSpec random_fraction(double train = 0.6, double val = 0.2, double test = 0.2);
  static SplitSpec planetoid(std::size_t per_class_train = 20, std::size_t val = 500, std::size_t test = 1000);
};

/// Disjoint train/val/test masks. RandomFraction targets round(frac * n) nodes
/// per part, spread over classes by largest remainder. PlanetoidStyle takes
/// per_class_train nodes from every class, then val/test from the rest.
/// Throws InsufficientNodes and InvalidArgument.
Masks make_split(std::span<const int> labels, int num_classes, const SplitSpec& spec, std::uint64_t seed);

struct TrainConfig {
  double lr = 0.01;
  std::size_t max_epochs = 200;
  std::size_t patience = 50;
  std::size_t hidden_dim = 16;
  std::size_t depth = 2;
  std::uint64_t seed = 0;
  Backbone backbone = Backbone::Gcn;
  RegularizerSpec reg{};
  SplitSpec split{};

  /// Throws InvalidArgument.
  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  ///< classification + regularizer
  double cls_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct TrainResult {
  std::size_t best_val_epoch = 0;
  double best_val_accuracy = 0.0;
  double best_val_loss = 0.0;
  double test_accuracy = 0.0;
  std::size_t epochs_run = 0;
  std::vector<EpochRecord> trace;
  std::vector<Matrix> parameters;  ///< at the best validation epoch
};

/// Fraction of rows in `mask` whose argmax matches the label.
double accuracy(const Matrix& logits, std::span<const int> labels, std::span<const std::uint8_t> mask);

/// Semi-supervised node classification. Uses ds.masks if set, otherwise
/// make_split(cfg.split). Records the metrics of the parameters after each
/// update; stops once validation accuracy has not improved (ties broken by
/// lower validation loss) for `patience` epochs. Numerical failures are
/// rethrown with the epoch index.
TrainResult train(const Dataset& ds, const TrainConfig& cfg);

struct FitConfig {
  double lr = 0.1;
  std::size_t max_epochs = 1000;
  std::size_t patience = 50;
  std::size_t hidden_dim = 32;
  std::size_t depth = 2;
  std::uint64_t seed = 0;
  Backbone backbone = Backbone::Gcn;
  RegularizerSpec reg{};
};

struct FitResult {
  double best_mse = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
};

/// Regresses `target` from `x` with MSE (plus the configured regularizer) and
/// returns the best MSE seen. `prop` overrides the GCN propagation matrix of g.
FitResult fit_filter(const Graph& g, const Matrix& x, const Matrix& target, const FitConfig& cfg,
                     const SparseMatrix* prop = nullptr);

}  // namespace clar
