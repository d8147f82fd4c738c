#include "clar/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "clar/error.hpp"
#include "clar/sampling.hpp"

namespace clar {

void adam_step(std::vector<Matrix>& params, const std::vector<Matrix>& grads, AdamState& state,
               const AdamOptions& opts) {
  if (params.size() != grads.size()) throw Error(ErrorCode::DimensionMismatch, "adam_step: params/grads count");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].rows() != grads[k].rows() || params[k].cols() != grads[k].cols()) {
      throw Error(ErrorCode::DimensionMismatch, "adam_step: gradient " + std::to_string(k) + " has wrong shape");
    }
    if (!grads[k].allFinite()) {
      throw Error(ErrorCode::NonFiniteGrad, "gradient of parameter " + std::to_string(k) + " is not finite");
    }
  }
  if (state.m.size() != params.size()) {
    state.m.clear();
    state.v.clear();
    for (const auto& p : params) {
      state.m.push_back(Matrix::Zero(p.rows(), p.cols()));
      state.v.push_back(Matrix::Zero(p.rows(), p.cols()));
    }
    state.t = 0;
  }
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(opts.beta1, t);
  const double c2 = 1.0 - std::pow(opts.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    state.m[k] = opts.beta1 * state.m[k] + (1.0 - opts.beta1) * grads[k];
    state.v[k] = opts.beta2 * state.v[k] + (1.0 - opts.beta2) * grads[k].cwiseProduct(grads[k]);
    const Matrix m_hat = state.m[k] / c1;
    const Matrix v_hat = state.v[k] / c2;
    params[k].array() -= opts.lr * m_hat.array() / (v_hat.array().sqrt() + opts.eps);
  }
}

SplitSpec SplitSpec::random_fraction(double train, double val, double test) {
  SplitSpec s;
  s.kind = Kind::RandomFraction;
  s.train = train;
  s.val = val;
  s.test = test;
  return s;
}

SplitSpec SplitSpec::planetoid(std::size_t per_class_train, std::size_t val, std::size_t test) {
  SplitSpec s;
  s.kind = Kind::PlanetoidStyle;
  s.per_class_train = per_class_train;
  s.val_count = val;
  s.test_count = test;
  return s;
}

namespace {

// Splits `total` over classes proportionally to `sizes` (largest remainder).
std::vector<std::size_t> apportion(std::size_t total, const std::vector<std::size_t>& sizes,
                                   const std::vector<std::size_t>& caps) {
  const double n = static_cast<double>(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}));
  std::vector<std::size_t> out(sizes.size(), 0);
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const double exact = static_cast<double>(total) * static_cast<double>(sizes[k]) / n;
    out[k] = std::min(caps[k], static_cast<std::size_t>(std::floor(exact)));
    assigned += out[k];
    rem.emplace_back(exact - std::floor(exact), k);
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  // Two passes: first by remainder, then anywhere with room left.
  for (int pass = 0; pass < 2 && assigned < total; ++pass) {
    for (const auto& [r, k] : rem) {
      if (assigned == total) break;
      if (out[k] < caps[k] && (pass == 1 || r > 0.0)) {
        ++out[k];
        ++assigned;
      }
    }
  }
  while (assigned < total) {
    bool moved = false;
    for (std::size_t k = 0; k < out.size() && assigned < total; ++k) {
      if (out[k] < caps[k]) {
        ++out[k];
        ++assigned;
        moved = true;
      }
    }
    if (!moved) throw Error(ErrorCode::InsufficientNodes, "not enough nodes to fill the split");
  }
  return out;
}

}  // namespace

Masks make_split(std::span<const int> labels, int num_classes, const SplitSpec& spec, std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (n == 0 || num_classes < 1) throw Error(ErrorCode::InsufficientNodes, "empty dataset");
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) throw Error(ErrorCode::OutOfRange, "label out of range");
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  std::mt19937_64 rng(seed);
  for (auto& members : by_class) std::shuffle(members.begin(), members.end(), rng);

  Masks masks;
  masks.train.assign(n, 0);
  masks.val.assign(n, 0);
  masks.test.assign(n, 0);

  if (spec.kind == SplitSpec::Kind::RandomFraction) {
    if (spec.train < 0 || spec.val < 0 || spec.test < 0 || std::abs(spec.train + spec.val + spec.test - 1.0) > 1e-9) {
      throw Error(ErrorCode::InvalidArgument, "split fractions must be non-negative and sum to 1");
    }
    const auto n_train = static_cast<std::size_t>(std::llround(spec.train * static_cast<double>(n)));
    const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(spec.val * static_cast<double>(n))));
    const std::size_t n_test = n - n_train - n_val;
    if (n_train == 0 || n_val == 0 || n_test == 0) {
      throw Error(ErrorCode::InsufficientNodes, "split leaves an empty part for n=" + std::to_string(n));
    }
    std::vector<std::size_t> sizes;
    for (const auto& members : by_class) sizes.push_back(members.size());
    const auto tr = apportion(n_train, sizes, sizes);
    std::vector<std::size_t> caps = sizes;
    for (std::size_t k = 0; k < caps.size(); ++k) caps[k] -= tr[k];
    const auto va = apportion(n_val, sizes, caps);
    for (std::size_t k = 0; k < by_class.size(); ++k) {
      const auto& members = by_class[k];
      for (std::size_t j = 0; j < members.size(); ++j) {
        if (j < tr[k]) {
          masks.train[members[j]] = 1;
        } else if (j < tr[k] + va[k]) {
          masks.val[members[j]] = 1;
        } else {
          masks.test[members[j]] = 1;
        }
      }
    }
    return masks;
  }

  std::vector<std::size_t> rest;
  for (const auto& members : by_class) {
    if (members.size() < spec.per_class_train) {
      throw Error(ErrorCode::InsufficientNodes, "a class has fewer than " + std::to_string(spec.per_class_train) +
                                                    " nodes");
    }
    for (std::size_t j = 0; j < members.size(); ++j) {
      if (j < spec.per_class_train) {
        masks.train[members[j]] = 1;
      } else {
        rest.push_back(members[j]);
      }
    }
  }
  if (spec.per_class_train == 0 || spec.val_count == 0 || spec.test_count == 0 ||
      rest.size() < spec.val_count + spec.test_count) {
    throw Error(ErrorCode::InsufficientNodes, "planetoid split needs " + std::to_string(spec.val_count) + " + " +
                                                  std::to_string(spec.test_count) + " nodes outside train, have " +
                                                  std::to_string(rest.size()));
  }
  std::sort(rest.begin(), rest.end());
  std::shuffle(rest.begin(), rest.end(), rng);
  for (std::size_t j = 0; j < spec.val_count; ++j) masks.val[rest[j]] = 1;
  for (std::size_t j = spec.val_count; j < spec.val_count + spec.test_count; ++j) masks.test[rest[j]] = 1;
  return masks;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (!(lr > 0.0) || !std::isfinite(lr)) fail("lr must be > 0");
  if (max_epochs < 1) fail("max_epochs must be >= 1");
  if (patience > max_epochs) fail("patience must be <= max_epochs");
  if (depth < 1) fail("depth must be >= 1");
  if (depth > 1 && hidden_dim < 1) fail("hidden_dim must be >= 1");
  reg.validate();
}

double accuracy(const Matrix& logits, std::span<const int> labels, std::span<const std::uint8_t> mask) {
  std::size_t hit = 0, total = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    Eigen::Index arg = 0;
    logits.row(i).maxCoeff(&arg);
    hit += arg == labels[static_cast<std::size_t>(i)] ? 1 : 0;
    ++total;
  }
  if (total == 0) throw Error(ErrorCode::EmptyMask, "accuracy over an empty mask");
  return static_cast<double>(hit) / static_cast<double>(total);
}

namespace {

void check_masks(const Masks& m, std::size_t n) {
  if (m.train.size() != n || m.val.size() != n || m.test.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "mask length differs from node count");
  }
  std::size_t tr = 0, va = 0, te = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (m.train[i] + m.val[i] + m.test[i] > 1) throw Error(ErrorCode::InvalidArgument, "masks overlap");
    tr += m.train[i];
    va += m.val[i];
    te += m.test[i];
  }
  if (tr == 0 || va == 0 || te == 0) throw Error(ErrorCode::EmptyMask, "train, val and test masks must be nonempty");
}

std::vector<Matrix> gradients(const ForwardPass& pass) {
  std::vector<Matrix> grads;
  for (const auto& p : pass.parameters) {
    grads.push_back(p.grad().size() ? p.grad() : Matrix::Zero(p.rows(), p.cols()));
  }
  return grads;
}

[[noreturn]] void rethrow_with_epoch(const Error& e, std::size_t epoch) {
  throw Error(e.code(), "epoch " + std::to_string(epoch) + ": " + e.what());
}

}  // namespace

TrainResult train(const Dataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  const std::size_t n = ds.graph.num_nodes();
  const Masks masks = ds.masks ? *ds.masks : make_split(ds.labels, ds.num_classes, cfg.split, derive_seed(cfg.seed, 1));
  check_masks(masks, n);

  ModelSpec ms;
  ms.backbone = cfg.backbone;
  ms.in_dim = static_cast<std::size_t>(ds.features.cols());
  ms.hidden_dim = cfg.hidden_dim;
  ms.out_dim = static_cast<std::size_t>(ds.num_classes);
  ms.depth = cfg.depth;
  Model model(ms, derive_seed(cfg.seed, 0));

  const SparseMatrix prop = gcn_propagation(ds.graph);
  Regularizer reg(ds.graph, cfg.reg, derive_seed(cfg.seed, 2));
  AdamState adam;
  const AdamOptions opts{cfg.lr};

  TrainResult result;
  bool have_best = false;
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    try {
      ad::Tape tape;
      const auto dropped = reg.transformed_prop(epoch);
      const auto pass = forward(tape, model, ds.features, dropped ? &*dropped : &prop);
      const auto cls = ad::nll_loss(ad::log_softmax_rows(pass.output), ds.labels, masks.train);
      RegularizerOutput out;
      out.loss = reg.loss(pass.output, epoch);
      const auto loss = total_loss(cls, out, cfg.reg);
      rec.cls_loss = cls.item();
      rec.train_loss = loss.item();
      tape.backward(loss);
      adam_step(model.parameters(), gradients(pass), adam, opts);

      ad::Tape eval;
      const auto logits = forward(eval, model, ds.features, &prop).output;
      rec.val_loss = ad::nll_loss(ad::log_softmax_rows(logits), ds.labels, masks.val).item();
      rec.val_accuracy = accuracy(logits.value(), ds.labels, masks.val);
      rec.test_accuracy = accuracy(logits.value(), ds.labels, masks.test);
    } catch (const Error& e) {
      if (is_numerical(e.code())) rethrow_with_epoch(e, epoch);
      throw;
    }
    result.trace.push_back(rec);
    result.epochs_run = epoch + 1;

    const bool better = !have_best || rec.val_accuracy > result.best_val_accuracy ||
                        (rec.val_accuracy == result.best_val_accuracy && rec.val_loss < result.best_val_loss);
    if (better) {
      have_best = true;
      result.best_val_epoch = epoch;
      result.best_val_accuracy = rec.val_accuracy;
      result.best_val_loss = rec.val_loss;
      result.test_accuracy = rec.test_accuracy;
      result.parameters = model.parameters();
    } else if (epoch - result.best_val_epoch >= cfg.patience) {
      break;
    }
  }
  return result;
}

FitResult fit_filter(const Graph& g, const Matrix& x, const Matrix& target, const FitConfig& cfg,
                     const SparseMatrix* prop) {
  const std::size_t n = g.num_nodes();
  if (static_cast<std::size_t>(x.rows()) != n || target.rows() != x.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "fit_filter: x, target and graph row counts differ");
  }
  if (!(cfg.lr > 0.0) || cfg.max_epochs < 1 || cfg.patience > cfg.max_epochs) {
    throw Error(ErrorCode::InvalidArgument, "fit_filter: need lr > 0, max_epochs >= 1, patience <= max_epochs");
  }
  ModelSpec ms;
  ms.backbone = cfg.backbone;
  ms.in_dim = static_cast<std::size_t>(x.cols());
  ms.hidden_dim = cfg.hidden_dim;
  ms.out_dim = static_cast<std::size_t>(target.cols());
  ms.depth = cfg.depth;
  Model model(ms, derive_seed(cfg.seed, 0));

  const SparseMatrix own_prop = prop ? SparseMatrix() : gcn_propagation(g);
  const SparseMatrix& p = prop ? *prop : own_prop;
  if (p.rows() != x.rows() || p.cols() != x.rows()) throw Error(ErrorCode::DimensionMismatch, "prop must be n x n");
  Regularizer reg(g, cfg.reg, derive_seed(cfg.seed, 2));
  AdamState adam;
  const AdamOptions opts{cfg.lr};

  FitResult result;
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    try {
      ad::Tape tape;
      const auto dropped = reg.transformed_prop(epoch);
      const auto pass = forward(tape, model, x, dropped ? &*dropped : &p);
      const auto mse = ad::mse_loss(pass.output, target);
      RegularizerOutput out;
      out.loss = reg.loss(pass.output, epoch);
      const auto loss = total_loss(mse, out, cfg.reg);
      tape.backward(loss);
      adam_step(model.parameters(), gradients(pass), adam, opts);

      ad::Tape eval;
      const double value = ad::mse_loss(forward(eval, model, x, &p).output, target).item();
      result.epochs_run = epoch + 1;
      if (value < result.best_mse) {
        result.best_mse = value;
        result.best_epoch = epoch;
      } else if (epoch - result.best_epoch >= cfg.patience) {
        break;
      }
    } catch (const Error& e) {
      if (is_numerical(e.code())) rethrow_with_epoch(e, epoch);
      throw;
    }
  }
  return result;
}

}  // namespace clar
