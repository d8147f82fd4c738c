#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "clar/error.hpp"
#include "clar/regularizers.hpp"
#include "clar/spectral.hpp"
#include "helpers.hpp"

using namespace clar;
using namespace clar::ad;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

SampledComplement as_sample(Graph g) { return {std::move(g), {}, 0}; }

}  // namespace

TEST_CASE("clar on P3 with the unnormalized Laplacian") {
  const Graph p3 = testutil::path(3);
  const SparseMatrix l_ori = sparse_laplacian(p3, LaplacianKind::Unnormalized);
  const SparseMatrix l_com = sparse_laplacian(build_graph(3, {{0, 2}}), LaplacianKind::Unnormalized);
  for (auto [a, b] : {std::pair{1.0, 1.0}, {0.5, 2.0}, {0.0, 3.0}, {-1.0, 0.25}}) {
    Tape t;
    const Tensor h = t.leaf(column({1, 0, -1}));
    CHECK(clar_loss(h, l_ori, l_com, a, b, kInf).item() == doctest::Approx(4 * b + 2 * a));
  }
  // each trace is clamped separately
  Tape t;
  const Tensor h = t.leaf(column({1, 0, -1}));
  CHECK(clar_loss(h, l_ori, l_com, 1.0, 1.0, 3.0).item() == doctest::Approx(5.0));
  CHECK(clar_loss(h, l_ori, l_com, 1.0, 1.0, 4.0, 0.5).item() == doctest::Approx(3.0));
}

TEST_CASE("clar vanishes on constant rows") {
  std::mt19937_64 rng(89);
  const Graph g = testutil::random_graph(10, 0.3, rng);
  const auto gs = sample_complement(g, {SampleKind::NodeBased, 2}, 3);
  Tape t;
  const Tensor h = t.leaf(Matrix::Constant(10, 3, 0.7));
  ClarOptions unnorm{LaplacianKind::Unnormalized, LaplacianKind::Unnormalized, false};
  CHECK(std::abs(clar_loss(h, g, gs, 1.0, 1.0, kInf, unnorm).item()) < 1e-12);
}

TEST_CASE("clar rejects a non-complement sample") {
  const Graph p3 = testutil::path(3);
  Tape t;
  const Tensor h = t.leaf(column({1, 0, -1}));
  try {
    clar_loss(h, p3, as_sample(build_graph(3, {{0, 1}})), 1.0, 1.0, 1.0);
    FAIL("expected NotAComplement");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotAComplement);
  }
  CHECK_THROWS_AS(clar_loss(h, p3, as_sample(build_graph(4, {{0, 3}})), 1.0, 1.0, 1.0), Error);
}

TEST_CASE("network lasso examples") {
  const Graph p2 = build_graph(2, {{0, 1}});
  Tape t;
  CHECK(nl_loss(t.leaf(column({1, 0})), p2).item() == doctest::Approx(0.5));
  CHECK(std::abs(nl_loss(t.leaf(column({2, 2})), p2).item()) < 1e-15);

  // NL is CLAR with alpha = 1, beta = 0, no clamp, self-loop Laplacian
  std::mt19937_64 rng(97);
  const auto spec = RegularizerSpec::network_lasso_as_clar();
  CHECK(spec.alpha == 1.0);
  CHECK(spec.beta == 0.0);
  CHECK(std::isinf(spec.clamp_hi));
  for (int trial = 0; trial < 10; ++trial) {
    const Graph g = testutil::random_graph(9, 0.4, rng);
    const Tensor h = t.leaf(testutil::random_matrix(9, 2, rng));
    const auto gs = sample_complement(g, spec.strategy, static_cast<std::uint64_t>(trial));
    CHECK(clar_loss(h, g, gs, spec.alpha, spec.beta, spec.clamp_hi, spec.clar).item() ==
          doctest::Approx(nl_loss(h, g).item()).epsilon(1e-12));
  }
}

TEST_CASE("p-reg examples") {
  const Graph p2 = build_graph(2, {{0, 1}});
  Tape t;
  CHECK(preg_loss(t.leaf(column({1, 0})), p2).item() == doctest::Approx(0.5));
  CHECK(std::abs(preg_loss(t.leaf(column({-3, -3})), p2).item()) < 1e-15);

  // on an eigenvector, P-reg gives lambda^2 where NL gives lambda
  std::mt19937_64 rng(101);
  const Graph g = testutil::random_graph(12, 0.3, rng);
  const auto es = eig_sym(laplacian(g, LaplacianKind::SelfLoopSymNormalized));
  for (Eigen::Index i = 0; i < 12; ++i) {
    const Tensor u = t.leaf(es.eigenvectors.col(i));
    const double l = es.eigenvalues(i);
    CHECK(nl_loss(u, g).item() == doctest::Approx(l).epsilon(1e-8));
    CHECK(preg_loss(u, g).item() == doctest::Approx(l * l).epsilon(1e-8));
  }
}

TEST_CASE("madreg examples") {
  Tape t;
  const Graph one = build_graph(1, {});
  CHECK((madreg_matrix(one) - Matrix::Ones(1, 1)).norm() == 0.0);
  CHECK(madreg_loss(t.leaf(column({3})), one).item() == doctest::Approx(9.0));

  const Graph p2 = build_graph(2, {{0, 1}});
  CHECK(madreg_loss(t.leaf(column({2, 2})), p2).item() == doctest::Approx(16.0));
  CHECK(madreg_loss(t.leaf(column({2, 2})), p2, 1.0).item() == doctest::Approx(1.0));
}

TEST_CASE("psd quadratic forms are nonnegative") {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 50; ++trial) {
    const Graph g = testutil::random_graph(8, 0.4, rng);
    const Matrix hm = testutil::random_matrix(8, 3, rng);
    Tape t;
    const Tensor h = t.leaf(hm);
    for (auto kind : {LaplacianKind::Unnormalized, LaplacianKind::SymNormalized,
                      LaplacianKind::SelfLoopSymNormalized}) {
      CHECK(trace_quad(h, sparse_laplacian(g, kind)).item() >= -1e-10);
    }
    CHECK(nl_loss(h, g).item() >= -1e-10);
    CHECK(preg_loss(h, g).item() >= -1e-10);
    const auto gs = sample_complement(g, {SampleKind::EdgeBased, 2}, static_cast<std::uint64_t>(trial));
    CHECK(clar_loss(h, g, gs, 1.0, 1.0, kInf).item() >= -1e-10);
  }
}

TEST_CASE("complement term equals the full-minus-original decomposition") {
  std::mt19937_64 rng(107);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(trial % 6);
    const Graph g = testutil::random_graph(n, 0.4, rng);
    std::vector<Edge> comp;
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        if (!g.has_edge(u, v)) comp.push_back({u, v});
      }
    }
    const Graph gs = build_graph(n, std::span<const Edge>(comp));
    const auto es = eig_sym(laplacian(g, LaplacianKind::SymNormalized));
    const Matrix lk = laplacian(testutil::complete(n), LaplacianKind::Unnormalized).matrix();
    const Matrix la = laplacian(g, LaplacianKind::Unnormalized).matrix();
    const Matrix ls = laplacian(gs, LaplacianKind::Unnormalized).matrix();
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
      const Eigen::VectorXd u = es.eigenvectors.col(i);
      const double lhs = u.dot(lk * u) - u.dot(la * u);
      CHECK(std::abs(lhs - u.dot(ls * u)) < 1e-10);
    }
  }
}

TEST_CASE("clamped traces have zero gradient") {
  const Graph p3 = testutil::path(3);
  const SparseMatrix l = sparse_laplacian(p3, LaplacianKind::Unnormalized);
  const SparseMatrix lc = sparse_laplacian(build_graph(3, {{0, 2}}), LaplacianKind::Unnormalized);
  Tape t;
  const Tensor h = t.leaf(column({10, 0, -10}));
  const Tensor loss = clar_loss(h, l, lc, 1.0, 1.0, 1.0);
  CHECK(loss.item() == 2.0);
  t.backward(loss);
  CHECK(h.grad().norm() == 0.0);

  Tape t2;
  const Tensor h2 = t2.leaf(column({10, 0, -10}));
  const Tensor m = madreg_loss(h2, p3, 1.0);
  t2.backward(m);
  CHECK(h2.grad().norm() == 0.0);
}

TEST_CASE("regularizer losses pass the gradient check") {
  std::mt19937_64 rng(109);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Graph g = testutil::random_graph(10, 0.3, rng);
    const auto gs = sample_complement(g, {SampleKind::NodeBased, 2}, seed);
    const Matrix h0 = 0.1 * testutil::random_matrix(10, 3, rng);
    CHECK(grad_check([&](Tape&, const Tensor& h) { return clar_loss(h, g, gs, 0.7, 1.3, kInf); }, h0, 1e-5, seed)
              .max_relative_error < 1e-4);
    CHECK(grad_check([&](Tape&, const Tensor& h) { return nl_loss(h, g); }, h0, 1e-5, seed).max_relative_error <
          1e-4);
    CHECK(grad_check([&](Tape&, const Tensor& h) { return preg_loss(h, g); }, h0, 1e-5, seed).max_relative_error <
          1e-4);
    CHECK(grad_check([&](Tape&, const Tensor& h) { return madreg_loss(h, g); }, h0, 1e-5, seed).max_relative_error <
          1e-4);
  }
}

TEST_CASE("dropedge") {
  std::mt19937_64 rng(113);
  const Graph g = testutil::random_graph(20, 0.5, rng);
  CHECK(dropedge_transform(g, 0.0, 1) == g);

  const Graph k3 = testutil::complete(3);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Graph d = dropedge_transform(k3, 0.6, seed);
    CHECK(d.num_nodes() == 3);
    for (const auto& e : d.edges()) CHECK(k3.has_edge(e.u, e.v));
  }

  // 100-edge graph: the 100 edges of a path on 101 nodes
  const Graph p = testutil::path(101);
  REQUIRE(p.num_edges() == 100);
  std::size_t kept = 0;
  const int trials = 10000;
  for (int s = 0; s < trials; ++s) kept += dropedge_transform(p, 0.5, static_cast<std::uint64_t>(s)).num_edges();
  CHECK(static_cast<double>(kept) / (100.0 * trials) == doctest::Approx(0.5).epsilon(0.04));

  CHECK_THROWS_AS(dropedge_transform(g, 1.0, 1), Error);
}

TEST_CASE("total_loss examples") {
  Tape t;
  const Tensor cls = t.leaf(Matrix::Constant(1, 1, 0.8));
  const Tensor reg = t.leaf(Matrix::Constant(1, 1, 0.3));
  RegularizerOutput out{reg, std::nullopt};

  RegularizerSpec none;
  CHECK(total_loss(cls, {}, none).item() == 0.8);

  RegularizerSpec nl;
  nl.kind = RegKind::NetworkLasso;
  nl.gamma = 2.0;
  CHECK(total_loss(cls, out, nl).item() == doctest::Approx(1.4));

  RegularizerSpec clar;
  clar.kind = RegKind::Clar;
  CHECK(total_loss(cls, out, clar).item() == doctest::Approx(1.1));

  // CLAR with alpha = beta = 0 leaves the classification loss unchanged
  const Graph g = testutil::path(5);
  clar.alpha = clar.beta = 0.0;
  Regularizer r(g, clar, 7);
  const Tensor h = t.leaf(Matrix::Constant(5, 2, 0.1) + Matrix::Identity(5, 2));
  CHECK(total_loss(cls, {r.loss(h, 0), std::nullopt}, clar).item() == 0.8);
}

TEST_CASE("Regularizer draws a fresh complement per epoch unless frozen") {
  const Graph g = testutil::path(30);
  RegularizerSpec spec;
  spec.kind = RegKind::Clar;
  spec.strategy = {SampleKind::NodeBased, 1};
  Tape t;
  const Tensor h = t.leaf(Matrix::Ones(30, 2));

  Regularizer fresh(g, spec, 5);
  fresh.loss(h, 0);
  const Graph first = fresh.last_sample()->graph;
  bool changed = false;
  for (std::size_t e = 1; e < 10; ++e) {
    fresh.loss(h, e);
    for (const auto& ed : fresh.last_sample()->graph.edges()) CHECK_FALSE(g.has_edge(ed.u, ed.v));
    changed = changed || !(fresh.last_sample()->graph == first);
  }
  CHECK(changed);

  spec.resample_each_epoch = false;
  Regularizer frozen(g, spec, 5);
  frozen.loss(h, 0);
  const Graph f0 = frozen.last_sample()->graph;
  for (std::size_t e = 1; e < 5; ++e) {
    frozen.loss(h, e);
    CHECK(frozen.last_sample()->graph == f0);
  }
}

TEST_CASE("DropEdge replaces the propagation matrix") {
  const Graph g = testutil::path(10);
  RegularizerSpec spec;
  spec.kind = RegKind::DropEdge;
  spec.drop_rate = 0.5;
  Regularizer r(g, spec, 1);
  const auto p = r.transformed_prop(0);
  REQUIRE(p.has_value());
  CHECK(p->rows() == 10);
  Tape t;
  CHECK_FALSE(r.loss(t.leaf(Matrix::Ones(10, 2)), 0).has_value());

  RegularizerSpec none;
  CHECK_FALSE(Regularizer(g, none, 1).transformed_prop(0).has_value());
}

TEST_CASE("spec validation") {
  RegularizerSpec s;
  s.kind = RegKind::Clar;
  s.strategy.s = 0;
  CHECK_THROWS_AS(s.validate(), Error);
  s.strategy.s = 1;
  s.clamp_hi = -1.0;
  CHECK_THROWS_AS(s.validate(), Error);
  s.clamp_hi = 1.0;
  s.kind = RegKind::DropEdge;
  s.drop_rate = 1.0;
  CHECK_THROWS_AS(s.validate(), Error);
  s.drop_rate = 0.5;
  s.kind = RegKind::Clar;
  s.alpha = -0.005;
  CHECK_NOTHROW(s.validate());
  for (const char* name : {"none", "clar", "nl", "preg", "madreg", "dropedge"}) {
    CHECK(to_string(parse_reg_kind(name)) == name);
  }
}
