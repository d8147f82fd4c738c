// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "clar/experiments.hpp"
#include "clar/regularizers.hpp"
#include "clar/sampling.hpp"
#include "clar/spectral.hpp"
#include "clar/stats.hpp"
#include "helpers.hpp"

#ifndef CLAR_CLI
#error "CLAR_CLI must point at the command-line binary"
#endif

using namespace clar;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s criterion %d: %s [%s] (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Graph complement_union(const Graph& a, const Graph& b) { return graph_union(a, b); }

Outcome trace_identity() {
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(i % 11);
    const Graph g = testutil::random_graph(n, 0.2 + 0.006 * i, rng);
    const Matrix h = testutil::random_matrix(static_cast<Eigen::Index>(n), 3, rng);
    ad::Tape t;
    const double tr = ad::trace_quad(t.leaf(h), sparse_laplacian(g, LaplacianKind::Unnormalized)).item();
    worst = std::max(worst, std::abs(tr - testutil::edge_sum(g, h)));
  }
  return {worst <= 1e-8, fmt("max |diff| %.2e over 100 pairs, tol 1e-8", worst)};
}

Outcome additivity() {
  std::mt19937_64 rng(1002);
  std::size_t graphs = 0, samples = 0, inexact = 0;
  double worst = 0.0;
  for (int i = 0; i < 240; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(i % 7);
    const Graph g = testutil::random_graph(n, 0.15 + 0.003 * i, rng);
    ++graphs;
    for (auto kind : {SampleKind::NodeBased, SampleKind::EdgeBased}) {
      for (std::size_t s : {1, 2, 8}) {
        const auto gs = sample_complement(g, {kind, s}, static_cast<std::uint64_t>(i * 31 + s));
        ++samples;
        const Matrix ls = laplacian(gs.graph, LaplacianKind::Unnormalized).matrix();
        const Matrix lu = laplacian(complement_union(gs.graph, g), LaplacianKind::Unnormalized).matrix();
        const Matrix la = laplacian(g, LaplacianKind::Unnormalized).matrix();
        if ((ls - (lu - la)).cwiseAbs().maxCoeff() != 0.0) ++inexact;

        const Matrix h = testutil::random_matrix(static_cast<Eigen::Index>(n), 2, rng);
        ad::Tape t;
        const double direct = clar_loss(t.leaf(h), sparse_laplacian(g, LaplacianKind::Unnormalized),
                                        sparse_laplacian(gs.graph, LaplacianKind::Unnormalized), 0.0, 1.0, kInf)
                                  .item();
        const double decomposed = (h.transpose() * lu * h).trace() - (h.transpose() * la * h).trace();
        worst = std::max(worst, std::abs(direct - decomposed));
      }
    }
  }
  return {inexact == 0 && worst <= 1e-10,
          fmt("%zu graphs, %zu samples, %zu inexact, max term diff %.2e (tol 1e-10)", graphs, samples, inexact,
              worst)};
}

Outcome propagation_identities() {
  std::mt19937_64 rng(1003);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto n = static_cast<Eigen::Index>(10 + 2 * i);
    const Graph g = testutil::random_graph(static_cast<std::size_t>(n), 0.15, rng);
    const Matrix lt = laplacian(g, LaplacianKind::SelfLoopSymNormalized).matrix();
    const auto es = eig_sym(lt);
    const Matrix id = Matrix::Identity(n, n);
    const Matrix p = id - lt, p2 = id - lt * lt;
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::VectorXd u = es.eigenvectors.col(k);
      const double l = es.eigenvalues(k);
      worst = std::max(worst, (p * u - (1.0 - l) * u).norm());
      worst = std::max(worst, (p2 * u - (1.0 - l * l) * u).norm());
    }
  }
  return {worst <= 1e-8, fmt("20 graphs n<=48, max residual %.2e (tol 1e-8)", worst)};
}

Outcome gradient_checks() {
  std::mt19937_64 rng(1004);
  double worst = 0.0;
  std::string worst_name = "-";
  auto note = [&](const char* name, double err) {
    if (err > worst) {
      worst = err;
      worst_name = name;
    }
  };
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Graph g = testutil::random_graph(10, 0.3, rng);
    const Matrix x = testutil::random_matrix(10, 4, rng);
    std::uniform_int_distribution<int> cls(0, 2);
    std::vector<int> y(10);
    for (auto& v : y) v = cls(rng);
    const std::vector<std::uint8_t> mask(10, 1);
    const SparseMatrix prop = gcn_propagation(g);
    const Model model({Backbone::Gcn, 4, 6, 3, 2}, seed);
    const Matrix w2 = model.parameters()[1];
    const auto ce = [&](ad::Tape& t, const ad::Tensor& w1) {
      const auto h = ad::relu(ad::matmul(ad::spmm(prop, t.constant(x)), w1));
      return ad::nll_loss(ad::log_softmax_rows(ad::matmul(ad::spmm(prop, h), t.constant(w2))), y, mask);
    };
    note("cross-entropy", ad::grad_check(ce, model.parameters()[0], 1e-5, seed).max_relative_error);

    const auto gs = sample_complement(g, {SampleKind::NodeBased, 2}, seed);
    const Matrix h0 = testutil::random_matrix(10, 3, rng);
    note("clar", ad::grad_check([&](ad::Tape&, const ad::Tensor& h) { return clar_loss(h, g, gs, 0.8, 1.2, kInf); },
                                h0, 1e-5, seed)
                     .max_relative_error);
    note("nl", ad::grad_check([&](ad::Tape&, const ad::Tensor& h) { return nl_loss(h, g); }, h0, 1e-5, seed)
                   .max_relative_error);
    note("p-reg", ad::grad_check([&](ad::Tape&, const ad::Tensor& h) { return preg_loss(h, g); }, h0, 1e-5, seed)
                      .max_relative_error);
    note("madreg",
         ad::grad_check([&](ad::Tape&, const ad::Tensor& h) { return madreg_loss(h, g); }, h0, 1e-5, seed)
             .max_relative_error);
  }
  return {worst < 1e-4, fmt("5 losses x 10 seeds, max rel err %.2e (%s), tol 1e-4", worst, worst_name.c_str())};
}

Outcome sampling_contract() {
  std::mt19937_64 rng(1005);
  std::size_t edges = 0, violations = 0, over_bound = 0, draws = 0;
  for (int i = 0; edges < 10000 || i < 100; ++i) {
    const std::size_t n = 4 + static_cast<std::size_t>(i % 61);
    const Graph g = testutil::random_graph(n, 0.05 + 0.01 * (i % 40), rng);
    for (auto kind : {SampleKind::NodeBased, SampleKind::EdgeBased}) {
      const SampleStrategy st{kind, 1 + static_cast<std::size_t>(i % 4)};
      const auto sc = sample_complement(g, st, static_cast<std::uint64_t>(i));
      ++draws;
      edges += sc.graph.num_edges();
      if (sc.graph.num_edges() > expected_edge_bound(g, st)) ++over_bound;
      for (const auto& e : sc.graph.edges()) {
        if (e.u == e.v || g.has_edge(e.u, e.v)) ++violations;
      }
    }
  }
  return {violations == 0 && over_bound == 0,
          fmt("%zu edges from %zu draws, %zu violations, %zu over bound", edges, draws, violations, over_bound)};
}

Outcome filter_fitting_direction() {
  auto cfg = presets::filter_fitting();
  cfg.filters.resize(2);  // HighPass, BandReject
  const auto r = run_filter_fitting(cfg);
  bool ok = true;
  std::string detail;
  for (const auto& f : cfg.filters) {
    const double gcn = r.median(f.name + "/gcn", "mse");
    const double clar = r.median(f.name + "/gcn+clar", "mse");
    ok = ok && clar <= gcn * 1.01;
    detail += fmt("%s gcn=%.4f clar=%.4f; ", f.name.c_str(), gcn, clar);
  }
  return {ok, detail + "median of 10 seeds, tol 1%"};
}

Outcome oversmoothing_direction() {
  auto cfg = presets::oversmoothing();
  const auto all = default_variants();
  cfg.variants = {find_variant(all, "gcn"), find_variant(all, "clar10")};
  cfg.depths = {2, 8};
  const auto r = run_oversmoothing(cfg);
  const double g2 = r.median("gcn@2", "accuracy");
  const double g8 = r.median("gcn@8", "accuracy");
  const double c8 = r.median("clar10@8", "accuracy");
  return {c8 >= g8 - 0.01 && g8 < g2,
          fmt("gcn@2=%.4f gcn@8=%.4f clar10@8=%.4f, median of 10 seeds", g2, g8, c8)};
}

Outcome robustness_direction() {
  auto cfg = presets::robustness();
  const auto all = default_variants();
  cfg.variants = {find_variant(all, "gcn"), find_variant(all, "clar")};
  cfg.drop_rates = {0.0, 0.5};
  const auto r = run_robustness(cfg);
  const double dg = r.median("gcn@0.5", "drop");
  const double dc = r.median("clar@0.5", "drop");
  return {dc <= dg + 0.01, fmt("median drop gcn=%.4f clar=%.4f at rate 0.5, 10 seeds, tol 0.01", dg, dc)};
}

Outcome sbm_homophily() {
  bool ok = true;
  std::string detail;
  for (double h : {0.2, 0.5, 0.8}) {
    std::vector<double> measured;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      SbmSpec s;
      s.n = 1000;
      s.c = 2;
      s.target_h = h;
      s.seed = seed;
      const Dataset d = generate_sbm(s);
      measured.push_back(homophily_ratio(d.graph, d.labels));
    }
    const double med = stats::median(measured);
    ok = ok && std::abs(med - h) <= 0.05;
    detail += fmt("target %.1f median %.4f; ", h, med);
  }
  return {ok, detail + "n=1000, 20 seeds, tol 0.05"};
}

Outcome eigensolver() {
  std::mt19937_64 rng(1010);
  double rec = 0.0, orth = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto n = static_cast<Eigen::Index>(15 * (i + 1));
    const Matrix a = testutil::random_matrix(n, n, rng);
    const Matrix m = 0.5 * (a + a.transpose());
    const auto es = eig_sym(m);
    const Matrix r = es.eigenvectors * es.eigenvalues.asDiagonal() * es.eigenvectors.transpose();
    rec = std::max(rec, (r - m).norm() / m.norm());
    orth = std::max(orth, (es.eigenvectors.transpose() * es.eigenvectors - Matrix::Identity(n, n)).norm());
  }
  return {rec < 1e-8 && orth < 1e-8, fmt("20 matrices n<=300, reconstruction %.2e, orthonormality %.2e", rec, orth)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / "clar_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = CLAR_CLI;
  const std::string data = (dir / "data").string();
  {
    std::ofstream(dir / "config.json")
        << R"({"reg":"clar","alpha":1.0,"beta":2.0,"S":2,"strategy":"node","clamp":1.0,"resample":true,"epochs":100})";
  }
  auto run = [&](const std::string& args) { return std::system((cli + " " + args + " > /dev/null").c_str()); };
  if (run("gen-sbm --n 200 --c 2 --h 0.3 --seed 5 --out " + data) != 0) return {false, "gen-sbm failed"};
  for (const char* out : {"a.json", "b.json"}) {
    if (run("train --config " + (dir / "config.json").string() + " --data " + data + " --seed 3 --out " +
            (dir / out).string()) != 0) {
      return {false, "train failed"};
    }
  }
  const std::string a = slurp(dir / "a.json"), b = slurp(dir / "b.json");
  return {!a.empty() && a == b, fmt("two train runs, %zu bytes each, %s", a.size(), a == b ? "identical" : "differ")};
}

}  // namespace

int main() {
  criterion(1, "trace form equals edge sum", trace_identity);
  criterion(2, "Laplacian additivity and complement-term decomposition", additivity);
  criterion(3, "propagation eigen-identities", propagation_identities);
  criterion(4, "gradient checks", gradient_checks);
  criterion(5, "complement sampling contract", sampling_contract);
  criterion(6, "filter fitting: CLAR <= GCN on high-pass and band-reject", filter_fitting_direction);
  criterion(7, "over-smoothing at depth 8", oversmoothing_direction);
  criterion(8, "robustness to 50% edge removal", robustness_direction);
  criterion(9, "SBM homophily targets", sbm_homophily);
  criterion(10, "eigensolver accuracy", eigensolver);
  criterion(11, "train output is byte-identical across runs", cli_determinism);
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
