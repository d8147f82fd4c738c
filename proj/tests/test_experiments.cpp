#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "clar/error.hpp"
#include "clar/experiments.hpp"
#include "clar/stats.hpp"

using namespace clar;

namespace {

SbmSpec small_sbm(double h, double signal) {
  SbmSpec s;
  s.n = 100;
  s.c = 2;
  s.target_h = h;
  s.avg_degree = 8;
  s.feature_dim = 8;
  s.feature_signal = signal;
  return s;
}

BandAccuracyConfig small_band(double h, double signal, std::size_t seeds) {
  BandAccuracyConfig c;
  c.data = small_sbm(h, signal);
  c.window = 25;
  c.train.max_epochs = 150;
  c.train.patience = 30;
  c.seeds = seed_range(0, seeds);
  return c;
}

}  // namespace

TEST_CASE("quantiles use linear interpolation") {
  const std::vector<double> x{4, 1, 3, 2};
  CHECK(stats::median(x) == 2.5);
  CHECK(stats::quantile(x, 0.25) == doctest::Approx(1.75));
  CHECK(stats::quantile(x, 0.75) == doctest::Approx(3.25));
  CHECK(stats::iqr(x) == doctest::Approx(1.5));
  CHECK(stats::quantile(x, 0.0) == 1.0);
  CHECK(stats::quantile(x, 1.0) == 4.0);
  CHECK(stats::median(std::vector<double>{7}) == 7.0);
  CHECK_THROWS_AS(stats::median(std::vector<double>{}), Error);
}

TEST_CASE("ranks and correlations") {
  CHECK(stats::average_ranks(std::vector<double>{10, 20, 20, 5}) == std::vector<double>{2, 3.5, 3.5, 1});

  const std::vector<double> a{0.5, 0.7, 0.6, 0.9};
  const auto same = stats::pearson(a, a);
  CHECK(same.value == doctest::Approx(1.0));
  CHECK_FALSE(same.degenerate);

  const std::vector<double> flat{0.8, 0.8, 0.8, 0.8};
  const auto rho = stats::spearman(std::vector<double>{1, 2, 3, 4}, flat);
  CHECK(rho.value == 0.0);
  CHECK(rho.degenerate);

  // monotone but nonlinear: Spearman 1, Pearson below 1
  const std::vector<double> x{1, 2, 3, 4, 5}, y{1, 4, 9, 16, 100};
  CHECK(stats::spearman(x, y).value == doctest::Approx(1.0));
  CHECK(stats::pearson(x, y).value < 0.99);
  const std::vector<double> rev{5, 4, 3, 2, 1};
  CHECK(stats::spearman(x, rev).value == doctest::Approx(-1.0));
}

TEST_CASE("report aggregates match their rows") {
  ExperimentReport r;
  r.name = "demo";
  r.seeds = {0, 1, 2};
  r.rows = {{"a", 0, "m", 1.0}, {"b", 0, "m", 5.0}, {"a", 1, "m", 3.0}, {"a", 2, "m", 2.0}};
  r.finalize();
  REQUIRE(r.aggregates.size() == 2);
  CHECK(r.aggregates[0].group == "a");
  CHECK(r.aggregates[0].count == 3);
  CHECK(r.aggregates[0].median == 2.0);
  CHECK(r.median("b", "m") == 5.0);
  CHECK_THROWS_AS(r.median("c", "m"), Error);

  const std::string csv = r.to_csv();
  CHECK(csv.rfind("experiment,group,seed,metric,value\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

  const auto j = r.to_json();
  CHECK(j["experiment"] == "demo");
  CHECK(j["seeds"].size() == 3);
}

TEST_CASE("run_seeds keeps seed order and propagates errors") {
  const auto rows = run_seeds(seed_range(10, 6), 3, [](std::uint64_t s) {
    return std::vector<ReportRow>{{"g", s, "v", static_cast<double>(s * s)}};
  });
  REQUIRE(rows.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(rows[i].seed == 10 + i);
  CHECK_THROWS_AS(run_seeds(seed_range(0, 4), 2,
                            [](std::uint64_t s) -> std::vector<ReportRow> {
                              if (s == 2) throw Error(ErrorCode::InvalidArgument, "boom");
                              return {};
                            }),
                  Error);
}

TEST_CASE("grid and variants") {
  const auto grid = planetoid_grid();
  CHECK(grid.size() == 8);
  CHECK(std::find(grid.begin(), grid.end(), std::pair{0.0, 0.0}) == grid.end());
  const auto vs = default_variants();
  for (const char* name : {"gcn", "clar", "clar10", "dropedge", "madreg", "mlp"}) CHECK_NOTHROW(find_variant(vs, name));
  CHECK(find_variant(vs, "clar10").reg.clamp_hi == 10.0 * find_variant(vs, "clar").reg.clamp_hi);
  CHECK(find_variant(vs, "mlp").backbone == Backbone::Mlp);
  CHECK_THROWS_AS(find_variant(vs, "gat"), Error);
}

TEST_CASE("band accuracy on the full projection matches a plain MLP") {
  const auto cfg = small_band(0.2, 1.0, 10);
  const auto report = run_band_accuracy(cfg);
  std::vector<double> diffs;
  for (std::uint64_t seed : cfg.seeds) {
    SbmSpec s = cfg.data;
    s.seed = seed;
    Dataset ds = generate_sbm(s);
    TrainConfig tc = cfg.train;
    tc.backbone = Backbone::Mlp;
    tc.seed = seed;
    ds.masks = make_split(ds.labels, ds.num_classes, tc.split, derive_seed(seed, 1));
    diffs.push_back(train(ds, tc).test_accuracy);
  }
  const double plain = stats::median(diffs);
  CHECK(std::abs(report.median("all", "accuracy") - plain) <= 0.02);

  // bands are listed in ascending order of their mean eigenvalue
  double last = -1.0;
  for (std::size_t start = 0; start + 25 <= 100; start += 25) {
    const double c = report.median("band" + std::to_string(start), "center");
    CHECK(c >= last);
    last = c;
  }
}

TEST_CASE("bands carry no information without a feature signal") {
  // h = 0.5 keeps the eigenvectors uninformative too, so no band can leak labels;
  // n = 500 gives 100 test nodes per seed
  auto cfg = presets::band_accuracy();
  cfg.data.n = 500;
  cfg.data.target_h = 0.5;
  cfg.data.feature_signal = 0.0;
  const auto report = run_band_accuracy(cfg);
  for (const auto& a : report.aggregates) {
    if (a.metric != "accuracy") continue;
    CAPTURE(a.group);
    CHECK(std::abs(a.median - 0.5) <= 0.05);
  }
}

TEST_CASE("heterophilic top band beats chance") {
  auto cfg = presets::band_accuracy();
  cfg.window = cfg.data.n / 4;
  const auto report = run_band_accuracy(cfg);
  const std::string top = "band" + std::to_string(3 * cfg.window);
  CHECK(report.median(top, "accuracy") >= 0.5 + 0.05);
}

TEST_CASE("reports reproduce and do not depend on the thread count") {
  FilterFittingConfig ff = presets::filter_fitting();
  ff.data = small_sbm(0.2, 1.0);
  ff.filters.resize(1);
  ff.clar_grid = {{1.0, 1.0}};
  ff.fit.max_epochs = 30;
  ff.fit.patience = 10;
  ff.seeds = seed_range(0, 3);
  ff.threads = 1;
  const auto a = run_filter_fitting(ff);
  ff.threads = 3;
  const auto b = run_filter_fitting(ff);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].group == b.rows[i].group);
    CHECK(a.rows[i].value == b.rows[i].value);
  }
  CHECK(a.to_csv() == b.to_csv());
  CHECK(a.values("highpass/gcn", "mse").size() == 3);
  CHECK(a.values("highpass/gcn+clar", "alpha").size() == 3);

  // aggregates recompute from rows
  for (const auto& agg : a.aggregates) {
    const auto v = a.values(agg.group, agg.metric);
    CHECK(std::abs(stats::median(v) - agg.median) <= 1e-12);
    CHECK(std::abs(stats::iqr(v) - agg.iqr) <= 1e-12);
  }

  const auto path = std::filesystem::temp_directory_path() / "clar_test_report.json";
  a.write(path);
  CHECK(std::filesystem::exists(std::filesystem::path(path).replace_extension(".csv")));
  std::ifstream in(path);
  const auto j = nlohmann::json::parse(in);
  CHECK(j["rows"].size() == a.rows.size());
}

TEST_CASE("robustness and sampling reports have the documented groups") {
  RobustnessConfig rb;
  rb.data = small_sbm(0.8, 1.0);
  rb.drop_rates = {0.0, 0.5};
  const auto vs = default_variants();
  rb.variants = {find_variant(vs, "gcn")};
  rb.train.max_epochs = 40;
  rb.train.patience = 10;
  rb.seeds = seed_range(0, 2);
  const auto r = run_robustness(rb);
  CHECK(r.values("gcn@0", "accuracy").size() == 2);
  CHECK(r.values("gcn@0.5", "drop").size() == 2);
  const auto acc0 = r.values("gcn@0", "accuracy"), acc5 = r.values("gcn@0.5", "accuracy");
  const auto drop = r.values("gcn@0.5", "drop");
  for (std::size_t i = 0; i < 2; ++i) CHECK(drop[i] == doctest::Approx(acc0[i] - acc5[i]));

  SamplingStudyConfig ss;
  ss.data = small_sbm(0.5, 1.0);
  ss.s_values = {1, 2};
  ss.clar_grid = {{1.0, 1.0}};
  ss.train.max_epochs = 30;
  ss.train.patience = 10;
  ss.seeds = seed_range(0, 2);
  const auto s = run_sampling_studies(ss);
  CHECK(s.values("node/S1/a1/b1", "accuracy").size() == 2);
  CHECK(s.values("edge/S2/a1/b1", "accuracy").size() == 2);
  CHECK(s.values("spearman/node", "rho").size() == 2);
  CHECK(s.values("pearson", "r").size() == 2);
  for (double v : s.values("pearson", "r")) CHECK(std::abs(v) <= 1.0 + 1e-12);
}

TEST_CASE("experiment configs are validated") {
  OversmoothingConfig os;
  os.variants = default_variants();
  os.seeds = {0};
  os.depths = {0};
  CHECK_THROWS_AS(run_oversmoothing(os), Error);
  BandAccuracyConfig ba = small_band(0.2, 1.0, 1);
  ba.window = 1000;
  CHECK_THROWS_AS(run_band_accuracy(ba), Error);
}
