#include "clar/experiments.hpp"

#include <atomic>
#include <charconv>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "clar/config.hpp"
#include "clar/error.hpp"
#include "clar/stats.hpp"

namespace clar {

using nlohmann::json;

void ExperimentReport::finalize() {
  aggregates.clear();
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  for (const auto& r : rows) {
    auto key = std::make_pair(r.group, r.metric);
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) order.push_back(key);
    it->second.push_back(r.value);
  }
  for (const auto& key : order) {
    const auto& v = groups[key];
    ReportAggregate a;
    a.group = key.first;
    a.metric = key.second;
    a.count = v.size();
    a.median = stats::median(v);
    a.q1 = stats::quantile(v, 0.25);
    a.q3 = stats::quantile(v, 0.75);
    a.iqr = a.q3 - a.q1;
    aggregates.push_back(a);
  }
}

std::vector<double> ExperimentReport::values(const std::string& group, const std::string& metric) const {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.group == group && r.metric == metric) out.push_back(r.value);
  }
  return out;
}

double ExperimentReport::median(const std::string& group, const std::string& metric) const {
  const auto v = values(group, metric);
  if (v.empty()) throw Error(ErrorCode::InvalidArgument, "no rows for " + group + "/" + metric);
  return stats::median(v);
}

json ExperimentReport::to_json() const {
  json j;
  j["experiment"] = name;
  j["config"] = config;
  j["seeds"] = seeds;
  json rs = json::array();
  for (const auto& r : rows) rs.push_back({{"group", r.group}, {"seed", r.seed}, {"metric", r.metric}, {"value", r.value}});
  j["rows"] = rs;
  json ag = json::array();
  for (const auto& a : aggregates) {
    ag.push_back({{"group", a.group},
                  {"metric", a.metric},
                  {"count", a.count},
                  {"median", a.median},
                  {"q1", a.q1},
                  {"q3", a.q3},
                  {"iqr", a.iqr}});
  }
  j["aggregates"] = ag;
  return j;
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream out;
  out << "experiment,group,seed,metric,value\n";
  char buf[64];
  for (const auto& r : rows) {
    const auto res = std::to_chars(buf, buf + sizeof buf, r.value);
    out << name << ',' << r.group << ',' << r.seed << ',' << r.metric << ',' << std::string_view(buf, res.ptr - buf)
        << '\n';
  }
  return out.str();
}

void ExperimentReport::write(const std::filesystem::path& json_path) const {
  write_json(json_path, to_json());
  auto csv_path = json_path;
  csv_path.replace_extension(".csv");
  std::ofstream out(csv_path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + csv_path.string());
  out << to_csv();
}

std::vector<ReportRow> run_seeds(const std::vector<std::uint64_t>& seeds, std::size_t threads,
                                 const std::function<std::vector<ReportRow>(std::uint64_t)>& fn) {
  std::vector<std::vector<ReportRow>> per_seed(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        per_seed[i] = fn(seeds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, seeds.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<ReportRow> rows;
  for (auto& chunk : per_seed) rows.insert(rows.end(), chunk.begin(), chunk.end());
  return rows;
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = first + i;
  return out;
}

std::vector<std::pair<double, double>> planetoid_grid() {
  std::vector<std::pair<double, double>> grid;
  for (double a : {0.0, 0.001, 0.005}) {
    for (double b : {0.0, 0.001, 0.005}) {
      if (a != 0.0 || b != 0.0) grid.emplace_back(a, b);
    }
  }
  return grid;
}

std::vector<Variant> default_variants() {
  std::vector<Variant> v;
  v.push_back({"gcn", Backbone::Gcn, {}, {}});
  RegularizerSpec clar;
  clar.kind = RegKind::Clar;
  v.push_back({"clar", Backbone::Gcn, clar, planetoid_grid()});
  clar.clamp_hi = 10.0;
  v.push_back({"clar10", Backbone::Gcn, clar, planetoid_grid()});
  RegularizerSpec de;
  de.kind = RegKind::DropEdge;
  de.drop_rate = 0.2;
  v.push_back({"dropedge", Backbone::Gcn, de, {}});
  RegularizerSpec mr;
  mr.kind = RegKind::MadReg;
  v.push_back({"madreg", Backbone::Gcn, mr, {}});
  v.push_back({"mlp", Backbone::Mlp, {}, {}});
  return v;
}

TrainResult train_variant(const Dataset& ds, const TrainConfig& base, const Variant& v, std::uint64_t seed) {
  TrainConfig cfg = base;
  cfg.backbone = v.backbone;
  cfg.reg = v.reg;
  cfg.seed = seed;
  if (v.grid.empty()) return train(ds, cfg);
  std::optional<TrainResult> best;
  for (const auto& [a, b] : v.grid) {
    cfg.reg.alpha = a;
    cfg.reg.beta = b;
    auto r = train(ds, cfg);
    if (!best || r.best_val_accuracy > best->best_val_accuracy ||
        (r.best_val_accuracy == best->best_val_accuracy && r.best_val_loss < best->best_val_loss)) {
      best = std::move(r);
    }
  }
  return *best;
}

Variant find_variant(const std::vector<Variant>& variants, const std::string& name) {
  for (const auto& v : variants) {
    if (v.name == name) return v;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown variant '" + name + "'");
}

namespace {

json sbm_json(const SbmSpec& s) {
  return {{"n", s.n},
          {"c", s.c},
          {"h", s.target_h},
          {"deg", s.avg_degree},
          {"d", s.feature_dim},
          {"signal", s.feature_signal},
          {"require_connected", s.require_connected}};
}

json fit_json(const FitConfig& f) {
  return {{"lr", f.lr},
          {"epochs", f.max_epochs},
          {"patience", f.patience},
          {"hidden", f.hidden_dim},
          {"depth", f.depth},
          {"backbone", to_string(f.backbone)}};
}

json reg_json(const RegularizerSpec& r) {
  TrainConfig t;
  t.reg = r;
  const json full = to_json(t);
  json j;
  for (const char* k : {"reg", "alpha", "beta", "gamma", "S", "strategy", "clamp", "drop_rate", "resample",
                        "per_node_trace", "ori_laplacian", "com_laplacian", "normalize_complement_first"}) {
    j[k] = full[k];
  }
  return j;
}

json grid_json(const std::vector<std::pair<double, double>>& grid) {
  json arr = json::array();
  for (const auto& [a, b] : grid) arr.push_back({a, b});
  return arr;
}

json variants_json(const std::vector<Variant>& variants) {
  json arr = json::array();
  for (const auto& v : variants) {
    arr.push_back(
        {{"name", v.name}, {"backbone", to_string(v.backbone)}, {"reg", reg_json(v.reg)}, {"grid", grid_json(v.grid)}});
  }
  return arr;
}

std::string fmt(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Dataset dataset_for(const SbmSpec& spec, std::uint64_t seed) {
  SbmSpec s = spec;
  s.seed = seed;
  return generate_sbm(s);
}

ExperimentReport make_report(std::string name, json config, const std::vector<std::uint64_t>& seeds,
                             std::vector<ReportRow> rows) {
  ExperimentReport r;
  r.name = std::move(name);
  r.config = std::move(config);
  r.seeds = seeds;
  r.rows = std::move(rows);
  r.finalize();
  return r;
}

}  // namespace

ExperimentReport run_filter_fitting(const FilterFittingConfig& cfg) {
  if (cfg.filters.empty() || cfg.seeds.empty()) throw Error(ErrorCode::InvalidArgument, "filters and seeds must be nonempty");
  auto rows = run_seeds(cfg.seeds, cfg.threads, [&](std::uint64_t seed) {
    const Dataset ds = dataset_for(cfg.data, seed);
    const EigenSystem es = eig_sym(laplacian(ds.graph, LaplacianKind::SymNormalized));
    std::vector<ReportRow> out;
    for (const auto& f : cfg.filters) {
      const Matrix target = apply_spectral_filter(es, ds.features, f.fn);
      FitConfig fit = cfg.fit;
      fit.seed = seed;
      fit.reg = RegularizerSpec{};
      out.push_back({f.name + "/gcn", seed, "mse", fit_filter(ds.graph, ds.features, target, fit).best_mse});
      if (cfg.clar_grid.empty()) continue;
      double best = std::numeric_limits<double>::infinity();
      std::pair<double, double> best_ab{0.0, 0.0};
      for (const auto& [a, b] : cfg.clar_grid) {
        fit.reg = cfg.clar;
        fit.reg.kind = RegKind::Clar;
        fit.reg.alpha = a;
        fit.reg.beta = b;
        const double mse = fit_filter(ds.graph, ds.features, target, fit).best_mse;
        if (mse < best) {
          best = mse;
          best_ab = {a, b};
        }
      }
      out.push_back({f.name + "/gcn+clar", seed, "mse", best});
      out.push_back({f.name + "/gcn+clar", seed, "alpha", best_ab.first});
      out.push_back({f.name + "/gcn+clar", seed, "beta", best_ab.second});
    }
    return out;
  });
  json filters = json::array();
  for (const auto& f : cfg.filters) filters.push_back(f.name);
  json config = {{"data", sbm_json(cfg.data)},
                 {"filters", filters},
                 {"fit", fit_json(cfg.fit)},
                 {"clar", reg_json(cfg.clar)},
                 {"clar_grid", grid_json(cfg.clar_grid)}};
  return make_report("filter_fitting", std::move(config), cfg.seeds, std::move(rows));
}

ExperimentReport run_band_accuracy(const BandAccuracyConfig& cfg) {
  if (cfg.seeds.empty()) throw Error(ErrorCode::InvalidArgument, "seeds must be nonempty");
  const std::size_t window = cfg.window ? cfg.window : (cfg.data.n + 9) / 10;
  const std::size_t stride = cfg.stride ? cfg.stride : window;
  if (window > cfg.data.n) throw Error(ErrorCode::InvalidArgument, "window exceeds node count");
  auto rows = run_seeds(cfg.seeds, cfg.threads, [&](std::uint64_t seed) {
    Dataset ds = dataset_for(cfg.data, seed);
    const EigenSystem es = eig_sym(laplacian(ds.graph, LaplacianKind::SymNormalized));
    TrainConfig tc = cfg.train;
    tc.backbone = Backbone::Mlp;
    tc.reg = RegularizerSpec{};
    tc.seed = seed;
    ds.masks = make_split(ds.labels, ds.num_classes, tc.split, derive_seed(seed, 1));
    const std::size_t n = ds.graph.num_nodes();
    std::vector<ReportRow> out;
    auto run = [&](const std::string& group, const Matrix& x) {
      Dataset proj = ds;
      proj.features = x;
      out.push_back({group, seed, "accuracy", train(proj, tc).test_accuracy});
    };
    run("all", band_select(es, ds.features, BandSelection::window(0, n)));
    for (std::size_t start = 0; start + window <= n; start += stride) {
      const std::string group = "band" + std::to_string(start);
      run(group, band_select(es, ds.features, BandSelection::window(start, window)));
      const double center =
          es.eigenvalues.segment(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(window)).mean();
      out.push_back({group, seed, "center", center});
    }
    return out;
  });
  json config = {{"data", sbm_json(cfg.data)},
                 {"window", window},
                 {"stride", stride},
                 {"train", to_json(cfg.train)}};
  return make_report("band_accuracy", std::move(config), cfg.seeds, std::move(rows));
}

ExperimentReport run_oversmoothing(const OversmoothingConfig& cfg) {
  if (cfg.depths.empty() || cfg.variants.empty() || cfg.seeds.empty()) {
    throw Error(ErrorCode::InvalidArgument, "depths, variants and seeds must be nonempty");
  }
  for (auto d : cfg.depths) {
    if (d < 1 || d > 16) throw Error(ErrorCode::InvalidArgument, "depths must lie in [1, 16]");
  }
  auto rows = run_seeds(cfg.seeds, cfg.threads, [&](std::uint64_t seed) {
    Dataset ds = dataset_for(cfg.data, seed);
    ds.masks = make_split(ds.labels, ds.num_classes, cfg.train.split, derive_seed(seed, 1));
    std::vector<ReportRow> out;
    for (auto depth : cfg.depths) {
      for (const auto& v : cfg.variants) {
        TrainConfig tc = cfg.train;
        tc.depth = depth;
        out.push_back({v.name + "@" + std::to_string(depth), seed, "accuracy", train_variant(ds, tc, v, seed).test_accuracy});
      }
    }
    return out;
  });
  json depths = cfg.depths;
  json config = {{"data", sbm_json(cfg.data)},
                 {"depths", depths},
                 {"variants", variants_json(cfg.variants)},
                 {"train", to_json(cfg.train)}};
  return make_report("oversmoothing", std::move(config), cfg.seeds, std::move(rows));
}

ExperimentReport run_robustness(const RobustnessConfig& cfg) {
  if (cfg.drop_rates.empty() || cfg.variants.empty() || cfg.seeds.empty()) {
    throw Error(ErrorCode::InvalidArgument, "rates, variants and seeds must be nonempty");
  }
  for (double r : cfg.drop_rates) {
    if (!(r >= 0.0 && r < 1.0)) throw Error(ErrorCode::InvalidArgument, "drop rates must lie in [0, 1)");
  }
  auto rows = run_seeds(cfg.seeds, cfg.threads, [&](std::uint64_t seed) {
    Dataset ds = dataset_for(cfg.data, seed);
    ds.masks = make_split(ds.labels, ds.num_classes, cfg.train.split, derive_seed(seed, 1));
    std::vector<ReportRow> out;
    std::vector<double> first(cfg.variants.size());
    for (std::size_t r = 0; r < cfg.drop_rates.size(); ++r) {
      const double rate = cfg.drop_rates[r];
      const Dataset damaged = rate > 0.0 ? remove_edges(ds, rate, derive_seed(seed, 1000 + r)) : ds;
      for (std::size_t k = 0; k < cfg.variants.size(); ++k) {
        const auto& v = cfg.variants[k];
        const double acc = train_variant(damaged, cfg.train, v, seed).test_accuracy;
        const std::string group = v.name + "@" + fmt(rate);
        out.push_back({group, seed, "accuracy", acc});
        if (r == 0) {
          first[k] = acc;
        } else {
          out.push_back({group, seed, "drop", first[k] - acc});
        }
      }
    }
    return out;
  });
  json config = {{"data", sbm_json(cfg.data)},
                 {"drop_rates", cfg.drop_rates},
                 {"variants", variants_json(cfg.variants)},
                 {"train", to_json(cfg.train)}};
  return make_report("robustness", std::move(config), cfg.seeds, std::move(rows));
}

ExperimentReport run_sampling_studies(const SamplingStudyConfig& cfg) {
  if (cfg.s_values.empty() || cfg.strategies.empty() || cfg.clar_grid.empty() || cfg.seeds.empty()) {
    throw Error(ErrorCode::InvalidArgument, "S values, strategies, grid and seeds must be nonempty");
  }
  auto rows = run_seeds(cfg.seeds, cfg.threads, [&](std::uint64_t seed) {
    Dataset ds = dataset_for(cfg.data, seed);
    ds.masks = make_split(ds.labels, ds.num_classes, cfg.train.split, derive_seed(seed, 1));
    std::vector<ReportRow> out;
    std::vector<std::vector<double>> acc_by_strategy(cfg.strategies.size());
    for (std::size_t k = 0; k < cfg.strategies.size(); ++k) {
      std::vector<double> s_axis;
      for (auto s : cfg.s_values) {
        for (const auto& [a, b] : cfg.clar_grid) {
          TrainConfig tc = cfg.train;
          tc.seed = seed;
          tc.reg.kind = RegKind::Clar;
          tc.reg.strategy = {cfg.strategies[k], s};
          tc.reg.alpha = a;
          tc.reg.beta = b;
          const double acc = train(ds, tc).test_accuracy;
          out.push_back({to_string(cfg.strategies[k]) + "/S" + std::to_string(s) + "/a" + fmt(a) + "/b" + fmt(b), seed,
                         "accuracy", acc});
          s_axis.push_back(static_cast<double>(s));
          acc_by_strategy[k].push_back(acc);
        }
      }
      const auto rho = s_axis.size() >= 2 ? stats::spearman(s_axis, acc_by_strategy[k]) : stats::Correlation{0.0, true};
      const std::string group = "spearman/" + to_string(cfg.strategies[k]);
      out.push_back({group, seed, "rho", rho.value});
      out.push_back({group, seed, "degenerate", rho.degenerate ? 1.0 : 0.0});
    }
    if (cfg.strategies.size() >= 2 && acc_by_strategy[0].size() >= 2) {
      const auto r = stats::pearson(acc_by_strategy[0], acc_by_strategy[1]);
      out.push_back({"pearson", seed, "r", r.value});
      out.push_back({"pearson", seed, "degenerate", r.degenerate ? 1.0 : 0.0});
    }
    return out;
  });
  json strategies = json::array();
  for (auto s : cfg.strategies) strategies.push_back(to_string(s));
  json config = {{"data", sbm_json(cfg.data)},
                 {"S", cfg.s_values},
                 {"strategies", strategies},
                 {"clar_grid", grid_json(cfg.clar_grid)},
                 {"train", to_json(cfg.train)}};
  return make_report("sampling_study", std::move(config), cfg.seeds, std::move(rows));
}

namespace presets {

SbmSpec homophilic_sbm() {
  SbmSpec s;
  s.n = 500;
  s.c = 5;
  s.target_h = 0.8;
  s.avg_degree = 10.0;
  s.feature_dim = 16;
  s.feature_signal = 0.5;
  return s;
}

SbmSpec heterophilic_sbm() {
  SbmSpec s;
  s.n = 200;
  s.c = 2;
  s.target_h = 0.2;
  s.avg_degree = 10.0;
  s.feature_dim = 8;
  s.feature_signal = 1.0;
  return s;
}

FilterFittingConfig filter_fitting() {
  FilterFittingConfig c;
  c.data = heterophilic_sbm();
  for (auto k : {FilterKind::HighPass, FilterKind::BandReject, FilterKind::LowPass, FilterKind::BandPass}) {
    c.filters.push_back({to_string(k), artificial_filter(k)});
  }
  for (double a : {0.0, 1.0, 2.0}) {
    for (double b : {0.0, 1.0, 2.0}) {
      if (a != 0.0 || b != 0.0) c.clar_grid.emplace_back(a, b);
    }
  }
  c.clar.kind = RegKind::Clar;
  c.seeds = seed_range(0, 10);
  return c;
}

BandAccuracyConfig band_accuracy() {
  BandAccuracyConfig c;
  c.data = heterophilic_sbm();
  c.seeds = seed_range(0, 10);
  return c;
}

OversmoothingConfig oversmoothing() {
  OversmoothingConfig c;
  c.data = homophilic_sbm();
  c.train.split = SplitSpec::planetoid(20, 100, 300);
  c.variants = default_variants();
  c.seeds = seed_range(0, 10);
  return c;
}

RobustnessConfig robustness() {
  RobustnessConfig c;
  c.data = homophilic_sbm();
  c.train.split = SplitSpec::planetoid(20, 100, 300);
  c.drop_rates.clear();
  for (int i = 0; i < 10; ++i) c.drop_rates.push_back(i / 10.0);
  const auto all = default_variants();
  c.variants = {find_variant(all, "gcn"), find_variant(all, "clar"), find_variant(all, "clar10")};
  c.seeds = seed_range(0, 10);
  return c;
}

SamplingStudyConfig sampling_study() {
  SamplingStudyConfig c;
  c.data = heterophilic_sbm();
  c.data.target_h = 0.5;
  c.seeds = seed_range(0, 10);
  return c;
}

}  // namespace presets

}  // namespace clar
