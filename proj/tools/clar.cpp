#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clar/config.hpp"
#include "clar/datasets.hpp"
#include "clar/error.hpp"
#include "clar/experiments.hpp"
#include "clar/io.hpp"
#include "clar/sampling.hpp"
#include "clar/spectral.hpp"
#include "clar/training.hpp"

using namespace clar;
using nlohmann::json;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  std::string out;
};

void add_sbm_options(CLI::App* cmd, SbmSpec& s) {
  cmd->add_option("--n", s.n, "number of nodes")->capture_default_str();
  cmd->add_option("--c", s.c, "number of classes")->capture_default_str();
  cmd->add_option("--h", s.target_h, "target homophily ratio")->capture_default_str();
  cmd->add_option("--deg", s.avg_degree, "average degree")->capture_default_str();
  cmd->add_option("--d", s.feature_dim, "feature dimension")->capture_default_str();
  cmd->add_option("--signal", s.feature_signal, "class-mean separation")->capture_default_str();
}

void add_seed_count(CLI::App* cmd, std::size_t& count) {
  cmd->add_option("--seeds", count, "number of seeds, starting at --seed")->capture_default_str();
}

std::vector<Variant> select_variants(const std::vector<std::string>& names) {
  const auto all = default_variants();
  std::vector<Variant> out;
  for (const auto& n : names) out.push_back(find_variant(all, n));
  return out;
}

void require_out(const Globals& g) {
  if (g.out.empty()) throw Error(ErrorCode::InvalidArgument, "--out is required");
}

void emit_report(const ExperimentReport& r, const Globals& g) {
  require_out(g);
  r.write(g.out);
  for (const auto& a : r.aggregates) {
    std::printf("%-28s %-10s median=%.6g iqr=%.3g n=%zu\n", a.group.c_str(), a.metric.c_str(), a.median, a.iqr, a.count);
  }
}

json train_output(const TrainConfig& cfg, const TrainResult& r) {
  json trace = json::array();
  for (const auto& e : r.trace) {
    trace.push_back({{"epoch", e.epoch},
                     {"train_loss", e.train_loss},
                     {"cls_loss", e.cls_loss},
                     {"val_loss", e.val_loss},
                     {"val_accuracy", e.val_accuracy},
                     {"test_accuracy", e.test_accuracy}});
  }
  return {{"config", to_json(cfg)},
          {"seed", cfg.seed},
          {"best_val_epoch", r.best_val_epoch},
          {"best_val_accuracy", r.best_val_accuracy},
          {"epochs_run", r.epochs_run},
          {"test_accuracy", r.test_accuracy},
          {"trace", trace}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Complement Laplacian regularization for graph neural networks"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "base random seed");
  app.add_option("--threads", g.threads, "worker threads for multi-seed runs")->capture_default_str();
  app.add_option("--out", g.out, "output path");

  // gen-sbm
  SbmSpec sbm;
  bool allow_disconnected = false;
  auto* gen = app.add_subcommand("gen-sbm", "generate a stochastic block model dataset directory");
  add_sbm_options(gen, sbm);
  gen->add_flag("--allow-disconnected", allow_disconnected, "skip the connectivity requirement");

  // spectrum
  std::string graph_path, kind_name = "sym";
  auto* spec_cmd = app.add_subcommand("spectrum", "eigenvalues of a graph Laplacian");
  spec_cmd->add_option("--graph", graph_path, "edge list")->required();
  spec_cmd->add_option("--kind", kind_name, "unnorm | sym | selfloop")->capture_default_str();

  // filter-signal
  std::string features_path, filter_name = "highpass";
  auto* filt = app.add_subcommand("filter-signal", "apply an artificial spectral filter to node features");
  filt->add_option("--graph", graph_path, "edge list")->required();
  filt->add_option("--features", features_path, "feature CSV")->required();
  filt->add_option("--filter", filter_name, "highpass | lowpass | bandpass | bandreject")->capture_default_str();
  filt->add_option("--kind", kind_name, "Laplacian kind")->capture_default_str();

  // sample-complement
  std::string strategy_name = "node";
  std::size_t s_mult = 1;
  auto* samp = app.add_subcommand("sample-complement", "draw a sampled complement graph");
  samp->add_option("--graph", graph_path, "edge list")->required();
  samp->add_option("--strategy", strategy_name, "node | edge")->capture_default_str();
  samp->add_option("--s,--S", s_mult, "sampling multiple")->capture_default_str();

  // train
  std::string config_path, data_dir;
  auto* tr = app.add_subcommand("train", "train one model on a dataset directory");
  tr->add_option("--config", config_path, "flat JSON config")->required();
  tr->add_option("--data", data_dir, "directory with edges.txt, features.csv, labels.csv")->required();

  // experiments
  std::size_t seed_count = 10;
  bool per_node_trace = false;

  auto ff = presets::filter_fitting();
  auto* ff_cmd = app.add_subcommand("fit-filters", "MSE of fitting artificial filters, with and without CLAR");
  add_sbm_options(ff_cmd, ff.data);
  add_seed_count(ff_cmd, seed_count);
  ff_cmd->add_flag("--per-node-trace", per_node_trace, "divide CLAR traces by n before clamping");

  auto ba = presets::band_accuracy();
  auto* ba_cmd = app.add_subcommand("band-accuracy", "MLP accuracy on band-limited features");
  add_sbm_options(ba_cmd, ba.data);
  add_seed_count(ba_cmd, seed_count);
  ba_cmd->add_option("--window", ba.window, "eigencomponents per band (0: ceil(n/10))")->capture_default_str();
  ba_cmd->add_option("--stride", ba.stride, "band start step (0: window)")->capture_default_str();

  auto os = presets::oversmoothing();
  std::vector<std::string> variant_names{"gcn", "clar", "clar10", "dropedge", "madreg", "mlp"};
  auto* os_cmd = app.add_subcommand("oversmoothing", "accuracy against depth for several regularizers");
  add_sbm_options(os_cmd, os.data);
  add_seed_count(os_cmd, seed_count);
  os_cmd->add_option("--depths", os.depths, "model depths")->delimiter(',')->capture_default_str();
  os_cmd->add_option("--variants", variant_names, "gcn, clar, clar10, dropedge, madreg, mlp")->delimiter(',');

  auto rb = presets::robustness();
  std::vector<std::string> rb_variants{"gcn", "clar", "clar10"};
  auto* rb_cmd = app.add_subcommand("robustness", "accuracy after removing dataset edges");
  add_sbm_options(rb_cmd, rb.data);
  add_seed_count(rb_cmd, seed_count);
  rb_cmd->add_option("--rates", rb.drop_rates, "edge removal rates")->delimiter(',')->capture_default_str();
  rb_cmd->add_option("--variants", rb_variants, "variants to compare")->delimiter(',');

  auto ss = presets::sampling_study();
  std::vector<std::string> strategy_names{"node", "edge"};
  auto* ss_cmd = app.add_subcommand("sampling-study", "correlation of S and of the two strategies with accuracy");
  add_sbm_options(ss_cmd, ss.data);
  add_seed_count(ss_cmd, seed_count);
  ss_cmd->add_option("--S", ss.s_values, "sampling multiples")->delimiter(',')->capture_default_str();
  ss_cmd->add_option("--strategies", strategy_names, "node, edge")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::uint64_t base_seed = g.seed.value_or(0);
  try {
    if (*gen) {
      require_out(g);
      sbm.seed = base_seed;
      sbm.require_connected = !allow_disconnected;
      const Dataset ds = generate_sbm(sbm);
      save_dataset(g.out, ds);
      json meta = {{"n", sbm.n},
                   {"c", sbm.c},
                   {"target_h", sbm.target_h},
                   {"avg_degree", sbm.avg_degree},
                   {"d", sbm.feature_dim},
                   {"signal", sbm.feature_signal},
                   {"seed", sbm.seed},
                   {"num_edges", ds.graph.num_edges()},
                   {"measured_h", homophily_ratio(ds.graph, ds.labels)},
                   {"connected", is_connected(ds.graph)}};
      write_json(std::filesystem::path(g.out) / "meta.json", meta);
    } else if (*spec_cmd) {
      const Graph graph = io::read_edge_list(graph_path);
      const auto es = eig_sym(laplacian(graph, parse_laplacian_kind(kind_name)));
      std::ostringstream csv;
      csv << "index,eigenvalue\n";
      char buf[32];
      for (Eigen::Index i = 0; i < es.eigenvalues.size(); ++i) {
        const auto res = std::to_chars(buf, buf + sizeof buf, es.eigenvalues[i]);
        csv << i << ',' << std::string_view(buf, res.ptr - buf) << '\n';
      }
      if (g.out.empty()) {
        std::cout << csv.str();
      } else {
        std::ofstream(g.out) << csv.str();
      }
    } else if (*filt) {
      require_out(g);
      const Matrix x = io::read_matrix_csv(features_path);
      const Graph graph = io::read_edge_list(graph_path, static_cast<std::size_t>(x.rows()));
      const Matrix y = apply_spectral_filter(graph, parse_laplacian_kind(kind_name), x,
                                             artificial_filter(parse_filter_kind(filter_name)));
      io::write_matrix_csv(g.out, y);
    } else if (*samp) {
      require_out(g);
      const Graph graph = io::read_edge_list(graph_path);
      const auto sc = sample_complement(graph, {parse_sample_kind(strategy_name), s_mult}, base_seed);
      io::write_edge_list(g.out, sc.graph);
    } else if (*tr) {
      require_out(g);
      TrainConfig cfg = load_train_config(config_path);
      if (g.seed) cfg.seed = *g.seed;
      const Dataset ds = load_dataset_dir(data_dir);
      write_json(g.out, train_output(cfg, train(ds, cfg)));
    } else if (*ff_cmd) {
      ff.seeds = seed_range(base_seed, seed_count);
      ff.threads = g.threads;
      ff.clar.per_node_trace = per_node_trace;
      emit_report(run_filter_fitting(ff), g);
    } else if (*ba_cmd) {
      ba.seeds = seed_range(base_seed, seed_count);
      ba.threads = g.threads;
      emit_report(run_band_accuracy(ba), g);
    } else if (*os_cmd) {
      os.seeds = seed_range(base_seed, seed_count);
      os.threads = g.threads;
      os.variants = select_variants(variant_names);
      emit_report(run_oversmoothing(os), g);
    } else if (*rb_cmd) {
      rb.seeds = seed_range(base_seed, seed_count);
      rb.threads = g.threads;
      rb.variants = select_variants(rb_variants);
      emit_report(run_robustness(rb), g);
    } else if (*ss_cmd) {
      ss.seeds = seed_range(base_seed, seed_count);
      ss.threads = g.threads;
      ss.strategies.clear();
      for (const auto& s : strategy_names) ss.strategies.push_back(parse_sample_kind(s));
      emit_report(run_sampling_studies(ss), g);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_numerical(e.code()) ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
