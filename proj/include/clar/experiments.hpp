#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clar/datasets.hpp"
#include "clar/spectral.hpp"
#include "clar/training.hpp"

namespace clar {

struct ReportRow {
  std::string group;
  std::uint64_t seed = 0;
  std::string metric;
  double value = 0.0;
};

struct ReportAggregate {
  std::string group;
  std::string metric;
  std::size_t count = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
};

struct ExperimentReport {
  std::string name;
  nlohmann::json config;
  std::vector<std::uint64_t> seeds;
  std::vector<ReportRow> rows;
  std::vector<ReportAggregate> aggregates;

  /// Recomputes aggregates per (group, metric), in order of first appearance.
  void finalize();
  std::vector<double> values(const std::string& group, const std::string& metric) const;
  /// Median of values(group, metric). Throws InvalidArgument if there are none.
  double median(const std::string& group, const std::string& metric) const;

  nlohmann::json to_json() const;
  /// Columns: experiment,group,seed,metric,value
  std::string to_csv() const;
  /// Writes <path> as JSON and the same path with a .csv extension.
  void write(const std::filesystem::path& json_path) const;
};

/// Runs fn(seed) for every seed on up to `threads` workers and concatenates
/// the rows in seed order.
std::vector<ReportRow> run_seeds(const std::vector<std::uint64_t>& seeds, std::size_t threads,
                                 const std::function<std::vector<ReportRow>(std::uint64_t)>& fn);

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count);

/// A named model/regularizer combination. With a nonempty grid, every
/// (alpha, beta) pair is trained and the one with the best validation accuracy
/// (then lowest validation loss) is kept.
struct Variant {
  std::string name;
  Backbone backbone = Backbone::Gcn;
  RegularizerSpec reg{};
  std::vector<std::pair<double, double>> grid;
};

/// {0, 0.001, 0.005}^2 without (0, 0).
std::vector<std::pair<double, double>> planetoid_grid();

/// gcn, clar (clamp 1), clar10 (clamp 10), dropedge (rate 0.2), madreg, mlp.
/// CLAR variants search planetoid_grid().
std::vector<Variant> default_variants();
/// Trains `v` on ds with base's optimizer/split settings and the given seed.
TrainResult train_variant(const Dataset& ds, const TrainConfig& base, const Variant& v, std::uint64_t seed);
Variant find_variant(const std::vector<Variant>& variants, const std::string& name);

struct NamedFilter {
  std::string name;
  FilterFn fn;
};

struct FilterFittingConfig {
  SbmSpec data{};
  std::vector<NamedFilter> filters;
  FitConfig fit{};
  /// CLAR (alpha, beta) candidates; the best MSE per seed is reported.
  std::vector<std::pair<double, double>> clar_grid;
  RegularizerSpec clar{};  ///< alpha/beta overridden from the grid
  std::vector<std::uint64_t> seeds;
  std::size_t threads = 1;
};

/// Groups "<filter>/gcn" and "<filter>/gcn+clar", metric "mse" (plus the
/// chosen "alpha" and "beta" for the CLAR group).
ExperimentReport run_filter_fitting(const FilterFittingConfig& cfg);

struct BandAccuracyConfig {
  SbmSpec data{};
  std::size_t window = 0;  ///< 0: ceil(n / 10)
  std::size_t stride = 0;  ///< 0: same as window
  TrainConfig train{};  ///< backbone forced to MLP
  std::vector<std::uint64_t> seeds;
  std::size_t threads = 1;
};

/// Groups "band<start>" (metrics "accuracy", "center" = mean eigenvalue of the
/// window) and "all" for the full projection.
ExperimentReport run_band_accuracy(const BandAccuracyConfig& cfg);

struct OversmoothingConfig {
  SbmSpec data{};
  std::vector<std::size_t> depths{2, 8};
  std::vector<Variant> variants;
  TrainConfig train{};
  std::vector<std::uint64_t> seeds;
  std::size_t threads = 1;
};

/// Groups "<variant>@<depth>", metric "accuracy".
ExperimentReport run_oversmoothing(const OversmoothingConfig& cfg);

struct RobustnessConfig {
  SbmSpec data{};
  std::vector<double> drop_rates{0.0, 0.5};
  std::vector<Variant> variants;
  TrainConfig train{};
  std::vector<std::uint64_t> seeds;
  std::size_t threads = 1;
};

/// Groups "<variant>@<rate>", metric "accuracy"; for every rate after the
/// first also metric "drop" = accuracy(first rate) - accuracy(rate).
ExperimentReport run_robustness(const RobustnessConfig& cfg);

struct SamplingStudyConfig {
  SbmSpec data{};
  std::vector<std::size_t> s_values{1, 2, 3, 4};
  std::vector<SampleKind> strategies{SampleKind::NodeBased, SampleKind::EdgeBased};
  std::vector<std::pair<double, double>> clar_grid{{1.0, 1.0}, {0.0, 1.0}, {1.0, 2.0}};
  TrainConfig train{};  ///< reg.kind forced to CLAR
  std::vector<std::uint64_t> seeds;
  std::size_t threads = 1;
};

/// Groups "<strategy>/S<s>/a<alpha>/b<beta>" with metric "accuracy";
/// "spearman/<strategy>" with metrics "rho" and "degenerate" (correlation of
/// S against accuracy over the grid, per seed); "pearson" with metrics "r"
/// and "degenerate" (node-based against edge-based accuracy over the shared
/// grid, per seed).
ExperimentReport run_sampling_studies(const SamplingStudyConfig& cfg);

/// Desk-scale setups shared by the CLI and the acceptance suite.
namespace presets {

/// Heterophilic SBM (n=200, c=2, h=0.2); high-pass, band-reject, low-pass and
/// band-pass targets; CLAR grid {0,1,2}^2 without (0,0); 10 seeds.
FilterFittingConfig filter_fitting();
/// Heterophilic SBM (n=200, c=2, h=0.2); window ceil(n/10); MLP on a 60/20/20 split.
BandAccuracyConfig band_accuracy();
/// Homophilic SBM (n=500, c=5, h=0.8, d=16, signal 0.5); Planetoid-style
/// split with 20 per class, 100 val, 300 test; depths {2, 8}; all variants.
OversmoothingConfig oversmoothing();
/// Same data and split as oversmoothing; 2-layer models; rates 0.0..0.9.
RobustnessConfig robustness();
/// SBM (n=200, c=2, h=0.5) on a 60/20/20 split; S in {1,2,3,4}.
SamplingStudyConfig sampling_study();
SbmSpec homophilic_sbm();
SbmSpec heterophilic_sbm();

}  // namespace presets

}  // namespace clar
