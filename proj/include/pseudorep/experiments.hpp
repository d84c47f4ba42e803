#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pseudorep/dataset.hpp"
#include "pseudorep/loop.hpp"
#include "pseudorep/manifest.hpp"
#include "pseudorep/models.hpp"

namespace pseudorep {

enum class ExperimentId {
  NoiseCurve,
  ConfidenceCurve,
  AlphaSweep,
  SslAblation,
  MixupLayerAblation,
  Benchmark
};

std::string to_string(ExperimentId id);
ExperimentId parse_experiment_id(const std::string& name);

/// Where an experiment's data comes from: a built-in generator or a dataset
/// directory written by `gen`.
struct DatasetSpec {
  std::string generator = "synthetic";  // synthetic | crack | signals | dir
  int num_classes = 7;
  std::size_t n_per_class = 450;
  std::size_t size = 16;  // image side or signal length
  double difficulty = 0.5;
  std::uint64_t seed = 0;
  std::filesystem::path path;  // generator == "dir"
  std::size_t n_labeled = 105;
  std::size_t n_test = 315;
};

Json to_json(const DatasetSpec& d);
DatasetSpec dataset_spec_from_json(const Json& j, const DatasetSpec& base = {});
Dataset materialize(const DatasetSpec& d);

struct ExperimentSpec {
  ExperimentId id = ExperimentId::Benchmark;
  DatasetSpec dataset;
  /// Noise rates (noise_curve) or alphas (alpha_sweep, ssl_ablation).
  std::vector<double> grid;
  /// Mixup settings (mixup_layer_ablation): off, input or a layer name.
  std::vector<std::string> layers;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  LoopConfig loop;
  TrainingConfig training;
  /// noise_curve subset arm.
  double subset_fraction = 0.1;
  std::size_t buckets = 10;

  /// Grid defaults per experiment id (applied when grid/layers are empty).
  void fill_defaults();
  void validate() const;
};

Json to_json(const ExperimentSpec& s);
ExperimentSpec experiment_spec_from_json(const Json& j);

/// Long-format result row. `iteration` is absent for non-trajectory metrics.
struct ResultRow {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string arm;
  std::string grid_value;
  std::optional<std::size_t> iteration;
  std::string metric;
  double value = 0.0;
};

inline constexpr const char* kResultColumns = "experiment,seed,arm,grid_value,iteration,metric,value";

std::string to_csv_line(const ResultRow& r);
ResultRow parse_csv_line(const std::string& line);
void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

/// One independently runnable grid point.
struct ExperimentUnit {
  std::uint64_t seed = 0;
  std::string grid_value;
  std::string arm;

  /// File-name-safe key, unique within an experiment.
  std::string key() const;
};

std::vector<ExperimentUnit> plan_units(const ExperimentSpec& spec);
std::vector<ResultRow> run_unit(const ExperimentSpec& spec, const Dataset& data,
                                const ExperimentUnit& unit);
/// Order-independent aggregation of all rows into the JSON summary.
Json summarize(const ExperimentSpec& spec, const std::vector<ResultRow>& rows);

struct ExperimentResult {
  std::vector<ResultRow> rows;
  Json summary;
};

/// All units in plan order, `jobs` at a time.
ExperimentResult run_experiment(const ExperimentSpec& spec, std::size_t jobs = 1);

struct ExperimentDirOptions {
  std::size_t jobs = 1;
  /// Keep unit files that already exist and only run the missing ones.
  bool resume = false;
  /// Allow writing into a non-empty directory that is not being resumed.
  bool force = false;
  /// Extra manifest fields (tool version, timestamps, ...).
  Json manifest_extra = Json::object();
};

/// Directory layout: units/<key>.csv per finished unit, results.csv,
/// summary.json, manifest.json. A `_PARTIAL` marker exists until every unit
/// has finished.
ExperimentResult run_experiment_dir(const ExperimentSpec& spec, const std::filesystem::path& out,
                                    const ExperimentDirOptions& options = {});

inline constexpr const char* kPartialMarker = "_PARTIAL";

// ---- building blocks shared with tests ------------------------------------

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

struct ConfidenceBucket {
  std::size_t index = 0;
  std::size_t count = 0;
  double accuracy = 0.0;
  double mean_confidence = 0.0;
};

/// Buckets by confidence rank: bucket = floor(rank * buckets / n), with tied
/// confidences sharing the bucket of their first member. Empty buckets are
/// omitted.
std::vector<ConfidenceBucket> confidence_buckets(const std::vector<double>& confidence,
                                                 const std::vector<bool>& correct,
                                                 std::size_t buckets = 10);

/// Mean and sample standard deviation (0 for fewer than two values).
std::pair<double, double> mean_std(const std::vector<double>& v);

}  // namespace pseudorep
