#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtmlca/mlca.hpp"
#include "mtmlca/training.hpp"
#include "mtmlca/valuemodel.hpp"

namespace mtmlca {

struct SettingConfig {
  std::string id;
  InstanceConfig instance;
};

struct EvalConfig {
  int n_test = 128;
  std::uint64_t setting_seed = 0;
  std::size_t max_exact_items = 24;
  bool save_models = false;
};

/// Methods are "baseline", "mt-f", "mt-r", or "custom". "custom" trains with
/// the model section exactly as written (its sharing mode, shared layers and
/// inject_id); the other three override those fields.
struct ExperimentConfig {
  std::vector<SettingConfig> settings;
  MlcaConfig mlca;
  TrainConfig model;
  EvalConfig eval;
  std::vector<std::string> methods{"baseline", "mt-f", "mt-r"};
  int instances_per_setting = 10;
  std::uint64_t base_seed = 0;
  std::string output_dir = "results";

  /// Training configuration of a method name.
  TrainConfig method_config(const std::string& method) const;
};

/// Throws ConfigError naming the offending field or key.
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& config);

struct ResultRecord {
  std::string setting;
  std::uint64_t seed = 0;
  std::string method;
  double efficiency = 0.0;
  double revenue = 0.0;
  double runtime_ms = 0.0;
};

struct MapeRecord {
  std::string setting;
  std::uint64_t seed = 0;
  std::string method;
  int round = 0;
  double mape = 0.0;
};

struct ExperimentResults {
  std::vector<ResultRecord> results;
  std::vector<MapeRecord> mape;
};

struct ExperimentOptions {
  int jobs = 1;
  /// Wall-clock runtimes vary between runs; without this flag runtime_ms is
  /// written as 0 so identical configs produce identical files.
  bool record_runtime = false;
  std::ostream* log = nullptr;
};

/// Runs every setting x instance x method and writes results.csv, mape.csv and
/// trace.jsonl into `out_dir`. Rows are emitted in canonical order (settings
/// and methods as configured, seeds ascending) regardless of `jobs`.
ExperimentResults run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                                 const ExperimentOptions& options = {});

struct SummaryRow {
  std::string setting;
  std::string method;
  int runs = 0;
  double mean = 0.0;
  double stddev = 0.0;
  std::optional<double> p_value;  // one-tailed signed-rank test vs baseline
  bool best = false;
};

std::vector<ResultRecord> read_results_csv(const std::filesystem::path& path);

/// Per setting and method: mean and sample standard deviation of efficiency,
/// p-value of method > baseline, and a marker on the highest mean.
std::vector<SummaryRow> summarize(const std::vector<ResultRecord>& records);
std::vector<SummaryRow> summarize(const std::filesystem::path& results_dir);

std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string summary_text(const std::vector<SummaryRow>& rows);

}  // namespace mtmlca
