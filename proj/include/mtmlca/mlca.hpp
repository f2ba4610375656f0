#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtmlca/bundle.hpp"
#include "mtmlca/metrics.hpp"
#include "mtmlca/mvnn.hpp"
#include "mtmlca/rng.hpp"
#include "mtmlca/training.hpp"
#include "mtmlca/valuemodel.hpp"
#include "mtmlca/wdp.hpp"

namespace mtmlca {

enum class Method {
  kBaseline,  // independent fits
  kMtFront,   // soft sharing of the front layers + ID injection
  kMtRear,    // soft sharing of the rear layers + ID injection
};

std::string to_string(Method method);
Method method_from_string(const std::string& name);

/// Training configuration a method runs with. Architecture, learning rate,
/// epochs, lambda and the injection shape come from `base`; the method picks
/// the sharing mode and whether embeddings are injected. Baseline runs with
/// lambda = 0.
TrainConfig configure_method(Method method, const TrainConfig& base);

struct MlcaConfig {
  int q_init = 1;
  int q_round = 1;
  int q_max = 10;  // per-bidder query cap
  std::uint64_t seed = 0;

  int rounds() const { return (q_max - q_init) / q_round; }
  void validate(int num_bidders, std::size_t num_items) const;
};

/// Q^init distinct nonempty bundles per bidder, uniform without replacement,
/// each bidder drawing from its own substream of `seed`.
ReportSet initial_queries(const AuctionInstance& instance, int q_init, std::uint64_t seed);

/// (q_round - 1) bidders drawn uniformly without replacement from N \ {bidder},
/// returned in ascending order.
std::vector<int> marginal_sample(int num_bidders, int bidder, int q_round, Rng& rng);

struct QueryProfile {
  std::vector<int> bidders;                    // I, ascending
  std::vector<std::optional<Bundle>> queries;  // indexed by bidder in [n]; empty outside I or when skipped
  std::vector<int> skipped;                    // bidders of I with nothing left to ask
  std::vector<MvnnParams> models;              // fitted models aligned with `bidders`
  FitDiagnostics fit;
  SolveStats stats;
};

/// Optimization and resolve steps for already fitted models: solve the
/// unconstrained model-sum problem, then for every bidder whose proposal is
/// empty or already reported re-solve with that bidder barred from its
/// reported bundles and the empty bundle, and take its column.
QueryProfile select_queries(std::vector<MvnnParams> models, const std::vector<int>& bidders,
                            const ReportSet& reports, const SolverOptions& solver = {});

/// Fits the group I jointly (fresh models keyed by `fit_stream_root`), then
/// runs select_queries.
QueryProfile next_queries(const std::vector<int>& bidders, const ReportSet& reports, const TrainConfig& config,
                          std::uint64_t fit_stream_root, const SolverOptions& solver = {});

struct VcgOutcome {
  WdpResult main;
  std::vector<double> payments;
};

/// Final reported-welfare allocation plus VCG payments.
VcgOutcome vcg_outcome(const ReportSet& reports, const SolverOptions& solver = {});
std::vector<double> vcg_payments(const ReportSet& reports, const SolverOptions& solver = {});

struct RoundTrace {
  int round = 0;
  std::vector<std::vector<Bundle>> new_reports;  // per bidder, bundles actually added
  std::vector<FitDiagnostics> fits;              // main economy last
  std::uint64_t solver_nodes = 0;
  std::vector<int> skipped;
  double tentative_welfare = 0.0;  // reported welfare after this round
  std::optional<double> mape;      // main-economy models on the test set
};

struct AuctionOutcome {
  Allocation allocation;
  std::vector<double> payments;
  ReportSet reports;
  std::vector<RoundTrace> trace;
  double reported_welfare = 0.0;
  std::vector<MvnnParams> final_models;  // main-economy models of the last round
};

struct RunOptions {
  const TestSet* test_set = nullptr;
  SolverOptions solver;
};

/// The auction loop with the training configuration of `method`.
AuctionOutcome run_mlca(const AuctionInstance& instance, Method method, const MlcaConfig& mlca,
                        const TrainConfig& base, const RunOptions& options = {});

/// The auction loop with an explicit training configuration.
AuctionOutcome run_mlca_with(const AuctionInstance& instance, const MlcaConfig& mlca, const TrainConfig& train,
                             const RunOptions& options = {});

}  // namespace mtmlca
