#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mtmlca/bundle.hpp"
#include "mtmlca/mvnn.hpp"
#include "mtmlca/valuemodel.hpp"

namespace mtmlca {

/// One bundle per bidder. Feasible when the columns are pairwise disjoint.
struct Allocation {
  std::vector<Bundle> columns;

  static Allocation empty(int num_bidders, std::size_t num_items);
  int num_bidders() const noexcept { return static_cast<int>(columns.size()); }
  bool is_feasible() const;
};

struct Report {
  Bundle bundle;
  double value = 0.0;
};

/// Reported bundle-value pairs of every bidder. Bundles are unique per
/// bidder; insertion order is preserved.
class ReportSet {
 public:
  ReportSet() = default;
  ReportSet(int num_bidders, std::size_t num_items);

  int num_bidders() const noexcept { return static_cast<int>(reports_.size()); }
  std::size_t num_items() const noexcept { return num_items_; }

  /// Returns false (and stores nothing) when the bidder already reported `bundle`.
  bool add(int bidder, const Bundle& bundle, double value);
  bool contains(int bidder, const Bundle& bundle) const;
  std::optional<double> value_of(int bidder, const Bundle& bundle) const;
  const std::vector<Report>& of(int bidder) const;
  std::size_t count(int bidder) const { return of(bidder).size(); }

 private:
  void check_bidder(int bidder) const;

  std::vector<std::vector<Report>> reports_;
  std::size_t num_items_ = 0;
};

/// Bundles each bidder must not receive. Bidders without an entry are
/// unrestricted.
struct ExclusionSet {
  std::vector<std::vector<Bundle>> forbidden;

  explicit ExclusionSet(int num_bidders = 0) : forbidden(static_cast<std::size_t>(num_bidders)) {}
  void forbid(int bidder, const Bundle& bundle);
  bool allows(int bidder, const Bundle& bundle) const;
};

struct SolveStats {
  std::uint64_t nodes = 0;
  std::uint64_t prunes = 0;
};

enum class SolverEngine {
  kAuto,            // subset DP up to dp_item_limit items, branch-and-bound above
  kSubsetDp,        // exhaustive dynamic program over item subsets
  kBranchAndBound,  // depth-first search with an admissible bound
};

struct SolverOptions {
  SolverEngine engine = SolverEngine::kAuto;
  std::size_t dp_item_limit = 16;
};

struct WdpResult {
  Allocation allocation;
  double welfare = 0.0;
  SolveStats stats;
};

/// Maximizes reported social welfare over the `active` bidders. Each active
/// bidder receives one of its reported bundles or nothing; everyone else
/// receives nothing. `welfare` is the sum of chosen report values in bidder
/// order.
WdpResult solve_reported_wdp(const ReportSet& reports, const std::vector<int>& active,
                             const SolverOptions& options = {});
WdpResult solve_reported_wdp(const ReportSet& reports, const SolverOptions& options = {});

/// Monotone set function with value 0 on the empty bundle.
using ValueOracle = std::function<double(const Bundle&)>;

/// sum_i value_i(assigned_i | unassigned). Never below the objective of any
/// completion of the partial assignment when every oracle is monotone.
double monotone_upper_bound(std::span<const ValueOracle> values, std::span<const Bundle> assigned,
                            const Bundle& unassigned);

/// Exact maximizer of sum_{i in I} value_i(a_i) over feasible allocations;
/// bidders outside I receive nothing. Precomputes per-bidder value tables for
/// the DP engine so repeated solves with different exclusions stay cheap.
class ValueSumSolver {
 public:
  ValueSumSolver(std::size_t num_items, int num_bidders, std::vector<int> bidders, std::vector<ValueOracle> values,
                 const SolverOptions& options = {});

  /// Network-backed solver; tables are filled with one batched evaluation.
  static ValueSumSolver for_models(std::span<const MvnnParams> models, std::vector<int> bidders, int num_bidders,
                                   const SolverOptions& options = {});

  /// Throws ExhaustionError when the exclusions leave no feasible allocation.
  WdpResult solve(const ExclusionSet* exclusions = nullptr) const;

  const std::vector<int>& bidders() const noexcept { return bidders_; }
  bool uses_tables() const noexcept { return !tables_.empty(); }

 private:
  ValueSumSolver() = default;
  WdpResult solve_dp(const ExclusionSet* exclusions) const;
  WdpResult solve_branch_and_bound(const ExclusionSet* exclusions) const;
  double objective(const Allocation& allocation) const;

  std::size_t num_items_ = 0;
  int num_bidders_ = 0;
  std::vector<int> bidders_;
  std::vector<ValueOracle> values_;
  std::vector<std::vector<double>> tables_;  // per bidder in I, indexed by item mask
  SolverOptions options_;
};

/// One-shot wrapper over ValueSumSolver::for_models. Models must satisfy the
/// monotone-network constraints; `models[k]` belongs to `bidders[k]`.
WdpResult maximize_model_sum(std::span<const MvnnParams> models, const std::vector<int>& bidders, int num_bidders,
                             const ExclusionSet* exclusions = nullptr, const SolverOptions& options = {});

struct TrueWelfareOptions {
  std::size_t max_items = 24;
  SolverOptions solver;
};

/// Efficient allocation under true values. Throws CapacityError when the
/// layout exceeds `max_items`.
WdpResult optimal_true_welfare(const AuctionInstance& instance, const TrueWelfareOptions& options = {});

/// sum_i v_i(a_i) in bidder order.
double social_welfare(const AuctionInstance& instance, const Allocation& allocation);

}  // namespace mtmlca
