#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mtmlca/bundle.hpp"
#include "mtmlca/mvnn.hpp"
#include "mtmlca/valuemodel.hpp"
#include "mtmlca/wdp.hpp"

namespace mtmlca {

/// achieved / optimal. Throws ArgumentError unless optimal > 0.
double efficiency(double achieved_welfare, double optimal_welfare);

/// Evaluation bundles with cached true values of one instance.
struct TestSet {
  std::vector<Bundle> bundles;
  std::vector<std::vector<double>> values;  // values[bidder][l] > 0
};

/// n_test nonempty bundles drawn uniformly from `seed`. Candidates worth 0 to
/// any bidder of any of `instances` are skipped, so one draw serves every
/// instance of a setting.
std::vector<Bundle> draw_test_bundles(std::span<const AuctionInstance> instances, int n_test, std::uint64_t seed);

/// Throws ArgumentError if some bidder values a bundle at 0.
TestSet make_test_set(const AuctionInstance& instance, std::vector<Bundle> bundles);

/// Mean over bidders of the mean absolute percentage error on the test set.
/// predictions[i][l] estimates truth[i][l].
double mape(const std::vector<std::vector<double>>& predictions, const std::vector<std::vector<double>>& truth);

/// MAPE of per-bidder models (models[i] predicts bidder i).
double mape(std::span<const MvnnParams> models, const TestSet& test_set);

struct WelfareAccount {
  double welfare = 0.0;           // V(A) under true values
  std::vector<double> utilities;  // v_i(a_i) - p_i
  double revenue = 0.0;           // sum of payments
};

WelfareAccount welfare_and_utilities(const AuctionInstance& instance, const Allocation& allocation,
                                     const std::vector<double>& payments);

struct WilcoxonResult {
  double statistic = 0.0;  // rank sum of negative differences
  double p_value = 1.0;
  int effective_pairs = 0;  // pairs left after dropping zero differences
  bool exact = true;
};

/// One-tailed signed-rank test of H1: a > b on paired scores. Zero
/// differences are dropped and tied magnitudes get average ranks. The p-value
/// is exact for up to 20 remaining pairs and uses the tie-corrected normal
/// approximation with continuity correction above that.
WilcoxonResult wilcoxon_one_tailed(std::span<const std::pair<double, double>> pairs);

/// Doubled average ranks (2 * rank, always an integer) of |d| for nonzero d,
/// in input order of the nonzero entries.
std::vector<std::int64_t> doubled_signed_ranks(std::span<const double> differences);

}  // namespace mtmlca
