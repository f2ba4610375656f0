#include "mtmlca/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mtmlca/errors.hpp"
#include "mtmlca/rng.hpp"

namespace mtmlca {

double efficiency(double achieved_welfare, double optimal_welfare) {
  if (!(optimal_welfare > 0.0)) throw ArgumentError("optimal welfare must be positive");
  return achieved_welfare / optimal_welfare;
}

std::vector<Bundle> draw_test_bundles(std::span<const AuctionInstance> instances, int n_test, std::uint64_t seed) {
  if (instances.empty()) throw ArgumentError("at least one instance is required");
  if (n_test < 1) throw ArgumentError("n_test must be >= 1");
  const std::size_t m = instances.front().num_items();
  for (const auto& inst : instances) {
    if (inst.num_items() != m) throw ArgumentError("instances of one setting must share the item count");
  }

  Rng rng(seed);
  std::vector<Bundle> out;
  const std::int64_t max_attempts = 1000LL * n_test;
  for (std::int64_t attempt = 0; attempt < max_attempts && static_cast<int>(out.size()) < n_test; ++attempt) {
    Bundle b(m);
    for (std::size_t k = 0; k < m; ++k) {
      if (rng.next_u64() >> 63) b.set(k);
    }
    if (b.none()) continue;
    bool positive = true;
    for (const auto& inst : instances) {
      for (int i = 0; i < inst.num_bidders() && positive; ++i) positive = true_value(inst, i, b) > 0.0;
      if (!positive) break;
    }
    if (positive) out.push_back(b);
  }
  if (static_cast<int>(out.size()) < n_test) {
    throw ConfigError("could not draw " + std::to_string(n_test) + " test bundles valued positively by every bidder");
  }
  return out;
}

TestSet make_test_set(const AuctionInstance& instance, std::vector<Bundle> bundles) {
  TestSet ts;
  ts.values.assign(static_cast<std::size_t>(instance.num_bidders()), {});
  for (int i = 0; i < instance.num_bidders(); ++i) {
    auto& row = ts.values[static_cast<std::size_t>(i)];
    for (const auto& b : bundles) {
      const double v = true_value(instance, i, b);
      if (!(v > 0.0)) throw ArgumentError("test bundle " + b.to_string() + " has zero value for bidder " + std::to_string(i));
      row.push_back(v);
    }
  }
  ts.bundles = std::move(bundles);
  return ts;
}

double mape(const std::vector<std::vector<double>>& predictions, const std::vector<std::vector<double>>& truth) {
  if (predictions.size() != truth.size() || truth.empty()) throw ArgumentError("prediction/truth bidder count mismatch");
  double outer = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& y = truth[i];
    const auto& yhat = predictions[i];
    if (y.size() != yhat.size() || y.empty()) throw ArgumentError("prediction/truth sample count mismatch");
    double inner = 0.0;
    for (std::size_t l = 0; l < y.size(); ++l) {
      if (y[l] == 0.0) throw ArgumentError("MAPE is undefined for a zero true value");
      inner += std::abs((yhat[l] - y[l]) / y[l]);
    }
    outer += inner / static_cast<double>(y.size());
  }
  return outer / static_cast<double>(truth.size());
}

double mape(std::span<const MvnnParams> models, const TestSet& test_set) {
  if (models.size() != test_set.values.size()) throw ArgumentError("one model per bidder is required");
  std::vector<std::vector<double>> predictions(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (const auto& b : test_set.bundles) predictions[i].push_back(forward(models[i], b));
  }
  return mape(predictions, test_set.values);
}

WelfareAccount welfare_and_utilities(const AuctionInstance& instance, const Allocation& allocation,
                                     const std::vector<double>& payments) {
  if (static_cast<int>(payments.size()) != instance.num_bidders()) throw ArgumentError("one payment per bidder is required");
  WelfareAccount acc;
  acc.welfare = social_welfare(instance, allocation);
  for (int i = 0; i < instance.num_bidders(); ++i) {
    const double v = true_value(instance, i, allocation.columns[static_cast<std::size_t>(i)]);
    acc.utilities.push_back(v - payments[static_cast<std::size_t>(i)]);
    acc.revenue += payments[static_cast<std::size_t>(i)];
  }
  return acc;
}

std::vector<std::int64_t> doubled_signed_ranks(std::span<const double> differences) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < differences.size(); ++k) {
    if (differences[k] != 0.0) idx.push_back(k);
  }
  std::vector<std::size_t> order(idx.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(differences[idx[a]]) < std::abs(differences[idx[b]]);
  });
  std::vector<std::int64_t> ranks(idx.size());
  std::size_t p = 0;
  while (p < order.size()) {
    std::size_t q = p;
    const double mag = std::abs(differences[idx[order[p]]]);
    while (q + 1 < order.size() && std::abs(differences[idx[order[q + 1]]]) == mag) ++q;
    // Positions p..q (0-based) share rank ((p+1)+(q+1))/2.
    const auto doubled = static_cast<std::int64_t>(p + q + 2);
    for (std::size_t r = p; r <= q; ++r) ranks[order[r]] = doubled;
    p = q + 1;
  }
  return ranks;
}

WilcoxonResult wilcoxon_one_tailed(std::span<const std::pair<double, double>> pairs) {
  if (pairs.empty()) throw ArgumentError("the signed-rank test needs at least one pair");
  std::vector<double> diffs;
  diffs.reserve(pairs.size());
  for (const auto& [a, b] : pairs) diffs.push_back(a - b);
  const auto ranks = doubled_signed_ranks(diffs);

  std::vector<double> nonzero;
  for (double d : diffs) {
    if (d != 0.0) nonzero.push_back(d);
  }
  WilcoxonResult res;
  res.effective_pairs = static_cast<int>(nonzero.size());
  if (nonzero.empty()) return res;

  std::int64_t w2 = 0;
  for (std::size_t k = 0; k < nonzero.size(); ++k) {
    if (nonzero[k] < 0.0) w2 += ranks[k];
  }
  res.statistic = static_cast<double>(w2) / 2.0;

  const std::size_t n = nonzero.size();
  if (n <= 20) {
    // Null distribution of the doubled rank sum: every rank enters with probability 1/2.
    const std::int64_t total = std::accumulate(ranks.begin(), ranks.end(), std::int64_t{0});
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(total) + 1, 0);
    counts[0] = 1;
    std::int64_t reach = 0;
    for (auto r : ranks) {
      for (std::int64_t s = reach; s >= 0; --s) {
        counts[static_cast<std::size_t>(s + r)] += counts[static_cast<std::size_t>(s)];
      }
      reach += r;
    }
    std::uint64_t at_most = 0;
    for (std::int64_t s = 0; s <= w2; ++s) at_most += counts[static_cast<std::size_t>(s)];
    res.p_value = static_cast<double>(at_most) / std::ldexp(1.0, static_cast<int>(n));
    res.exact = true;
    return res;
  }

  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  double tie_term = 0.0;
  {
    std::vector<std::int64_t> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    std::size_t p = 0;
    while (p < sorted.size()) {
      std::size_t q = p;
      while (q + 1 < sorted.size() && sorted[q + 1] == sorted[p]) ++q;
      const double t = static_cast<double>(q - p + 1);
      tie_term += t * t * t - t;
      p = q + 1;
    }
  }
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  const double z = (res.statistic - mean + 0.5) / std::sqrt(var);
  res.p_value = std::min(1.0, 0.5 * std::erfc(-z / std::sqrt(2.0)));
  res.exact = false;
  return res;
}

}  // namespace mtmlca
