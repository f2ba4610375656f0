#pragma once

// Brute-force references used by the unit and acceptance tests.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "mtmlca/bundle.hpp"
#include "mtmlca/mvnn.hpp"
#include "mtmlca/rng.hpp"
#include "mtmlca/wdp.hpp"

namespace oracles {

using mtmlca::Bundle;

// Random constraint-satisfying network with assorted widths, cutoff and scale.
inline mtmlca::MvnnParams random_network(int m, mtmlca::Rng& rng) {
  mtmlca::Architecture arch;
  arch.hidden_widths.clear();
  const int depth = 1 + static_cast<int>(rng.below(2));
  for (int k = 0; k < depth; ++k) arch.hidden_widths.push_back(1 + static_cast<int>(rng.below(4)));
  arch.cutoff = rng.uniform(0.5, 2.0);
  auto p = mtmlca::new_mvnn(arch, m, rng);
  for (auto& w : p.weights) w *= rng.uniform(0.5, 3.0);
  p.scale = rng.uniform(0.5, 5.0);
  return p;
}

// Best value of sum_k values[k](a_k) over all (|I|+1)^m assignments, honouring
// `allowed(k, bundle)`. Returns -inf when nothing is allowed.
inline double best_assignment(std::size_t m, const std::vector<std::function<double(const Bundle&)>>& values,
                              const std::function<bool(std::size_t, const Bundle&)>& allowed = {}) {
  const std::size_t n = values.size();
  std::uint64_t total = 1;
  for (std::size_t k = 0; k < m; ++k) total *= n + 1;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> owner(m, 0);
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t c = code;
    std::vector<Bundle> cols(n, Bundle(m));
    for (std::size_t k = 0; k < m; ++k) {
      const auto o = static_cast<std::size_t>(c % (n + 1));
      c /= n + 1;
      if (o < n) cols[o].set(k);
    }
    bool ok = true;
    double sum = 0.0;
    for (std::size_t b = 0; b < n && ok; ++b) {
      if (allowed && !allowed(b, cols[b])) ok = false;
      else sum += values[b](cols[b]);
    }
    if (ok) best = std::max(best, sum);
  }
  return best;
}

// Best reported welfare over every combination of one report or nothing per
// active bidder.
inline double best_report_combination(const mtmlca::ReportSet& reports, const std::vector<int>& active) {
  double best = 0.0;
  std::function<void(std::size_t, Bundle, double)> rec = [&](std::size_t k, Bundle used, double sum) {
    if (k == active.size()) {
      best = std::max(best, sum);
      return;
    }
    rec(k + 1, used, sum);
    for (const auto& r : reports.of(active[k])) {
      if (!r.bundle.intersects(used)) rec(k + 1, used | r.bundle, sum + r.value);
    }
  };
  rec(0, Bundle(reports.num_items()), 0.0);
  return best;
}

// One-tailed signed-rank p-value by enumerating every sign pattern of the
// nonzero differences. Ranks are computed by counting, not sorting.
inline std::pair<double, double> wilcoxon_enumerated(const std::vector<std::pair<double, double>>& pairs) {
  std::vector<double> d;
  for (const auto& [a, b] : pairs) {
    if (a - b != 0.0) d.push_back(a - b);
  }
  const std::size_t n = d.size();
  if (n == 0) return {0.0, 1.0};
  // Doubled average rank of |d_k|: 2 * (#smaller) + (#equal) + 1.
  std::vector<std::int64_t> rank2(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::int64_t smaller = 0;
    std::int64_t equal = 0;
    for (std::size_t l = 0; l < n; ++l) {
      if (std::abs(d[l]) < std::abs(d[k])) ++smaller;
      if (std::abs(d[l]) == std::abs(d[k])) ++equal;
    }
    rank2[k] = 2 * smaller + equal + 1;
  }
  std::int64_t observed = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (d[k] < 0) observed += rank2[k];
  }
  std::uint64_t hits = 0;
  for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << n); ++pattern) {
    std::int64_t w = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (pattern >> k & 1U) w += rank2[k];
    }
    if (w <= observed) ++hits;
  }
  return {static_cast<double>(observed) / 2.0, static_cast<double>(hits) / static_cast<double>(std::uint64_t{1} << n)};
}

}  // namespace oracles
