#include <doctest.h>

#include "mtmlca/errors.hpp"
#include "mtmlca/metrics.hpp"
#include "oracles.hpp"

using namespace mtmlca;

TEST_CASE("efficiency ratio") {
  CHECK(efficiency(7.5, 7.5) == 1.0);
  CHECK(efficiency(0.0, 3.0) == 0.0);
  CHECK(efficiency(1.0, 4.0) == 0.25);
  CHECK_THROWS_AS(efficiency(1.0, 0.0), ArgumentError);
}

TEST_CASE("mape examples") {
  CHECK(mape({{11.0}}, {{10.0}}) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(mape({{10.0, 20.0}}, {{10.0, 20.0}}) == 0.0);
  // Per-bidder means 0.2 and 0.4.
  CHECK(mape({{12.0, 8.0}, {14.0, 6.0}}, {{10.0, 10.0}, {10.0, 10.0}}) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK_THROWS_AS(mape({{1.0}}, {{0.0}}), ArgumentError);
}

TEST_CASE("test bundles are positive for every bidder") {
  InstanceConfig c;
  c.n_local = 3;
  std::vector<AuctionInstance> instances;
  for (std::uint64_t s = 0; s < 4; ++s) instances.push_back(generate_instance(c, s));
  const auto bundles = draw_test_bundles(instances, 50, 9);
  CHECK(bundles.size() == 50);
  CHECK(bundles == draw_test_bundles(instances, 50, 9));
  for (const auto& inst : instances) {
    const auto set = make_test_set(inst, bundles);
    for (const auto& row : set.values) {
      for (double v : row) CHECK(v > 0.0);
    }
  }
  CHECK_THROWS_AS(make_test_set(instances[0], {Bundle(12)}), ArgumentError);
}

TEST_CASE("welfare accounting identity") {
  const auto inst = generate_instance(InstanceConfig{}, 4);
  Allocation a = Allocation::empty(3, 12);
  a.columns[0] = Bundle::from_mask(12, 0x00F);
  a.columns[2] = Bundle::from_mask(12, 0xF00);
  const auto zero = welfare_and_utilities(inst, a, {0.0, 0.0, 0.0});
  CHECK(zero.utilities[0] == true_value(inst, 0, a.columns[0]));
  CHECK(zero.revenue == 0.0);
  const auto paid = welfare_and_utilities(inst, a, {1.5, 0.0, 2.25});
  double sum = paid.revenue;
  for (double u : paid.utilities) sum += u;
  CHECK(std::abs(sum - paid.welfare) <= 1e-9);
  CHECK(paid.revenue == 3.75);
}

TEST_CASE("signed-rank test examples") {
  const std::vector<std::pair<double, double>> up{{1, 0}, {2, 0}, {3, 0}};
  const auto r = wilcoxon_one_tailed(up);
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == 0.125);
  CHECK(r.exact);
  CHECK(r.effective_pairs == 3);

  const std::vector<std::pair<double, double>> same{{0.5, 0.5}, {0.7, 0.7}};
  const auto z = wilcoxon_one_tailed(same);
  CHECK(z.p_value == 1.0);
  CHECK(z.statistic == 0.0);
  CHECK(z.effective_pairs == 0);

  const std::vector<std::pair<double, double>> down{{0, 1}, {0, 2}, {0, 3}};
  CHECK(wilcoxon_one_tailed(down).p_value == 1.0);
}

TEST_CASE("tied magnitudes share average ranks") {
  const std::vector<double> d{1.0, -1.0, 0.0, 3.0, 1.0};
  CHECK(doubled_signed_ranks(d) == std::vector<std::int64_t>{4, 4, 8, 4});
}

TEST_CASE("signed-rank test matches sign enumeration") {
  Rng rng(71);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(14));
    std::vector<std::pair<double, double>> pairs;
    for (int k = 0; k < n; ++k) {
      // Coarse values force ties and zero differences.
      pairs.emplace_back(static_cast<double>(rng.below(6)) / 4.0, static_cast<double>(rng.below(6)) / 4.0);
    }
    const auto [w, p] = oracles::wilcoxon_enumerated(pairs);
    const auto res = wilcoxon_one_tailed(pairs);
    CHECK(res.statistic == w);
    CHECK(res.p_value == p);
    CHECK(res.p_value > 0.0);
    CHECK(res.p_value <= 1.0);
  }
}

TEST_CASE("large samples use the normal approximation") {
  std::vector<std::pair<double, double>> pairs;
  for (int k = 0; k < 30; ++k) pairs.emplace_back(k % 3 == 0 ? 0.0 : 1.0 + k, 0.5 * k);
  const auto res = wilcoxon_one_tailed(pairs);
  CHECK_FALSE(res.exact);
  CHECK(res.effective_pairs == 29);  // k = 0 is a zero difference
  CHECK(res.p_value > 0.0);
  CHECK(res.p_value < 0.5);
}
