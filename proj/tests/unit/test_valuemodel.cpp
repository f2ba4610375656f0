#include <doctest.h>

#include "mtmlca/errors.hpp"
#include "mtmlca/rng.hpp"
#include "mtmlca/valuemodel.hpp"

using namespace mtmlca;

namespace {

AuctionInstance hand_instance(int regions, int blocks, ArchetypeParams p) {
  AuctionInstance inst;
  inst.layout = RegionLayout(regions, blocks);
  inst.bidders.push_back(std::move(p));
  return inst;
}

Bundle random_bundle(std::size_t m, Rng& rng) {
  Bundle b(m);
  for (std::size_t k = 0; k < m; ++k) {
    if (rng.below(2) == 1) b.set(k);
  }
  return b;
}

}  // namespace

TEST_CASE("local closed form") {
  ArchetypeParams p;
  p.kind = BidderKind::kLocal;
  p.gamma = 80.0;
  p.beta = 0.5;
  p.interest = {0};
  const auto inst = hand_instance(2, 2, p);
  CHECK(true_value(inst, 0, Bundle::from_items(4, {0, 1})) == doctest::Approx(60.0).epsilon(1e-15));
  CHECK(true_value(inst, 0, Bundle::from_items(4, {2, 3})) == 0.0);
  CHECK(true_value(inst, 0, Bundle(4)) == 0.0);
}

TEST_CASE("national closed form") {
  ArchetypeParams p;
  p.kind = BidderKind::kNational;
  p.gamma = 400.0;
  p.beta = 0.5;
  p.delta = 3.0;
  const auto inst = hand_instance(2, 2, p);
  CHECK(true_value(inst, 0, Bundle::from_items(4, {0, 2})) == doctest::Approx(800.0).epsilon(1e-15));
  CHECK(true_value(inst, 0, Bundle(4)) == 0.0);
}

TEST_CASE("regional closed form") {
  ArchetypeParams p;
  p.kind = BidderKind::kRegional;
  p.gamma = 100.0;
  p.beta = 0.5;
  p.headquarters = 0;
  const auto inst = hand_instance(2, 2, p);
  CHECK(true_value(inst, 0, Bundle::full(4)) == doctest::Approx(112.5).epsilon(1e-15));
  CHECK(report(inst, 0, Bundle::full(4)) == true_value(inst, 0, Bundle::full(4)));
}

TEST_CASE("ring distance between regions") {
  RegionLayout layout(6, 1);
  CHECK(layout.distance(0, 0) == 0);
  CHECK(layout.distance(0, 1) == 1);
  CHECK(layout.distance(0, 5) == 1);
  CHECK(layout.distance(0, 3) == 3);
  CHECK(layout.region_of(5) == 5);
}

TEST_CASE("98- and 196-item layouts generate") {
  InstanceConfig c;
  c.n_local = 3;
  c.n_regional = 4;
  c.n_national = 3;
  c.regions = 14;
  c.blocks_per_region = 7;
  auto inst = generate_instance(c, 0);
  CHECK(inst.num_items() == 98);
  CHECK(inst.num_bidders() == 10);
  c.blocks_per_region = 14;
  inst = generate_instance(c, 0);
  CHECK(inst.num_items() == 196);
  CHECK(inst.num_bidders() == 10);
}

TEST_CASE("generation is deterministic and ordered by kind") {
  InstanceConfig c;
  c.n_local = 2;
  c.n_regional = 2;
  c.n_national = 2;
  const auto a = generate_instance(c, 77);
  const auto b = generate_instance(c, 77);
  const auto other = generate_instance(c, 78);
  REQUIRE(a.num_bidders() == 6);
  bool differs = false;
  for (int i = 0; i < a.num_bidders(); ++i) {
    CHECK(a.bidders[i].gamma == b.bidders[i].gamma);
    CHECK(a.bidders[i].interest == b.bidders[i].interest);
    CHECK(a.bidders[i].headquarters == b.bidders[i].headquarters);
    differs = differs || a.bidders[i].gamma != other.bidders[i].gamma;
  }
  CHECK(differs);
  CHECK(a.bidders[0].kind == BidderKind::kLocal);
  CHECK(a.bidders[2].kind == BidderKind::kRegional);
  CHECK(a.bidders[5].kind == BidderKind::kNational);
  CHECK(a.bidders[0].interest.size() == 1);
}

TEST_CASE("adding bidders leaves existing bidders unchanged") {
  InstanceConfig small;
  InstanceConfig large = small;
  large.n_local = 4;
  const auto a = generate_instance(small, 5);
  const auto b = generate_instance(large, 5);
  CHECK(a.bidders[0].gamma == b.bidders[0].gamma);
  CHECK(a.bidders[0].interest == b.bidders[0].interest);
}

TEST_CASE("full correlation makes same-kind scales equal") {
  InstanceConfig c;
  c.n_local = 5;
  c.rho_corr = 1.0;
  const auto inst = generate_instance(c, 3);
  for (int i = 1; i < 5; ++i) CHECK(inst.bidders[i].gamma == inst.bidders[0].gamma);
}

TEST_CASE("values are normalized, nonnegative and monotone") {
  InstanceConfig c;
  c.n_local = 2;
  c.n_regional = 2;
  c.n_national = 2;
  Rng rng(1);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = generate_instance(c, seed);
    const std::size_t m = inst.num_items();
    for (int i = 0; i < inst.num_bidders(); ++i) {
      CHECK(true_value(inst, i, Bundle(m)) == 0.0);
      for (int k = 0; k < 20; ++k) {
        const Bundle x = random_bundle(m, rng);
        const Bundle y = x | random_bundle(m, rng);
        const double vx = true_value(inst, i, x);
        CHECK(vx >= 0.0);
        CHECK(vx <= true_value(inst, i, y));
      }
    }
  }
}

TEST_CASE("national > regional > local on average") {
  InstanceConfig c;
  double sums[3] = {0.0, 0.0, 0.0};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = generate_instance(c, seed);
    const Bundle full = Bundle::full(inst.num_items());
    for (int i = 0; i < 3; ++i) sums[i] += true_value(inst, i, full);
  }
  CHECK(sums[2] > sums[1]);
  CHECK(sums[1] > sums[0]);
}

TEST_CASE("invalid configurations and arguments are rejected") {
  InstanceConfig c;
  c.n_local = c.n_regional = c.n_national = 0;
  CHECK_THROWS_AS(generate_instance(c, 0), ConfigError);
  InstanceConfig bad;
  bad.regions = 0;
  CHECK_THROWS_AS(generate_instance(bad, 0), ConfigError);
  bad = InstanceConfig{};
  bad.blocks_per_region = -1;
  CHECK_THROWS_AS(generate_instance(bad, 0), ConfigError);
  const auto inst = generate_instance(InstanceConfig{}, 0);
  CHECK_THROWS_AS(true_value(inst, 3, Bundle(12)), ArgumentError);
  CHECK_THROWS_AS(true_value(inst, 0, Bundle(5)), ArgumentError);
}
