#include <doctest.h>

#include <set>

#include "mtmlca/rng.hpp"

using mtmlca::Rng;

TEST_CASE("generators are reproducible per seed") {
  Rng a(42);
  Rng b(42);
  for (int k = 0; k < 100; ++k) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("substreams differ by key and ignore sibling use") {
  CHECK(Rng::derive_seed(1, {2, 3}) != Rng::derive_seed(1, {3, 2}));
  CHECK(Rng::derive_seed(1, {2}) != Rng::derive_seed(2, {2}));
  Rng x = Rng::substream(9, {1});
  Rng y = Rng::substream(9, {1});
  CHECK(x.next_u64() == y.next_u64());
}

TEST_CASE("uniform draws stay in range") {
  Rng r(5);
  for (int k = 0; k < 1000; ++k) {
    const double u = r.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(r.below(7) < 7);
    const double v = r.uniform(-2.0, 3.0);
    CHECK(v >= -2.0);
    CHECK(v < 3.0);
  }
}

TEST_CASE("sampling without replacement returns distinct indices") {
  Rng r(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = r.sample_without_replacement(1000000, 20);
    CHECK(s.size() == 20);
    CHECK(std::set<std::uint64_t>(s.begin(), s.end()).size() == 20);
    for (auto v : s) CHECK(v < 1000000);
  }
  auto all = r.sample_without_replacement(6, 6);
  std::sort(all.begin(), all.end());
  CHECK(all == std::vector<std::uint64_t>{0, 1, 2, 3, 4, 5});
  CHECK_THROWS(r.sample_without_replacement(3, 4));
}

TEST_CASE("sampling is roughly uniform") {
  Rng r(3);
  std::vector<int> hits(5, 0);
  for (int k = 0; k < 20000; ++k) {
    for (auto v : r.sample_without_replacement(5, 2)) ++hits[v];
  }
  for (int h : hits) CHECK(std::abs(h - 8000) < 400);
}
