#include <doctest.h>

#include "mtmlca/errors.hpp"
#include "mtmlca/mvnn.hpp"
#include "mtmlca/rng.hpp"
#include "oracles.hpp"

using namespace mtmlca;

namespace {

MvnnParams tiny_network() {
  MvnnParams p;
  p.weights.push_back((Eigen::MatrixXd(1, 2) << 1.0, 1.0).finished());
  p.weights.push_back((Eigen::MatrixXd(1, 1) << 2.0).finished());
  p.biases.push_back((Eigen::VectorXd(1) << -1.0).finished());
  p.cutoff = 1.0;
  p.scale = 1.0;
  return p;
}

}  // namespace

TEST_CASE("bounded relu clamps to [0, t]") {
  CHECK(bounded_relu(-1.0, 1.0) == 0.0);
  CHECK(bounded_relu(0.5, 1.0) == 0.5);
  CHECK(bounded_relu(3.0, 1.0) == 1.0);
  CHECK_FALSE(std::signbit(bounded_relu(-0.0, 1.0)));
  CHECK(bounded_relu_slope(0.0, 1.0) == 0.0);
  CHECK(bounded_relu_slope(1.0, 1.0) == 0.0);
  CHECK(bounded_relu_slope(0.5, 1.0) == 1.0);
}

TEST_CASE("hand-evaluated forward pass") {
  const auto p = tiny_network();
  CHECK(forward(p, Bundle::from_string("11")) == 2.0);
  CHECK(forward(p, Bundle::from_string("10")) == 0.0);
  CHECK(forward(p, Bundle(2)) == 0.0);
  CHECK_THROWS_AS(forward(p, Bundle(3)), ArgumentError);
}

TEST_CASE("fresh networks are deterministic and constrained") {
  Architecture arch;
  Rng a(7);
  Rng b(7);
  const auto p = new_mvnn(arch, 12, a);
  const auto q = new_mvnn(arch, 12, b);
  REQUIRE(p.num_layers() == 3);
  for (int s = 0; s < 3; ++s) CHECK(p.weights[s] == q.weights[s]);
  CHECK(satisfies_constraints(p));
  CHECK(forward(p, Bundle(12)) == 0.0);
  CHECK(p.weights[0].rows() == 16);
  CHECK(p.weights[2].rows() == 1);
  CHECK((p.weights[1].array() <= 1.0 / 16.0).all());
  Architecture empty;
  empty.hidden_widths.clear();
  CHECK_THROWS_AS(new_mvnn(empty, 4, a), ConfigError);
}

TEST_CASE("random networks are monotone with zero at the empty set") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int m = 1 + static_cast<int>(rng.below(8));
    const auto p = oracles::random_network(m, rng);
    Bundle x(m);
    Bundle y(m);
    for (int k = 0; k < m; ++k) {
      const auto r = rng.below(3);
      if (r >= 1) y.set(k);
      if (r == 2) x.set(k);
    }
    CHECK(forward(p, x) <= forward(p, y) + 1e-12);
    CHECK(forward(p, Bundle(m)) == 0.0);
    CHECK(forward(p, y) <= output_upper_bound(p) + 1e-12);
  }
}

TEST_CASE("batched evaluation matches single evaluation") {
  Rng rng(4);
  const auto p = new_mvnn(Architecture{}, 5, rng);
  Eigen::MatrixXd inputs(5, 32);
  for (int c = 0; c < 32; ++c) inputs.col(c) = to_dense(Bundle::from_mask(5, c));
  const auto batch = forward_raw_batch(p, inputs);
  for (int c = 0; c < 32; ++c) CHECK(batch(c) == doctest::Approx(forward_raw(p, inputs.col(c))).epsilon(1e-14));
}

TEST_CASE("injection with zeroed columns leaves outputs unchanged") {
  Rng rng(13);
  const auto base = new_mvnn(Architecture{}, 6, rng);
  IdEmbedding e;
  e.depth = 1;
  e.values = -Eigen::VectorXd::Constant(4, 0.05);
  auto injected = inject_id(base, e, rng);
  CHECK(injected.weights[0].rows() == base.weights[0].rows() + 4);
  CHECK(injected.weights[1].cols() == base.weights[1].cols() + 4);
  CHECK(injected.input_dim() == 6);
  CHECK(satisfies_constraints(injected));
  CHECK((injected.weights[0].bottomRows(4).array() == 0.0).all());
  injected.weights[1].rightCols(4).setZero();
  for (std::uint64_t mask = 0; mask < 64; ++mask) {
    const auto b = Bundle::from_mask(6, mask);
    CHECK(forward(injected, b) == forward(base, b));
  }
}

TEST_CASE("injection rejects bad depth, positive entries and repeats") {
  Rng rng(1);
  const auto base = new_mvnn(Architecture{}, 4, rng);
  IdEmbedding e;
  e.values = Eigen::VectorXd::Zero(4);
  e.depth = 3;
  CHECK_THROWS_AS(inject_id(base, e, rng), ConfigError);
  e.depth = 0;
  CHECK_THROWS_AS(inject_id(base, e, rng), ConfigError);
  e.depth = 1;
  e.values(0) = 0.1;
  CHECK_THROWS_AS(inject_id(base, e, rng), ArgumentError);
  e.values(0) = 0.0;
  const auto once = inject_id(base, e, rng);
  CHECK_THROWS_AS(inject_id(once, e, rng), ConfigError);
  e.depth = 2;
  const auto deep = inject_id(base, e, rng, AppendedRowInit::kFresh);
  CHECK(deep.weights[1].rows() == 20);
  CHECK(deep.weights[2].cols() == 20);
  CHECK(satisfies_constraints(deep));
}
