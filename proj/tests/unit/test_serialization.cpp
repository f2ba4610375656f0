#include <doctest.h>

#include "mtmlca/errors.hpp"
#include "mtmlca/serialization.hpp"

using namespace mtmlca;

TEST_CASE("networks round-trip exactly through json text") {
  Rng rng(6);
  auto p = new_mvnn(Architecture{}, 9, rng);
  p.scale = 123.456789;
  IdEmbedding e;
  e.depth = 1;
  e.values = -Eigen::VectorXd::LinSpaced(4, 0.01, 0.1);
  p = inject_id(p, e, rng, AppendedRowInit::kFresh);
  const auto text = mvnn_to_json(p).dump();
  const auto q = mvnn_from_json(nlohmann::json::parse(text));
  REQUIRE(q.num_layers() == p.num_layers());
  for (int s = 0; s < p.num_layers(); ++s) CHECK(q.weights[s] == p.weights[s]);
  for (std::size_t s = 0; s < p.biases.size(); ++s) CHECK(q.biases[s] == p.biases[s]);
  REQUIRE(q.embedding.has_value());
  CHECK(q.embedding->values == p.embedding->values);
  CHECK(q.scale == p.scale);
  CHECK(q.cutoff == p.cutoff);
}

TEST_CASE("malformed or unconstrained documents are rejected") {
  Rng rng(1);
  const auto doc = mvnn_to_json(new_mvnn(Architecture{}, 3, rng));
  auto bad = doc;
  bad["format"] = "other";
  CHECK_THROWS_AS(mvnn_from_json(bad), ArgumentError);
  bad = doc;
  bad["version"] = 2;
  CHECK_THROWS_AS(mvnn_from_json(bad), ArgumentError);
  bad = doc;
  bad["layers"][0]["weights"][0] = -1.0;
  CHECK_THROWS_AS(mvnn_from_json(bad), ArgumentError);
  bad = doc;
  bad["layers"][0]["weights"].erase(0);
  CHECK_THROWS_AS(mvnn_from_json(bad), ArgumentError);
  bad = doc;
  bad.erase("scale");
  CHECK_THROWS_AS(mvnn_from_json(bad), ArgumentError);
}
