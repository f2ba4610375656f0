#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mtmlca/errors.hpp"
#include "mtmlca/harness.hpp"
#include "mtmlca/serialization.hpp"
#include "oracles.hpp"

using namespace mtmlca;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json tiny_config() {
  return json::parse(R"({
    "settings": [
      {"id": "a", "instance": {"regions": 2, "blocks_per_region": 1, "n_local": 1, "n_regional": 1, "n_national": 0}},
      {"id": "b", "instance": {"regions": 2, "blocks_per_region": 2, "n_local": 1, "n_regional": 0, "n_national": 1}}
    ],
    "mlca": {"q_init": 1, "q_round": 1, "q_max": 3},
    "model": {"epochs": 32},
    "eval": {"n_test": 4, "setting_seed": 5},
    "instances_per_setting": 3,
    "base_seed": 10
  })");
}

std::string message_of(const json& doc) {
  try {
    parse_config_json(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mtmlca_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("defaults: one initial query, budget ten, tiny sharing weight, four-dim embedding") {
  const auto c = parse_config_json(json::parse(R"({"settings": [{"id": "s", "instance": {}}]})"));
  CHECK(c.mlca.q_init == 1);
  CHECK(c.mlca.q_round == 1);
  CHECK(c.mlca.q_max == 10);
  CHECK(c.model.lambda == 1e-10);
  CHECK(c.model.embed_dim == 4);
  CHECK(c.model.inject_depth == 1);
  CHECK(c.methods == std::vector<std::string>{"baseline", "mt-f", "mt-r"});
}

TEST_CASE("preset configs parse") {
  const fs::path root = MTMLCA_SOURCE_DIR;
  const auto large = parse_config(root / "configs" / "large_98.json");
  CHECK(large.mlca.q_max == 10);
  CHECK(large.settings.size() == 8);
  CHECK(large.settings.front().instance.regions * large.settings.front().instance.blocks_per_region == 98);
  const auto doubled = parse_config(root / "configs" / "large_196.json");
  CHECK(doubled.settings.back().instance.n_national == 50);
  for (const char* name : {"desk.json", "smoke.json", "acceptance_desk.json"}) CHECK_NOTHROW(parse_config(root / "configs" / name));
}

TEST_CASE("invalid configs name the offending field") {
  auto doc = tiny_config();
  doc["mlca"]["q_init"] = 5;
  CHECK(message_of(doc).find("q_init") != std::string::npos);

  doc = tiny_config();
  doc["mlca"]["qq_max"] = 5;
  CHECK(message_of(doc).find("qq_max") != std::string::npos);

  doc = tiny_config();
  doc["settings"][0]["instance"]["regions"] = 0;
  CHECK(message_of(doc).find("settings[0].instance") != std::string::npos);

  doc = tiny_config();
  doc["model"]["epochs"] = 1.5;
  CHECK(message_of(doc).find("model.epochs") != std::string::npos);

  doc = tiny_config();
  doc["methods"] = {"baseline", "mt-z"};
  CHECK(message_of(doc).find("mt-z") != std::string::npos);

  doc = tiny_config();
  doc["settings"][1]["id"] = "a";
  CHECK(message_of(doc).find("duplicated") != std::string::npos);

  CHECK_THROWS_AS(parse_config("/nonexistent/config.json"), ConfigError);
  const auto bad = scratch("malformed");
  fs::create_directories(bad);
  std::ofstream(bad / "c.json") << "{ not json";
  CHECK_THROWS_AS(parse_config(bad / "c.json"), ConfigError);
}

TEST_CASE("configs survive a json round trip") {
  const auto c = parse_config_json(tiny_config());
  const auto again = parse_config_json(config_to_json(c));
  CHECK(config_to_json(again) == config_to_json(c));
}

TEST_CASE("experiments write one row per setting, seed and method, reproducibly") {
  const auto config = parse_config_json(tiny_config());
  const auto first = scratch("first");
  const auto second = scratch("second");
  const auto results = run_experiment(config, first);
  CHECK(results.results.size() == 18);
  ExperimentOptions parallel;
  parallel.jobs = 3;
  run_experiment(config, second, parallel);
  for (const char* name : {"results.csv", "mape.csv", "trace.jsonl"}) CHECK(slurp(first / name) == slurp(second / name));

  const auto rows = read_results_csv(first / "results.csv");
  REQUIRE(rows.size() == 18);
  CHECK(rows[0].setting == "a");
  CHECK(rows[0].seed == 10);
  CHECK(rows[0].method == "baseline");
  CHECK(rows[17].setting == "b");
  CHECK(rows[17].seed == 12);
  CHECK(rows[17].method == "mt-r");
  for (const auto& r : rows) {
    CHECK(r.efficiency >= 0.0);
    CHECK(r.efficiency <= 1.0 + 1e-12);
    CHECK(r.revenue >= 0.0);
    CHECK(r.runtime_ms == 0.0);
  }
  // Two rounds of MAPE per run.
  CHECK(results.mape.size() == 36);
}

TEST_CASE("saved models load back") {
  auto doc = tiny_config();
  doc["settings"].erase(1);
  doc["instances_per_setting"] = 1;
  doc["methods"] = {"baseline"};
  doc["eval"]["save_models"] = true;
  const auto dir = scratch("models");
  run_experiment(parse_config_json(doc), dir);
  const auto models = json::parse(slurp(dir / "models" / "a__10__baseline.json"));
  REQUIRE(models.size() == 2);
  CHECK_NOTHROW(mvnn_from_json(models[0]));
}

TEST_CASE("summary statistics") {
  std::vector<ResultRecord> records;
  for (std::uint64_t s = 0; s < 4; ++s) {
    records.push_back({"x", s, "baseline", 0.5, 1.0, 0.0});
    records.push_back({"x", s, "mt-f", 0.5, 1.0, 0.0});
    records.push_back({"x", s, "mt-r", 0.6, 1.0, 0.0});
  }
  const auto rows = summarize(records);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].stddev == 0.0);
  CHECK_FALSE(rows[0].p_value.has_value());
  CHECK(*rows[1].p_value == 1.0);
  CHECK(*rows[2].p_value == 1.0 / 16.0);
  CHECK(rows[2].best);
  CHECK_FALSE(rows[0].best);
  CHECK(summary_csv(rows).rfind("setting,method,runs,mean_efficiency,std_efficiency,p_value_vs_baseline,best\n", 0) == 0);
  CHECK(summary_text(rows).find("mt-r") != std::string::npos);

  std::vector<ResultRecord> orphan{{"y", 0, "mt-f", 0.5, 0.0, 0.0}};
  CHECK_THROWS_AS(summarize(orphan), ArgumentError);
}

TEST_CASE("summary p-values match the enumeration oracle") {
  Rng rng(15);
  std::vector<ResultRecord> records;
  std::vector<std::pair<double, double>> pairs;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const double base = rng.uniform(0.4, 0.9);
    const double mt = base + rng.uniform(-0.05, 0.1);
    records.push_back({"x", s, "baseline", base, 0.0, 0.0});
    records.push_back({"x", s, "mt-f", mt, 0.0, 0.0});
    pairs.emplace_back(mt, base);
  }
  const auto rows = summarize(records);
  CHECK(*rows[1].p_value == oracles::wilcoxon_enumerated(pairs).second);
  CHECK(rows[1].stddev > 0.0);
}
