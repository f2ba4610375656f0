#include "mtmlca/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "mtmlca/errors.hpp"
#include "mtmlca/metrics.hpp"
#include "mtmlca/serialization.hpp"
#include "mtmlca/wdp.hpp"

namespace mtmlca {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Config parsing

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& section) {
  if (!obj.is_object()) throw ConfigError(section + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + key + "'" + (section.empty() ? "" : " in " + section));
    }
  }
}

std::string qualified(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

template <typename T>
void read(const json& obj, const std::string& section, const std::string& key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(qualified(section, key) + " has the wrong type");
  }
}

// Integer fields reject fractional numbers and strings.
void read_int(const json& obj, const std::string& section, const std::string& key, int& out) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(qualified(section, key) + " must be an integer");
  out = v.get<int>();
}

void read_u64(const json& obj, const std::string& section, const std::string& key, std::uint64_t& out) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ConfigError(qualified(section, key) + " must be a nonnegative integer");
  }
  out = v.get<std::uint64_t>();
}

void read_double(const json& obj, const std::string& section, const std::string& key, double& out) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(qualified(section, key) + " must be a number");
  out = v.get<double>();
}

void read_range(const json& obj, const std::string& section, const std::string& key, Range& out) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError(qualified(section, key) + " must be a [lo, hi] pair");
  }
  out = {v[0].get<double>(), v[1].get<double>()};
}

InstanceConfig parse_instance(const json& obj, const std::string& section) {
  check_keys(obj,
             {"regions", "blocks_per_region", "n_local", "n_regional", "n_national", "rho_corr", "beta", "delta",
              "gamma_local", "gamma_regional", "gamma_national"},
             section);
  InstanceConfig c;
  read_int(obj, section, "regions", c.regions);
  read_int(obj, section, "blocks_per_region", c.blocks_per_region);
  read_int(obj, section, "n_local", c.n_local);
  read_int(obj, section, "n_regional", c.n_regional);
  read_int(obj, section, "n_national", c.n_national);
  read_double(obj, section, "rho_corr", c.rho_corr);
  read_double(obj, section, "beta", c.beta);
  read_double(obj, section, "delta", c.delta);
  read_range(obj, section, "gamma_local", c.gamma_local);
  read_range(obj, section, "gamma_regional", c.gamma_regional);
  read_range(obj, section, "gamma_national", c.gamma_national);
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(section + ": " + e.what());
  }
  return c;
}

json instance_to_json(const InstanceConfig& c) {
  return {{"regions", c.regions},
          {"blocks_per_region", c.blocks_per_region},
          {"n_local", c.n_local},
          {"n_regional", c.n_regional},
          {"n_national", c.n_national},
          {"rho_corr", c.rho_corr},
          {"beta", c.beta},
          {"delta", c.delta},
          {"gamma_local", {c.gamma_local.lo, c.gamma_local.hi}},
          {"gamma_regional", {c.gamma_regional.lo, c.gamma_regional.hi}},
          {"gamma_national", {c.gamma_national.lo, c.gamma_national.hi}}};
}

const std::set<std::string> kMethods{"baseline", "mt-f", "mt-r", "custom"};

// ---------------------------------------------------------------------------
// Output helpers

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

struct RunTask {
  std::size_t setting = 0;
  std::uint64_t seed = 0;
  std::size_t method = 0;
};

struct RunOutput {
  ResultRecord record;
  std::vector<MapeRecord> mape;
  std::vector<json> trace;
  std::vector<MvnnParams> models;
};

json trace_record(const ResultRecord& rec, const RoundTrace& t) {
  json fits = json::array();
  for (const auto& f : t.fits) {
    fits.push_back({{"initial_loss", f.initial_loss}, {"final_loss", f.final_loss}, {"epochs", f.epochs}});
  }
  json queries = json::array();
  for (const auto& list : t.new_reports) {
    json row = json::array();
    for (const auto& b : list) row.push_back(b.to_string());
    queries.push_back(std::move(row));
  }
  json out = {{"setting", rec.setting},   {"seed", rec.seed},
              {"method", rec.method},     {"round", t.round},
              {"new_reports", queries},   {"fits", fits},
              {"solver_nodes", t.solver_nodes}, {"skipped", t.skipped},
              {"tentative_welfare", t.tentative_welfare}};
  out["mape"] = t.mape ? json(*t.mape) : json(nullptr);
  return out;
}

}  // namespace

TrainConfig ExperimentConfig::method_config(const std::string& method) const {
  if (method == "custom") return model;
  return configure_method(method_from_string(method), model);
}

ExperimentConfig parse_config_json(const json& doc) {
  check_keys(doc,
             {"$schema", "settings", "mlca", "model", "eval", "methods", "instances_per_setting", "base_seed",
              "output_dir"},
             "");
  ExperimentConfig c;

  if (!doc.contains("settings")) throw ConfigError("settings is required");
  const auto& settings = doc.at("settings");
  if (!settings.is_array() || settings.empty()) throw ConfigError("settings must be a nonempty array");
  std::set<std::string> ids;
  for (std::size_t s = 0; s < settings.size(); ++s) {
    const std::string section = "settings[" + std::to_string(s) + "]";
    check_keys(settings[s], {"id", "instance"}, section);
    SettingConfig setting;
    read(settings[s], section, "id", setting.id);
    if (setting.id.empty()) throw ConfigError(section + ".id must be a nonempty string");
    if (setting.id.find_first_of(",\n\"") != std::string::npos) {
      throw ConfigError(section + ".id must not contain commas, quotes or newlines");
    }
    if (!ids.insert(setting.id).second) throw ConfigError(section + ".id '" + setting.id + "' is duplicated");
    if (!settings[s].contains("instance")) throw ConfigError(section + ".instance is required");
    setting.instance = parse_instance(settings[s].at("instance"), section + ".instance");
    c.settings.push_back(std::move(setting));
  }

  if (doc.contains("mlca")) {
    const auto& m = doc.at("mlca");
    check_keys(m, {"q_init", "q_round", "q_max"}, "mlca");
    read_int(m, "mlca", "q_init", c.mlca.q_init);
    read_int(m, "mlca", "q_round", c.mlca.q_round);
    read_int(m, "mlca", "q_max", c.mlca.q_max);
  }
  if (c.mlca.q_init < 1) throw ConfigError("q_init must be >= 1");
  if (c.mlca.q_round < 1) throw ConfigError("q_round must be >= 1");
  if (c.mlca.q_init > c.mlca.q_max) throw ConfigError("q_init must not exceed q_max");

  if (doc.contains("model")) {
    const auto& m = doc.at("model");
    check_keys(m,
               {"hidden_widths", "cutoff", "learning_rate", "epochs", "lambda", "sharing", "shared_layers",
                "inject_id", "embed_dim", "inject_depth"},
               "model");
    read(m, "model", "hidden_widths", c.model.arch.hidden_widths);
    read_double(m, "model", "cutoff", c.model.arch.cutoff);
    read_double(m, "model", "learning_rate", c.model.learning_rate);
    read_int(m, "model", "epochs", c.model.epochs);
    read_double(m, "model", "lambda", c.model.lambda);
    if (m.contains("sharing")) {
      std::string mode;
      read(m, "model", "sharing", mode);
      c.model.sharing = sharing_mode_from_string(mode);
    }
    read(m, "model", "shared_layers", c.model.explicit_layers);
    read(m, "model", "inject_id", c.model.inject_id);
    read_int(m, "model", "embed_dim", c.model.embed_dim);
    read_int(m, "model", "inject_depth", c.model.inject_depth);
  }
  c.model.validate();

  if (doc.contains("eval")) {
    const auto& e = doc.at("eval");
    check_keys(e, {"n_test", "setting_seed", "max_exact_items", "save_models"}, "eval");
    read_int(e, "eval", "n_test", c.eval.n_test);
    read_u64(e, "eval", "setting_seed", c.eval.setting_seed);
    std::uint64_t max_items = c.eval.max_exact_items;
    read_u64(e, "eval", "max_exact_items", max_items);
    c.eval.max_exact_items = static_cast<std::size_t>(max_items);
    read(e, "eval", "save_models", c.eval.save_models);
  }
  if (c.eval.n_test < 1) throw ConfigError("eval.n_test must be >= 1");

  if (doc.contains("methods")) {
    read(doc, "", "methods", c.methods);
    if (c.methods.empty()) throw ConfigError("methods must not be empty");
    std::set<std::string> seen;
    for (const auto& name : c.methods) {
      if (!kMethods.count(name)) throw ConfigError("methods: unknown method '" + name + "'");
      if (!seen.insert(name).second) throw ConfigError("methods: '" + name + "' listed twice");
    }
  }
  read_int(doc, "", "instances_per_setting", c.instances_per_setting);
  if (c.instances_per_setting < 1) throw ConfigError("instances_per_setting must be >= 1");
  read_u64(doc, "", "base_seed", c.base_seed);
  read(doc, "", "output_dir", c.output_dir);

  for (const auto& s : c.settings) {
    try {
      c.mlca.validate(s.instance.num_bidders(),
                      static_cast<std::size_t>(s.instance.regions) * static_cast<std::size_t>(s.instance.blocks_per_region));
    } catch (const ConfigError& e) {
      throw ConfigError("setting '" + s.id + "': " + e.what());
    }
  }
  return c;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  return parse_config_json(doc);
}

json config_to_json(const ExperimentConfig& c) {
  json settings = json::array();
  for (const auto& s : c.settings) settings.push_back({{"id", s.id}, {"instance", instance_to_json(s.instance)}});
  return {{"settings", settings},
          {"mlca", {{"q_init", c.mlca.q_init}, {"q_round", c.mlca.q_round}, {"q_max", c.mlca.q_max}}},
          {"model",
           {{"hidden_widths", c.model.arch.hidden_widths},
            {"cutoff", c.model.arch.cutoff},
            {"learning_rate", c.model.learning_rate},
            {"epochs", c.model.epochs},
            {"lambda", c.model.lambda},
            {"sharing", to_string(c.model.sharing)},
            {"shared_layers", c.model.explicit_layers},
            {"inject_id", c.model.inject_id},
            {"embed_dim", c.model.embed_dim},
            {"inject_depth", c.model.inject_depth}}},
          {"eval",
           {{"n_test", c.eval.n_test},
            {"setting_seed", c.eval.setting_seed},
            {"max_exact_items", c.eval.max_exact_items},
            {"save_models", c.eval.save_models}}},
          {"methods", c.methods},
          {"instances_per_setting", c.instances_per_setting},
          {"base_seed", c.base_seed},
          {"output_dir", c.output_dir}};
}

ExperimentResults run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                                 const ExperimentOptions& options) {
  std::filesystem::create_directories(out_dir);

  // Instances and the shared test bundles of every setting.
  std::vector<std::vector<AuctionInstance>> instances(config.settings.size());
  std::vector<std::vector<Bundle>> test_bundles(config.settings.size());
  for (std::size_t s = 0; s < config.settings.size(); ++s) {
    const auto& setting = config.settings[s];
    const std::size_t m = static_cast<std::size_t>(setting.instance.regions) * setting.instance.blocks_per_region;
    if (options.log != nullptr && m > std::min<std::size_t>(config.eval.max_exact_items, 16)) {
      *options.log << "warning: setting '" << setting.id << "' has " << m
                   << " items; exact allocation search is exponential in the item count"
                   << (m > config.eval.max_exact_items ? " and exceeds eval.max_exact_items, so this run will fail"
                                                       : "")
                   << "\n";
    }
    for (int k = 0; k < config.instances_per_setting; ++k) {
      instances[s].push_back(generate_instance(setting.instance, config.base_seed + static_cast<std::uint64_t>(k)));
    }
    test_bundles[s] = draw_test_bundles(instances[s], config.eval.n_test,
                                        Rng::derive_seed(config.eval.setting_seed, {static_cast<std::uint64_t>(s)}));
  }

  std::vector<RunTask> tasks;
  for (std::size_t s = 0; s < config.settings.size(); ++s) {
    for (int k = 0; k < config.instances_per_setting; ++k) {
      for (std::size_t m = 0; m < config.methods.size(); ++m) {
        tasks.push_back({s, config.base_seed + static_cast<std::uint64_t>(k), m});
      }
    }
  }

  std::vector<RunOutput> outputs(tasks.size());
  std::vector<std::exception_ptr> failures(tasks.size());
  auto run_task = [&](std::size_t t) {
    const RunTask& task = tasks[t];
    const auto& setting = config.settings[task.setting];
    const auto& instance = instances[task.setting][static_cast<std::size_t>(task.seed - config.base_seed)];
    const std::string& method = config.methods[task.method];
    const auto start = std::chrono::steady_clock::now();

    TrueWelfareOptions optimum_options;
    optimum_options.max_items = config.eval.max_exact_items;
    const WdpResult optimum = optimal_true_welfare(instance, optimum_options);
    const TestSet test_set = make_test_set(instance, test_bundles[task.setting]);

    MlcaConfig mlca = config.mlca;
    mlca.seed = task.seed;
    RunOptions run_options;
    run_options.test_set = &test_set;
    const AuctionOutcome outcome = run_mlca_with(instance, mlca, config.method_config(method), run_options);
    const WelfareAccount account = welfare_and_utilities(instance, outcome.allocation, outcome.payments);

    RunOutput& out = outputs[t];
    out.record.setting = setting.id;
    out.record.seed = task.seed;
    out.record.method = method;
    out.record.efficiency = efficiency(account.welfare, optimum.welfare);
    out.record.revenue = account.revenue;
    if (options.record_runtime) {
      out.record.runtime_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    for (const auto& round : outcome.trace) {
      if (round.mape) out.mape.push_back({setting.id, task.seed, method, round.round, *round.mape});
      out.trace.push_back(trace_record(out.record, round));
    }
    if (config.eval.save_models) out.models = outcome.final_models;
  };

  const int jobs = std::max(1, options.jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      try {
        run_task(t);
      } catch (...) {
        failures[t] = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (!failures[t]) continue;
    std::string what = "unknown error";
    try {
      std::rethrow_exception(failures[t]);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    throw std::runtime_error("run failed for setting '" + config.settings[tasks[t].setting].id + "', seed " +
                             std::to_string(tasks[t].seed) + ", method " + config.methods[tasks[t].method] + ": " +
                             what);
  }

  ExperimentResults results;
  std::string results_csv = "setting,seed,method,efficiency,revenue,runtime_ms\n";
  std::string mape_csv = "setting,seed,method,round,mape\n";
  std::string trace_jsonl;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const auto& out = outputs[t];
    const auto& r = out.record;
    results_csv += r.setting + "," + std::to_string(r.seed) + "," + r.method + "," + fmt_double(r.efficiency) + "," +
                   fmt_double(r.revenue) + "," + fmt_double(r.runtime_ms) + "\n";
    results.results.push_back(r);
    for (const auto& row : out.mape) {
      mape_csv += row.setting + "," + std::to_string(row.seed) + "," + row.method + "," + std::to_string(row.round) +
                  "," + fmt_double(row.mape) + "\n";
      results.mape.push_back(row);
    }
    for (const auto& rec : out.trace) trace_jsonl += rec.dump() + "\n";
    if (config.eval.save_models) {
      json models = json::array();
      for (const auto& model : out.models) models.push_back(mvnn_to_json(model));
      std::filesystem::create_directories(out_dir / "models");
      write_file(out_dir / "models" / (r.setting + "__" + std::to_string(r.seed) + "__" + r.method + ".json"),
                 models.dump(1) + "\n");
    }
  }
  write_file(out_dir / "results.csv", results_csv);
  write_file(out_dir / "mape.csv", mape_csv);
  write_file(out_dir / "trace.jsonl", trace_jsonl);
  if (options.log != nullptr) {
    *options.log << "wrote " << results.results.size() << " result rows to " << (out_dir / "results.csv").string()
                 << "\n";
  }
  return results;
}

std::vector<ResultRecord> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "setting,seed,method,efficiency,revenue,runtime_ms") {
    throw ArgumentError(path.string() + " does not start with the results.csv header");
  }
  std::vector<ResultRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 6) throw ArgumentError(path.string() + ":" + std::to_string(line_no) + ": expected 6 columns");
    try {
      ResultRecord r;
      r.setting = cells[0];
      r.seed = std::stoull(cells[1]);
      r.method = cells[2];
      r.efficiency = std::stod(cells[3]);
      r.revenue = std::stod(cells[4]);
      r.runtime_ms = std::stod(cells[5]);
      records.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw ArgumentError(path.string() + ":" + std::to_string(line_no) + ": malformed number");
    }
  }
  return records;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRecord>& records) {
  std::vector<std::string> setting_order;
  std::map<std::string, std::vector<std::string>> method_order;
  std::map<std::pair<std::string, std::string>, std::map<std::uint64_t, double>> scores;
  for (const auto& r : records) {
    if (std::find(setting_order.begin(), setting_order.end(), r.setting) == setting_order.end()) {
      setting_order.push_back(r.setting);
    }
    auto& methods = method_order[r.setting];
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    scores[{r.setting, r.method}][r.seed] = r.efficiency;
  }

  std::vector<SummaryRow> rows;
  for (const auto& setting : setting_order) {
    const auto baseline_it = scores.find({setting, "baseline"});
    if (baseline_it == scores.end()) {
      throw ArgumentError("setting '" + setting + "' has no baseline rows to compare against");
    }
    const auto& baseline = baseline_it->second;
    const std::size_t first = rows.size();
    for (const auto& method : method_order[setting]) {
      const auto& by_seed = scores[{setting, method}];
      SummaryRow row;
      row.setting = setting;
      row.method = method;
      row.runs = static_cast<int>(by_seed.size());
      for (const auto& [seed, e] : by_seed) row.mean += e;
      row.mean /= row.runs;
      if (row.runs > 1) {
        double ss = 0.0;
        for (const auto& [seed, e] : by_seed) ss += (e - row.mean) * (e - row.mean);
        row.stddev = std::sqrt(ss / (row.runs - 1));
      }
      if (method != "baseline") {
        std::vector<std::pair<double, double>> pairs;
        for (const auto& [seed, e] : by_seed) {
          auto it = baseline.find(seed);
          if (it != baseline.end()) pairs.emplace_back(e, it->second);
        }
        if (!pairs.empty()) row.p_value = wilcoxon_one_tailed(pairs).p_value;
      }
      rows.push_back(std::move(row));
    }
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = first; k < rows.size(); ++k) best = std::max(best, rows[k].mean);
    for (std::size_t k = first; k < rows.size(); ++k) rows[k].best = rows[k].mean == best;
  }
  return rows;
}

std::vector<SummaryRow> summarize(const std::filesystem::path& results_dir) {
  return summarize(read_results_csv(results_dir / "results.csv"));
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "setting,method,runs,mean_efficiency,std_efficiency,p_value_vs_baseline,best\n";
  for (const auto& r : rows) {
    out += r.setting + "," + r.method + "," + std::to_string(r.runs) + "," + fmt_double(r.mean) + "," +
           fmt_double(r.stddev) + "," + (r.p_value ? fmt_double(*r.p_value) : std::string()) + "," +
           (r.best ? "*" : "") + "\n";
  }
  return out;
}

std::string summary_text(const std::vector<SummaryRow>& rows) {
  std::vector<std::array<std::string, 5>> cells;
  cells.push_back({"setting", "method", "efficiency", "p (vs baseline)", "runs"});
  for (const auto& r : rows) {
    std::ostringstream eff;
    eff << std::fixed << std::setprecision(3) << r.mean << " +- " << std::setprecision(4) << r.stddev
        << (r.best ? " *" : "");
    std::ostringstream p;
    if (r.p_value) p << std::setprecision(4) << *r.p_value;
    cells.push_back({r.setting, r.method, eff.str(), p.str(), std::to_string(r.runs)});
  }
  std::array<std::size_t, 5> width{};
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      if (c + 1 == cells[r].size()) {
        out << cells[r][c];
      } else {
        out << std::left << std::setw(static_cast<int>(width[c])) << cells[r][c] << "  ";
      }
    }
    out << "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out << std::string(total + 2 * (width.size() - 1), '-') << "\n";
    }
  }
  return out.str();
}

}  // namespace mtmlca
