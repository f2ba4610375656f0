#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "mtmlca/errors.hpp"
#include "mtmlca/harness.hpp"

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-task MVNN combinatorial auction experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int jobs = 1;
  bool record_runtime = false;
  auto* run = app.add_subcommand("run", "run every setting, instance and method of a config");
  run->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--record-runtime", record_runtime, "write wall-clock runtimes into results.csv");

  std::string in_dir;
  std::string table_out;
  auto* table = app.add_subcommand("table", "summarize results.csv into a comparison table");
  table->add_option("--in", in_dir, "directory holding results.csv")->required()->check(CLI::ExistingDirectory);
  table->add_option("--out", table_out, "summary CSV path (a .txt rendering is written next to it)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto config = mtmlca::parse_config(config_path);
      mtmlca::ExperimentOptions options;
      options.jobs = jobs;
      options.record_runtime = record_runtime;
      options.log = &std::cerr;
      mtmlca::run_experiment(config, out_dir, options);
    } else if (*table) {
      const auto rows = mtmlca::summarize(fs::path(in_dir));
      const std::string text = mtmlca::summary_text(rows);
      write_text(table_out, mtmlca::summary_csv(rows));
      write_text(fs::path(table_out).replace_extension(".txt"), text);
      std::cout << text;
    }
  } catch (const mtmlca::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
