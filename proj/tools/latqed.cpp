// Scenario runner: latqed <config-file> [--output-dir DIR] [--jobs N] [--verbose]

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "latqed/config.hpp"
#include "latqed/error.hpp"
#include "latqed/scenario.hpp"
#include "latqed/version.hpp"

namespace {

unsigned default_jobs() {
  if (const char* env = std::getenv("LATQED_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    std::cerr << "latqed: ignoring LATQED_JOBS='" << env << "'\n";
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice strong-field QED scenario runner"};
  app.set_version_flag("--version", latqed::version);
  std::string config_path, output_dir;
  unsigned jobs = default_jobs();
  bool verbose = false;
  app.add_option("config", config_path, "Scenario config file")->required()->check(CLI::ExistingFile);
  app.add_option("--output-dir", output_dir, "Output directory (overrides output_dir in the config)");
  app.add_option("--jobs", jobs, "Worker threads for parallel scans (default: LATQED_JOBS or 1)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--verbose,-v", verbose, "Progress on stderr");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(latqed::ErrorCategory::Config);
  }

  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw latqed::ConfigError("cannot read " + config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    const auto cfg = latqed::config::parse_config(buf.str());

    latqed::scenario::RunOptions opt;
    opt.jobs = jobs;
    if (!output_dir.empty()) opt.output_dir = output_dir;
    if (verbose) opt.log = [](const std::string& line) { std::cerr << "latqed: " << line << '\n'; };
    const auto manifest = latqed::scenario::run_scenario(cfg, opt);
    if (verbose)
      std::cerr << "latqed: done in " << manifest.wall_time_s << " s, manifest in "
                << (manifest.directory / "manifest.txt").string() << '\n';
    return 0;
  } catch (const latqed::Error& e) {
    const char* names[] = {"", "", "config", "numeric", "regime"};
    std::cerr << "latqed: " << names[static_cast<int>(e.category())] << " error: " << e.what() << '\n';
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "latqed: error: " << e.what() << '\n';
    return 1;
  }
}
