#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>

#include "latqed/config.hpp"
#include "latqed/csv.hpp"
#include "latqed/scenario.hpp"

using namespace latqed;
using config::parse_config;
using config::parse_config_report;
namespace fs = std::filesystem;

namespace {

const char* minimal_spectrum = R"(schema_version = 1
scenario = Spectrum
[chain]
num_sites = 40
spacing = 0.2
mass = 1
hopping = 5
[potential]
kind = zero
)";

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("latqed_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Runs the CLI; returns its exit status.
int run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + LATQED_CLI_PATH + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// name -> content for every CSV in a directory
std::map<std::string, std::string> csv_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".csv") out[e.path().filename().string()] = slurp(e.path());
  return out;
}

bool mentions(const std::vector<std::string>& errors, const std::string& needle) {
  for (const auto& e : errors)
    if (e.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// parse_config

TEST(ParseConfig, MinimalSpectrumIsValid) {
  const auto c = parse_config(minimal_spectrum);
  EXPECT_EQ(c.scenario, config::Scenario::Spectrum);
  EXPECT_EQ(c.integer("chain.num_sites"), 40);
  EXPECT_DOUBLE_EQ(c.real("chain.hopping"), 5.0);
  EXPECT_EQ(c.text("potential.kind"), "zero");
  EXPECT_TRUE(c.flag("output.profiles"));  // default filled in
}

TEST(ParseConfig, MissingSchemaVersionNamesTheKey) {
  std::string text = minimal_spectrum;
  text.erase(0, text.find('\n') + 1);
  const auto r = parse_config_report(text);
  EXPECT_FALSE(r.config);
  EXPECT_TRUE(mentions(r.errors, "schema_version"));
  try {
    parse_config(text);
    FAIL() << "no exception";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("schema_version"), std::string::npos);
    EXPECT_EQ(e.category(), ErrorCategory::Config);
  }
}

TEST(ParseConfig, DescendingGridMustAscend) {
  const auto r = parse_config_report(R"(schema_version = 1
scenario = Criticality
[chain]
num_sites = 100
spacing = 0.1
[woods_saxon]
steepness = 10
half_width = 1
[scan]
W_grid = 3, 2, 1
)");
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_NE(r.errors[0].find("grid must ascend"), std::string::npos);
  EXPECT_NE(r.errors[0].find("line 10"), std::string::npos);
}

TEST(ParseConfig, AllProblemsReportedAtOnceInLineOrder) {
  const auto r = parse_config_report(R"(scenario = Criticality
foo = 1
[chain]
num_sites = x
spacing = 0.1
this line has no equals sign
[woods_saxon]
steepness = 10
half_width = 1
[scan]
W_grid = 3, 2, 1
)");
  ASSERT_EQ(r.errors.size(), 5u);
  EXPECT_NE(r.errors[0].find("schema_version"), std::string::npos);
  EXPECT_NE(r.errors[1].find("line 2: unknown key 'foo'"), std::string::npos);
  EXPECT_NE(r.errors[2].find("line 4"), std::string::npos);
  EXPECT_NE(r.errors[2].find("type mismatch"), std::string::npos);
  EXPECT_NE(r.errors[3].find("line 6"), std::string::npos);
  EXPECT_NE(r.errors[4].find("grid must ascend"), std::string::npos);
}

TEST(ParseConfig, UnknownScenario) {
  const auto r = parse_config_report("schema_version = 1\nscenario = Teleport\n");
  EXPECT_TRUE(mentions(r.errors, "unknown scenario 'Teleport'"));
}

TEST(ParseConfig, UnknownKeyInSectionRejected) {
  std::string text = minimal_spectrum;
  text += "colour = blue\n";
  const auto r = parse_config_report(text);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_NE(r.errors[0].find("potential.colour"), std::string::npos);
  EXPECT_NE(r.errors[0].find("line 10"), std::string::npos);
}

TEST(ParseConfig, NonFiniteValuesRejected) {
  for (const char* bad : {"nan", "inf", "-inf"}) {
    std::string text = minimal_spectrum;
    text.replace(text.find("mass = 1"), 8, std::string("mass = ") + bad);
    EXPECT_TRUE(mentions(parse_config_report(text).errors, "finite")) << bad;
  }
}

TEST(ParseConfig, WrongSchemaVersion) {
  std::string text = minimal_spectrum;
  text.replace(0, 18, "schema_version = 7");
  EXPECT_TRUE(mentions(parse_config_report(text).errors, "unsupported schema_version 7"));
}

TEST(ParseConfig, DuplicateKey) {
  std::string text = minimal_spectrum;
  text += "kind = zero\n";
  EXPECT_TRUE(mentions(parse_config_report(text).errors, "duplicate key 'potential.kind'"));
}

TEST(ParseConfig, LinspaceAndListForms) {
  const auto c = parse_config(R"(schema_version = 1
scenario = AdiabaticScan
[chain]
num_sites = 40
spacing = 0.2
[scan]
durations = linspace(10, 40, 4)
plateau = 5
)");
  const auto& d = c.reals("scan.durations");
  ASSERT_EQ(d.size(), 4u);
  EXPECT_DOUBLE_EQ(d[0], 10.0);
  EXPECT_DOUBLE_EQ(d[3], 40.0);
  EXPECT_DOUBLE_EQ(d[1], 20.0);
  const auto jw = parse_config("schema_version = 1\nscenario = JWCheck\n[jw]\nL_values = [4, 6]\n");
  EXPECT_EQ(jw.integers("jw.L_values"), (config::IntList{4, 6}));
}

TEST(ParseConfig, PotentialKeysFollowKind) {
  std::string text = minimal_spectrum;
  text.replace(text.find("kind = zero"), 11, "kind = woods_saxon\ndepth = 2");
  const auto r = parse_config_report(text);
  EXPECT_TRUE(mentions(r.errors, "requires 'potential.steepness'"));
  EXPECT_TRUE(mentions(r.errors, "requires 'potential.half_width'"));

  std::string extra = minimal_spectrum;
  extra += "depth = 2\n";
  EXPECT_TRUE(mentions(parse_config_report(extra).errors, "not used by potential.kind = zero"));
}

TEST(ParseConfig, ChoiceValidated) {
  std::string text = minimal_spectrum;
  text.replace(text.find("kind = zero"), 11, "kind = square");
  EXPECT_TRUE(mentions(parse_config_report(text).errors, "'square' is not one of"));
}

TEST(ParseConfig, CommentsAndBlankLines) {
  const auto c = parse_config("# header\n\nschema_version = 1   # trailing\nscenario = Hierarchy\n"
                              "[units]\nE_R = 7\nW0 = 10\ndW = 1\ntemperature = 0.1\n");
  EXPECT_DOUBLE_EQ(c.real("units.E_R"), 7.0);
  EXPECT_DOUBLE_EQ(c.real("hierarchy.ratio"), 3.0);
}

// ---------------------------------------------------------------------------
// CSV

TEST(Csv, SeventeenDigitsRoundTrip) {
  csv::Table t({"x"});
  const double v = 0.1 + 0.2;
  t.row(v);
  const auto text = t.text();
  EXPECT_EQ(text, "x\n0.30000000000000004\n");
  EXPECT_EQ(std::stod(text.substr(2)), v);
}

TEST(Csv, HeaderAlwaysPresentAndWidthChecked) {
  csv::Table t({"a", "b"});
  EXPECT_EQ(t.text(), "a,b\n");
  EXPECT_THROW(t.row(1.0), NumericError);
  t.row(1, std::string("s"));
  EXPECT_EQ(t.text(), "a,b\n1,s\n");
}

TEST(Csv, CrcKnownValue) { EXPECT_EQ(csv::crc32("123456789"), 0xCBF43926u); }

// ---------------------------------------------------------------------------
// run_scenario

TEST(RunScenario, ZeroPotentialDynamicsCreatesNoPairs) {
  const auto c = parse_config(R"(schema_version = 1
scenario = Dynamics
[chain]
num_sites = 60
spacing = 0.2
[ramp]
t_on = 2
t_plateau = 2
t_off = 2
)");
  const auto dir = scratch("dyn_zero");
  scenario::RunOptions opt;
  opt.output_dir = dir;
  scenario::run_scenario(c, opt);
  std::istringstream in(slurp(dir / "dynamics.csv"));
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header.substr(0, 8), "n_pairs,");
  int rows = 0;
  while (std::getline(in, row)) {
    ++rows;
    EXPECT_LT(std::stod(row.substr(0, row.find(','))), 1e-10);
  }
  EXPECT_EQ(rows, 1);
}

TEST(RunScenario, ManifestChecksumsMatchFiles) {
  const auto dir = scratch("manifest");
  scenario::RunOptions opt;
  opt.output_dir = dir;
  const auto m = scenario::run_scenario(parse_config(minimal_spectrum), opt);
  ASSERT_FALSE(m.outputs.empty());
  const auto manifest = slurp(dir / "manifest.txt");
  for (const auto& f : m.outputs) {
    const auto content = slurp(dir / f.name);
    EXPECT_EQ(csv::crc32(content), f.crc32) << f.name;
    EXPECT_NE(manifest.find("output." + f.name + ".crc32 = "), std::string::npos);
  }
  EXPECT_NE(manifest.find("code_version = "), std::string::npos);
  EXPECT_NE(manifest.find("config.chain.num_sites = 40"), std::string::npos);
  // manifest is written after every output
  for (const auto& f : m.outputs)
    EXPECT_LE(fs::last_write_time(dir / f.name), fs::last_write_time(dir / "manifest.txt"));
}

TEST(RunScenario, CriticalityReproducesReferenceDepth) {
  const auto c = parse_config(R"(schema_version = 1
scenario = Criticality
[chain]
num_sites = 1200
spacing = 0.02
[woods_saxon]
steepness = 10
half_width = 1
[scan]
W_grid = linspace(2.5, 3.25, 16)
)");
  const auto dir = scratch("crit");
  scenario::RunOptions opt;
  opt.output_dir = dir;
  scenario::run_scenario(c, opt);
  std::istringstream in(slurp(dir / "criticality.txt"));
  std::map<std::string, double> values;
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find(" = ");
    values[line.substr(0, eq)] = std::stod(line.substr(eq + 3));
  }
  EXPECT_NEAR(values["W_cr_bisect"], 2.878, 0.03);
  EXPECT_LE(values["W_cr_bracket_lo"], values["W_cr_bisect"]);
  EXPECT_GE(values["W_cr_bracket_hi"], values["W_cr_bisect"]);
  EXPECT_LT(values["oracle_max_abs_diff"], 0.01);
}

TEST(RunScenario, InteractionNeedsHalfFilling) {
  const auto c = parse_config(
      "schema_version = 1\nscenario = ManyBody\n[manybody]\nL = 6\nparticles = 2\nmass = 0.5\n"
      "[interaction]\nD0_values = 0, 1\n");
  scenario::RunOptions opt;
  opt.output_dir = scratch("half");
  EXPECT_THROW(scenario::run_scenario(c, opt), ConfigError);
}

// ---------------------------------------------------------------------------
// Executable

TEST(Cli, ExitCodesFollowErrorCategory) {
  const auto dir = scratch("exit");
  spit(dir / "ok.cfg", minimal_spectrum);
  EXPECT_EQ(run_cli((dir / "ok.cfg").string() + " --output-dir " + (dir / "ok").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "ok" / "manifest.txt"));

  spit(dir / "bad.cfg", "scenario = Spectrum\n");
  EXPECT_EQ(run_cli((dir / "bad.cfg").string()), 2);
  EXPECT_EQ(run_cli((dir / "missing.cfg").string()), 2);
  EXPECT_EQ(run_cli((dir / "ok.cfg").string() + " --jobs 0"), 2);

  spit(dir / "numeric.cfg", "schema_version = 1\nscenario = ManyBody\n[manybody]\nL = 4\nJ = 0\n");
  EXPECT_EQ(run_cli((dir / "numeric.cfg").string() + " --output-dir " + (dir / "n").string()), 3);

  spit(dir / "regime.cfg",
       "schema_version = 1\nscenario = Bands\n[lattice]\nW0 = 8\ndW = 1\n[bands]\nsource = wkb\n");
  EXPECT_EQ(run_cli((dir / "regime.cfg").string() + " --output-dir " + (dir / "r").string()), 4);
}

TEST(Cli, JobsFromEnvironment) {
  const auto dir = scratch("env");
  spit(dir / "ok.cfg", minimal_spectrum);
  ASSERT_EQ(run_cli((dir / "ok.cfg").string() + " --output-dir " + (dir / "out").string(), "LATQED_JOBS=3"), 0);
  EXPECT_NE(slurp(dir / "out" / "manifest.txt").find("jobs = 3"), std::string::npos);
  ASSERT_EQ(run_cli((dir / "ok.cfg").string() + " --jobs 2 --output-dir " + (dir / "flag").string(),
                    "LATQED_JOBS=3"),
            0);
  EXPECT_NE(slurp(dir / "flag" / "manifest.txt").find("jobs = 2"), std::string::npos);
}

TEST(Cli, OutputDirFromConfigIsRelativeToWorkingDirectory) {
  const auto dir = scratch("cwd");
  std::string text = minimal_spectrum;
  text.insert(text.find("[chain]"), "output_dir = results/here\n");
  spit(dir / "c.cfg", text);
  const std::string cmd = "cd " + dir.string() + " && " + LATQED_CLI_PATH + " c.cfg";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir / "results" / "here" / "spectrum.csv"));
}

// Byte-identical CSVs across reruns and worker counts.
class Determinism : public ::testing::TestWithParam<std::string> {};

TEST_P(Determinism, CsvBytesIndependentOfRunAndJobs) {
  const auto dir = scratch("det_" + std::to_string(std::hash<std::string>{}(GetParam()) % 100000));
  spit(dir / "c.cfg", GetParam());
  const auto cfg = (dir / "c.cfg").string();
  ASSERT_EQ(run_cli(cfg + " --jobs 1 --output-dir " + (dir / "a").string()), 0);
  ASSERT_EQ(run_cli(cfg + " --jobs 1 --output-dir " + (dir / "b").string()), 0);
  ASSERT_EQ(run_cli(cfg + " --jobs 3 --output-dir " + (dir / "c").string()), 0);
  const auto a = csv_files(dir / "a");
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a, csv_files(dir / "b"));
  EXPECT_EQ(a, csv_files(dir / "c"));
}

INSTANTIATE_TEST_SUITE_P(
    Scenarios, Determinism,
    ::testing::Values(
        std::string("schema_version = 1\nscenario = JWCheck\nseed = 4\n[jw]\nL_values = 4, 6\ndraws = 6\n"),
        std::string("schema_version = 1\nscenario = ManyBody\nseed = 9\n[manybody]\nL = 8\nmass = 0.5\n"
                    "disorder = 0.3\n[interaction]\nD0_values = linspace(0, 1, 4)\n"),
        std::string("schema_version = 1\nscenario = Criticality\n[chain]\nnum_sites = 400\nspacing = 0.05\n"
                    "[woods_saxon]\nsteepness = 10\nhalf_width = 1\n[scan]\nW_grid = linspace(0.5, 3.5, 7)\n"),
        std::string("schema_version = 1\nscenario = AdiabaticScan\n[chain]\nnum_sites = 60\nspacing = 0.2\n"
                    "[potential]\nkind = woods_saxon\ndepth = 3.5\nsteepness = 10\nhalf_width = 1\n"
                    "[scan]\ndurations = 2, 4, 8\nplateau = 2\n"),
        std::string("schema_version = 1\nscenario = Bands\n[lattice]\nW0 = 12\ndW = 1\n[bands]\np_points = 16\n"),
        std::string("schema_version = 1\nscenario = Wannier\n[lattice]\nW0 = 10\ndW = 0.1\n[wannier]\ncells = 16\n")),
    [](const ::testing::TestParamInfo<std::string>& info) {
      const auto& text = info.param;
      const auto at = text.find("scenario = ") + 11;
      return text.substr(at, text.find('\n', at) - at);
    });
