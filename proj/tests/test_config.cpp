#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sscool/config.hpp"
#include "sscool/scenario.hpp"

using namespace sscool;

namespace {

std::vector<std::string> errors_of(const std::string& text) {
  try {
    validate_config(text);
  } catch (const ConfigError& e) {
    return e.errors();
  }
  return {};
}

bool any_contains(const std::vector<std::string>& errs, const std::string& needle) {
  for (const auto& e : errs) {
    if (e.find(needle) != std::string::npos) return true;
  }
  return false;
}

std::string read(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string csv_of(const ScenarioConfig& c) {
  std::ostringstream out;
  write_csv(out, c, run_scenario(c));
  return out.str();
}

const char* kCustom = R"(scenario = custom
[params]
nu = 1
Gamma = 10
Omega = 0.1
Omega_c = 0.5
eta = 0.05
[sweep]
axis = Omega_c
start = 0.45
stop = 0.55
points = 3
[solver]
cutoffs = 6
numeric = true
)";

}  // namespace

TEST(Ini, SectionsCommentsAndDuplicates) {
  const auto doc = parse_ini("scenario = custom ; trailing\n# comment\n[params]\nnu = 1\n");
  EXPECT_TRUE(doc.errors.empty());
  ASSERT_TRUE(doc.sections.count("run"));
  ASSERT_TRUE(doc.sections.count("params"));
  EXPECT_EQ(doc.sections.at("params").front().value, "1");
  EXPECT_FALSE(parse_ini("[params]\nnu = 1\nnu = 2\n").errors.empty());
}

TEST(Validate, CustomNeedsNu) {
  const auto errs = errors_of("scenario = custom\n[params]\nGamma = 1\n");
  EXPECT_TRUE(any_contains(errs, "nu")) << errs.size();
}

TEST(Validate, NegativeDecayRate) {
  const auto errs = errors_of("scenario = custom\n[params]\nnu = 1\nGamma1 = -1\n");
  EXPECT_TRUE(any_contains(errs, "Gamma1 must be >= 0"));
}

TEST(Validate, UnknownScenarioListsNames) {
  const auto errs = errors_of("scenario = fig-nope\n");
  ASSERT_EQ(errs.size(), 1u);
  for (const auto& [kind, name] : scenario_names()) EXPECT_NE(errs[0].find(name), std::string::npos) << name;
  EXPECT_TRUE(any_contains(errors_of("[params]\nnu = 1\n"), "run.scenario is required"));
}

TEST(Validate, CollectsEveryError) {
  const auto errs =
      errors_of("scenario = custom\n[params]\nnu = abc\nfoo = 1\n[solver]\ncutoffs = 1\nnumeric = maybe\n[bogus]\nx = 1\n");
  EXPECT_GE(errs.size(), 5u);
  EXPECT_TRUE(any_contains(errs, "not a number"));
  EXPECT_TRUE(any_contains(errs, "unknown key"));
  EXPECT_TRUE(any_contains(errs, "unknown section [bogus]"));
  EXPECT_TRUE(any_contains(errs, "cutoff must be >= 2"));
  EXPECT_TRUE(any_contains(errs, "true or false"));
}

TEST(Validate, ScenarioSpecificSections) {
  EXPECT_TRUE(any_contains(errors_of("scenario = fig-dynamics\n[sweep]\naxis = eta\nvalues = 0.1\n"), "[sweep]"));
  EXPECT_TRUE(any_contains(errors_of("scenario = custom\n[params]\nnu = 1\n[protocol]\ntargets = 1\n"), "pulsed"));
  EXPECT_TRUE(any_contains(errors_of("scenario = fig-chain\n[solver]\ncutoffs = 4, 4\n"), "one entry per chain mode"));
  EXPECT_TRUE(any_contains(errors_of("scenario = custom\n[params]\nnu = 1\n[sweep]\naxis = eta\nvalues = 0.1, -0.1\n"),
                           "eta must be >= 0"));
  EXPECT_TRUE(any_contains(errors_of("scenario = pulsed\n[params]\nGamma = 0\n"), "Gamma > 0"));
}

TEST(Validate, DefaultsAndPrescription) {
  const ScenarioConfig c = validate_config("scenario = fig-timerate\n");
  EXPECT_TRUE(c.omega_prescription);
  ASSERT_TRUE(c.sweep);
  EXPECT_EQ(c.sweep->name, "eta");
  const ScenarioConfig d = validate_config("scenario = fig-timerate\n[params]\nOmega = 0.3\n");
  EXPECT_FALSE(d.omega_prescription);
  EXPECT_DOUBLE_EQ(d.params.Omega, 0.3);
  const ScenarioConfig g = validate_config("scenario = custom\n[params]\nnu = 1\nGamma = 4\nGamma2 = 3\n");
  EXPECT_DOUBLE_EQ(g.params.Gamma1, 2.0);
  EXPECT_DOUBLE_EQ(g.params.Gamma2, 3.0);
}

TEST(Dump, RoundTripsShippedConfigs) {
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(SSCOOL_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    ++seen;
    const ScenarioConfig c = validate_config(read(entry.path()));
    const std::string once = dump_config(c);
    EXPECT_EQ(dump_config(validate_config(once)), once) << entry.path();
  }
  EXPECT_GE(seen, 7);
}

TEST(Csv, ByteIdenticalAndThreadInvariant) {
  ScenarioConfig c = validate_config(kCustom);
  c.solver.threads = 1;
  const std::string a = csv_of(c);
  EXPECT_EQ(a, csv_of(c));
  c.solver.threads = 3;
  EXPECT_EQ(a, csv_of(c));
  EXPECT_NE(a.find("axis_value,observable,value,std_error,provenance\n"), std::string::npos);
  EXPECT_NE(a.find("# scenario = custom"), std::string::npos);
  EXPECT_NE(a.find(",mean_n,"), std::string::npos);
  EXPECT_NE(a.find(",numeric\n"), std::string::npos);
}

TEST(Csv, ZeroRepumpGivesZeroRates) {
  ScenarioConfig c = validate_config("scenario = custom\n[params]\nnu = 1\nGamma = 10\nOmega = 0\nOmega_c = 0.5\neta = 0.05\n");
  const ResultTable t = run_scenario(c);
  ASSERT_EQ(t.select("A_minus", Provenance::analytic).size(), 1u);
  EXPECT_EQ(t.select("A_minus", Provenance::analytic)[0]->value, 0.0);
  EXPECT_EQ(t.select("A_plus", Provenance::analytic)[0]->value, 0.0);
  EXPECT_EQ(t.select("W", Provenance::analytic)[0]->value, 0.0);
  EXPECT_TRUE(t.select("mean_n", Provenance::analytic).empty());
  EXPECT_FALSE(t.notes.empty());
}

TEST(Csv, ParabolaSeriesRows) {
  ScenarioConfig c = validate_config(
      "scenario = fig-parabola\n[sweep]\naxis = Omega_c\nvalues = 0.45, 0.5\n[series]\neta = 0.05, 0.1\n[solver]\ncutoffs = 6\n");
  const ResultTable t = run_scenario(c);
  EXPECT_EQ(t.axis_name, "Omega_c");
  EXPECT_EQ(t.select("mean_n@eta=0.05", Provenance::analytic).size(), 2u);
  EXPECT_EQ(t.select("mean_n@eta=0.1", Provenance::numeric).size(), 2u);
}
