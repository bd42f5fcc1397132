#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "paritysim/cli.hpp"

using namespace paritysim;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

int error_line(const std::string& text) {
  try {
    parse_settings(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("paritysim_cli_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(ParseConfig, NonresonantDefaults) {
  const auto s = parse_settings("C = 100\nD = 100\nr3 = 0.5\nalpha2 = 0.1");
  EXPECT_EQ(s.coupling, CouplingCase::Nonresonant);
  EXPECT_DOUBLE_EQ(s.psi, std::numbers::pi);
  EXPECT_DOUBLE_EQ(s.eta3, 1.0);
  EXPECT_EQ(s.backend, Backend::HighFinesseFirstOrder);
  EXPECT_DOUBLE_EQ(s.r3, 0.5);
  EXPECT_NEAR(std::norm(complex(s.alpha)), 0.1, 1e-16);
  const auto cfg = build_system(s);
  EXPECT_NEAR(cfg.loop.phase_factor().real(), -1.0, 1e-15);
}

TEST(ParseConfig, ResonantDefaults) {
  const auto s = parse_settings("C = 10\nD = 0\ncase = resonant");
  EXPECT_EQ(s.coupling, CouplingCase::Resonant);
  EXPECT_DOUBLE_EQ(s.psi, 0.0);
  EXPECT_DOUBLE_EQ(build_system(s).loop.phase_factor().real(), 1.0);
  EXPECT_THROW(parse_settings("case = resonant\nD = 3"), ParseError);
}

TEST(ParseConfig, RangeErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("r3 = 1.2"), 1);
  EXPECT_EQ(error_line("# comment\nC = 100\n\neta3 = 1.5"), 4);
  EXPECT_EQ(error_line("C = 100\nfoo = 1"), 2);
  EXPECT_EQ(error_line("C = 1e\n"), 1);
  EXPECT_EQ(error_line("C = 100\nr3 = 0.1\nC = 10"), 3);
  EXPECT_EQ(error_line("kappa = -1"), 1);
  EXPECT_EQ(error_line("C 100"), 1);
  EXPECT_EQ(error_line("r3 = 0.5 # trailing comment\n"), -1);
}

TEST(ParseConfig, OverridesReplaceFileValues) {
  const auto s = parse_settings("C = 100\nr3 = 0.2", {{"r3", "0.4"}});
  EXPECT_DOUBLE_EQ(s.r3, 0.4);
  EXPECT_THROW(parse_settings("", {{"nonsense", "1"}}), ParseError);
  EXPECT_THROW(parse_settings("", {{"r3", "x"}}), ParseError);
}

TEST(ParseConfig, DumpRoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    ConfigOverrides o{{"C", cli::fmt(1.0 + 500.0 * u(rng), 17)},
                      {"r3", cli::fmt(0.9 * u(rng), 17)},
                      {"eta3", cli::fmt(0.5 + 0.5 * u(rng), 17)},
                      {"alpha", cli::fmt(3.0 * u(rng), 17)},
                      {"seed", std::to_string(rng())}};
    if (k % 2) o.emplace_back("d_over_c", cli::fmt(0.1 + 3.0 * u(rng), 17));
    else o.emplace_back("case", "resonant");
    const auto s = parse_settings("", o);
    const auto again = parse_settings(dump_settings(s));
    EXPECT_EQ(s, again);
    EXPECT_EQ(dump_settings(s), dump_settings(again));
  }
}

TEST(Csv, Quoting) {
  EXPECT_EQ(cli::csv_field("plain"), "plain");
  EXPECT_EQ(cli::csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(cli::csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(cli::fmt(0.1), "0.1");
  EXPECT_EQ(cli::fmt(1.0 / 3.0), "0.333333333333");
}

TEST(Cli, SweepHeader) {
  const auto r = run({"sweep", "--case", "nonresonant", "--var", "r3", "--from", "0", "--to", "0.95", "--steps", "96",
                      "--doc", "1.0"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "r3,nu_odd_se_tm_C,nu_even_se_tm_C,nu_odd_loss_tm,nu_even_loss_tm,flags");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(line.find("nu_"), std::string::npos);
  }
  EXPECT_EQ(rows, 96);
  EXPECT_NE(r.out.find("\n0,1,1,1,1,\n"), std::string::npos);
}

TEST(Cli, OptimizeResonant) {
  const auto r = run({"optimize", "--case", "resonant", "--C", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("r3_opt=0.818594\n"), std::string::npos) << r.out;
  const auto m = run({"optimize", "--case", "resonant", "--C", "10", "--constraint_margin", "1"});
  ASSERT_EQ(m.code, 0) << m.err;
  const auto pos = m.out.find("r3_numeric=");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_NEAR(std::stod(m.out.substr(pos + 11)), 0.818594, 1e-5);
}

TEST(Cli, ValidateFailureExitsTwo) {
  const auto r = run({"validate", "--C", "100", "--D", "0", "--alpha2", "100"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("photon_factor,cooperativity_factor,loop_factor"), std::string::npos);
  EXPECT_NE(r.err.find("weak-driving"), std::string::npos);
  EXPECT_EQ(run({"validate"}).code, 0);
}

TEST(Cli, SingularityExitsThree) {
  const auto r = run({"rates", "--case", "resonant", "--C", "10", "--r3", "0.9999999999999999"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("|00>"), std::string::npos);
}

TEST(Cli, ParseFailuresExitTwo) {
  EXPECT_EQ(run({"rates", "--r3", "1.2"}).code, 2);
  EXPECT_EQ(run({"rates", "--config", "/nonexistent/paritysim.cfg"}).code, 2);
  EXPECT_EQ(run({"rates", "--no-such-flag", "1"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, ConfigFileAndAtomicOutput) {
  const auto cfg = scratch("run.cfg");
  {
    std::ofstream f(cfg);
    f << "# resonant test\ncase = resonant\nC = 10\nr3 = 0.3\n";
  }
  const auto out = scratch("amps.csv");
  std::filesystem::remove(out);
  const auto r = run({"amplitudes", "--config", cfg.string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream f(out);
  std::stringstream body;
  body << f.rdbuf();
  EXPECT_EQ(body.str().rfind("state,beta_re,beta_im", 0), 0u);
  for (const auto& e : std::filesystem::directory_iterator(out.parent_path()))
    EXPECT_EQ(e.path().string().find(".tmp."), std::string::npos);

  const auto dump = run({"rates", "--config", cfg.string(), "--dump-config"});
  ASSERT_EQ(dump.code, 0);
  EXPECT_EQ(parse_settings(dump.out), parse_settings("case = resonant\nC = 10\nr3 = 0.3"));
  std::filesystem::remove_all(out.parent_path());
}

TEST(Cli, SubcommandsRun) {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"rates"}, {"amplitudes"}, {"transient", "--steps", "20"},
        {"lindblad", "--t_end", "0.01"}, {"homodyne", "--trajectories", "1000", "--steps_per_horizon", "20"}}) {
    const auto r = run(args);
    EXPECT_EQ(r.code, 0) << args.front() << ": " << r.err;
    EXPECT_FALSE(r.out.empty());
  }
  const auto t = run({"transient", "--steps", "5"});
  EXPECT_EQ(std::count(t.out.begin(), t.out.end(), '\n'), 6);
}

TEST(Cli, HomodyneIsReproducible) {
  const std::vector<std::string> args{"homodyne", "--trajectories", "2000", "--steps_per_horizon", "50", "--seed", "9"};
  EXPECT_EQ(run(args).out, run(args).out);
}
