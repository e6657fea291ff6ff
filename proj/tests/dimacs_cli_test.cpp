#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "trigsat/cli.hpp"
#include "trigsat/dimacs.hpp"

using namespace trigsat;
using namespace trigsat::testing;

namespace {

TEST(Dimacs, BasicFile) {
  const auto f = parse_dimacs("p cnf 2 2\n1 -2 0\n2 0\n");
  EXPECT_EQ(f.num_vars, 2u);
  ASSERT_EQ(f.clauses.size(), 2u);
  EXPECT_EQ(f.clauses[0], (Clause{pos(0), neg(1)}));
  EXPECT_EQ(f.clauses[1], (Clause{pos(1)}));
}

TEST(Dimacs, CommentAndMissingTrailingNewline) {
  const auto f = parse_dimacs("c comment\np cnf 1 1\n1 0");
  EXPECT_EQ(f.num_vars, 1u);
  ASSERT_EQ(f.clauses.size(), 1u);
  EXPECT_EQ(f.clauses[0], Clause{pos(0)});
}

TEST(Dimacs, LiteralOutOfRange) {
  try {
    parse_dimacs("p cnf 1 1\n2 0");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("out of range"), std::string::npos);
  }
}

TEST(Dimacs, Errors) {
  EXPECT_THROW(parse_dimacs("1 2 0\n"), ParseError);
  EXPECT_THROW(parse_dimacs(""), ParseError);
  EXPECT_THROW(parse_dimacs("p cnf 2 1\n1 x 0\n"), ParseError);
  EXPECT_THROW(parse_dimacs("p cnf 2 1\n1 2\n"), ParseError);
  EXPECT_THROW(parse_dimacs("p cnf 2 1\np cnf 2 1\n"), ParseError);
  EXPECT_THROW(parse_dimacs("p dnf 2 1\n"), ParseError);
}

TEST(Dimacs, ClausesSpanLinesAndTautologiesDrop) {
  std::istringstream in("p cnf 3 3\n1 2\n 3 0 -1 1 0 2 2 -3 0\n%\n0\n");
  const auto doc = read_dimacs(in);
  ASSERT_EQ(doc.formula.clauses.size(), 2u);
  EXPECT_EQ(doc.formula.clauses[0], (Clause{pos(0), pos(1), pos(2)}));
  EXPECT_EQ(doc.formula.clauses[1], (Clause{pos(1), neg(2)}));
  EXPECT_EQ(doc.tautologies_dropped, 1u);
  EXPECT_TRUE(doc.warnings.empty());
}

TEST(Dimacs, ClauseCountMismatchWarns) {
  std::istringstream in("p cnf 2 5\n1 0\n");
  EXPECT_EQ(read_dimacs(in).warnings.size(), 1u);
}

TEST(Dimacs, RoundTrip) {
  std::mt19937_64 rng(8);
  const auto f = random_kcnf(30, 100, 4, rng);
  std::ostringstream out;
  write_dimacs(out, f);
  const auto g = parse_dimacs(out.str());
  EXPECT_EQ(g.num_vars, f.num_vars);
  EXPECT_EQ(g.clauses, f.clauses);
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("trigsat_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const auto path = dir_ / name;
    std::ofstream(path) << text;
    return path.string();
  }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "trigsat");
    std::vector<const char*> argv;
    for (auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  std::filesystem::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, SatisfiableFile) {
  const auto path = write("sat.cnf", "p cnf 3 2\n1 -2 0\n2 3 0\n");
  EXPECT_EQ(run({path, "--threads", "2"}), kExitSat);
  EXPECT_NE(out_.str().find("s SATISFIABLE"), std::string::npos);
  // Model line parses back and satisfies the formula.
  std::istringstream lines(out_.str());
  std::string line;
  Assignment m(3);
  while (std::getline(lines, line)) {
    if (line.rfind("v", 0) != 0) continue;
    std::istringstream toks(line.substr(1));
    long x;
    while (toks >> x)
      if (x != 0) m.assign(Lit::from_dimacs(x));
  }
  EXPECT_TRUE(verify_model(parse_dimacs("p cnf 3 2\n1 -2 0\n2 3 0\n"), m));
}

TEST_F(CliTest, UnsatisfiableFile) {
  const auto path = write("unsat.cnf", "p cnf 1 2\n1 0\n-1 0\n");
  EXPECT_EQ(run({path}), kExitUnsat);
  EXPECT_NE(out_.str().find("s UNSATISFIABLE"), std::string::npos);
}

TEST_F(CliTest, SampleFiles) {
  EXPECT_EQ(run({std::string(TRIGSAT_SAMPLES_DIR) + "/php-5-4.cnf", "--threads", "2"}), kExitUnsat);
  EXPECT_EQ(run({std::string(TRIGSAT_SAMPLES_DIR) + "/tiny-sat.cnf"}), kExitSat);
}

TEST_F(CliTest, TimeoutGivesUnknown) {
  std::ostringstream text;
  write_dimacs(text, pigeonhole(12, 11));
  const auto path = write("hard.cnf", text.str());
  EXPECT_EQ(run({path, "--timeout", "1", "--threads", "2"}), kExitUnknown);
  EXPECT_NE(out_.str().find("s UNKNOWN"), std::string::npos);
}

TEST_F(CliTest, BadInput) {
  EXPECT_EQ(run({(dir_ / "missing.cnf").string()}), kExitError);
  const auto path = write("bad.cnf", "p cnf 1 1\n2 0\n");
  EXPECT_EQ(run({path}), kExitError);
  EXPECT_NE(err_.str().find("out of range"), std::string::npos);
  EXPECT_EQ(run({path, "--lanes", "65"}), kExitError);
  EXPECT_EQ(run({}), kExitError);
}

TEST_F(CliTest, StatsJsonAndCsv) {
  std::ostringstream text;
  write_dimacs(text, pigeonhole(6, 5));
  const auto path = write("php.cnf", text.str());
  const auto json_path = (dir_ / "stats.jsonl").string();
  const auto csv_path = (dir_ / "intervals.csv").string();
  EXPECT_EQ(run({path, "--threads", "2", "--stats-json", json_path, "--csv", csv_path, "--record-subsets"}),
            kExitUnsat);
  std::ifstream in(json_path);
  std::string line;
  std::set<std::string> tables;
  while (std::getline(in, line)) tables.insert(nlohmann::json::parse(line).at("table").get<std::string>());
  for (const char* t : {"run", "solver_stats", "engine_stats", "conflict_interval_cdf", "value_subsets"})
    EXPECT_TRUE(tables.contains(t)) << t;
  std::ifstream csv(csv_path);
  std::getline(csv, line);
  EXPECT_EQ(line, "use_kind,bin,count,cumulative");
}

TEST(WriteModel, WrapsAndTerminates) {
  Assignment m(60);
  for (std::uint32_t v = 0; v < 60; ++v) m.set(Var{v}, v % 2 ? F : T);
  std::ostringstream out;
  write_model(out, m);
  std::istringstream lines(out.str());
  std::string line, last;
  while (std::getline(lines, line)) {
    EXPECT_LE(line.size(), 80u);
    EXPECT_EQ(line.rfind("v ", 0), 0u);
    last = line;
  }
  EXPECT_TRUE(last.ends_with(" 0"));
  EXPECT_NE(out.str().find("-60"), std::string::npos);
}

}  // namespace
