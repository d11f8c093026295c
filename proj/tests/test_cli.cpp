#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "json.hpp"

using mrq::cli::run_cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string write_temp(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / ("mrq_cli_test_" + name);
  std::ofstream(path) << content;
  return path.string();
}

int lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(CliQuantize, Examples) {
  auto r = run({"quantize", "--scheme", "bmrq", "--s", "0.25", "--x", "0.2857142857142857"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"x", "s", "level", "lo", "hi"}));
  EXPECT_EQ(std::stod(rows[1][2]), 0.375);
  EXPECT_EQ(r.out.rfind("# schema=1 command=quantize\n", 0), 0u);

  r = run({"quantize", "--scheme", "bbmrq", "--alpha", "0.6", "--s", "0.5", "--x", "0.3"});
  ASSERT_EQ(r.code, 0);
  EXPECT_DOUBLE_EQ(std::stod(csv_rows(r.out)[1][2]), 0.18);

  r = run({"quantize", "--scheme", "uniform", "--s", "0.33333333", "--x=-0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LT(std::stod(csv_rows(r.out)[1][2]), 0.0);
}

TEST(CliQuantize, TracePath) {
  auto r = run({"quantize", "--scheme", "bbmrq", "--s", "0.5", "--x", "0.7", "0.1", "--trace-path"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].back(), "bits");
  EXPECT_EQ(rows[1][5], "+");
  EXPECT_EQ(rows[1][6], "0");
  EXPECT_EQ(rows[1][7], "1");
  EXPECT_EQ(rows[1][2], "0.80000000000000004");
}

TEST(CliErrors, ExitCodes) {
  auto usage = run({"quantize", "--scheme", "bmrq"});
  EXPECT_EQ(usage.code, 1);
  EXPECT_EQ(lines(usage.err), 1);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"verify", "--suite", "nope"}).code, 1);

  auto dom = run({"quantize", "--scheme", "bmrq", "--s", "0", "--x", "1"});
  EXPECT_EQ(dom.code, 2);
  EXPECT_EQ(lines(dom.err), 1);
  EXPECT_EQ(run({"quantize", "--scheme", "bbmrq", "--alpha", "0.9", "--s", "1", "--x", "1"}).code, 2);
  EXPECT_EQ(run({"quantize", "--scheme", "bbmrq", "--alpha", "0.9", "--allow-any-alpha", "--s", "1", "--x", "1"}).code,
            0);
  EXPECT_EQ(run({"quantize", "--scheme", "lloyd", "--s", "1", "--x", "1"}).code, 2);
  EXPECT_EQ(run({"cdf", "--scheme", "bmrq", "--s", "1", "--x0", "2", "--x1", "1"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(CliCdf, BinaryClosedFormSingleRow) {
  auto r = run({"cdf", "--scheme", "bmrq", "--s", "0.3", "--x1", "10", "--closed-form"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"gamma", "mass", "cdf"}));
  EXPECT_EQ(std::stod(rows[1][0]), 0.25);
  auto e = run({"cdf", "--scheme", "bmrq", "--s", "0.3", "--x1", "10"});
  EXPECT_EQ(csv_rows(e.out).size(), 2u);
}

TEST(CliCdf, DitheredMatchesClosedForm) {
  auto r = run({"cdf", "--scheme", "dbmrq", "--s", "1.5", "--x1", "10000", "--levy-against", "dbmrq"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(std::stod(rows[1][1]), 1.0 / 3.0, 0.01);
  EXPECT_NEAR(std::stod(rows[2][1]), 2.0 / 3.0, 0.01);
  auto pos = r.out.find("# levy_against=dbmrq levy_distance=");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_LT(std::stod(r.out.substr(pos + 35)), 0.01);
}

TEST(CliCdf, BiasedAgainstStationaryLaw) {
  auto r = run({"cdf", "--scheme", "bbmrq", "--alpha", "0.6", "--s", "1", "--x1", "100000", "--levy-against", "bias"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto pos = r.out.find("levy_distance=");
  ASSERT_NE(pos, std::string::npos);
  double d = std::stod(r.out.substr(pos + 14));
  EXPECT_GT(d, 0.0);
  EXPECT_LT(d, 0.1);
  auto closed = run({"cdf", "--scheme", "bbmrq", "--s", "2", "--x1", "1", "--closed-form", "--levy-against", "bias"});
  ASSERT_EQ(closed.code, 0) << closed.err;
  EXPECT_NE(closed.out.find("levy_distance=0\n"), std::string::npos);
  EXPECT_EQ(csv_rows(closed.out).size(), 258u);
}

TEST(CliTradeoff, CurvesAndDeterminism) {
  std::vector<std::string> args{"tradeoff", "--schemes", "bmrq,bbmrq", "--p", "1", "--xmin", "0", "--xmax", "4",
                                "--points", "41"};
  auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 1u + 2 * 41);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"scheme", "x", "log_rate", "error", "s"}));
  EXPECT_EQ(rows[1][0], "bmrq");
  EXPECT_EQ(std::stod(rows[1][3]), 0.25);
  EXPECT_EQ(rows[42][0], "bbmrq");
  EXPECT_EQ(run(args).out, r.out);
  EXPECT_EQ(run({"tradeoff", "--points", "0"}).code, 2);
}

TEST(CliRelay, WorkedExample) {
  auto cfg = write_temp("relay.json", R"({"capacities": [4, 3], "domain": [0, 1], "scheme": "bmrq"})");
  auto r = run({"relay", "--config", cfg, "--x", "0.2857142857142857"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["schema_version"], 1);
  EXPECT_EQ(doc["command"], "relay");
  auto trace = doc["traces"][0];
  EXPECT_EQ(trace["outputs"][0].get<double>(), 0.375);
  EXPECT_EQ(trace["outputs"][1].get<double>(), 0.25);
  EXPECT_NEAR(trace["final_abs_error"].get<double>(), 1.0 / 28.0, 1e-16);
  EXPECT_EQ(doc["average_error"].get<double>(), 0.125);

  auto u = write_temp("relay_u.json", R"({"capacities": [4, 3], "scheme": "uniform", "input": 0.2857142857142857})");
  auto ur = run({"relay", "--config", u});
  ASSERT_EQ(ur.code, 0) << ur.err;
  EXPECT_NEAR(nlohmann::json::parse(ur.out)["traces"][0]["final_abs_error"].get<double>(), 3.0 / 14.0, 1e-15);
}

TEST(CliRelay, Adversary) {
  auto cfg = write_temp("relay32.json", R"({"capacities": [32], "scheme": "bmrq"})");
  auto r = run({"relay", "--config", cfg, "--adversary-budget", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto adv = nlohmann::json::parse(r.out)["adversary"];
  EXPECT_EQ(adv["ratio"].get<double>(), 2.0);
  EXPECT_EQ(adv["worst_capacities"][0], 31);
  auto zero = run({"relay", "--config", cfg, "--adversary-budget", "0"});
  EXPECT_EQ(nlohmann::json::parse(zero.out)["adversary"]["ratio"].get<double>(), 1.0);
}

TEST(CliRelay, ConfigErrors) {
  EXPECT_EQ(run({"relay", "--config", "/nonexistent/relay.json"}).code, 4);
  EXPECT_EQ(run({"relay", "--config", write_temp("bad.json", "{capacities: ")}).code, 4);
  EXPECT_EQ(run({"relay", "--config", write_temp("nocap.json", R"({"scheme": "bmrq"})")}).code, 4);
  EXPECT_EQ(run({"relay", "--config", write_temp("type.json", R"({"capacities": "many"})")}).code, 4);
  EXPECT_EQ(run({"relay", "--config", write_temp("small.json", R"({"capacities": [1]})")}).code, 4);
  EXPECT_EQ(run({"relay", "--config", write_temp("scheme.json", R"({"capacities": [4], "scheme": "x"})")}).code, 4);
  auto ok = write_temp("ok.json", R"({"capacities": [4]})");
  auto outside = run({"relay", "--config", ok, "--x", "1.5"});
  EXPECT_EQ(outside.code, 2);
  EXPECT_EQ(lines(outside.err), 1);
}

TEST(CliVerify, ConverseAndThm2Pass) {
  auto r = run({"verify", "--suite", "converse"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("# result=PASS"), std::string::npos);
  EXPECT_EQ(csv_rows(r.out).size(), 1u + 19);
  EXPECT_EQ(run({"verify", "--suite", "thm2"}).code, 0);
  EXPECT_EQ(run({"verify", "--suite", "mrq"}).code, 0);
}

TEST(CliVerify, SeededAndDeterministic) {
  auto a = run({"verify", "--suite", "renewal", "--seed", "7"});
  auto b = run({"verify", "--suite", "renewal", "--seed", "7"});
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("seed=7"), std::string::npos);
  // The renewal limit is not reached at t = 30, so the suite reports a failure.
  EXPECT_EQ(a.code, 3);
  ::setenv("MRQ_SEED", "9", 1);
  auto env = run({"verify", "--suite", "converse"});
  auto flag = run({"verify", "--suite", "converse", "--seed", "5"});
  ::unsetenv("MRQ_SEED");
  EXPECT_NE(env.out.find("seed=9"), std::string::npos);
  EXPECT_NE(flag.out.find("seed=5"), std::string::npos);
}
