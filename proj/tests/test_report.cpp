#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ots/errors.hpp"
#include "ots/report.hpp"

using namespace ots;

namespace {

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("solve CSV row") {
  SolveReport r;
  r.status = SolveStatus::Optimal;
  r.objective = 364.1;
  r.nodes = 12;
  const int lines[] = {9, 13, 18, 20};
  const std::string csv = solve_csv(r, lines);
  CHECK(csv == "objective,open_lines,status,nodes\r\n364.100000000,9;13;18;20,optimal,12\r\n");
}

TEST_CASE("table CSV shapes") {
  EvaluationTable t;
  CHECK(count_lines(table_csv(t)) == 1);
  CHECK(table_csv(t).rfind("method,L_o,K,S,objective,out_of_sample_cost,", 0) == 0);
  for (int k = 0; k < 3; ++k) {
    EvaluationRow r;
    r.method = "ldr";
    r.max_open = k;
    r.objective = 1.0 / 3.0;
    t.rows.push_back(r);
  }
  t.rows[1].out_of_sample_cost = 2.0;
  t.rows[1].infeasible_scenario_count = 0;
  t.rows[1].samples = 50;
  t.rows[1].open_lines = {1, 2};
  CHECK(count_lines(table_csv(t)) == 4);
  CHECK(count_lines(timing_csv(t)) == 4);
  std::istringstream in(table_csv(t));
  std::string header, row0, row1;
  std::getline(in, header);
  std::getline(in, row0);
  std::getline(in, row1);
  CHECK(row0 == "ldr,0,0,,0.333333333,,,,0,0,,optimal\r");
  CHECK(row1 == "ldr,1,0,50,0.333333333,2.000000000,0,,0,0,1;2,optimal\r");
}

TEST_CASE("RFC 4180 quoting and number format") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
  CHECK(csv_number(-0.0) == "0.000000000");
  CHECK(csv_number(-1e-12) == "0.000000000");
  CHECK(csv_number(1234.5) == "1234.500000000");
  CHECK(csv_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  const int none[] = {0};
  CHECK(join_lines(std::span<const int>(none, 0)).empty());
}

TEST_CASE("write errors surface as IoError") {
  CHECK_THROWS_AS(write_text("/nonexistent-dir/x.csv", "a"), IoError);
  const auto path = std::filesystem::temp_directory_path() / "ots_report_test.csv";
  write_csv_report(EvaluationTable{}, path.string());
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("method,", 0) == 0);
  std::filesystem::remove(path);
}
