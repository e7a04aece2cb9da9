#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "ots/case_io.hpp"
#include "ots/cli.hpp"

using namespace ots;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ots_cli_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(const std::vector<std::string>& args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (out_text) *out_text = out.str();
  return code;
}

std::string write_case(const TempDir& dir, const CaseFile& c, const std::string& name) {
  std::ofstream(dir.file(name)) << serialize_case(c);
  return dir.file(name);
}

CaseFile small_wind_case() {
  Rng rng(5);
  testing::RandomCaseOptions opt;
  opt.wind = 2;
  opt.wind_width = 0.3;
  opt.reserves = true;
  return testing::random_case(rng, opt);
}

}  // namespace

TEST_CASE("cli exit codes") {
  TempDir dir;
  const std::string two_bus = write_case(dir, testing::two_bus_case(), "two.json");
  std::string out;
  CHECK(cli({"solve", "--method", "det", "--case", two_bus, "--max-open", "1", "--out",
             dir.file("s.csv")},
            &out) == 0);
  CHECK(out.find("objective=10.0000") != std::string::npos);
  CHECK(slurp(dir.file("s.csv"))
            .rfind("objective,open_lines,status,nodes\r\n10.000000000,,optimal,", 0) == 0);

  CHECK(cli({"solve", "--method", "simplex", "--case", two_bus}) == 2);
  CHECK(cli({"solve", "--case", dir.file("missing.json")}) == 2);
  CHECK(cli({"solve", "--method", "det"}) == 2);
  CHECK(cli({"frobnicate"}) == 2);
  std::ofstream(dir.file("bad.json")) << "{\"buses\": []";
  CHECK(cli({"solve", "--case", dir.file("bad.json")}) == 2);

  // Load beyond generation: the solve fails.
  CaseFile c = testing::two_bus_case();
  c.buses[1].load = 500.0;
  const std::string short_case = write_case(dir, c, "short.json");
  CHECK(cli({"solve", "--method", "det", "--case", short_case}) == 3);
}

TEST_CASE("cli config from the environment") {
  TempDir dir;
  const std::string two_bus = write_case(dir, testing::two_bus_case(), "two.json");
  std::ofstream(dir.file("cfg.json")) << "{\"mip_gap\": 1e-7, \"bogus\": 1}";
  ::setenv("OTS_LDR_CONFIG", dir.file("cfg.json").c_str(), 1);
  CHECK(cli({"solve", "--method", "det", "--case", two_bus}) == 2);
  std::ofstream(dir.file("cfg.json")) << "{\"mip_gap\": 1e-7}";
  CHECK(cli({"solve", "--method", "det", "--case", two_bus}) == 0);
  ::unsetenv("OTS_LDR_CONFIG");
}

TEST_CASE("cli tables are byte-identical across runs") {
  TempDir dir;
  const std::string c = write_case(dir, small_wind_case(), "c.json");
  for (int run = 0; run < 2; ++run) {
    const std::string tag = std::to_string(run);
    REQUIRE(cli({"evaluate", "--case", c, "--methods", "det,saa,ldr,dual-ldr", "--max-open",
                 "1,2", "--samples", "30", "--oos-samples", "100", "--seed", "7", "--out",
                 dir.file("e" + tag + ".csv")}) == 0);
    REQUIRE(cli({"gap", "--case", c, "--max-open", "1", "--out",
                 dir.file("g" + tag + ".csv")}) == 0);
    REQUIRE(cli({"bench", "--case", c, "--s-list", "1,5,10", "--max-open", "1", "--out",
                 dir.file("b" + tag + ".csv")}) == 0);
  }
  for (const char* f : {"e", "g", "b"}) {
    CAPTURE(f);
    const std::string a = slurp(dir.file(std::string(f) + "0.csv"));
    CHECK(!a.empty());
    CHECK(a == slurp(dir.file(std::string(f) + "1.csv")));
  }
  CHECK(fs::exists(dir.file("e0.timing.csv")));
  CHECK(fs::exists(dir.file("g0.ldr_times.csv")));
  // header + 2 L_o x 4 methods
  const std::string e = slurp(dir.file("e0.csv"));
  CHECK(std::count(e.begin(), e.end(), '\n') == 9);
}

TEST_CASE("cli MPS export and solution check") {
  TempDir dir;
  const std::string two_bus = write_case(dir, testing::two_bus_case(), "two.json");
  std::string out;
  REQUIRE(cli({"export-mps", "--case", two_bus, "--method", "det", "--max-open", "1"},
              &out) == 0);
  CHECK(out.rfind("NAME", 0) == 0);
  CHECK(out.find("'INTORG'") != std::string::npos);
  REQUIRE(cli({"export-mps", "--case", two_bus, "--method", "ldr", "--out",
               dir.file("p.mps")}) == 0);
  CHECK(slurp(dir.file("p.mps")).find("ENDATA") != std::string::npos);

  std::ofstream(dir.file("sol.csv")) << "name,value\ng[0],1\ntheta[1],-0.1\nf[0],1\nz[0],1\n";
  REQUIRE(cli({"check-solution", "--case", two_bus, "--method", "det", "--solution",
               dir.file("sol.csv")},
              &out) == 0);
  CHECK(out.find("objective=10.000000000") != std::string::npos);
  CHECK(out.find("max_violation=0.000e+00") != std::string::npos);
}
