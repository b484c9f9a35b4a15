#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "heislat/cli.hpp"

namespace fs = std::filesystem;
using heislat::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Drops the last CSV column (wall_ms) from every line.
std::string without_timing(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

fs::path temp_dir() {
  fs::path dir = fs::temp_directory_path() / "heislat_test_cli";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("count matches the frozen oracle value") {
  const Result r = call({"count", "--n", "1", "--alpha", "4", "--Q", "5", "--delta", "0.5", "--center", "0,0,0"});
  CHECK(r.code == 0);
  CHECK(r.out == "656\n");
  const Result naive = call({"count", "--Q", "5", "--delta", "1/2", "--naive"});
  CHECK(naive.out == "656\n");
}

TEST_CASE("bound") {
  const Result r = call({"bound", "--n", "1", "--alpha", "4", "--Q", "10", "--delta", "0.01"});
  CHECK(r.code == 0);
  CHECK(r.out == "100\n");
  CHECK(call({"bound", "--alpha", "4", "--Q", "10", "--delta", "1"}).out == "1000\n");
}

TEST_CASE("sweep then fit") {
  const fs::path csv = temp_dir() / "s.csv";
  const Result r = call({"sweep", "--n", "1", "--alpha", "4", "--Q", "8,16,32,64", "--delta-rule", "1/Q", "--samples",
                         "200", "--seed", "42", "--out", csv.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("seed 42") != std::string::npos);
  const std::string text = slurp(csv);
  CHECK(text.starts_with(std::string(heislat::cli::kResultHeader) + "\n"));
  CHECK(text.find('\r') == std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);

  const Result f = call({"fit", csv.string()});
  REQUIRE(f.code == 0);
  std::istringstream in(f.out);
  std::string header, values;
  std::getline(in, header);
  std::getline(in, values);
  CHECK(header == "slope,intercept,residual,points");
  const double slope = std::stod(values.substr(0, values.find(',')));
  CHECK(slope > 1.5);
  CHECK(slope < 2.3);
}

TEST_CASE("ratio column is normalized over bound") {
  const Result r = call({"avg-count", "--Q", "4", "--delta", "1/2"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  std::vector<std::string> f;
  std::istringstream fields(row);
  for (std::string x; std::getline(fields, x, ',');) f.push_back(x);
  REQUIRE(f.size() == 16);
  CHECK(f[7] == "exhaustive");
  CHECK(std::stod(f[12]) == doctest::Approx(std::stod(f[10]) / std::stod(f[11])).epsilon(1e-15));
}

TEST_CASE("outputs do not depend on thread count or reruns") {
  for (const std::vector<std::string>& base :
       {std::vector<std::string>{"sweep", "--Q", "6,9", "--delta-rule", "1/Q", "--samples", "40", "--seed", "5"},
        std::vector<std::string>{"sweep", "--q", "4,6", "--tau", "1", "--alpha", "6"},
        std::vector<std::string>{"energy", "--q", "4,8", "--samples", "5000", "--seed", "9"}}) {
    auto one = base, many = base;
    one.insert(one.end(), {"--threads", "1"});
    many.insert(many.end(), {"--threads", "8"});
    const Result a = call(one), b = call(many), c = call(one);
    REQUIRE(a.code == 0);
    CHECK(without_timing(a.out) == without_timing(b.out));
    CHECK(without_timing(a.out) == without_timing(c.out));
  }
  const Result r1 = call({"rank-check", "--alpha", "4", "--samples", "6", "--threads", "1"});
  const Result r8 = call({"rank-check", "--alpha", "4", "--samples", "6", "--threads", "8"});
  CHECK(r1.out == r8.out);
}

TEST_CASE("rank-check emits JSON") {
  const Result r = call({"rank-check", "--alpha", "6", "--samples", "4", "--equator-samples", "4", "--seed", "3"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["seed"] == 3);
  CHECK(j["passed"] == true);
  CHECK(j["equator"]["rank_D"] == 4);
}

TEST_CASE("config file and environment defaults") {
  const fs::path cfg = temp_dir() / "count.cfg";
  {
    std::ofstream f(cfg);
    f << "# shell around the origin\nQ = 5\ndelta = 0.5\nalpha = 4\n";
  }
  CHECK(call({"count", "--config", cfg.string()}).out == "656\n");
  // Command-line flags win over the file.
  CHECK(call({"count", "--config", cfg.string(), "--Q", "4"}).out != "656\n");

  {
    std::ofstream f(cfg);
    f << "nonsense = 1\n";
  }
  CHECK(call({"count", "--config", cfg.string()}).code == 2);

  setenv("HEISLAT_THREADS", "0", 1);
  CHECK(call({"avg-count", "--Q", "3", "--delta", "1"}).code == 2);
  setenv("HEISLAT_THREADS", "3", 1);
  CHECK(call({"avg-count", "--Q", "3", "--delta", "1"}).code == 0);
  unsetenv("HEISLAT_THREADS");
}

TEST_CASE("exit codes") {
  CHECK(call({}).code == 2);
  CHECK(call({"frobnicate"}).code == 2);
  const Result unknown = call({"count", "--Q", "5", "--delta", "1", "--bogus"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("Usage") != std::string::npos);
  CHECK(call({"count", "--Q", "5"}).code == 2);
  CHECK(call({"count", "--Q", "-1", "--delta", "1"}).code == 2);
  CHECK(call({"count", "--Q", "5", "--delta", "1", "--center", "0,0"}).code == 2);
  CHECK(call({"energy", "--q", "4", "--tau", "1/2"}).code == 2);
  CHECK(call({"energy", "--t", "3"}).code == 2);
  CHECK(call({"fit", (temp_dir() / "missing.csv").string()}).code == 2);
  CHECK(call({"--help"}).code == 0);
}

TEST_CASE("error-term rows") {
  const Result r = call({"error-term", "--Q", "5"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find(",749,") != std::string::npos);
}
