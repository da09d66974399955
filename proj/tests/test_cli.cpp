#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "lvfuse/dataset.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(LVFUSE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t lines(const fs::path& p) {
  const auto text = slurp(p);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("benchmark writes deterministic files") {
  const auto dir = lvfuse::testing::scratch_dir("cli_benchmark");
  REQUIRE(run("benchmark ackley --seed 7 --out " + q(dir / "a")) == 0);
  CHECK(lines(dir / "a" / "train.csv") == 171);
  CHECK(lines(dir / "a" / "test.csv") == 401);
  REQUIRE(run("benchmark ackley --seed 7 --out " + q(dir / "b")) == 0);
  CHECK(slurp(dir / "a" / "train.csv") == slurp(dir / "b" / "train.csv"));
  CHECK(slurp(dir / "a" / "test.csv") == slurp(dir / "b" / "test.csv"));
  REQUIRE(run("benchmark parabola --ground-train 2 --out " + q(dir / "p")) == 0);
  CHECK(lines(dir / "p" / "train.csv") == 33);
  CHECK(run("benchmark cubic --out " + q(dir / "c")) == 2);
}

TEST_CASE("usage errors exit with 1") {
  CHECK(run("") == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("fit lvgp") == 1);
}

TEST_CASE("fit, predict, latent, filter, surface workflow") {
  const auto dir = lvfuse::testing::scratch_dir("cli_workflow");
  REQUIRE(run("benchmark parabola --out " + q(dir)) == 0);
  const auto data = "--data " + q(dir / "train.csv") + " --schema " + q(dir / "schema.cfg");

  REQUIRE(run("fit lvgp " + data + " --restarts 1 --seed 3 --out " + q(dir / "m1.json")) == 0);
  REQUIRE(run("fit lvgp " + data + " --restarts 1 --seed 3 --out " + q(dir / "m2.json")) == 0);
  CHECK(slurp(dir / "m1.json") == slurp(dir / "m2.json"));
  CHECK(run("fit lvgp --data /nonexistent.csv --schema " + q(dir / "schema.cfg")) == 2);

  SUBCASE("predict at training rows") {
    REQUIRE(run("predict --model " + q(dir / "m1.json") + " --data " + q(dir / "train.csv") + " --out " +
                q(dir / "pred.csv")) == 0);
    CHECK(lines(dir / "pred.csv") == lines(dir / "train.csv"));
    const auto train = lvfuse::load_csv(dir / "train.csv", lvfuse::load_schema(dir / "schema.cfg"));
    std::ifstream in(dir / "pred.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "mean,std");
    const double range = train.response.maxCoeff() - train.response.minCoeff();
    for (Eigen::Index i = 0; std::getline(in, line); ++i) {
      const auto mean = lvfuse::parse_number(lvfuse::split_csv_line(line)[0]);
      CHECK(std::abs(mean - train.response(i)) < 1e-3 * range);
    }
  }
  SUBCASE("predict errors") {
    std::ofstream(dir / "nosource.csv") << "x\n0.5\n";
    CHECK(run("predict --model " + q(dir / "m1.json") + " --data " + q(dir / "nosource.csv") + " --out " +
              q(dir / "o.csv")) == 2);
    std::ofstream(dir / "unseen.csv") << "x,source\n0.5,p9\n";
    CHECK(run("predict --model " + q(dir / "m1.json") + " --data " + q(dir / "unseen.csv") + " --out " +
              q(dir / "o.csv")) == 2);
  }
  SUBCASE("gp model needs only numeric columns") {
    REQUIRE(run("fit gp " + data + " --restarts 1 --out " + q(dir / "gp.json")) == 0);
    std::ofstream(dir / "nosource.csv") << "x\n0.5\n1.5\n";
    REQUIRE(run("predict --model " + q(dir / "gp.json") + " --data " + q(dir / "nosource.csv") + " --out " +
                q(dir / "o.csv")) == 0);
    CHECK(lines(dir / "o.csv") == 3);
    CHECK(run("latent --model " + q(dir / "gp.json") + " --out " + q(dir / "l.csv")) == 2);
  }
  SUBCASE("latent and filter") {
    REQUIRE(run("latent --model " + q(dir / "m1.json") + " --reference ground --out " + q(dir / "lat.csv")) == 0);
    const auto text = slurp(dir / "lat.csv");
    CHECK(text.rfind("variable,level,z1,z2,D\nsource,ground,0,0,0\n", 0) == 0);
    CHECK(lines(dir / "lat.csv") == 5);
    const auto filter = "filter " + data + " --latent " + q(dir / "lat.csv") + " --reference ground --out ";
    REQUIRE(run(filter + q(dir / "f0.csv") + " --threshold 0") == 0);
    CHECK(lines(dir / "f0.csv") == 4);
    REQUIRE(run(filter + q(dir / "finf.csv") + " --threshold 1e9") == 0);
    CHECK(lines(dir / "finf.csv") == 34);
    CHECK(run(filter + q(dir / "fx.csv") + " --threshold -1") == 2);
  }
  SUBCASE("surface") {
    std::ofstream(dir / "spec.cfg") << "sweep = x, -10, 10, 21\nlevel.source = p2\n";
    REQUIRE(run("surface --model " + q(dir / "m1.json") + " --spec " + q(dir / "spec.cfg") + " --out " +
                q(dir / "s.csv")) == 0);
    CHECK(lines(dir / "s.csv") == 22);
    CHECK(slurp(dir / "s.csv").rfind("x,mean,std\n", 0) == 0);
  }
}

TEST_CASE("cv writes report and parity files") {
  const auto dir = lvfuse::testing::scratch_dir("cli_cv");
  REQUIRE(run("benchmark parabola --out " + q(dir)) == 0);
  REQUIRE(run("cv gp --data " + q(dir / "train.csv") + " --schema " + q(dir / "schema.cfg") +
              " -k 3 --restarts 1 --out " + q(dir / "cv")) == 0);
  CHECK(lines(dir / "cv" / "cv_report.csv") == 5);
  CHECK(lines(dir / "cv" / "parity.csv") == 34);
}
