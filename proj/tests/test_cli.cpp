#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "tubeq/cli.hpp"
#include "tubeq/error.hpp"

using namespace tubeq;
using namespace tubeq::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tubeq_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string config_error_path(const std::string& text) {
  try {
    const RunConfig c = parse_config(text);
    make_grid(c, make_embedding(c));
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<accepted>";
}

int run_quiet(const RunConfig& c, const fs::path& out, bool dump = false) {
  std::ostringstream log;
  return run(c, out, dump, log);
}

// Exit status of the tubeq binary.
int invoke(const std::string& args) {
  const std::string cmd = std::string(TUBEQ_BINARY) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config schema errors name the offending field") {
  CHECK(config_error_path(R"({"shape":{"name":"circle","params":[-1]},"grid":[64]})") ==
        "shape.params[0]");
  CHECK(config_error_path(R"({"shape":{"name":"torus","params":[1,2]},"grid":[16,16]})") ==
        "shape.params[0]");
  CHECK(config_error_path(R"({"shape":{"name":"blob"},"grid":[64]})") == "shape.name");
  CHECK(config_error_path(R"({"shape":{"name":"circle","params":[1]},"grid":[4]})") == "grid[0]");
  CHECK(config_error_path(R"({"shape":{"name":"circle","params":[1]},"grid":[16,16]})") == "grid");
  CHECK(config_error_path(R"({"shape":{"name":"circle","params":[1]}})") == "grid");
  CHECK(config_error_path(R"({"grid":[16]})") == "shape");
  CHECK(config_error_path(R"({"shape":{"name":"circle","params":[1,"x"]},"grid":[16]})") ==
        "shape.params[1]");
  CHECK(config_error_path(R"({"shape":{"name":"circle","params":[1]},"grid":[16],"colour":1})") ==
        "colour");
  CHECK(config_error_path(
            R"({"shape":{"name":"circle","params":[1]},"grid":[16],"options":{"eigen":3}})") ==
        "options.eigen");
  CHECK(config_error_path(
            R"({"shape":{"name":"circle","params":[1]},"grid":[16],"options":{"epsilons":[0.1,-1]}})") ==
        "options.epsilons[1]");
  CHECK(config_error_path(
            R"({"shape":{"name":"circle","params":[1]},"grid":[16],"boundary":"neumann"})") ==
        "boundary");
  CHECK(config_error_path(
            R"({"shape":{"name":"helix","params":[3,4]},"grid":[16],"boundary":"periodic"})") ==
        "boundary");
  CHECK(config_error_path(R"({"shape":{"name":"circle","params":[1]},"grid":[16],"task":"plot"})") ==
        "task");
  CHECK(config_error_path(R"({"shape":{"file":"/no/such/file.csv"},"grid":[16]})") == "shape.file");
  CHECK(config_error_path("{not json") == "(root)");
  CHECK(config_error_path(R"({"shape":{"name":"circle","params":[1]},"grid":[16]})") == "<accepted>");
}

TEST_CASE("dirichlet boundary opens a periodic axis") {
  const RunConfig c =
      parse_config(R"({"shape":{"name":"circle","params":[1]},"grid":[16],"boundary":"dirichlet"})");
  const Embedding e = make_embedding(c);
  CHECK_FALSE(e.domain()[0].periodic);
  CHECK(make_grid(c, e).node(0, 0) == doctest::Approx(2 * oracle::pi / 32));
}

TEST_CASE("spectrum on circle(1), N = 2000") {
  RunConfig c = parse_config(
      R"({"shape":{"name":"circle","params":[1.0]},"grid":[2000],"task":"spectrum","options":{"eigencount":5}})");
  const fs::path out = scratch("spectrum");
  CHECK(run_quiet(c, out) == kOk);
  std::ifstream in(out / "spectrum.csv");
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "index,eigenvalue");
  const double e0 = std::stod(first.substr(first.find(',') + 1));
  CHECK(std::abs(e0 + 0.25) < 1e-4);
  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  CHECK(summary["eigenvalues"].size() == 5);
}

TEST_CASE("potential on sphere(2) is zero") {
  RunConfig c = parse_config(R"({"shape":{"name":"sphere","params":[2.0]},"grid":[16,32]})");
  c.task = "potential";
  const fs::path out = scratch("potential");
  CHECK(run_quiet(c, out) == kOk);
  std::ifstream in(out / "potential.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("node,u,v,v_eff", 0) == 0);
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream row(line);
    std::string cell;
    for (int k = 0; k < 4; ++k) std::getline(row, cell, ',');
    CHECK(std::abs(std::stod(cell)) <= 1e-10);
    ++rows;
  }
  CHECK(rows == 16 * 32);
}

TEST_CASE("curvature task columns") {
  RunConfig c = parse_config(R"({"shape":{"name":"helix","params":[3,4]},"grid":[32]})");
  c.task = "curvature";
  const fs::path out = scratch("curvature");
  CHECK(run_quiet(c, out) == kOk);
  std::ifstream in(out / "curvature.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "node,s,curvature,torsion,abs_complex_curvature,re_complex_curvature,im_complex_curvature");
  std::stringstream cells(row);
  std::string cell;
  for (int k = 0; k < 3; ++k) std::getline(cells, cell, ',');
  CHECK(std::stod(cell) == doctest::Approx(0.12));
  std::getline(cells, cell, ',');
  CHECK(std::stod(cell) == doctest::Approx(0.16));
}

TEST_CASE("squeeze task writes the documented columns") {
  RunConfig c = parse_config(
      R"({"shape":{"name":"circle","params":[1]},"grid":[128],"options":{"epsilons":[0.2,0.1,0.05],"across":16,"levels":1}})");
  c.task = "squeeze";
  const fs::path out = scratch("squeeze");
  CHECK(run_quiet(c, out) == kOk);
  std::ifstream in(out / "squeeze.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "epsilon,level,raw,transverse,subtracted,extrapolated");
  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  CHECK(std::abs(summary["levels"][0]["limit"].get<double>() + 0.25) < 1e-2);

  RunConfig surface = parse_config(R"({"shape":{"name":"sphere","params":[1]},"grid":[16,16]})");
  surface.task = "squeeze";
  CHECK_THROWS_AS(run_quiet(surface, scratch("squeeze_surface")), ConfigError);
}

TEST_CASE("verify passes on catalog shapes") {
  for (const char* text : {R"({"shape":{"name":"torus","params":[2,1]},"grid":[24,24]})",
                           R"({"shape":{"name":"helix","params":[3,4]},"grid":[64]})"}) {
    CAPTURE(text);
    RunConfig c = parse_config(text);
    c.task = "verify";
    CHECK(run_quiet(c, scratch("verify")) == kOk);
  }
  const Embedding sphere = catalog_shape("sphere", {1.0});
  for (const Check& check : verify_invariants(sphere, SampleGrid(sphere.domain(), {16, 32}), 4)) {
    CAPTURE(check.name);
    CHECK(check.pass);
  }
}

TEST_CASE("identical configs give byte-identical output") {
  RunConfig c = parse_config(
      R"({"shape":{"name":"ellipse","params":[2,1]},"grid":[200],"options":{"eigencount":6}})");
  for (const char* task : {"spectrum", "curvature", "potential"}) {
    CAPTURE(task);
    c.task = task;
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    run_quiet(c, a, true);
    run_quiet(c, b, true);
    for (const auto& entry : fs::directory_iterator(a)) {
      CAPTURE(entry.path().filename().string());
      CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
    }
  }
}

TEST_CASE("matrix dump") {
  RunConfig c = parse_config(R"({"shape":{"name":"circle","params":[1]},"grid":[16]})");
  c.task = "potential";
  const fs::path out = scratch("dump");
  CHECK(run_quiet(c, out, true) == kOk);
  CHECK(fs::exists(out / "hamiltonian.mtx"));
  CHECK(slurp(out / "laplacian.mtx").find("% gauge raw") != std::string::npos);
}

TEST_CASE("number formatting") {
  CHECK(format_number(-0.25) == "-0.25");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(-0.0) == "0");
}

TEST_CASE("binary exit codes") {
  const fs::path dir = scratch("binary");
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  };
  const std::string good =
      write("good.json", R"({"shape":{"name":"circle","params":[1]},"grid":[64]})");
  const std::string negative =
      write("negative.json", R"({"shape":{"name":"circle","params":[-1]},"grid":[64]})");
  const std::string focal = write(
      "focal.json",
      R"({"shape":{"name":"circle","params":[1]},"grid":[64],"options":{"epsilons":[0.95,0.5,0.25],"across":16}})");
  const std::string out = " --out " + (dir / "out").string();

  CHECK(invoke("spectrum --config " + good + out) == 0);
  CHECK(fs::exists(dir / "out" / "spectrum.csv"));
  CHECK(invoke("spectrum --config " + negative + out) == 2);
  CHECK(invoke("spectrum --config " + (dir / "missing.json").string() + out) == 2);
  CHECK(invoke("plot --config " + good + out) == 2);
  CHECK(invoke("spectrum" + out) == 2);
  CHECK(invoke("squeeze --config " + focal + out) == 3);
  const std::string mismatch = write(
      "mismatch.json", R"({"shape":{"name":"circle","params":[1]},"grid":[64],"task":"spectrum"})");
  CHECK(invoke("potential --config " + mismatch + out) == 2);
  CHECK(invoke("verify --config " + good + out) == 0);
}
