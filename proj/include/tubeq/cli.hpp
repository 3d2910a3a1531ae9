#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tubeq/geometry.hpp"
#include "tubeq/grid.hpp"

namespace tubeq::cli {

enum ExitCode { kOk = 0, kCheckFailed = 1, kSchemaError = 2, kNumericalError = 3 };

// Invalid configuration; `path` names the offending field, e.g.
// "shape.params[0]".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct RunConfig {
  std::string task;
  std::string shape_name;
  std::vector<double> shape_params;
  std::string shape_file;
  std::vector<Index> grid;
  std::optional<Boundary> boundary;

  Index eigencount = 5;
  Index levels = 3;
  std::vector<double> epsilons;  // empty: {0.2, 0.1, 0.05} x focal radius
  std::optional<Index> along;    // squeeze nodes along the curve (default grid[0])
  Index across = 32;
  Index dense_cutoff = 1024;
  std::string output;            // output directory when --out is absent
};

std::vector<std::string> task_names();

// Schema validation of the JSON text; unknown keys are rejected.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// Shape with the configured boundary applied to its domain.
Embedding make_embedding(const RunConfig& config);
SampleGrid make_grid(const RunConfig& config, const Embedding& embedding);

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Module invariants on one shape and grid.
std::vector<Check> verify_invariants(const Embedding& embedding, const SampleGrid& grid,
                                     Index eigencount);

// Runs one task, writing artifacts under `out`; returns the exit code.
// Library errors propagate as exceptions (mapped by main).
int run(const RunConfig& config, const std::filesystem::path& out, bool dump_matrix,
        std::ostream& log);

// %.12g
std::string format_number(double value);

}  // namespace tubeq::cli
