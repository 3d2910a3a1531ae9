#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tubeq/cli.hpp"
#include "tubeq/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

int main(int argc, char** argv) {
  namespace cli = tubeq::cli;
  CLI::App app{"tubeq: constrained Schrodinger operators on curves and surfaces"};
  std::string task;
  std::string config_path;
  std::string out;
  bool dump = false;
  app.add_option("task", task, "curvature | potential | spectrum | squeeze | verify")
      ->required()
      ->check(CLI::IsMember(cli::task_names()));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out, "output directory (default: options.output or .)");
  app.add_flag("--dump-matrix", dump, "write the operators as Matrix Market files");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kSchemaError;
  }

#ifdef _OPENMP
  if (const char* threads = std::getenv("TUBEQ_THREADS")) {
    const int n = std::atoi(threads);
    if (n > 0) omp_set_num_threads(n);
  }
#endif

  try {
    cli::RunConfig config = cli::load_config(config_path);
    if (!config.task.empty() && config.task != task) {
      throw cli::ConfigError("task", "config says '" + config.task + "' but '" + task +
                                         "' was requested");
    }
    config.task = task;
    if (out.empty()) out = config.output.empty() ? "." : config.output;
    return cli::run(config, out, dump, std::cout);
  } catch (const cli::ConfigError& e) {
    std::cerr << "tubeq: invalid config: " << e.what() << '\n';
    return cli::kSchemaError;
  } catch (const tubeq::Error& e) {
    std::cerr << "tubeq: " << e.what() << '\n';
    return cli::kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "tubeq: cli.run: " << e.what() << '\n';
    return cli::kNumericalError;
  }
}
