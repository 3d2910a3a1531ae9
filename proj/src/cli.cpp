#include "tubeq/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tubeq/error.hpp"
#include "tubeq/frames.hpp"
#include "tubeq/operators.hpp"
#include "tubeq/spectra.hpp"
#include "tubeq/squeeze.hpp"
#include "tubeq/tubular.hpp"

namespace tubeq::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;
using Eigen::VectorXd;

void reject_unknown(const json& object, const std::string& path,
                    const std::set<std::string>& allowed) {
  for (auto it = object.begin(); it != object.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
    }
  }
}

Index positive_integer(const json& v, const std::string& path, Index minimum = 1) {
  if (!v.is_number_integer() || v.get<long long>() < minimum) {
    throw ConfigError(path, "must be an integer >= " + std::to_string(minimum));
  }
  return static_cast<Index>(v.get<long long>());
}

double finite_number(const json& v, const std::string& path) {
  if (!v.is_number() || !std::isfinite(v.get<double>())) {
    throw ConfigError(path, "must be a finite number");
  }
  return v.get<double>();
}

std::string field(const std::string& base, Index i) {
  return base + "[" + std::to_string(i) + "]";
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cli.run", "cannot write " + path.string());
  return out;
}

std::vector<std::string> parameter_names(int k) {
  return k == 1 ? std::vector<std::string>{"s"} : std::vector<std::string>{"u", "v"};
}

void write_params(std::ostream& out, const SampleGrid& grid, Index node) {
  const VectorXd p = grid.params(node);
  for (Index a = 0; a < p.size(); ++a) out << ',' << format_number(p[a]);
}

struct Pipeline {
  FrameField frames;
  ConnectionCoefficients coeffs;
};

Pipeline parallel_pipeline(const Embedding& embedding, const SampleGrid& grid) {
  Pipeline p;
  p.frames = build_frames(embedding, grid);
  p.coeffs = connection_coefficients(embedding, p.frames);
  if (p.frames.codim() == 2) {
    HashimotoResult h = hashimoto_rotate(p.coeffs, p.frames);
    p.frames = std::move(h.frames);
    p.coeffs = std::move(h.coeffs);
  }
  return p;
}

void write_summary(const fs::path& out, const json& summary) {
  std::ofstream f = open_output(out / "summary.json");
  f << summary.dump(2) << '\n';
}

json base_summary(const RunConfig& config, const Embedding& embedding, const SampleGrid& grid) {
  json s;
  s["task"] = config.task;
  s["shape"] = embedding.name();
  s["ambient_dim"] = embedding.ambient_dim();
  s["intrinsic_dim"] = embedding.intrinsic_dim();
  s["nodes"] = grid.size();
  return s;
}

int run_curvature(const RunConfig& config, const Embedding& embedding, const SampleGrid& grid,
                  const fs::path& out, std::ostream& log) {
  const Pipeline p = parallel_pipeline(embedding, grid);
  const CurvatureData d = curvature_data(embedding, p.frames, p.coeffs);
  const int k = embedding.intrinsic_dim();
  std::ofstream f = open_output(out / "curvature.csv");
  f << "node";
  for (const auto& n : parameter_names(k)) f << ',' << n;
  if (k == 1) {
    f << ",curvature,torsion,abs_complex_curvature,re_complex_curvature,im_complex_curvature\n";
    for (Index i = 0; i < grid.size(); ++i) {
      f << i;
      write_params(f, grid, i);
      const auto c = d.complex_curvature[i];
      f << ',' << format_number(d.curvature[i]) << ',' << format_number(d.torsion[i]) << ','
        << format_number(std::abs(c)) << ',' << format_number(c.real()) << ','
        << format_number(c.imag()) << '\n';
    }
  } else {
    f << ",mean,gauss";
    const int m = embedding.codim();
    if (m > 1) {
      for (int a = 0; a < m; ++a) f << ",mean_" << a;
    }
    f << '\n';
    for (Index i = 0; i < grid.size(); ++i) {
      f << i;
      write_params(f, grid, i);
      f << ',' << format_number(d.mean[i]) << ',' << format_number(d.gauss[i]);
      if (m > 1) {
        for (int a = 0; a < m; ++a) f << ',' << format_number(d.mean_components[a][i]);
      }
      f << '\n';
    }
  }
  json s = base_summary(config, embedding, grid);
  if (k == 1) {
    s["max_curvature"] = d.curvature.maxCoeff();
    s["min_curvature"] = d.curvature.minCoeff();
  } else {
    s["max_abs_mean"] = d.mean.cwiseAbs().maxCoeff();
    s["max_abs_gauss"] = d.gauss.cwiseAbs().maxCoeff();
  }
  write_summary(out, s);
  log << "curvature: " << grid.size() << " nodes -> " << (out / "curvature.csv").string() << '\n';
  return kOk;
}

int run_potential(const RunConfig& config, const Embedding& embedding, const SampleGrid& grid,
                  const fs::path& out, std::ostream& log) {
  const Pipeline p = parallel_pipeline(embedding, grid);
  const VectorXd v = effective_potential(p.coeffs, p.frames);
  const int m = embedding.codim();
  // The closed-form determinant factors need a parallel normal frame.
  const bool expansion = m <= 2;
  TubeMetric tm;
  if (expansion) tm = tube_metric(p.frames, p.coeffs);

  std::ofstream f = open_output(out / "potential.csv");
  f << "node";
  for (const auto& n : parameter_names(embedding.intrinsic_dim())) f << ',' << n;
  f << ",v_eff";
  if (expansion) {
    for (int i = 0; i < m; ++i) f << ",det_linear_" << i;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) f << ",det_quadratic_" << i << j;
    }
  }
  f << '\n';
  for (Index n = 0; n < grid.size(); ++n) {
    f << n;
    write_params(f, grid, n);
    f << ',' << format_number(v[n]);
    if (expansion) {
      const TubeMetricNode& t = tm.nodes[n];
      for (int i = 0; i < m; ++i) f << ',' << format_number(t.det_linear[i]);
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) f << ',' << format_number(t.det_quadratic(i, j));
      }
    }
    f << '\n';
  }
  json s = base_summary(config, embedding, grid);
  s["v_eff_min"] = v.minCoeff();
  s["v_eff_max"] = v.maxCoeff();
  write_summary(out, s);
  log << "potential: V_eff in [" << format_number(v.minCoeff()) << ", "
      << format_number(v.maxCoeff()) << "] -> " << (out / "potential.csv").string() << '\n';
  return kOk;
}

int run_spectrum(const RunConfig& config, const Embedding& embedding, const SampleGrid& grid,
                 const fs::path& out, std::ostream& log) {
  if (config.eigencount > grid.size()) {
    throw ConfigError("options.eigencount", "exceeds the number of grid nodes");
  }
  const RealOperator h = submanifold_hamiltonian(embedding, grid);
  EigenOptions options;
  options.dense_cutoff = config.dense_cutoff;
  const Spectrum sp = eigen_lowest(h, config.eigencount, options);
  std::ofstream f = open_output(out / "spectrum.csv");
  f << "index,eigenvalue\n";
  for (Index i = 0; i < sp.eigenvalues.size(); ++i) {
    f << i << ',' << format_number(sp.eigenvalues[i]) << '\n';
  }
  json s = base_summary(config, embedding, grid);
  s["eigenvalues"] = std::vector<double>(sp.eigenvalues.data(),
                                         sp.eigenvalues.data() + sp.eigenvalues.size());
  s["max_residual"] = sp.max_residual;
  write_summary(out, s);
  log << "spectrum: lowest " << format_number(sp.eigenvalues[0]) << " -> "
      << (out / "spectrum.csv").string() << '\n';
  return kOk;
}

int run_squeeze(const RunConfig& config, const Embedding& embedding, const SampleGrid& grid,
                const fs::path& out, std::ostream& log) {
  if (embedding.intrinsic_dim() != 1) {
    throw ConfigError("shape", "squeeze supports curves only");
  }
  SqueezeGrid sg;
  sg.along = config.along.value_or(grid.count(0));
  sg.across = config.across;
  std::vector<double> eps = config.epsilons;
  if (eps.empty()) {
    const double r = min_focal_radius(embedding, sg.along);
    if (!std::isfinite(r)) {
      throw ConfigError("options.epsilons", "required for curves without curvature");
    }
    eps = {0.2 * r, 0.1 * r, 0.05 * r};
  }
  EigenOptions options;
  options.dense_cutoff = config.dense_cutoff;
  const SqueezeRun run = squeeze_run(embedding, eps, sg, config.levels, options);
  const SqueezeLimit limit = squeeze_extrapolate(run);

  std::ofstream f = open_output(out / "squeeze.csv");
  f << "epsilon,level,raw,transverse,subtracted,extrapolated\n";
  for (const TubeSpectrum& t : run.runs) {
    const VectorXd sub = t.subtracted();
    for (Index l = 0; l < t.levels.size(); ++l) {
      f << format_number(t.epsilon) << ',' << l << ',' << format_number(t.levels[l]) << ','
        << format_number(t.transverse) << ',' << format_number(sub[l]) << ','
        << format_number(limit.limit[l]) << '\n';
    }
  }
  json s = base_summary(config, embedding, grid);
  s["epsilons"] = eps;
  json levels = json::array();
  for (Index l = 0; l < limit.limit.size(); ++l) {
    json lv;
    lv["limit"] = limit.limit[l];
    lv["slope"] = std::isfinite(limit.slope[l]) ? json(limit.slope[l]) : json(nullptr);
    lv["error"] = std::isfinite(limit.error[l]) ? json(limit.error[l]) : json(nullptr);
    levels.push_back(lv);
  }
  s["levels"] = levels;
  s["extrapolated"] = limit.extrapolated;
  s["monotone"] = limit.monotone;
  s["note"] = limit.note;
  s["cross_dims"] = run.runs.front().cross_dims;
  json cont = json::array();
  for (const TubeSpectrum& t : run.runs) cont.push_back(t.transverse_continuum);
  s["transverse_continuum"] = cont;
  write_summary(out, s);
  log << "squeeze: ground limit " << format_number(limit.limit[0])
      << (limit.extrapolated ? "" : " (not extrapolated)") << " -> "
      << (out / "squeeze.csv").string() << '\n';
  if (!limit.note.empty()) log << "squeeze: " << limit.note << '\n';
  return kOk;
}

int run_verify(const RunConfig& config, const Embedding& embedding, const SampleGrid& grid,
               const fs::path& out, std::ostream& log) {
  const std::vector<Check> checks =
      verify_invariants(embedding, grid, std::min<Index>(config.eigencount, grid.size()));
  std::ofstream f = open_output(out / "verify.csv");
  f << "check,value,tolerance,status\n";
  bool ok = true;
  for (const Check& c : checks) {
    const char* status = c.pass ? "pass" : "FAIL";
    f << c.name << ',' << format_number(c.value) << ',' << format_number(c.tolerance) << ','
      << status << '\n';
    char line[160];
    std::snprintf(line, sizeof line, "%-40s %-12.4g %-10.3g %s\n", c.name.c_str(), c.value,
                  c.tolerance, status);
    log << line;
    ok = ok && c.pass;
  }
  json s = base_summary(config, embedding, grid);
  s["passed"] = ok;
  s["checks"] = checks.size();
  write_summary(out, s);
  return ok ? kOk : kCheckFailed;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value == 0.0 ? 0.0 : value);
  return buf;
}

std::vector<std::string> task_names() {
  return {"curvature", "potential", "spectrum", "squeeze", "verify"};
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("(root)", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("(root)", "must be a JSON object");
  reject_unknown(j, "", {"shape", "grid", "boundary", "task", "options"});

  RunConfig c;
  if (j.contains("task")) {
    if (!j["task"].is_string()) throw ConfigError("task", "must be a string");
    c.task = j["task"].get<std::string>();
    const auto names = task_names();
    if (std::find(names.begin(), names.end(), c.task) == names.end()) {
      throw ConfigError("task", "unknown task '" + c.task + "'");
    }
  }

  if (!j.contains("shape")) throw ConfigError("shape", "required");
  const json& shape = j["shape"];
  if (!shape.is_object()) throw ConfigError("shape", "must be an object");
  reject_unknown(shape, "shape", {"name", "params", "file"});
  if (shape.contains("file")) {
    if (shape.contains("name") || shape.contains("params")) {
      throw ConfigError("shape", "give either name/params or file, not both");
    }
    if (!shape["file"].is_string()) throw ConfigError("shape.file", "must be a string");
    c.shape_file = shape["file"].get<std::string>();
  } else {
    if (!shape.contains("name") || !shape["name"].is_string()) {
      throw ConfigError("shape.name", "required string");
    }
    c.shape_name = shape["name"].get<std::string>();
    if (shape.contains("params")) {
      if (!shape["params"].is_array()) throw ConfigError("shape.params", "must be an array");
      for (std::size_t i = 0; i < shape["params"].size(); ++i) {
        c.shape_params.push_back(finite_number(shape["params"][i], field("shape.params", i)));
      }
    }
  }

  if (!j.contains("grid")) throw ConfigError("grid", "required");
  const json& grid = j["grid"];
  if (!grid.is_array() || grid.empty() || grid.size() > 2) {
    throw ConfigError("grid", "must be an array of one or two node counts");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    c.grid.push_back(positive_integer(grid[i], field("grid", i), SampleGrid::kMinNodes));
  }

  if (j.contains("boundary")) {
    const json& b = j["boundary"];
    if (b == "periodic") {
      c.boundary = Boundary::periodic;
    } else if (b == "dirichlet") {
      c.boundary = Boundary::dirichlet;
    } else {
      throw ConfigError("boundary", "must be \"periodic\" or \"dirichlet\"");
    }
  }

  if (j.contains("options")) {
    const json& o = j["options"];
    if (!o.is_object()) throw ConfigError("options", "must be an object");
    reject_unknown(o, "options",
                   {"eigencount", "levels", "epsilons", "along", "across", "dense_cutoff",
                    "output"});
    if (o.contains("eigencount")) c.eigencount = positive_integer(o["eigencount"], "options.eigencount");
    if (o.contains("levels")) c.levels = positive_integer(o["levels"], "options.levels");
    if (o.contains("along")) c.along = positive_integer(o["along"], "options.along", 8);
    if (o.contains("across")) c.across = positive_integer(o["across"], "options.across", 16);
    if (o.contains("dense_cutoff")) {
      c.dense_cutoff = positive_integer(o["dense_cutoff"], "options.dense_cutoff", 0);
    }
    if (o.contains("epsilons")) {
      if (!o["epsilons"].is_array()) throw ConfigError("options.epsilons", "must be an array");
      for (std::size_t i = 0; i < o["epsilons"].size(); ++i) {
        const double e = finite_number(o["epsilons"][i], field("options.epsilons", i));
        if (!(e > 0.0)) throw ConfigError(field("options.epsilons", i), "must be positive");
        c.epsilons.push_back(e);
      }
    }
    if (o.contains("output")) {
      if (!o["output"].is_string()) throw ConfigError("options.output", "must be a string");
      c.output = o["output"].get<std::string>();
    }
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("(file)", "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

Embedding make_embedding(const RunConfig& config) {
  Embedding base = [&] {
    if (!config.shape_file.empty()) {
      try {
        return load_sampled_curve(config.shape_file);
      } catch (const Error& e) {
        throw ConfigError("shape.file", e.what());
      }
    }
    try {
      return catalog_shape(config.shape_name, config.shape_params);
    } catch (const ParameterError& e) {
      const auto names = catalog_names();
      if (std::find(names.begin(), names.end(), config.shape_name) == names.end()) {
        throw ConfigError("shape.name", e.what());
      }
      throw ConfigError(e.index() >= 0 ? field("shape.params", e.index()) : "shape.params",
                        e.what());
    }
  }();
  if (!config.boundary) return base;

  std::vector<Axis> domain = base.domain();
  bool changed = false;
  for (Axis& a : domain) {
    if (*config.boundary == Boundary::dirichlet && a.periodic) {
      a.periodic = false;
      changed = true;
    } else if (*config.boundary == Boundary::periodic && !a.periodic) {
      throw ConfigError("boundary", "shape '" + base.name() + "' has an open parameter axis");
    }
  }
  if (!changed) return base;
  Embedding::NormalFn normals;
  if (base.has_normals()) normals = [base](const VectorXd& p) { return base.normals(p); };
  return Embedding(base.name(), base.ambient_dim(), domain,
                   [base](const VectorXd& p) { return base.jet(p); }, normals);
}

SampleGrid make_grid(const RunConfig& config, const Embedding& embedding) {
  if (static_cast<int>(config.grid.size()) != embedding.intrinsic_dim()) {
    throw ConfigError("grid", "needs " + std::to_string(embedding.intrinsic_dim()) +
                                  " node count(s) for shape '" + embedding.name() + "'");
  }
  return SampleGrid(embedding.domain(), config.grid);
}

int run(const RunConfig& config, const fs::path& out, bool dump_matrix, std::ostream& log) {
  const Embedding embedding = make_embedding(config);
  const SampleGrid grid = make_grid(config, embedding);
  fs::create_directories(out);

  if (dump_matrix) {
    const HamiltonianParts parts = submanifold_hamiltonian_parts(embedding, grid);
    write_matrix_market(parts.hamiltonian, out / "hamiltonian.mtx");
    write_matrix_market(parts.laplacian, out / "laplacian.mtx");
    log << "matrices -> " << (out / "hamiltonian.mtx").string() << ", "
        << (out / "laplacian.mtx").string() << '\n';
  }

  if (config.task == "curvature") return run_curvature(config, embedding, grid, out, log);
  if (config.task == "potential") return run_potential(config, embedding, grid, out, log);
  if (config.task == "spectrum") return run_spectrum(config, embedding, grid, out, log);
  if (config.task == "squeeze") return run_squeeze(config, embedding, grid, out, log);
  if (config.task == "verify") return run_verify(config, embedding, grid, out, log);
  throw ConfigError("task", "unknown task '" + config.task + "'");
}

}  // namespace tubeq::cli
