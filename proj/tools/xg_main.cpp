// xg: configuration-driven experiment runner.
//
// Usage: xg solve|eoc|infsup|limit|zoo --config <file> --out <dir>
// Exit codes: 0 ok, 1 acceptance failure, 2 usage/config error,
// 3 solver failure.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <json.hpp>

#include "xg/eliminate.hpp"
#include "xg/linalg.hpp"
#include "xg/presets.hpp"
#include "xg/verify.hpp"

namespace {

using nlohmann::json;
using namespace xg;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AcceptanceFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fully validated experiment; no artifact is written until parsing and the
// theorem-condition checks succeed.
struct Experiment {
  std::string command;
  std::string case_id = "C1";
  Preset preset;
  bool has_preset = false;
  int n = 8;
  std::vector<int> levels = {4, 8, 16, 32};
  std::vector<double> rhos;
  LimitReference reference = LimitReference::Primal;
  bool mixed_boundary = false;  // x = 1 side Neumann
  int k = 1;                    // zoo order
  bool dump_mesh_file = false;
  bool dump_matrix_file = false;
  json accept;  // optional thresholds; empty = always exit 0
};

void require_keys(const json& j, const std::vector<std::string>& allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ConfigError("unknown config key: " + it.key());
  }
}

Experiment parse_config(const std::string& command, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("config is not valid JSON: ") + ex.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  require_keys(j, {"case", "preset", "rho", "c_eta", "c_tau", "n", "levels",
                   "rhos", "reference", "boundary", "k", "dump_mesh",
                   "dump_matrix", "accept"});

  Experiment ex;
  ex.command = command;
  try {
    if (j.contains("case")) ex.case_id = j.at("case").get<std::string>();
    find_case(ex.case_id);  // throws on unknown id
    if (j.contains("preset")) {
      ex.preset = parse_preset(j.at("preset").get<std::string>(), 1);
      ex.has_preset = true;
    }
    if (j.contains("rho")) {
      double r = j.at("rho").get<double>();
      if (!(r > 0)) throw ConfigError("rho must be positive");
      ex.preset.config.rho = r;
    }
    if (j.contains("c_eta"))
      ex.preset.config.c_eta = j.at("c_eta").get<double>();
    if (j.contains("c_tau"))
      ex.preset.config.c_tau = j.at("c_tau").get<double>();
    if (j.contains("n")) ex.n = j.at("n").get<int>();
    if (ex.n < 1) throw ConfigError("n must be >= 1");
    if (j.contains("levels")) {
      ex.levels = j.at("levels").get<std::vector<int>>();
      for (int l : ex.levels)
        if (l < 1) throw ConfigError("levels must be >= 1");
      if (ex.levels.empty()) throw ConfigError("levels must be nonempty");
    }
    if (j.contains("rhos")) {
      ex.rhos = j.at("rhos").get<std::vector<double>>();
      for (double r : ex.rhos)
        if (!(r > 0)) throw ConfigError("rhos must be positive");
      if (ex.rhos.empty()) throw ConfigError("rhos must be nonempty");
    }
    if (j.contains("reference")) {
      std::string r = j.at("reference").get<std::string>();
      if (r == "primal")
        ex.reference = LimitReference::Primal;
      else if (r == "mixed")
        ex.reference = LimitReference::Mixed;
      else
        throw ConfigError("reference must be \"primal\" or \"mixed\"");
    }
    if (j.contains("boundary")) {
      std::string b = j.at("boundary").get<std::string>();
      if (b == "mixed")
        ex.mixed_boundary = true;
      else if (b != "dirichlet")
        throw ConfigError("boundary must be \"dirichlet\" or \"mixed\"");
    }
    if (j.contains("k")) ex.k = j.at("k").get<int>();
    if (ex.k < 0) throw ConfigError("k must be >= 0");
    if (j.contains("dump_mesh"))
      ex.dump_mesh_file = j.at("dump_mesh").get<bool>();
    if (j.contains("dump_matrix"))
      ex.dump_matrix_file = j.at("dump_matrix").get<bool>();
    if (j.contains("accept")) {
      ex.accept = j.at("accept");
      if (!ex.accept.is_object())
        throw ConfigError("accept must be a JSON object");
      require_keys(ex.accept,
                   {"min_eoc", "max_beta_ratio", "min_slope", "max_error"});
    }
  } catch (const json::exception& exn) {
    throw ConfigError(std::string("config field error: ") + exn.what());
  } catch (const std::invalid_argument& exn) {
    throw ConfigError(exn.what());
  }
  if (command != "zoo" && !ex.has_preset)
    throw ConfigError("config must name a preset");
  if (command == "infsup" || command == "limit") {
    if (ex.rhos.empty())
      throw ConfigError("config must list rhos for this command");
  }
  return ex;
}

// Named theorem-condition validation before any solve.
void validate_conditions(const Experiment& ex) {
  if (ex.command == "zoo") return;  // per-row labels reported instead
  std::vector<std::string> violated;
  if (ex.command == "limit")
    violated = ex.reference == LimitReference::Primal
                   ? check_primal_limit_conditions(ex.preset.config)
                   : check_mixed_limit_conditions(ex.preset.config);
  else
    violated = check_conditions(ex.preset.config);
  if (!violated.empty()) {
    std::string msg = "theorem conditions violated for preset '" +
                      ex.preset.name + "':";
    for (const std::string& v : violated) msg += "\n  " + v;
    throw ConfigError(msg);
  }
}

Mesh2D make_mesh(const Experiment& ex, int n) {
  Mesh2D mesh = build_structured_unit_square(n);
  if (ex.mixed_boundary)
    mesh = tag_boundary(mesh, [](const Vec2& x) {
      return x.x() > 1 - 1e-12 ? EdgeTag::Neumann : EdgeTag::Dirichlet;
    });
  return mesh;
}

std::ofstream open_artifact(const std::filesystem::path& out,
                            const std::string& name) {
  std::ofstream os(out / name, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write artifact: " + name);
  os << std::setprecision(17);
  return os;
}

void check_min_eoc(const Experiment& ex, const ErrorReport& rep) {
  if (!ex.accept.contains("min_eoc")) return;
  double want = ex.accept.at("min_eoc").get<double>();
  const ErrorRow& last = rep.rows.back();
  for (int i = 0; i < 4; ++i) {
    if (rep.rows.front().err[i] == 0.0) continue;  // exact: no rate to fit
    if (!(last.eoc[i] >= want))
      throw AcceptanceFailure("eoc of " + rep.names[i] + " is " +
                              std::to_string(last.eoc[i]) + ", below " +
                              std::to_string(want));
  }
}

int run_solve(const Experiment& ex, const std::filesystem::path& out) {
  const ManufacturedCase& mc = find_case(ex.case_id);
  Mesh2D mesh = make_mesh(ex, ex.n);
  Spaces spaces = build_spaces(mesh, ex.preset.config);
  BlockSystem sys =
      assemble_system(mesh, spaces, mc.data(), ex.preset.config);
  SolveReport rep = solve_direct(sys.M, sys.rhs);
  if (!rep.ok) throw SolverError("direct solve failed: " + rep.message);
  SolutionFields sol{&mesh, &spaces, rep.x};

  ErrorReport er;
  er.regime = ex.preset.config.regime;
  er.names = norm_names(er.regime);
  ErrorRow row;
  row.level = ex.n;
  row.dofs = spaces.total;
  for (int c = 0; c < mesh.n_cells(); ++c)
    row.h = std::max(row.h, mesh.cell_h[c]);
  row.err = error_norms(sol, mc, ex.preset.config, er.regime);
  row.eoc.fill(std::numeric_limits<double>::quiet_NaN());
  er.rows.push_back(row);

  { std::ofstream os = open_artifact(out, "solve.csv"); write_error_csv(er, os); }
  {
    std::ofstream os = open_artifact(out, "solve.md");
    os << "# solve: " << ex.preset.name << " on " << ex.case_id << "\n\n"
       << "- regime: " << ex.preset.label << "\n"
       << "- mesh: " << ex.n << " x " << ex.n << ", dofs " << spaces.total
       << "\n- solver residual: " << rep.rel_residual << "\n\n";
    write_error_markdown(er, os);
  }
  if (ex.dump_mesh_file) {
    std::ofstream os = open_artifact(out, "mesh.txt");
    dump_mesh(mesh, os);
  }
  if (ex.dump_matrix_file) {
    std::ofstream os = open_artifact(out, "matrix.txt");
    dump_coo(sys.M, os);
  }
  if (ex.accept.contains("max_error")) {
    double want = ex.accept.at("max_error").get<double>();
    for (int i = 0; i < 4; ++i)
      if (!(row.err[i] <= want))
        throw AcceptanceFailure("error " + er.names[i] + " is " +
                                std::to_string(row.err[i]) + ", above " +
                                std::to_string(want));
  }
  return 0;
}

int run_eoc(const Experiment& ex, const std::filesystem::path& out) {
  const ManufacturedCase& mc = find_case(ex.case_id);
  ErrorReport rep;
  try {
    rep = eoc_study(mc, ex.preset.config, ex.levels);
  } catch (const std::runtime_error& exn) {
    throw SolverError(exn.what());
  }
  { std::ofstream os = open_artifact(out, "eoc.csv"); write_error_csv(rep, os); }
  {
    std::ofstream os = open_artifact(out, "eoc.md");
    os << "# eoc: " << ex.preset.name << " on " << ex.case_id << " ("
       << ex.preset.label << ")\n\n";
    write_error_markdown(rep, os);
  }
  check_min_eoc(ex, rep);
  return 0;
}

int run_infsup(const Experiment& ex, const std::filesystem::path& out) {
  std::ofstream os = open_artifact(out, "infsup.csv");
  os << "rho,level,h,dofs,beta,lambda_max\n";
  double bmin = std::numeric_limits<double>::infinity(), bmax = 0.0;
  MethodConfig cfg = ex.preset.config;
  for (double rho : ex.rhos) {
    cfg.rho = rho;
    for (int n : ex.levels) {
      Mesh2D mesh = make_mesh(ex, n);
      Spaces spaces = build_spaces(mesh, cfg);
      BlockSystem sys = assemble_system(mesh, spaces, zero_data(), cfg);
      NormMatrices norms =
          assemble_norm_grams(mesh, spaces, cfg, cfg.regime);
      InfSupReport rep = infsup_constant(sys, norms);
      bmin = std::min(bmin, rep.beta);
      bmax = std::max(bmax, rep.beta);
      os << rho << ',' << n << ',' << rep.h << ',' << spaces.total << ','
         << rep.beta << ',' << rep.lambda_max << '\n';
    }
  }
  {
    std::ofstream ms = open_artifact(out, "infsup.md");
    ms << "# infsup: " << ex.preset.name << " (" << ex.preset.label << ")\n\n"
       << "- beta range: [" << bmin << ", " << bmax << "]\n"
       << "- variation: " << bmax / bmin << "x\n";
  }
  if (ex.accept.contains("max_beta_ratio")) {
    double want = ex.accept.at("max_beta_ratio").get<double>();
    if (!(bmax / bmin < want))
      throw AcceptanceFailure("inf-sup constant varies by " +
                              std::to_string(bmax / bmin) + "x, above " +
                              std::to_string(want));
  }
  return 0;
}

int run_limit(const Experiment& ex, const std::filesystem::path& out) {
  const ManufacturedCase& mc = find_case(ex.case_id);
  LimitReport rep;
  try {
    rep = limit_study(mc, ex.preset.config, ex.rhos, ex.n, ex.reference);
  } catch (const std::invalid_argument& exn) {
    throw ConfigError(exn.what());
  } catch (const std::runtime_error& exn) {
    throw SolverError(exn.what());
  }
  {
    std::ofstream os = open_artifact(out, "limit.csv");
    os << "rho,distance,solver_residual\n";
    for (const LimitRow& r : rep.rows)
      os << r.rho << ',' << r.distance << ',' << r.solver_residual << '\n';
  }
  {
    std::ofstream ms = open_artifact(out, "limit.md");
    ms << "# limit: " << ex.preset.name << " toward the "
       << (ex.reference == LimitReference::Primal ? "primal" : "mixed")
       << " method\n\n- fitted slope: " << rep.slope << " over "
       << rep.points_used << " points\n";
  }
  if (ex.accept.contains("min_slope")) {
    double want = ex.accept.at("min_slope").get<double>();
    if (!(rep.slope >= want))
      throw AcceptanceFailure("limit slope is " + std::to_string(rep.slope) +
                              ", below " + std::to_string(want));
  }
  return 0;
}

int run_zoo(const Experiment& ex, const std::filesystem::path& out) {
  std::ofstream os = open_artifact(out, "zoo.csv");
  os << "preset,label,conditions,dofs,beta\n";
  std::ostringstream md;
  md << "# method zoo, order k = " << ex.k << "\n\n"
     << "| preset | regime | conditions | beta |\n"
     << "| --- | --- | --- | --- |\n";
  for (const std::string& name : preset_names()) {
    Preset pr = make_preset(name, ex.k);
    std::vector<std::string> violated = check_conditions(pr.config);
    std::string cond = violated.empty() ? "ok" : violated.front();
    for (size_t i = 1; i < violated.size(); ++i) cond += "; " + violated[i];
    Mesh2D mesh = make_mesh(ex, 2);
    Spaces spaces = build_spaces(mesh, pr.config);
    BlockSystem sys = assemble_system(mesh, spaces, zero_data(), pr.config);
    NormMatrices norms =
        assemble_norm_grams(mesh, spaces, pr.config, pr.config.regime);
    InfSupReport rep = infsup_constant(sys, norms);
    os << name << ',' << pr.label << ",\"" << cond << "\"," << spaces.total
       << ',' << rep.beta << '\n';
    md << "| " << name << " | " << pr.label << " | " << cond << " | "
       << std::setprecision(6) << rep.beta << " |\n";
  }
  std::ofstream ms = open_artifact(out, "zoo.md");
  ms << md.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xg: 4-field extended Galerkin experiment runner"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  for (const char* name : {"solve", "eoc", "infsup", "limit", "zoo"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON experiment config")
        ->required();
    sub->add_option("--out", out_dir, "output directory for artifacts")
        ->required();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (const char* env = std::getenv("XG_THREADS")) {
    int t = std::atoi(env);
    if (t < 1) {
      std::cerr << "XG_THREADS must be a positive integer\n";
      return 2;
    }
#ifdef _OPENMP
    omp_set_num_threads(t);
#endif
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    Experiment ex = parse_config(command, config_path);
    validate_conditions(ex);
    std::filesystem::path out(out_dir);
    std::filesystem::create_directories(out);
    if (command == "solve") return run_solve(ex, out);
    if (command == "eoc") return run_eoc(ex, out);
    if (command == "infsup") return run_infsup(ex, out);
    if (command == "limit") return run_limit(ex, out);
    return run_zoo(ex, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const AcceptanceFailure& e) {
    std::cerr << "acceptance failure: " << e.what() << '\n';
    return 1;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
