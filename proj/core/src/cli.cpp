#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "shellvi/errors.hpp"
#include "shellvi/experiments.hpp"
#include "shellvi/system_io.hpp"

namespace shellvi {

namespace {

struct CommonArgs {
  std::string config;
  std::string output;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, CommonArgs& args, bool config_required) {
  auto* opt = sub->add_option("-c,--config", args.config, "Experiment config file");
  if (config_required) opt->required();
  sub->add_option("-o,--output", args.output, "Report path (default: config key 'output', else stdout)");
  sub->add_option("-s,--set", args.overrides, "Override a config entry, key=value");
}

Config load_config(const CommonArgs& args) {
  Config c = Config::load(args.config);
  for (const std::string& kv : args.overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::Config, "override must read key=value: " + kv);
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return c;
}

void emit(const CommonArgs& args, const Config* cfg, const std::string& text) {
  std::string path = args.output;
  if (path.empty() && cfg && cfg->has("output")) path = cfg->get_string("output");
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  write_file_atomic(path, text);
  std::cerr << "wrote " << path << "\n";
}

nlohmann::json certificate(const VISolution& s) {
  nlohmann::json j;
  j["kkt_residual"] = s.kkt_residual;
  j["certified"] = s.certified;
  j["active"] = s.active.size();
  j["iterations"] = s.iterations;
  j["polish_iterations"] = s.polish_iterations;
  j["energy"] = s.energy;
  return j;
}

std::string solution_json(const VISolution& s) {
  nlohmann::json j;
  j["x"] = std::vector<double>(s.x.data(), s.x.data() + s.x.size());
  j["certificate"] = certificate(s);
  return j.dump(2) + "\n";
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Obstacle problems for linearly elastic shells"};
  app.require_subcommand(1);

  CommonArgs geo_args, exp_args, s2_args, s3_args, sweep_args, koiter_args, korn_args, sig_args, den_args;
  int grid = 20;
  auto* geo = app.add_subcommand("geometry", "Sample the chart and check the geometric hypotheses");
  add_common(geo, geo_args, true);
  geo->add_option("--grid", grid, "Grid cells per direction");

  auto* exp = app.add_subcommand("expansion-check", "Residuals of the small-thickness expansions");
  add_common(exp, exp_args, true);

  std::string system2, system3, dump2, dump3;
  double eps3 = -1.0;
  auto* s2 = app.add_subcommand("solve2d", "Solve a 2D system file or the limit membrane system of a config");
  add_common(s2, s2_args, false);
  s2->add_option("--system", system2, "System file in the triplet format");
  s2->add_option("--dump", dump2, "Write the assembled system to this path");
  auto* s3 = app.add_subcommand("solve3d", "Solve a 3D system file or the scaled 3D system of a config");
  add_common(s3, s3_args, false);
  s3->add_option("--system", system3, "System file in the triplet format");
  s3->add_option("--dump", dump3, "Write the assembled system to this path");
  s3->add_option("--eps", eps3, "Thickness parameter (default: first entry of 'eps')");

  auto* sweep = app.add_subcommand("sweep", "3D to 2D convergence sweep over eps");
  add_common(sweep, sweep_args, true);
  auto* koiter = app.add_subcommand("koiter", "Koiter against the limit problem over eps");
  add_common(koiter, koiter_args, true);
  auto* korn = app.add_subcommand("korn", "Smallest strain eigenvalue against eps");
  add_common(korn, korn_args, true);
  auto* sig = app.add_subcommand("signorini", "Face and full confinement of lifted fields");
  add_common(sig, sig_args, true);
  int trials = 100;
  auto* den = app.add_subcommand("density", "Truncation, cutoff and mollification pipeline");
  add_common(den, den_args, true);
  den->add_option("--trials", trials, "Random fields for the strip inequality");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (geo->parsed()) {
      const Config c = load_config(geo_args);
      const ExperimentConfig x = experiment_config(c);
      const Chart chart = x.make_chart();
      const HalfSpace hs(x.q);
      emit(geo_args, &c, geometry_csv(chart, hs, grid));
      const HypothesisReport h = check_geometry_hypotheses(chart, hs);
      std::cerr << "margin " << h.margin << " alignment " << h.alignment << "\n";
    } else if (exp->parsed()) {
      const Config c = load_config(exp_args);
      const ExperimentConfig x = experiment_config(c);
      emit(exp_args, &c, expansion_csv(x.make_chart(), x.lame, c.get_list("expansion_eps", {1e-1, 1e-2, 1e-3})));
    } else if (s2->parsed() || s3->parsed()) {
      const bool three = s3->parsed();
      const CommonArgs& a = three ? s3_args : s2_args;
      const std::string& sys = three ? system3 : system2;
      const std::string& dump = three ? dump3 : dump2;
      QuadraticProgram qp;
      SolverConfig solver;
      Config c;
      if (!sys.empty()) {
        qp = load_system(sys);
      } else if (!a.config.empty()) {
        c = load_config(a);
        const ExperimentConfig x = experiment_config(c);
        solver = x.solver;
        const Chart chart = x.make_chart();
        const HalfSpace hs(x.q);
        check_geometry_hypotheses(chart, hs);
        const Mesh2D mesh = build_mesh2d(x.bounds, x.nx, x.ny, x.clamped);
        AssembledSystem s = three
            ? assemble_3d_system(build_mesh3d(mesh, x.nz), chart, x.lame, eps3 > 0 ? eps3 : x.eps.front(),
                                 x.force(), hs, x.options3d)
            : assemble_membrane_system(mesh, chart, x.lame, x.force(), hs);
        if (!x.obstacle) s.qp.constraints.rows.clear();
        qp = s.qp;
      } else {
        throw Error(ErrorKind::InvalidArgument, "either --system or --config is required");
      }
      if (!dump.empty()) save_system(dump, qp);
      const VISolution sol = solve_vi(qp, solver);
      emit(a, a.config.empty() ? nullptr : &c, solution_json(sol));
      if (!sol.certified) {
        std::cerr << "error: solution not certified, kkt residual " << sol.kkt_residual << "\n";
        return 1;
      }
    } else if (sweep->parsed() || koiter->parsed()) {
      const bool k = koiter->parsed();
      const CommonArgs& a = k ? koiter_args : sweep_args;
      const Config c = load_config(a);
      const ExperimentConfig x = experiment_config(c);
      const SweepReport rep = k ? run_koiter_compare(x) : run_sweep(x);
      emit(a, &c, rep.csv());
      if (!rep.certified) {
        std::cerr << "error: at least one solve was not certified\n";
        return 1;
      }
    } else if (korn->parsed()) {
      const Config c = load_config(korn_args);
      const KornReport rep = run_korn_probe(experiment_config(c));
      emit(korn_args, &c, rep.csv());
    } else if (sig->parsed()) {
      const Config c = load_config(sig_args);
      const SignoriniReport rep = run_signorini_check(experiment_config(c));
      emit(sig_args, &c, rep.json());
      if (!rep.ok()) return 1;
    } else if (den->parsed()) {
      const Config c = load_config(den_args);
      emit(den_args, &c, run_density(experiment_config(c), trials).csv());
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::HypothesisFailed ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace shellvi
