#include "stoc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"

namespace stoc::experiments {

namespace {
constexpr double kPi = std::numbers::pi;

std::string path_join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}
}  // namespace

std::size_t RunConfig::temporal_intervals(std::size_t level_n) const {
  if (nt_override) return *nt_override;
  if (ht_rule == HtRule::hx2) return level_n * level_n;
  return level_n;
}

double RunConfig::rho_for(std::size_t level_n) const {
  if (rho) return *rho;
  const double hx = 1.0 / static_cast<double>(level_n);
  return hx * hx;
}

TargetFunction builtin_target(const std::string& name, int dim) {
  if (name == "sines") {
    return [dim](const std::array<double, 3>& x, double t) {
      double v = std::sin(kPi * t);
      for (int a = 0; a < dim; ++a) v *= std::sin(kPi * x[static_cast<std::size_t>(a)]);
      return v;
    };
  }
  if (name == "one") {
    return [](const std::array<double, 3>&, double) { return 1.0; };
  }
  if (name == "zero") {
    return [](const std::array<double, 3>&, double) { return 0.0; };
  }
  std::string known;
  for (const auto& k : builtin_target_names()) known += (known.empty() ? "" : ", ") + k;
  throw std::invalid_argument("unknown target '" + name + "' (known: " + known + ")");
}

std::vector<std::string> builtin_target_names() { return {"sines", "one", "zero"}; }

ProblemSetup::ProblemSetup(const RunConfig& config, std::size_t level_n)
    : op(SimplicialMesh::structured(config.dim, level_n), TemporalMesh(1.0, config.temporal_intervals(level_n)),
         config.rho_for(level_n), config.op_options),
      load(op.assemble_load(builtin_target(config.target, config.dim), config.load_order_t, config.load_order_x)) {}

UnconstrainedSolve solve_unconstrained(const SystemOperator& op, std::span<const double> f, double cg_tol) {
  const JacobiPreconditioner precond = JacobiPreconditioner::mass_diagonal(op.temporal_mass(), op.spatial_mass());
  auto [u, report] = pcg_solve(
      [&](std::span<const double> in, std::span<double> out) { op.apply(in, out); }, f, precond, cg_tol,
      default_max_iterations(f.size()));
  return {std::move(u), std::move(report)};
}

double l2q_error(const SystemOperator& op, std::span<const double> u, const TargetFunction& target,
                 std::optional<std::pair<double, double>> bounds, int quad_order) {
  const SimplicialMesh& mesh = op.spatial_mesh();
  const TemporalMesh& tmesh = op.temporal_mesh();
  const int d = mesh.dim();
  const std::size_t n_t = tmesh.n_dofs;
  const std::size_t m = op.layout().m_x;
  const double h_t = tmesh.dt();

  const SimplexQuadrature trule = simplex_quadrature(1, quad_order);
  const SimplexQuadrature xrule = simplex_quadrature(d, quad_order);
  double dfact = 1.0;
  for (int a = 2; a <= d; ++a) dfact *= a;

  double total = 0.0;
  for (std::size_t l = 1; l <= n_t; ++l) {
    const double t0 = tmesh.node(l - 1);
    for (std::size_t tq = 0; tq < trule.points.size(); ++tq) {
      const double tau = trule.points[tq][1];
      const double t = t0 + tau * h_t;
      const double wt = trule.weights[tq] * h_t;
      const double phi_left = 1.0 - tau;
      const double phi_right = tau;
      for (std::size_t s = 0; s < mesh.num_simplices(); ++s) {
        const auto verts = mesh.simplex(s);
        const double scale = mesh.simplex_volume(s) * dfact;
        for (std::size_t q = 0; q < xrule.points.size(); ++q) {
          std::array<double, 3> x = {0.0, 0.0, 0.0};
          double uh = 0.0;
          for (int vtx = 0; vtx <= d; ++vtx) {
            const double bary = xrule.points[q][static_cast<std::size_t>(vtx)];
            const auto& vc = mesh.vertex(static_cast<std::size_t>(verts[static_cast<std::size_t>(vtx)]));
            for (int a = 0; a < d; ++a) x[static_cast<std::size_t>(a)] += bary * vc[static_cast<std::size_t>(a)];
            const std::int64_t dof = mesh.dof_of_vertex(static_cast<std::size_t>(verts[static_cast<std::size_t>(vtx)]));
            if (dof < 0) continue;
            double nodal = phi_right * u[(l - 1) * m + static_cast<std::size_t>(dof)];
            if (l >= 2) nodal += phi_left * u[(l - 2) * m + static_cast<std::size_t>(dof)];
            uh += bary * nodal;
          }
          double ubar = target(x, t);
          if (bounds) ubar = std::clamp(ubar, bounds->first, bounds->second);
          const double diff = uh - ubar;
          total += wt * xrule.weights[q] * scale * diff * diff;
        }
      }
    }
  }
  return std::sqrt(total);
}

std::vector<std::pair<double, double>> extract_trajectory(const SimplicialMesh& spatial_mesh,
                                                          const TemporalMesh& temporal_mesh,
                                                          std::span<const double> u,
                                                          const std::array<double, 3>& point) {
  const int d = spatial_mesh.dim();
  for (int a = 0; a < d; ++a)
    if (point[static_cast<std::size_t>(a)] <= 0.0 || point[static_cast<std::size_t>(a)] >= 1.0)
      throw std::invalid_argument("extract_trajectory: point must lie inside (0,1)^d");
  const std::size_t n_t = temporal_mesh.n_dofs;
  const std::size_t m = spatial_mesh.num_interior_dofs();
  std::vector<std::pair<double, double>> trajectory;
  trajectory.reserve(n_t + 1);
  trajectory.emplace_back(0.0, 0.0);  // homogeneous initial condition
  for (std::size_t j = 1; j <= n_t; ++j) {
    const std::span<const double> slice = u.subspan((j - 1) * m, m);
    trajectory.emplace_back(temporal_mesh.node(j), evaluate_fe_function(spatial_mesh, slice, point));
  }
  return trajectory;
}

std::vector<std::pair<double, double>> extract_trajectory(const SystemOperator& op, std::span<const double> u,
                                                          const std::array<double, 3>& point) {
  return extract_trajectory(op.spatial_mesh(), op.temporal_mesh(), u, point);
}

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "n,dof,NewtonIterations,TotalCG,relCG\n";
  char line[160];
  for (const auto& r : records) {
    std::snprintf(line, sizeof(line), "%zu,%zu,%zu,%zu,%.1f\n", r.n, r.dof, r.newton_iterations, r.total_cg, r.rel_cg);
    out << line;
  }
}

void write_trajectory_csv(const std::string& path, const std::vector<std::pair<double, double>>& trajectory) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "t,u\n";
  char line[96];
  for (const auto& [t, v] : trajectory) {
    std::snprintf(line, sizeof(line), "%.12g,%.12g\n", t, v);
    out << line;
  }
}

void write_rates_csv(const std::string& path, const std::vector<RateRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "n,l2q_error,order\n";
  char line[96];
  for (const auto& r : rows) {
    if (r.order)
      std::snprintf(line, sizeof(line), "%zu,%.12e,%.3f\n", r.n, r.error, *r.order);
    else
      std::snprintf(line, sizeof(line), "%zu,%.12e,\n", r.n, r.error);
    out << line;
  }
}

namespace {

std::vector<std::size_t> sweep_levels(const RunConfig& config) {
  std::vector<std::size_t> levels;
  for (std::size_t n = config.n_min; n <= config.n; n *= 2) levels.push_back(n);
  if (levels.empty()) throw std::invalid_argument("empty refinement sweep: need n_min <= n");
  return levels;
}

void log_config(std::ostream& log, const RunConfig& config) {
  log << "# dim=" << config.dim << " target=" << config.target;
  if (config.constrained())
    log << " bounds=[" << *config.lower << "," << *config.upper << "]";
  else
    log << " bounds=none";
  log << " rho=" << (config.rho ? std::to_string(*config.rho) : std::string("auto(hx^2)"))
      << " ht_rule=" << (config.ht_rule == HtRule::hx ? "hx" : "hx2") << " omega=" << config.omega
      << " c=" << config.c << " newton_tol=" << config.newton_tol << " cg_tol=" << config.cg_tol
      << " threads=" << (config.threads > 0 ? config.threads : max_worker_threads()) << "\n";
  log << "# TotalCG counts every inner CG iteration performed, including iterations of damped steps\n";
}

}  // namespace

std::vector<ConvergenceRecord> run_constrained_experiment(const RunConfig& config, std::ostream& log) {
  if (!config.constrained()) throw std::invalid_argument("run_constrained_experiment: bounds required");
  if (config.threads > 0) set_worker_threads(config.threads);
  std::filesystem::create_directories(config.out_dir);

  log_config(log, config);
  const std::vector<std::size_t> levels = sweep_levels(config);
  std::vector<ConvergenceRecord> records;

  for (std::size_t idx = 0; idx < levels.size(); ++idx) {
    const std::size_t n = levels[idx];
    log << "level " << idx << ": n=" << n << " n_t=" << config.temporal_intervals(n)
        << " rho=" << config.rho_for(n) << "\n";
    ProblemSetup setup(config, n);
    const std::size_t dof = setup.op.layout().size();

    const BoxConstraints constraints = BoxConstraints::constant(dof, *config.lower, *config.upper);
    NewtonConfig newton_config;
    newton_config.c = config.c;
    newton_config.omega = config.omega;
    newton_config.increment_tol = config.newton_tol;
    newton_config.cg_rel_tol = config.cg_tol;
    newton_config.max_newton = config.max_newton;

    const NewtonResult result = newton_solve(setup.op, setup.load, constraints, newton_config);
    for (std::size_t k = 0; k < result.history.size(); ++k) {
      const auto& rec = result.history[k];
      log << "  newton " << k << ": lower_active=" << rec.lower_active << " upper_active=" << rec.upper_active
          << " inactive=" << rec.inactive << " cg=" << rec.cg_iterations << " increment=" << rec.increment << "\n";
    }
    if (!result.converged) {
      log << "  level aborted: Newton did not converge within " << config.max_newton << " iterations\n";
      continue;
    }

    ConvergenceRecord record;
    record.n = n;
    record.dof = dof;
    record.newton_iterations = result.history.size();
    record.total_cg = result.total_cg_iterations();
    record.rel_cg = record.newton_iterations > 0
                        ? static_cast<double>(record.total_cg) / static_cast<double>(record.newton_iterations)
                        : 0.0;
    records.push_back(record);

    const auto trajectory = extract_trajectory(setup.op, result.u, config.point);
    const std::string traj_name = "trajectory_constrained_" + std::to_string(config.dim) + "d_refinement_" +
                                  std::to_string(idx) + ".csv";
    write_trajectory_csv(path_join(config.out_dir, traj_name), trajectory);
    log << "  converged: newton_iterations=" << record.newton_iterations << " total_cg=" << record.total_cg
        << " trajectory=" << traj_name << "\n";
  }

  write_convergence_csv(path_join(config.out_dir, "convergence_hist.csv"), records);
  return records;
}

std::vector<RateRow> run_unconstrained_convergence(const RunConfig& config, std::ostream& log) {
  if (config.threads > 0) set_worker_threads(config.threads);
  std::filesystem::create_directories(config.out_dir);

  log_config(log, config);
  const TargetFunction target = builtin_target(config.target, config.dim);
  std::vector<RateRow> rows;

  for (const std::size_t n : sweep_levels(config)) {
    ProblemSetup setup(config, n);
    const UnconstrainedSolve solve = solve_unconstrained(setup.op, setup.load, config.cg_tol);
    if (!solve.report.converged) {
      log << "level n=" << n << " aborted: CG did not converge\n";
      continue;
    }
    RateRow row;
    row.n = n;
    row.error = l2q_error(setup.op, solve.u, target, std::nullopt, config.error_order);
    if (!rows.empty() && rows.back().error > 0.0 && row.error > 0.0)
      row.order = std::log2(rows.back().error / row.error);
    log << "level n=" << n << ": dof=" << setup.op.layout().size() << " cg=" << solve.report.iterations
        << " l2q_error=" << row.error;
    if (row.order) log << " order=" << *row.order;
    log << "\n";
    rows.push_back(row);
  }

  write_rates_csv(path_join(config.out_dir, "unconstrained_rates.csv"), rows);
  return rows;
}

void save_solution(const std::string& path, const RunConfig& config, std::size_t level_n,
                   std::span<const double> u) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  char line[128];
  std::snprintf(line, sizeof(line), "stoc-solution 1\ndim %d n %zu nt %zu rho %.17g\n", config.dim, level_n,
                config.temporal_intervals(level_n), config.rho_for(level_n));
  out << line;
  for (const double v : u) {
    std::snprintf(line, sizeof(line), "%.17g\n", v);
    out << line;
  }
}

LoadedSolution load_solution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string magic, version;
  in >> magic >> version;
  if (magic != "stoc-solution" || version != "1") throw std::runtime_error(path + ": not a stoc solution file");
  LoadedSolution sol;
  std::string key;
  in >> key >> sol.dim >> key >> sol.n >> key >> sol.n_t >> key >> sol.rho;
  double v;
  while (in >> v) sol.values.push_back(v);
  const std::size_t m = [&] {
    std::size_t c = 1;
    for (int a = 0; a < sol.dim; ++a) c *= sol.n - 1;
    return c;
  }();
  if (sol.values.size() != m * sol.n_t) throw std::runtime_error(path + ": coefficient count mismatch");
  return sol;
}

namespace {

struct CliTextOptions {
  std::string rho_text, lower_text, upper_text, point_text, ht_text;
  std::size_t nt_value = 0;  // 0: no override
};

void add_common_options(CLI::App* cmd, RunConfig& config, CliTextOptions& text) {
  cmd->set_config("--config", "", "read key = value defaults from a file (flags win)");
  cmd->allow_config_extras(CLI::config_extras_mode::error);
  cmd->add_option("--dim", config.dim, "spatial dimension (1, 2 or 3)")->check(CLI::Range(1, 3));
  cmd->add_option("--n", config.n, "cells per axis (sweep maximum for `convergence`)")->check(CLI::PositiveNumber);
  cmd->add_option("--n-min", config.n_min, "first level of a refinement sweep")->check(CLI::PositiveNumber);
  cmd->add_option("--nx", config.n, "alias for --n");
  cmd->add_option("--nt", text.nt_value, "override the number of temporal intervals")->check(CLI::PositiveNumber);
  cmd->add_option("--rho", text.rho_text, "regularization: 'auto' (= hx^2) or a nonnegative value");
  cmd->add_option("--lower", text.lower_text, "lower state bound or 'none'");
  cmd->add_option("--upper", text.upper_text, "upper state bound or 'none'");
  cmd->add_option("--target", config.target, "builtin target name");
  cmd->add_option("--omega", config.omega, "Newton underrelaxation factor")->check(CLI::Range(1e-6, 1.0));
  cmd->add_option("--c", config.c, "complementarity parameter")->check(CLI::PositiveNumber);
  cmd->add_option("--newton-tol", config.newton_tol, "Newton increment tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--cg-tol", config.cg_tol, "CG relative residual tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--max-newton", config.max_newton, "Newton iteration cap");
  cmd->add_option("--point", text.point_text, "trajectory point, comma separated coordinates");
  cmd->add_option("--threads", config.threads, "worker threads (0: library default)");
  cmd->add_option("--out", config.out_dir, "output directory");
  cmd->add_option("--ht-rule", text.ht_text, "temporal mesh coupling: hx (n_t = n) or hx2 (h_t = hx^2)")
      ->check(CLI::IsMember({"hx", "hx2"}));
}

void finalize_config(RunConfig& config, const CliTextOptions& text) {
  const std::string& rho_text = text.rho_text;
  const std::string& lower_text = text.lower_text;
  const std::string& upper_text = text.upper_text;
  const std::string& point_text = text.point_text;
  const std::string& ht_text = text.ht_text;
  if (text.nt_value > 0) config.nt_override = text.nt_value;
  if (!rho_text.empty()) {
    if (rho_text == "auto") {
      config.rho.reset();
    } else {
      double v = 0.0;
      try {
        v = std::stod(rho_text);
      } catch (const std::exception&) {
        throw CLI::ValidationError("--rho", "expected a number or 'auto' (got " + rho_text + ")");
      }
      if (v < 0.0) throw CLI::ValidationError("--rho", "rho must be nonnegative (got " + rho_text + ")");
      config.rho = v;
    }
  }
  auto parse_bound = [](const std::string& text, std::optional<double>& slot, const char* flag) {
    if (text.empty()) return;
    if (text == "none") {
      slot.reset();
      return;
    }
    try {
      slot = std::stod(text);
    } catch (const std::exception&) {
      throw CLI::ValidationError(flag, "expected a number or 'none' (got " + text + ")");
    }
  };
  parse_bound(lower_text, config.lower, "--lower");
  parse_bound(upper_text, config.upper, "--upper");
  if (config.lower.has_value() != config.upper.has_value())
    throw CLI::ValidationError("--lower/--upper", "set both bounds or both to 'none'");
  if (!ht_text.empty()) config.ht_rule = ht_text == "hx2" ? HtRule::hx2 : HtRule::hx;
  if (!point_text.empty()) {
    std::array<double, 3> p = {0.0, 0.0, 0.0};
    std::stringstream ss(point_text);
    std::string item;
    int count = 0;
    while (std::getline(ss, item, ',')) {
      if (count >= 3) throw CLI::ValidationError("--point", "at most three coordinates");
      try {
        p[static_cast<std::size_t>(count++)] = std::stod(item);
      } catch (const std::exception&) {
        throw CLI::ValidationError("--point", "expected comma separated numbers (got " + point_text + ")");
      }
    }
    if (count != config.dim)
      throw CLI::ValidationError("--point", "expected " + std::to_string(config.dim) + " coordinates");
    config.point = p;
  }
}

struct CliState {
  RunConfig config;
  CliTextOptions text;
  std::string solution_file;
  CLI::App* solve = nullptr;
  CLI::App* convergence = nullptr;
  CLI::App* trajectory = nullptr;
};

std::unique_ptr<CLI::App> build_app(CliState& state) {
  auto app = std::make_unique<CLI::App>("space-time optimal control of the heat equation with state constraints");
  app->require_subcommand(1);
  // options live on the main app and are reachable after the subcommand name;
  // config-file keys are then flat `key = value` pairs matching the flags
  app->fallthrough(true);
  add_common_options(app.get(), state.config, state.text);
  state.solve = app->add_subcommand("solve", "one solve at a fixed refinement; writes solution and trajectory");
  state.convergence = app->add_subcommand("convergence", "refinement sweep; writes convergence_hist.csv");
  state.trajectory = app->add_subcommand("trajectory", "post-process a saved solution into a trajectory CSV");
  state.trajectory->add_option("--solution", state.solution_file, "solution file written by `solve`")
      ->required()
      ->check(CLI::ExistingFile);
  return app;
}

}  // namespace

ParsedCommandLine parse_command_line(const std::vector<std::string>& args) {
  CliState state;
  auto app = build_app(state);
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  app->parse(reversed);
  finalize_config(state.config, state.text);
  ParsedCommandLine parsed;
  parsed.config = state.config;
  parsed.solution_file = state.solution_file;
  if (state.solve->parsed()) parsed.command = "solve";
  if (state.convergence->parsed()) parsed.command = "convergence";
  if (state.trajectory->parsed()) parsed.command = "trajectory";
  return parsed;
}

namespace {

int run_solve(const RunConfig& config) {
  if (config.threads > 0) set_worker_threads(config.threads);
  std::filesystem::create_directories(config.out_dir);
  std::ofstream log(path_join(config.out_dir, "run.log"));
  log_config(log, config);

  ProblemSetup setup(config, config.n);
  const std::size_t dof = setup.op.layout().size();
  std::cout << "dim=" << config.dim << " n=" << config.n << " n_t=" << config.temporal_intervals(config.n)
            << " dof=" << dof << " eigenbasis="
            << (setup.op.eigenbasis().mode() == EigenbasisMode::fast_sine ? "fast-sine" : "dense") << "\n";

  std::vector<double> u;
  if (config.constrained()) {
    const BoxConstraints constraints = BoxConstraints::constant(dof, *config.lower, *config.upper);
    NewtonConfig newton_config;
    newton_config.c = config.c;
    newton_config.omega = config.omega;
    newton_config.increment_tol = config.newton_tol;
    newton_config.cg_rel_tol = config.cg_tol;
    newton_config.max_newton = config.max_newton;
    const NewtonResult result = newton_solve(setup.op, setup.load, constraints, newton_config);
    for (std::size_t k = 0; k < result.history.size(); ++k) {
      const auto& rec = result.history[k];
      log << "newton " << k << ": lower_active=" << rec.lower_active << " upper_active=" << rec.upper_active
          << " inactive=" << rec.inactive << " cg=" << rec.cg_iterations << " increment=" << rec.increment << "\n";
    }
    if (!result.converged) {
      std::cerr << "Newton did not converge within " << config.max_newton << " iterations\n";
      return 1;
    }
    std::cout << "newton_iterations=" << result.history.size() << " total_cg=" << result.total_cg_iterations()
              << "\n";
    u = result.u;
  } else {
    const UnconstrainedSolve solve = solve_unconstrained(setup.op, setup.load, config.cg_tol);
    if (!solve.report.converged) {
      std::cerr << "CG did not converge\n";
      return 1;
    }
    std::cout << "cg_iterations=" << solve.report.iterations << " rel_residual=" << solve.report.rel_residual
              << "\n";
    u = solve.u;
  }

  const double error = l2q_error(setup.op, u, builtin_target(config.target, config.dim),
                                 config.constrained()
                                     ? std::make_optional(std::make_pair(*config.lower, *config.upper))
                                     : std::nullopt,
                                 config.error_order);
  std::cout << "l2q_error_vs_projected_target=" << error << "\n";

  save_solution(path_join(config.out_dir, "solution.txt"), config, config.n, u);
  write_trajectory_csv(path_join(config.out_dir, "trajectory.csv"), extract_trajectory(setup.op, u, config.point));
  std::cout << "wrote solution.txt, trajectory.csv, run.log to " << config.out_dir << "\n";
  return 0;
}

int run_convergence(const RunConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  std::ofstream log(path_join(config.out_dir, "run.log"));
  if (config.constrained()) {
    const auto records = run_constrained_experiment(config, log);
    std::cout << "n,dof,NewtonIterations,TotalCG,relCG\n";
    for (const auto& r : records) {
      char line[160];
      std::snprintf(line, sizeof(line), "%zu,%zu,%zu,%zu,%.1f\n", r.n, r.dof, r.newton_iterations, r.total_cg,
                    r.rel_cg);
      std::cout << line;
    }
    std::cout << "wrote convergence_hist.csv and trajectory CSVs to " << config.out_dir << "\n";
  } else {
    const auto rows = run_unconstrained_convergence(config, log);
    std::cout << "n,l2q_error,order\n";
    for (const auto& r : rows) {
      char line[96];
      if (r.order)
        std::snprintf(line, sizeof(line), "%zu,%.6e,%.3f\n", r.n, r.error, *r.order);
      else
        std::snprintf(line, sizeof(line), "%zu,%.6e,\n", r.n, r.error);
      std::cout << line;
    }
    std::cout << "wrote unconstrained_rates.csv to " << config.out_dir << "\n";
  }
  return 0;
}

int run_trajectory(const RunConfig& config, const std::string& solution_file) {
  const LoadedSolution sol = load_solution(solution_file);
  const SimplicialMesh mesh = SimplicialMesh::structured(sol.dim, sol.n);
  const TemporalMesh tmesh(1.0, sol.n_t);
  std::array<double, 3> point = config.point;
  const auto trajectory = extract_trajectory(mesh, tmesh, sol.values, point);
  std::filesystem::create_directories(config.out_dir);
  const std::string out_name = path_join(config.out_dir, "trajectory.csv");
  write_trajectory_csv(out_name, trajectory);
  std::cout << "wrote " << out_name << " (" << trajectory.size() << " samples)\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CliState state;
  auto app = build_app(state);
  try {
    app->parse(argc, argv);
    finalize_config(state.config, state.text);
  } catch (const CLI::ParseError& e) {
    return app->exit(e);
  }
  try {
    if (state.solve->parsed()) return run_solve(state.config);
    if (state.convergence->parsed()) return run_convergence(state.config);
    if (state.trajectory->parsed()) return run_trajectory(state.config, state.solution_file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace stoc::experiments
