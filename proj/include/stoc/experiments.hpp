#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stoc/newton.hpp"
#include "stoc/spacetime.hpp"

namespace stoc::experiments {

enum class HtRule { hx, hx2 };

struct RunConfig {
  int dim = 3;
  std::size_t n = 8;       // cells per axis (and max level of a sweep)
  std::size_t n_min = 2;   // first level of a sweep
  std::optional<std::size_t> nt_override;
  HtRule ht_rule = HtRule::hx;
  std::optional<double> rho;             // nullopt: auto, rho = h_x^2
  std::optional<double> lower = 0.0;     // nullopt: unconstrained
  std::optional<double> upper = 0.8;
  std::string target = "sines";
  double c = 1.0;
  double omega = 0.1;
  double newton_tol = 1e-3;
  double cg_tol = 1e-10;
  std::size_t max_newton = 200;
  int load_order_t = 3;
  int load_order_x = 2;
  int error_order = 5;
  std::array<double, 3> point = {0.51, 0.51, 0.51};
  int threads = 0;  // 0: library default
  std::string out_dir = ".";
  SystemOperatorOptions op_options;

  bool constrained() const { return lower.has_value() && upper.has_value(); }
  std::size_t temporal_intervals(std::size_t level_n) const;
  double rho_for(std::size_t level_n) const;
};

/// Builtin target registry; "sines" is the product Π_a sin(π x_a) · sin(π t).
TargetFunction builtin_target(const std::string& name, int dim);
std::vector<std::string> builtin_target_names();

/// Meshes + operator + load vector for one refinement level.
struct ProblemSetup {
  ProblemSetup(const RunConfig& config, std::size_t level_n);
  SystemOperator op;
  std::vector<double> load;
};

struct UnconstrainedSolve {
  std::vector<double> u;
  SolveReport report;
};
UnconstrainedSolve solve_unconstrained(const SystemOperator& op, std::span<const double> f, double cg_tol);

/// ‖u_h - P_K target‖_{L²(Q)} with P_K the pointwise clamp onto the constant
/// bounds (identity without bounds), by composite space-time quadrature.
double l2q_error(const SystemOperator& op, std::span<const double> u, const TargetFunction& target,
                 std::optional<std::pair<double, double>> bounds, int quad_order);

/// u_h(point, t_j) for all temporal nodes j = 0..N_t (zero at t = 0).
std::vector<std::pair<double, double>> extract_trajectory(const SimplicialMesh& spatial_mesh,
                                                          const TemporalMesh& temporal_mesh,
                                                          std::span<const double> u,
                                                          const std::array<double, 3>& point);
std::vector<std::pair<double, double>> extract_trajectory(const SystemOperator& op, std::span<const double> u,
                                                          const std::array<double, 3>& point);

struct ConvergenceRecord {
  std::size_t n = 0;
  std::size_t dof = 0;
  std::size_t newton_iterations = 0;
  std::size_t total_cg = 0;
  double rel_cg = 0.0;
};

/// Constrained sweep over n = n_min, 2 n_min, ..., n: solves, writes
/// convergence_hist.csv and one trajectory CSV per level into out_dir,
/// logs the per-iteration history.
std::vector<ConvergenceRecord> run_constrained_experiment(const RunConfig& config, std::ostream& log);

struct RateRow {
  std::size_t n = 0;
  double error = 0.0;
  std::optional<double> order;  // log2 of the previous/current error ratio
};

/// Unconstrained refinement study of ‖u - target‖_{L²(Q)}; writes
/// unconstrained_rates.csv into out_dir.
std::vector<RateRow> run_unconstrained_convergence(const RunConfig& config, std::ostream& log);

// Deterministic CSV helpers (fixed formats, byte-identical reruns).
void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRecord>& records);
void write_trajectory_csv(const std::string& path, const std::vector<std::pair<double, double>>& trajectory);
void write_rates_csv(const std::string& path, const std::vector<RateRow>& rows);

// Solution file (plain text): header with the discretization, then one
// coefficient per line.
void save_solution(const std::string& path, const RunConfig& config, std::size_t level_n,
                   std::span<const double> u);
struct LoadedSolution {
  int dim = 0;
  std::size_t n = 0;
  std::size_t n_t = 0;
  double rho = 0.0;
  std::vector<double> values;
};
LoadedSolution load_solution(const std::string& path);

struct ParsedCommandLine {
  std::string command;  // "solve", "convergence" or "trajectory"
  RunConfig config;
  std::string solution_file;  // trajectory input
};

/// CLI11-based parser shared by the CLI tool and the tests; flags override
/// config-file entries, unknown keys are rejected. Throws CLI::ParseError
/// with an actionable message on bad input.
ParsedCommandLine parse_command_line(const std::vector<std::string>& args);

/// Entry point used by the CLI binary; returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace stoc::experiments
