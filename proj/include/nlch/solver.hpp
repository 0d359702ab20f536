#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nlch/energy.hpp"

namespace nlch {

enum class StepRule { barzilai_borwein, fixed };

struct SolverConfig {
  int max_iters = 20000;
  // Spectral preconditioner W''(±1)/ε + 4εm DᵀD (see minimize).
  bool precondition = true;
  // Stop when max|g/ω| <= grad_tol (1 + |F|) over free nodes.
  double grad_tol = 1e-7;
  StepRule step_rule = StepRule::barzilai_borwein;
  double fixed_step = 1e-3;
  std::optional<double> clamp;  // project onto [-clamp, clamp] after each step
  std::uint64_t seed = 0;
  // Record every k-th iteration in the trace (the last one is always kept).
  int trace_every = 1;

  void validate() const;
};

// Nodes with lo <= x·normal <= hi are held at `value`.
struct Pin {
  Vec2 normal{1.0, 0.0};
  double lo = 0.0;
  double hi = 0.0;
  double value = 0.0;
};

// free: no pins. profile: u = ±1 where ±x·ν >= halfwidth; tangential periodicity
// comes from the periodic axes of the grid. Extra pins may be added to either kind.
struct ConstraintSpec {
  enum class Kind { free, profile };
  Kind kind = Kind::free;
  Vec2 normal{1.0, 0.0};
  double halfwidth = 0.5;
  std::vector<Pin> pins;

  static ConstraintSpec free_field() { return {}; }
  static ConstraintSpec profile(const Vec2& nu, double halfwidth);
};

// Pinned node values (NaN for free nodes).
std::vector<double> pinned_values(const Grid& grid, const ConstraintSpec& cons);
Field project_constraints(const Field& f, const ConstraintSpec& cons);
// Throws ConstraintError naming the first violating node.
void check_constraints(const Field& f, const ConstraintSpec& cons);

struct TraceRow {
  int iter = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

struct MinimizeResult {
  Field field;
  EnergyReport report;
  std::vector<TraceRow> trace;
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;
  std::string stop_reason;
};

// Barzilai-Borwein descent with Armijo backtracking on the free nodes. The search
// direction is -P^{-1}(g/ω), where P approximates the Hessian by its well curvature
// plus the high-frequency limit of the nonlocal term; P is diagonal in Fourier
// space on the (padded) index grid.
MinimizeResult minimize(const Field& f0, const EnergyModel& model, const ConstraintSpec& cons,
                        const SolverConfig& cfg);

std::string trace_csv(const std::vector<TraceRow>& trace);

}  // namespace nlch
