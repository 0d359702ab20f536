#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nlch/energy.hpp"
#include "nlch/solver.hpp"

namespace nlch {

// Rational normal (p, q)/|(p, q)| with gcd(p, q) = 1. In one dimension q = 0, p = ±1.
struct LatticeDirection {
  int p = 1;
  int q = 0;

  Vec2 unit() const;
  LatticeDirection opposite() const { return {-p, -q}; }
};

struct CellResolution {
  // Lattice nodes per ε: h <= ε / nodes_per_eps.
  double nodes_per_eps = 16.0;
  // n = 2: tangential nodes per period. The period is 1/j for the smallest integer j
  // giving h <= ε / nodes_per_eps; 0 keeps the full unit period.
  int tangential_nodes = 8;
  // Extra normal slack beyond 1/2 + kernel reach, in lattice spacings.
  int margin_cells = 4;
  // Cap on the kernel reach (relevant for kernels without compact support).
  double max_reach = 1.5;
  double mass_tol = 1e-6;
};

struct CellEnergy {
  double value = 0.0;
  // The profile is not within 1e-3 of ±1 just inside |x·ν| = 1/2: the transition is
  // squeezed by the pins.
  bool narrow_strip = false;
};

// Discretized cell problem for one (ν, ε): the strip |x·ν| <= 1/2 + reach + margin,
// tangentially periodic, pinned to ±1 where ±x·ν >= 1/2. Outside the strip u is
// constant, so ∇u vanishes there and every interaction with it is already zero on the
// strip grid. Energies are per unit tangential length.
class CellProblem {
 public:
  CellProblem(const Potential& potential, const Kernel& kernel, LatticeDirection dir,
              double epsilon, const CellResolution& res = {});

  const Grid& grid() const { return model_->grid(); }
  const EnergyModel& model() const { return *model_; }
  const ConstraintSpec& constraint() const { return constraint_; }
  Vec2 normal() const { return dir_.unit(); }
  LatticeDirection direction() const { return dir_; }
  double epsilon() const { return model_->epsilon(); }
  double halfwidth() const { return halfwidth_; }
  double tangential_period() const { return period_; }

  // tanh(x·ν/ε) with the pins applied.
  Field initial_profile() const;
  // Throws ConstraintError unless v is in the discrete X^ν.
  CellEnergy energy(const Field& v) const;
  bool narrow(const Field& v) const;

 private:
  LatticeDirection dir_;
  double halfwidth_ = 0.0;
  double period_ = 1.0;
  std::unique_ptr<EnergyModel> model_;
  ConstraintSpec constraint_;
};

struct ProfileSolution {
  Field profile;
  double energy = 0.0;
  bool converged = false;
  bool narrow_strip = false;
  int iterations = 0;
  std::string stop_reason;
};

ProfileSolution solve_profile(const CellProblem& cell, const SolverConfig& cfg);
ProfileSolution solve_profile(LatticeDirection dir, double epsilon, const Potential& p,
                              const Kernel& k, const CellResolution& res,
                              const SolverConfig& cfg);

// 8 log-spaced values in [0.02, 0.5].
std::vector<double> default_eps_grid();

struct PsiResult {
  LatticeDirection direction;
  Vec2 nu{1.0, 0.0};
  std::vector<double> eps_grid;
  std::vector<double> energies;
  std::vector<bool> converged;
  std::vector<bool> narrow;
  double psi = 0.0;
  double argmin_eps = 0.0;
  std::optional<Field> profile;
  double strip_halfwidth = 0.0;
  double tangential_period = 1.0;
};

struct PsiOptions {
  // Empty: default_eps_grid() followed by a refinement pass.
  std::vector<double> eps_grid;
  // Number of values added between the neighbours of the argmin (0 disables).
  int refine = 4;
};

// ψ(ν) = min over the ε sweep of the discrete cell minima.
PsiResult psi(LatticeDirection dir, const Potential& p, const Kernel& k, const PsiOptions& opts,
              const CellResolution& res, const SolverConfig& cfg);

// "nu_x,nu_y,epsilon,cell_energy,converged" rows, then a summary row with
// epsilon = "min" and cell_energy = ψ.
std::string psi_csv(const PsiResult& r);

std::vector<PsiResult> anisotropy_table(const std::vector<LatticeDirection>& dirs,
                                        const Potential& p, const Kernel& k,
                                        const PsiOptions& opts, const CellResolution& res,
                                        const SolverConfig& cfg);
// "nu_x,nu_y,p,q,psi"
std::string anisotropy_csv(const std::vector<PsiResult>& rows);

}  // namespace nlch
