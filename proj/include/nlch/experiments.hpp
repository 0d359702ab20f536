#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nlch/cellproblem.hpp"

namespace nlch {

// Cell problem settings used wherever an experiment needs ψ as its oracle.
struct OracleConfig {
  PsiOptions psi;
  CellResolution resolution;
  // Skips the cell sweep when set.
  std::optional<double> psi_value;
};

// ψ(e₁) for the kernel's dimension (the 1D cell uses ν = +1).
PsiResult oracle_psi(const Potential& p, const Kernel& k, const OracleConfig& oc,
                     const SolverConfig& cfg);

// Pins for k transitions along axis 0 of [lo, hi]: slabs of width `width` at both
// ends and centred at lo + i (hi - lo)/k, alternating from -1 on the left.
ConstraintSpec transition_pins(int k, double lo, double hi, double width);
// -∏ tanh((m_i - x)/ε) over the midpoints m_i of the gaps between pinned slabs.
Field transition_guess(const Grid& g, int k, double lo, double hi, double width, double epsilon);
// Smallest gap between pinned slabs.
double pin_separation(int k, double lo, double hi, double width);

// 1D: the line [-halfwidth, halfwidth] with `nodes` nodes. 2D: the unit square with
// x fixed (nodes + 1 points) and y periodic (nodes points), interfaces x = const.
struct GammaScanConfig {
  int dim = 1;
  std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
  int transitions = 1;
  int nodes = 4096;
  double halfwidth = 2.0;
  double pin_width = 0.1;
  OracleConfig oracle;
  SolverConfig solver;
};

struct GammaRow {
  double epsilon = 0.0;
  double energy = 0.0;
  double predicted = 0.0;
  double ratio = 0.0;
  int transitions = 0;
  bool converged = false;
  int iterations = 0;
  // Separation between pins is below 10 ε γ_J.
  bool crowded = false;
  std::string status;
};

struct GammaScanResult {
  double psi = 0.0;
  double gamma_J = 0.0;
  std::vector<GammaRow> rows;
  std::vector<Field> minimizers;
};

GammaScanResult gamma_scan(const GammaScanConfig& cfg, const Potential& p, const Kernel& k);
// "epsilon,energy,predicted,ratio,transitions,converged,iterations,status"
std::string gamma_csv(const GammaScanResult& r);

enum class SliceDomain { interval, square, disk };
enum class SliceIntegrand { constant, gaussian, separable };

SliceDomain parse_slice_domain(const std::string& s);
SliceIntegrand parse_slice_integrand(const std::string& s);
std::string to_string(SliceDomain d);
std::string to_string(SliceIntegrand g);

struct SliceResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  // Lines that miss E; they contribute zero to the estimator.
  std::size_t misses = 0;
};

// LHS ∬_{E×E} g by tensor quadrature; RHS (1/2)∫_{S^{n-1}}∫_{Π^ξ}∬ g(z+sξ, z+tξ)|t-s|^{n-1}
// by Monte Carlo over (ξ, z) with Gauss-Legendre in (s, t). Interval: E = (0,1);
// square: (0,1)²; disk: the unit disk. The result does not depend on the thread count.
SliceResult slicing_check(SliceDomain e, SliceIntegrand g, std::size_t samples, std::uint64_t seed);
// "domain,integrand,samples,seed,lhs,rhs,stderr,misses"
std::string slice_csv(SliceDomain e, SliceIntegrand g, std::uint64_t seed, const SliceResult& r);

// Periodic unit interval or square, A = (0.3, 0.7)^n, enlarged region (A)^{2εγ_J}.
struct InterpConfig {
  double epsilon = 0.05;
  int fields = 200;
  int nodes = 1024;  // per axis
  std::vector<std::uint64_t> seeds{1, 2};
  std::uint64_t held_out_seed = 3;
};

struct InterpRow {
  std::uint64_t seed = 0;
  int index = 0;
  std::string kind;
  double lhs = 0.0;  // ε ∫_A |∇u|²
  double rhs = 0.0;  // F_ε(u, (A)^{2εγ_J})
  double ratio = 0.0;
  bool skipped = false;
};

struct InterpResult {
  std::vector<double> suite_max;  // per calibration seed
  double calibrated = 0.0;        // max over the calibration suites
  double spread = 0.0;            // (max - min)/min of suite_max
  double held_out_max = 0.0;
  int violations = 0;             // held-out ratios above `calibrated`
  InterpRow worst;
  std::vector<InterpRow> rows;
};

// Ratio for one field (NaN when both sides vanish).
InterpRow interpolation_ratio(const Field& u, const EnergyModel& model, double gamma_J);
// Random fields: mollified interfaces of random width, smooth noise, or both.
std::vector<std::pair<std::string, Field>> random_suite(const Grid& g, double epsilon, int count,
                                                        std::uint64_t seed);
InterpResult interpolation_check(const InterpConfig& cfg, const Potential& p, const Kernel& k);
// "seed,index,kind,lhs,rhs,ratio"
std::string interp_csv(const InterpResult& r);

// 1D families on [-halfwidth, halfwidth]: pinned-k minimizers for each ε, and
// minimizers from random starts with free ends.
struct CompactConfig {
  std::vector<double> eps{0.2, 0.1, 0.05};
  std::vector<int> pinned{1, 3};
  int random_fields = 3;
  std::uint64_t seed = 1;
  int nodes = 2048;
  double halfwidth = 2.0;
  double pin_width = 0.1;
  OracleConfig oracle;
  SolverConfig solver;
};

struct CompactRow {
  std::string family;
  double epsilon = 0.0;
  double energy = 0.0;
  int count = 0;
  int bound = 0;  // pinned k, or the transition count of the random start
  double predicted = 0.0;  // count ψ
  double ratio = 0.0;
  bool converged = false;
};

struct CompactResult {
  double psi = 0.0;
  std::vector<CompactRow> rows;
  bool counts_bounded = true;     // count <= bound everywhere
  bool counts_monotone = true;    // count nonincreasing as ε decreases, per family
  bool energy_tracks = true;      // |ratio - 1| <= 0.25 for converged rows with count > 0
};

CompactResult compactness_diagnostic(const CompactConfig& cfg, const Potential& p, const Kernel& k);
// "family,epsilon,energy,count,bound,predicted,ratio,converged"
std::string compact_csv(const CompactResult& r);

// Flat interface x = 1/2 in the unit square (x fixed, y periodic), n = 2.
struct LimsupConfig {
  std::vector<double> eps{0.2, 0.1, 0.05};  // ε_* is appended
  double nodes_per_eps = 10.0;               // domain resolution at ε_*
  double mollified_width = 4.0;              // σ/ε of the comparison step
  OracleConfig oracle;
  SolverConfig solver;
};

struct LimsupRow {
  double epsilon = 0.0;
  double energy_optimal = 0.0;
  double energy_mollified = 0.0;
  double predicted = 0.0;
  double ratio_optimal = 0.0;
  double ratio_mollified = 0.0;
};

struct LimsupResult {
  double psi = 0.0;
  double eps_star = 0.0;
  int nodes = 0;
  std::vector<LimsupRow> rows;  // sorted by decreasing ε
};

// u_ε(x) = U(ε_* (x - 1/2)/ε) with U the cell argmin along ν = e₁, extended by ±1.
LimsupResult limsup_check(const LimsupConfig& cfg, const Potential& p, const Kernel& k);
LimsupResult limsup_check(const LimsupConfig& cfg, const Potential& p, const Kernel& k,
                          const PsiResult& cell);
// "epsilon,energy_optimal,energy_mollified,predicted,ratio_optimal,ratio_mollified"
std::string limsup_csv(const LimsupResult& r);

}  // namespace nlch
