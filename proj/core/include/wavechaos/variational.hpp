#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wavechaos/noise.hpp"

namespace wavechaos::variational {

using kernels::NoiseSpec;

// The kernel f in <g^2 * f, g^2>: Theta delta_0 or Theta gamma.
struct Interaction {
  bool delta0 = true;
  NoiseSpec spec;      // used when delta0 is false
  double scale = 1.0;  // Theta

  [[nodiscard]] static Interaction delta(double scale = 1.0);
  [[nodiscard]] static Interaction noise(NoiseSpec spec, double scale = 1.0);

  // Scaling index: d for delta_0, alpha for the noise covariance.
  [[nodiscard]] double alpha(int d) const;
  [[nodiscard]] std::string describe(int d) const;
};

struct Grid {
  double extent = 0.0;  // half-width L of the box [-L, L]^d; 0 picks a scale-aware default
  int points = 0;       // interior points m per axis; 0 picks a default per dimension
};

struct OptimizerOptions {
  int max_iterations = 3000;
  // Stop when the preconditioned ascent rate <grad J, P grad J> falls below
  // this fraction of |J|.
  double gradient_tolerance = 1e-11;
  int restarts = 5;
  int refinement_levels = 3;  // solves at m / 2^(levels-1), ..., m with warm starts
  int max_extent_doublings = 3;
  double boundary_mass_limit = 1e-8;
};

struct VariationalProblem {
  Interaction f;
  double theta = 1.0;
  int d = 1;
  Grid grid;
  OptimizerOptions optimizer;
  bool radial = false;  // radially symmetric reduction, delta_0 in d = 3 only

  void validate() const;
};

struct VariationalResult {
  double value = 0.0;
  std::vector<double> maximizer;  // row-major grid values; radial: g at r_i
  int d = 1;
  int points = 0;
  double extent = 0.0;
  bool radial = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
  double boundary_mass = 0.0;
  std::vector<std::pair<int, double>> history;  // (m, value) per refinement level
  std::vector<double> trace;                    // objective after each accepted step, last level
  std::uint64_t seed = 0;
};

// Discretized J(g) = Q(g)^{1/2} - (theta/2) D(g) on [-L, L]^d with m interior
// points per axis and zero boundary values, where Q = <g^2 * f, g^2> and D is
// the Dirichlet energy from centered differences. The inner product is
// <u, v> = h^d sum u v; gradients are returned with respect to it.
class GridObjective {
 public:
  GridObjective(const VariationalProblem& problem, int points, double extent);
  ~GridObjective();
  GridObjective(GridObjective&&) noexcept;
  GridObjective& operator=(GridObjective&&) noexcept;

  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] double spacing() const;
  [[nodiscard]] double inner(std::span<const double> u, std::span<const double> v) const;

  double quartic(std::span<const double> g, std::span<double> grad) const;
  double dirichlet(std::span<const double> g, std::span<double> grad) const;
  // J and its gradient; grad may be empty.
  double value(std::span<const double> g, std::span<double> grad) const;
  // out = (I - c Delta_h)^{-1} in.
  void precondition(std::span<const double> in, std::span<double> out, double c) const;

  // Grid coordinate of index i along an axis.
  [[nodiscard]] double coordinate(int i) const;
  // L2 mass in the outer tenth of each axis (at least two cells).
  [[nodiscard]] double boundary_mass(std::span<const double> g) const;
  [[nodiscard]] double second_moment(std::span<const double> g) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

[[nodiscard]] VariationalResult solve_M(const VariationalProblem& problem, std::uint64_t seed = 1);

// Single ascent from `initial` on the problem's final grid: no restarts,
// refinement or extent doubling.
[[nodiscard]] VariationalResult solve_M_from(const VariationalProblem& problem, std::vector<double> initial);

// Default grid used by solve_M when the problem leaves extent or points at 0.
[[nodiscard]] Grid resolved_grid(const VariationalProblem& problem);

struct ScalingReport {
  double solved = 0.0;     // M(Theta f, theta)
  double reference = 0.0;  // M(f, 1)
  double predicted = 0.0;  // Theta^{2/(4-alpha)} theta^{-alpha/(4-alpha)} M(f, 1)
  double relative_gap = 0.0;
};

// Solves M(Theta f, theta) and M(f, 1) on the same grid.
[[nodiscard]] ScalingReport scaling_check_M(const Interaction& f, double Theta, double theta, int d, const Grid& grid,
                                            std::uint64_t seed = 1, const OptimizerOptions& optimizer = {});

// rho = (1/2)^{alpha/2} M^{(4-alpha)/2}.
[[nodiscard]] double rho_from_M(double m_value, double alpha);

struct SobolevReport {
  double a = 0.0;             // optimal Sobolev constant 3^{-1/2} (2/pi)^{2/3}
  double y3 = 0.0;            // critical point (3/2) A^{3/2}
  double c = 0.0;             // A^{3/2} y3^3 - y3^4 / 2 = 27 A^6 / 32
  double c_search = 0.0;      // golden-section maximum on [0, 2]
  double identity_gap = 0.0;  // |27 A^6 / 32 - 1 / (2 pi^4)|
};

[[nodiscard]] SobolevReport sobolev_bound_analysis();

// sup over ||h||_2 = 1 of
//   linear:  int phi(xi) B_h(xi) mu(d xi)
//   squared: int B_h(xi)^2 mu(d xi)   (when phi is empty)
// with B_h(xi) = int h(xi + eta) h(eta) w(xi + eta) w(eta) d eta and
// w = (1 + |.|^2)^{-1/2}, discretized on a centered frequency lattice.
struct RhoProblem {
  NoiseSpec spec;
  std::function<double(std::span<const double>)> phi;
  double extent = 8.0;  // frequency box [-K, K]^d
  int points = 129;     // odd, so the lattice contains 0
  OptimizerOptions optimizer;
};

struct RhoResult {
  double value = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
  std::vector<double> maximizer;
};

// The functional above on the lattice, exposed for gradient checks.
class RhoObjective {
 public:
  explicit RhoObjective(const RhoProblem& problem);
  ~RhoObjective();
  RhoObjective(RhoObjective&&) noexcept;
  RhoObjective& operator=(RhoObjective&&) noexcept;

  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] double spacing() const;
  [[nodiscard]] double inner(std::span<const double> u, std::span<const double> v) const;
  double value(std::span<const double> h, std::span<double> grad) const;
  [[nodiscard]] double coordinate(int i) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

[[nodiscard]] RhoResult rho_phi_direct(const RhoProblem& problem, std::uint64_t seed = 1);

// Average of the spectral density over the lattice cell centered at
// spacing * index (one index per coordinate).
[[nodiscard]] double cell_averaged_density(const NoiseSpec& spec, double spacing, std::span<const int> index);

// Binary grid dump: int32 d, int32 m, float64 L, then m^d float64 values.
void write_grid(const std::string& path, const VariationalResult& result);
[[nodiscard]] VariationalResult read_grid(const std::string& path);

}  // namespace wavechaos::variational
