#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wavechaos/stats.hpp"

namespace wavechaos::simulate {

using wavechaos::kDefaultSeed;
inline constexpr int kMaxOrder = 3;

// m equal-width indicator boxes covering [-half_width, half_width], each
// normalized to unit L2 norm. m must be even so that 0 is a box edge.
struct BoxBasis {
  double half_width = 1.0;
  int modes = 64;

  void validate() const;
  [[nodiscard]] double width() const;
  [[nodiscard]] double left(int j) const;
};

// Symmetric order-n tensor stored once per sorted index tuple.
struct SymmetricTensor {
  struct Entry {
    std::array<int, kMaxOrder> index{};  // sorted, first `order` used
    double value = 0.0;
  };
  int order = 0;
  int modes = 0;
  std::vector<Entry> entries;  // zero entries are dropped

  // Number of index tuples in the full tensor equal to entry.index up to order.
  [[nodiscard]] double multiplicity(const Entry& entry) const;
  // Squared Hilbert-Schmidt norm over the full tensor.
  [[nodiscard]] double squared_norm() const;
};

// Coefficients <f~_n(., 0; t), e_j1 x ... x e_jn> of the d = 1 white-noise
// kernel. Order 1 is exact; orders 2 and 3 use a q-point Gauss rule per axis
// on each box, with coincident boxes split into ordered simplices.
[[nodiscard]] SymmetricTensor project_kernel(int n, double t, const BoxBasis& basis, int quadrature_points = 5);

// I_n(a) for the Gaussian vector z = (W(e_j))_j: sum over all index tuples of
// a_{j1..jn} times the Wick product, i.e. prod_j He_{k_j}(z_j).
[[nodiscard]] double wick_integral(const SymmetricTensor& a, std::span<const double> z);

struct SimConfig {
  double t = 1.0;
  double theta = 1.0;
  int truncation = 1;  // N <= 3
  int modes = 64;
  double half_width = 0.0;  // box range; 0 uses t
  std::size_t replicates = 100000;
  std::uint64_t seed = kDefaultSeed;
  std::vector<double> moment_orders{1.0, 2.0, 4.0};
  int bootstrap_resamples = 200;

  void validate() const;
  [[nodiscard]] BoxBasis basis() const;
};

struct SimRun {
  SimConfig config;
  std::vector<double> samples;  // u_N(t, 0)
  double mean = 0.0;
  double mean_stderr = 0.0;
  double variance = 0.0;
  double variance_stderr = 0.0;
  std::vector<double> moments;  // E|u_N|^p for config.moment_orders
  std::vector<double> moment_stderr;
  // 1 + sum_n theta^n n! ||a_n||^2 from the projected tensors.
  double series_second_moment = 0.0;
  std::vector<double> chaos_norms;  // ||a_n||^2, n = 1..N
};

// u_N(t, 0) = 1 + sum_{n=1}^N theta^{n/2} I_n(f~_n(., 0; t)) on the box basis.
[[nodiscard]] SimRun sample_uN(const SimConfig& config);

struct NormEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

// (E|u|^p)^{1/p} with a nonparametric bootstrap standard error.
[[nodiscard]] NormEstimate p_norm(std::span<const double> samples, double p, int resamples, std::uint64_t seed);

struct HypercontractivityReport {
  double p = 2.0;
  double t = 0.0;
  double t_p = 0.0;  // (p - 1)^{1/3} t
  double lhs = 0.0;  // ||u_N(t)||_p
  double lhs_stderr = 0.0;
  double rhs = 0.0;  // ||u_N(t_p)||_2
  double rhs_stderr = 0.0;
  double rhs_series = 0.0;  // the same norm from the projected tensors
  double joint_stderr = 0.0;
  double margin = 0.0;  // rhs - lhs
  bool holds = false;   // lhs <= rhs + 3 joint_stderr
};

// Truncated-chaos form of ||u(t)||_p <= ||u(t_p)||_2. Both runs use the
// config's seed and the same number of boxes, scaled to each time.
[[nodiscard]] HypercontractivityReport hypercontractivity_check(const SimConfig& config, double p);

// Single-column CSV of the samples at 17 significant digits, written atomically.
void write_samples_csv(const std::string& path, const SimRun& run);

}  // namespace wavechaos::simulate
