#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wavechaos/chain.hpp"
#include "wavechaos/noise.hpp"
#include "wavechaos/stats.hpp"

namespace wavechaos::chaos {

using kernels::NoiseSpec;

using wavechaos::kDefaultSeed;

enum class Method { fourier_mc, realspace_quadrature, closed_form };

[[nodiscard]] std::string to_string(Method method);
[[nodiscard]] Method method_from_string(const std::string& name);

// Estimate of a chaos-level quantity. std_error is zero exactly for the
// deterministic methods.
struct ChaosEstimate {
  int n = 0;
  double t = 1.0;
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  Method method = Method::fourier_mc;
  std::uint64_t seed = kDefaultSeed;
  std::string spec_hash;
  PrecisionStats precision;
};

struct SamplingOptions {
  std::size_t samples = 100000;
  std::uint64_t seed = kDefaultSeed;
  int exact_order = 8;           // full permutation sums up to this order
  int permutation_samples = 64;  // permutations per batch above exact_order
  int max_order = 12;            // refuse larger orders
};

// int (1 + |xi|^2)^{-2} mu(d xi).
[[nodiscard]] double c_mu_prime(const NoiseSpec& spec);
// The same integral against d xi instead of (2 pi)^{-d} d xi; white noise only.
[[nodiscard]] double c_mu_prime_lebesgue(const NoiseSpec& spec);

// T_n = int [sum_sigma prod_k (1 + |xi_sigma(k) + ... + xi_sigma(n)|^2)^{-1}]^2 mu(d xi)^n.
// T_n does not depend on time; the returned estimate carries t = 1.
[[nodiscard]] ChaosEstimate t_n_estimate(const NoiseSpec& spec, int n, const SamplingOptions& options = {});

// ||f~_n(., 0; t)||^2 in H^{(x)n}. The Fourier path integrates the time
// simplex exactly and samples frequencies; epsilon > 0 multiplies the
// integrand by exp(-epsilon |xi_1 + ... + xi_n|^2). The real-space path is
// available for white noise in d = 1 (n <= 2) and Riesz noise in d = 1 (n = 1).
[[nodiscard]] ChaosEstimate chaos_norm(const NoiseSpec& spec, int n, double t, Method method = Method::fourier_mc,
                                       const SamplingOptions& options = {}, double epsilon = 0.0);

// Fourier-path norm from the ladder epsilon0 * {1, 2, 3}, extrapolated
// linearly to epsilon = 0 sample by sample.
[[nodiscard]] ChaosEstimate chaos_norm_extrapolated(const NoiseSpec& spec, int n, double t, double epsilon0,
                                                    const SamplingOptions& options = {});

struct MomentSeriesResult {
  double t = 1.0;
  double theta = 1.0;
  int truncation = 0;
  std::vector<double> partial_sums;  // N + 1 entries, starting at 1
  std::vector<double> terms;         // theta^n n! ||f~_n(t)||^2, n = 0..N
  std::vector<double> term_errors;
  std::vector<ChaosEstimate> norms;  // t = 1 norms reused through scaling
  bool converged = true;
  std::string warning;
};

// Partial sums of E|u(t,x)|^2 = sum_n theta^n n! ||f~_n(., 0; t)||^2. When
// critical_m (the variational constant for delta_0 in d = 3) is given and the
// noise is white in d = 3, a warning is attached in the divergence regime.
[[nodiscard]] MomentSeriesResult second_moment_series(const NoiseSpec& spec, double t, double theta, int truncation,
                                                      const SamplingOptions& options = {},
                                                      std::optional<double> critical_m = std::nullopt);

struct LaplaceReport {
  int n = 0;
  double lhs = 1.0;  // Gamma((4-alpha)n + 1) ||f~_n(1)||^2
  double lhs_error = 0.0;
  double rhs = 1.0;  // quadrature of t^{(4-alpha)n} e^{-t} times ||f~_n(1)||^2
  double ratio = 1.0;
  double bound = 1.0;  // (2^{4-alpha} C'_mu)^n
  bool bound_holds = true;
  double curve = 1.0;  // Gauss-Laguerre of the sampled curve t -> ||f~_n(t)||^2
  double curve_error = 0.0;
  double curve_ratio = 1.0;
};

[[nodiscard]] LaplaceReport laplace_identity_check(const NoiseSpec& spec, int n, const SamplingOptions& options = {});

struct ReverseCsReport {
  double lhs = 0.0;  // 2 int e^{-2t} f(t)^2 dt
  double rhs = 0.0;  // (int e^{-t} f(t) dt)^2
  bool holds = false;
};

// f must be nonnegative and nondecreasing; it is checked on a grid of
// `checks` points in [0, horizon]. Breakpoints split the quadrature so step
// functions integrate exactly.
[[nodiscard]] ReverseCsReport reverse_cauchy_schwarz_check(const std::function<double(double)>& f,
                                                           std::span<const double> breakpoints = {},
                                                           double horizon = 50.0, int checks = 2000);

using FrequencyWeight = std::function<double(std::span<const double>)>;

// W_n(t, phi) = int_{simplex} int prod phi(xi_k) prod_k FG(s_k - s_{k-1})(xi_k + ... + xi_n) mu(d xi)^n ds.
[[nodiscard]] ChaosEstimate lower_bound_W(const NoiseSpec& spec, int n, double t, const FrequencyWeight& phi,
                                          const SamplingOptions& options = {});

struct LaplaceWReport {
  double curve = 0.0;  // Gauss-Laguerre quadrature in t of the sampled W_n(t, phi)
  double curve_error = 0.0;
  double resolvent = 0.0;  // int prod phi(xi_k) prod (1 + |xi_k + ... + xi_n|^2)^{-1} mu(d xi)^n
  double resolvent_error = 0.0;
  double difference_error = 0.0;  // standard error of curve - resolvent (shared samples)
};

[[nodiscard]] LaplaceWReport laplace_check_W(const NoiseSpec& spec, int n, const FrequencyWeight& phi,
                                             const SamplingOptions& options = {}, int nodes = 48);

// A nonnegative, nonnegative-definite test function given through its
// convolution with the covariance and its Fourier transform.
struct TestFunction {
  std::function<double(std::span<const double>)> convolved;  // f * gamma (f itself for white noise)
  FrequencyWeight fourier;                                   // F f
};

// f = centered Gaussian density with covariance variance * I.
[[nodiscard]] TestFunction gaussian_test_function(const NoiseSpec& spec, double variance);

// U_n(t, f) = int_{simplex} int prod (f * gamma)(x_k) prod G(s_k - s_{k-1}, x_k - x_{k-1}) dx ds
// with x_0 = 0, sampled in real space. In d = 3 the kernel is mollified over
// the ladder epsilon0 * {1, 2, 3} and extrapolated linearly to zero.
[[nodiscard]] ChaosEstimate lower_bound_U(const NoiseSpec& spec, int n, double t, const TestFunction& f,
                                          const SamplingOptions& options = {}, double epsilon0 = 1e-3);

// f~_n(x, 0; t) for white noise in d = 1:
// (1/n!) sum_sigma (t - |x_sigma(1)| - sum_k |x_sigma(k) - x_sigma(k-1)|)_+^n / (2^n n!).
[[nodiscard]] double white_kernel_1d(int n, double t, std::span<const double> x);

}  // namespace wavechaos::chaos
