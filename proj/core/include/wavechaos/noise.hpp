#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wavechaos/stats.hpp"

namespace wavechaos::kernels {

enum class Family { white, riesz, fractional_product, hybrid };

[[nodiscard]] std::string to_string(Family family);
[[nodiscard]] Family family_from_string(const std::string& name);

// Spatial covariance of a Gaussian noise that is white in time.
//
// Every non-white family is stored as a list of coordinate groups with one
// index per group: riesz is a single group of size d, fractional_product is
// d groups of size one, hybrid carries its own grouping. The covariance is
// prod_i |x^(i)|^{-alpha_i}; white noise has covariance delta_0.
struct NoiseSpec {
  Family family = Family::white;
  int d = 1;
  std::vector<double> alphas;  // one per group, empty for white
  std::vector<int> groups;     // group sizes summing to d, empty for white

  [[nodiscard]] static NoiseSpec white(int d);
  [[nodiscard]] static NoiseSpec riesz(int d, double alpha);
  [[nodiscard]] static NoiseSpec fractional_product(std::vector<double> alphas);
  [[nodiscard]] static NoiseSpec hybrid(std::vector<int> groups, std::vector<double> alphas);

  // Throws ConfigError unless d in {1,2,3} and 0 < alpha_i < d_i.
  void validate() const;

  // Scaling index: gamma(c x) = c^{-alpha} gamma(x). White noise has alpha = d.
  [[nodiscard]] double alpha() const;
  [[nodiscard]] bool is_white() const { return family == Family::white; }

  // Canonical one-line form, also used for hashing.
  [[nodiscard]] std::string canonical() const;
  [[nodiscard]] std::string hash() const;
};

// C_{d,alpha} with F|x|^{-alpha} = (2 pi)^d C_{d,alpha} |xi|^{-(d-alpha)}.
[[nodiscard]] double spectral_constant(int d, double alpha);
// beta_{alpha,d} with |x|^{-alpha} = K * K and K = beta |x|^{-(d+alpha)/2}.
[[nodiscard]] double sqrt_kernel_constant(double alpha, int d);

// gamma(x). Throws ConfigError for white noise, which has no pointwise value.
[[nodiscard]] double covariance(const NoiseSpec& spec, std::span<const double> x);
// phi(xi), the density of the spectral measure mu(d xi) = phi(xi) d xi.
[[nodiscard]] double spectral_density(const NoiseSpec& spec, std::span<const double> xi);
// K(x) with K * K = gamma. Throws ConfigError for white noise.
[[nodiscard]] double sqrt_kernel(const NoiseSpec& spec, std::span<const double> x);

// Integral of phi over the unit sphere (surface measure).
[[nodiscard]] double sphere_integral(const NoiseSpec& spec);
// Integral of (1 + |xi|^2)^{-2} mu(d xi); finite exactly when alpha < 4.
[[nodiscard]] double resolvent_mass(const NoiseSpec& spec);

// (p_s * gamma)(x) for the centered Gaussian density p_s with covariance s I.
// For white noise this is p_s(x).
[[nodiscard]] double smoothed_covariance(const NoiseSpec& spec, double s, std::span<const double> x);

// Draws xi from q(xi) = phi(xi) (1 + |xi|^2)^{-power} / mass and returns the
// importance weight mu(d xi) / q(d xi) = mass * (1 + |xi|^2)^power. The
// default power 2 gives mass = resolvent_mass; power must exceed alpha / 2.
class FrequencySampler {
 public:
  explicit FrequencySampler(const NoiseSpec& spec, double power = 2.0);
  double sample(Rng& rng, std::span<double> xi) const;
  // q(xi).
  [[nodiscard]] double density(std::span<const double> xi) const;
  [[nodiscard]] double mass() const { return mass_; }
  [[nodiscard]] double power() const { return power_; }
  [[nodiscard]] const NoiseSpec& spec() const { return spec_; }

 private:
  NoiseSpec spec_;
  double power_;
  double mass_;
};

// Uniform direction on the unit sphere S^{dim-1}.
void sample_sphere(Rng& rng, std::span<double> out);

}  // namespace wavechaos::kernels
