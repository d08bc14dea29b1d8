#pragma once

#include <span>

#include "wavechaos/stats.hpp"

namespace wavechaos::kernels {

// Fundamental solution G(t, .) of the wave operator in dimension d <= 3,
// optionally mollified in space by the Gaussian density p_epsilon.
class WaveKernel {
 public:
  explicit WaveKernel(int d, double epsilon = 0.0);

  [[nodiscard]] int dimension() const { return d_; }
  [[nodiscard]] double epsilon() const { return epsilon_; }

  // FG(t, .)(xi) = exp(-epsilon |xi|^2 / 2) sin(t |xi|) / |xi|, equal to t at xi = 0.
  [[nodiscard]] double fourier(double t, double xi_norm) const;

  // Pointwise density at |x| = r. Available for d = 1, for d = 2 without
  // mollification, and for d = 3 with epsilon > 0. Throws ConfigError when
  // the kernel is a singular measure (d = 3, epsilon = 0) or has no closed
  // form (d = 2, epsilon > 0).
  [[nodiscard]] double density(double t, double r) const;

  // Total mass; equals t in every dimension.
  [[nodiscard]] double mass(double t) const { return t; }

  // Draws a point from the probability measure G(t, .) / t.
  void sample(Rng& rng, double t, std::span<double> out) const;

 private:
  int d_;
  double epsilon_;
};

}  // namespace wavechaos::kernels
