#include "wavechaos/wave_kernel.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "wavechaos/errors.hpp"
#include "wavechaos/noise.hpp"

namespace wavechaos::kernels {

namespace {
constexpr double pi = std::numbers::pi;
}

WaveKernel::WaveKernel(int d, double epsilon) : d_(d), epsilon_(epsilon) {
  require(d >= 1 && d <= 3, "wave kernel is defined for d = 1, 2, 3");
  require(epsilon >= 0.0 && std::isfinite(epsilon), "mollification epsilon must be >= 0");
}

double WaveKernel::fourier(double t, double xi_norm) const {
  require(t >= 0.0, "time must be non-negative");
  const double damp = epsilon_ > 0.0 ? std::exp(-0.5 * epsilon_ * xi_norm * xi_norm) : 1.0;
  if (xi_norm * t < 1e-8) return damp * t;
  return damp * std::sin(t * xi_norm) / xi_norm;
}

double WaveKernel::density(double t, double r) const {
  require(t >= 0.0 && r >= 0.0, "time and radius must be non-negative");
  if (d_ == 1) {
    if (epsilon_ == 0.0) return r < t ? 0.5 : 0.0;
    const double s = std::sqrt(2.0 * epsilon_);
    return 0.25 * (std::erf((t - r) / s) + std::erf((t + r) / s));
  }
  if (d_ == 2) {
    require(epsilon_ == 0.0, "mollified d = 2 wave kernel has no closed form");
    if (r == t) throw DomainError("d = 2 wave kernel is singular on the light cone");
    return r < t ? 1.0 / (2.0 * pi * std::sqrt(t * t - r * r)) : 0.0;
  }
  require(epsilon_ > 0.0, "unmollified d = 3 wave kernel is a measure on the sphere");
  // (1 / (4 pi r)) [p(r - t) - p(r + t)] with p the 1-d N(0, epsilon) density.
  const double norm = 1.0 / std::sqrt(2.0 * pi * epsilon_);
  if (r * t / epsilon_ < 1e-8) {
    return t / (2.0 * pi * epsilon_) * norm * std::exp(-0.5 * (t * t + r * r) / epsilon_);
  }
  const double diff = r - t;
  return norm * std::exp(-0.5 * diff * diff / epsilon_) * (-std::expm1(-2.0 * r * t / epsilon_)) / (4.0 * pi * r);
}

void WaveKernel::sample(Rng& rng, double t, std::span<double> out) const {
  require(static_cast<int>(out.size()) == d_, "sample dimension does not match the kernel");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (d_ == 1) {
    out[0] = t * (2.0 * unif(rng) - 1.0);
  } else if (d_ == 2) {
    // Radial law of (2 pi)^{-1} (t^2 - r^2)^{-1/2} r dr / t on [0, t].
    const double u = unif(rng);
    const double r = t * std::sqrt(u * (2.0 - u));
    sample_sphere(rng, out);
    for (double& v : out) v *= r;
  } else {
    sample_sphere(rng, out);
    for (double& v : out) v *= t;
  }
  if (epsilon_ > 0.0) {
    std::normal_distribution<double> normal(0.0, std::sqrt(epsilon_));
    for (double& v : out) v += normal(rng);
  }
}

}  // namespace wavechaos::kernels
