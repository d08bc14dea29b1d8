#include "wavechaos/noise.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <random>

#include "wavechaos/errors.hpp"

namespace wavechaos::kernels {

namespace {

constexpr double pi = std::numbers::pi;

double norm_sq(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

// Surface area of S^{k-1}.
double sphere_area(int k) { return 2.0 * std::pow(pi, 0.5 * k) / std::tgamma(0.5 * k); }

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::white:
      return "white";
    case Family::riesz:
      return "riesz";
    case Family::fractional_product:
      return "fractional_product";
    case Family::hybrid:
      return "hybrid";
  }
  return "unknown";
}

Family family_from_string(const std::string& name) {
  if (name == "white") return Family::white;
  if (name == "riesz") return Family::riesz;
  if (name == "fractional_product") return Family::fractional_product;
  if (name == "hybrid") return Family::hybrid;
  throw ConfigError("unknown noise family '" + name + "'");
}

NoiseSpec NoiseSpec::white(int d) {
  NoiseSpec s{.family = Family::white, .d = d, .alphas = {}, .groups = {}};
  s.validate();
  return s;
}

NoiseSpec NoiseSpec::riesz(int d, double alpha) {
  NoiseSpec s{.family = Family::riesz, .d = d, .alphas = {alpha}, .groups = {d}};
  s.validate();
  return s;
}

NoiseSpec NoiseSpec::fractional_product(std::vector<double> alphas) {
  const int d = static_cast<int>(alphas.size());
  NoiseSpec s{.family = Family::fractional_product,
              .d = d,
              .alphas = std::move(alphas),
              .groups = std::vector<int>(static_cast<std::size_t>(d), 1)};
  s.validate();
  return s;
}

NoiseSpec NoiseSpec::hybrid(std::vector<int> groups, std::vector<double> alphas) {
  const int d = std::accumulate(groups.begin(), groups.end(), 0);
  NoiseSpec s{.family = Family::hybrid, .d = d, .alphas = std::move(alphas), .groups = std::move(groups)};
  s.validate();
  return s;
}

void NoiseSpec::validate() const {
  require(d >= 1 && d <= 3, "spatial dimension d must be 1, 2 or 3");
  if (family == Family::white) {
    require(alphas.empty() && groups.empty(), "white noise takes no alpha or groups");
    return;
  }
  require(!groups.empty() && groups.size() == alphas.size(), "each coordinate group needs exactly one alpha");
  int total = 0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    require(groups[i] >= 1, "group sizes must be positive");
    require(std::isfinite(alphas[i]) && alphas[i] > 0.0 && alphas[i] < groups[i],
            "alpha_i must lie in (0, d_i) for every group");
    total += groups[i];
  }
  require(total == d, "group sizes must sum to d");
  if (family == Family::riesz) require(groups.size() == 1, "riesz noise has a single group");
  if (family == Family::fractional_product) {
    for (int g : groups) require(g == 1, "fractional_product groups have size one");
  }
}

double NoiseSpec::alpha() const {
  if (is_white()) return d;
  return std::accumulate(alphas.begin(), alphas.end(), 0.0);
}

std::string NoiseSpec::canonical() const {
  std::string out = "family=" + to_string(family) + ";d=" + std::to_string(d);
  if (!is_white()) {
    out += ";groups=";
    for (std::size_t i = 0; i < groups.size(); ++i) out += (i ? "," : "") + std::to_string(groups[i]);
    out += ";alphas=";
    for (std::size_t i = 0; i < alphas.size(); ++i) out += (i ? "," : "") + fmt17(alphas[i]);
  }
  return out;
}

std::string NoiseSpec::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double spectral_constant(int d, double alpha) {
  require(alpha > 0.0 && alpha < d, "spectral constant needs 0 < alpha < d");
  return std::exp(-0.5 * d * std::log(pi) - alpha * std::log(2.0) + std::lgamma(0.5 * (d - alpha)) -
                  std::lgamma(0.5 * alpha));
}

double sqrt_kernel_constant(double alpha, int d) {
  require(alpha > 0.0 && alpha < d, "square-root kernel constant needs 0 < alpha < d");
  const double log_beta = -0.25 * d * std::log(pi) + std::lgamma(0.25 * (d + alpha)) - std::lgamma(0.25 * (d - alpha)) +
                          0.5 * (std::lgamma(0.5 * (d - alpha)) - std::lgamma(0.5 * alpha));
  return std::exp(log_beta);
}

namespace {

template <class F>
double over_groups(const NoiseSpec& spec, std::span<const double> x, F&& factor) {
  require(static_cast<int>(x.size()) == spec.d, "point dimension does not match the noise");
  double value = 1.0;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < spec.groups.size(); ++i) {
    const auto k = static_cast<std::size_t>(spec.groups[i]);
    value *= factor(spec.groups[i], spec.alphas[i], x.subspan(offset, k));
    offset += k;
  }
  return value;
}

}  // namespace

double covariance(const NoiseSpec& spec, std::span<const double> x) {
  if (spec.is_white()) throw ConfigError("white noise covariance is delta_0 and has no pointwise value");
  return over_groups(spec, x, [](int, double a, std::span<const double> xi) {
    const double r2 = norm_sq(xi);
    if (r2 == 0.0) throw DomainError("covariance is singular on this coordinate group");
    return std::pow(r2, -0.5 * a);
  });
}

double spectral_density(const NoiseSpec& spec, std::span<const double> xi) {
  if (spec.is_white()) {
    require(static_cast<int>(xi.size()) == spec.d, "point dimension does not match the noise");
    return std::pow(2.0 * pi, -spec.d);
  }
  return over_groups(spec, xi, [](int k, double a, std::span<const double> v) {
    const double r2 = norm_sq(v);
    if (r2 == 0.0) throw DomainError("spectral density is singular on this coordinate group");
    return spectral_constant(k, a) * std::pow(r2, -0.5 * (k - a));
  });
}

double sqrt_kernel(const NoiseSpec& spec, std::span<const double> x) {
  if (spec.is_white()) throw ConfigError("white noise has no pointwise square-root kernel");
  return over_groups(spec, x, [](int k, double a, std::span<const double> v) {
    const double r2 = norm_sq(v);
    if (r2 == 0.0) throw DomainError("square-root kernel is singular on this coordinate group");
    return sqrt_kernel_constant(a, k) * std::pow(r2, -0.25 * (k + a));
  });
}

double sphere_integral(const NoiseSpec& spec) {
  if (spec.is_white()) return std::pow(2.0 * pi, -spec.d) * sphere_area(spec.d);
  // Integrating phi(xi) exp(-|xi|^2/2) in polar and in product coordinates.
  double product = 1.0;
  for (std::size_t i = 0; i < spec.groups.size(); ++i) {
    const int k = spec.groups[i];
    const double a = spec.alphas[i];
    product *= spectral_constant(k, a) * sphere_area(k) * std::pow(2.0, 0.5 * a - 1.0) * std::tgamma(0.5 * a);
  }
  const double a = spec.alpha();
  return product / (std::pow(2.0, 0.5 * a - 1.0) * std::tgamma(0.5 * a));
}

double resolvent_mass(const NoiseSpec& spec) {
  const double a = spec.alpha();
  require(a < 4.0, "integral of (1+|xi|^2)^-2 mu(d xi) diverges for alpha >= 4");
  return sphere_integral(spec) * 0.5 * boost::math::beta(0.5 * a, 2.0 - 0.5 * a);
}

double smoothed_covariance(const NoiseSpec& spec, double s, std::span<const double> x) {
  require(s > 0.0, "smoothing variance must be positive");
  if (spec.is_white()) {
    require(static_cast<int>(x.size()) == spec.d, "point dimension does not match the noise");
    return std::pow(2.0 * pi * s, -0.5 * spec.d) * std::exp(-0.5 * norm_sq(x) / s);
  }
  return over_groups(spec, x, [s](int k, double a, std::span<const double> v) {
    const double z = 0.5 * norm_sq(v) / s;
    const double pa = 0.5 * a, pb = 0.5 * k;
    double m = 0.0;
    if (z > 200.0) {
      // Large-argument expansion of 1F1(pa; pb; -z).
      double term = 1.0, sum = 1.0;
      for (int j = 0; j < 6; ++j) {
        term *= (pa + j) * (pa - pb + 1.0 + j) / ((j + 1.0) * z);
        sum += term;
      }
      m = std::exp(std::lgamma(pb) - std::lgamma(pb - pa)) * std::pow(z, -pa) * sum;
    } else {
      // Kummer's transformation keeps the series argument non-negative.
      m = std::exp(-z) * boost::math::hypergeometric_1F1(pb - pa, pb, z);
    }
    return std::pow(2.0 * s, -0.5 * a) * std::exp(std::lgamma(0.5 * (k - a)) - std::lgamma(0.5 * k)) * m;
  });
}

void sample_sphere(Rng& rng, std::span<double> out) {
  std::normal_distribution<double> normal;
  double r2 = 0.0;
  do {
    r2 = 0.0;
    for (double& v : out) {
      v = normal(rng);
      r2 += v * v;
    }
  } while (r2 == 0.0);
  const double inv = 1.0 / std::sqrt(r2);
  for (double& v : out) v *= inv;
}

FrequencySampler::FrequencySampler(const NoiseSpec& spec, double power) : spec_(spec), power_(power), mass_(0.0) {
  spec_.validate();
  const double a = spec_.alpha();
  require(power > 0.5 * a, "proposal power must exceed alpha / 2");
  mass_ =
      power == 2.0 ? resolvent_mass(spec_) : sphere_integral(spec_) * 0.5 * boost::math::beta(0.5 * a, power - 0.5 * a);
}

double FrequencySampler::density(std::span<const double> xi) const {
  return spectral_density(spec_, xi) * std::pow(1.0 + norm_sq(xi), -power_) / mass_;
}

double FrequencySampler::sample(Rng& rng, std::span<double> xi) const {
  const double a = spec_.alpha();
  // |xi|^2 = G1 / G2 is beta-prime(a/2, power - a/2) distributed.
  std::gamma_distribution<double> g1(0.5 * a, 1.0), g2(power_ - 0.5 * a, 1.0);
  double r2 = 0.0;
  do {
    r2 = g1(rng) / g2(rng);
  } while (!(r2 > 0.0) || !std::isfinite(r2));
  const double r = std::sqrt(r2);

  // Direction with density proportional to phi on the sphere: draw each group
  // from |eta|^{-(d_i - alpha_i)} exp(-|eta|^2/2) and normalize.
  if (spec_.is_white()) {
    sample_sphere(rng, xi);
  } else {
    double total = 0.0;
    do {
      total = 0.0;
      std::size_t offset = 0;
      for (std::size_t i = 0; i < spec_.groups.size(); ++i) {
        const auto k = static_cast<std::size_t>(spec_.groups[i]);
        std::gamma_distribution<double> radial(0.5 * spec_.alphas[i], 2.0);
        const double rho = std::sqrt(radial(rng));
        auto part = xi.subspan(offset, k);
        sample_sphere(rng, part);
        for (double& v : part) v *= rho;
        total += rho * rho;
        offset += k;
      }
    } while (!(total > 0.0));
    const double inv = 1.0 / std::sqrt(total);
    for (double& v : xi) v *= inv;
  }
  for (double& v : xi) v *= r;
  return mass_ * std::pow(1.0 + r2, power_);
}

}  // namespace wavechaos::kernels
