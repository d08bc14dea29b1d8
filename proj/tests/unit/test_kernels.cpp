#include <array>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "wavechaos/chain.hpp"
#include "wavechaos/errors.hpp"
#include "wavechaos/noise.hpp"
#include "wavechaos/wave_kernel.hpp"

using namespace wavechaos;
using namespace wavechaos::kernels;
using boost::math::quadrature::exp_sinh;
using boost::math::quadrature::gauss_kronrod;
using boost::math::quadrature::tanh_sinh;
constexpr double pi = std::numbers::pi;

namespace {

// Quadrature nodes can land exactly on an integrable singularity; such
// points carry no mass.
template <class F>
auto guarded(F f) {
  return [f](double x) {
    try {
      return f(x);
    } catch (const DomainError&) {
      return 0.0;
    }
  };
}

double sphere_area(int k) { return 2.0 * std::pow(pi, 0.5 * k) / std::tgamma(0.5 * k); }

std::vector<NoiseSpec> sample_specs() {
  return {NoiseSpec::riesz(1, 0.5),
          NoiseSpec::riesz(2, 1.0),
          NoiseSpec::riesz(3, 2.0),
          NoiseSpec::riesz(3, 0.7),
          NoiseSpec::fractional_product({0.5, 0.5}),
          NoiseSpec::fractional_product({0.3, 0.8, 0.6}),
          NoiseSpec::hybrid({2, 1}, {1.2, 0.4})};
}

}  // namespace

TEST_CASE("covariance values and singularities") {
  const std::array<double, 1> x1{4.0};
  CHECK(covariance(NoiseSpec::riesz(1, 0.5), x1) == doctest::Approx(0.5).epsilon(1e-15));
  const std::array<double, 3> x3{1.0, 2.0, 2.0};
  CHECK(covariance(NoiseSpec::riesz(3, 2.0), x3) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  const std::array<double, 2> x2{4.0, 9.0};
  CHECK(covariance(NoiseSpec::fractional_product({0.5, 0.5}), x2) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  const std::array<double, 2> axis{0.0, 1.0};
  CHECK_THROWS_AS((void)covariance(NoiseSpec::fractional_product({0.5, 0.5}), axis), DomainError);
  CHECK_THROWS_AS((void)covariance(NoiseSpec::white(1), x1), ConfigError);
  CHECK_THROWS_AS((void)sqrt_kernel(NoiseSpec::white(2), x2), ConfigError);
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS((void)NoiseSpec::riesz(1, 1.0), ConfigError);
  CHECK_THROWS_AS((void)NoiseSpec::riesz(4, 1.0), ConfigError);
  CHECK_THROWS_AS((void)NoiseSpec::fractional_product({0.5, 1.2}), ConfigError);
  CHECK_THROWS_AS((void)NoiseSpec::hybrid({2, 2}, {1.0, 1.0}), ConfigError);
  CHECK_THROWS_AS((void)NoiseSpec::hybrid({2, 1}, {1.0}), ConfigError);
}

TEST_CASE("spectral density values") {
  const std::array<double, 2> xi2{0.3, -1.7};
  CHECK(spectral_density(NoiseSpec::white(2), xi2) == doctest::Approx(1.0 / (4.0 * pi * pi)).epsilon(1e-15));
  const std::array<double, 1> one{1.0}, four{4.0};
  const auto spec = NoiseSpec::riesz(1, 0.5);
  CHECK(spectral_density(spec, one) == doctest::Approx(1.0 / std::sqrt(2.0 * pi)).epsilon(1e-13));
  CHECK(spectral_density(spec, four) == doctest::Approx(0.5 / std::sqrt(2.0 * pi)).epsilon(1e-13));
}

TEST_CASE("covariance and spectral scaling on random samples") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0), c_dist(0.05, 20.0);
  for (const auto& spec : sample_specs()) {
    const double a = spec.alpha();
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> x(static_cast<std::size_t>(spec.d)), cx(x.size());
      for (double& v : x) v = u(rng);
      const double c = c_dist(rng);
      for (std::size_t i = 0; i < x.size(); ++i) cx[i] = c * x[i];
      const double g = covariance(spec, x);
      CHECK(std::abs(covariance(spec, cx) - std::pow(c, -a) * g) <= 1e-10 * g);
      const double p = spectral_density(spec, x);
      CHECK(std::abs(spectral_density(spec, cx) - std::pow(c, -(spec.d - a)) * p) <= 1e-10 * p);
    }
  }
}

TEST_CASE("spectral constant matches the Gaussian pairing") {
  // For X, Y iid N(0, I): E gamma(X - Y) = int exp(-|xi|^2) mu(d xi).
  for (const auto& spec : sample_specs()) {
    if (spec.groups.size() != 1) continue;
    const int d = spec.d;
    const double a = spec.alpha();
    const double lhs = std::pow(2.0, -a) * std::exp(std::lgamma(0.5 * (d - a)) - std::lgamma(0.5 * d));
    std::vector<double> ray(static_cast<std::size_t>(d), 0.0);
    auto radial = guarded([&](double r) {
      if (r < 1e-100) return 0.0;
      ray[0] = r;
      return spectral_density(spec, ray) * std::pow(r, d - 1) * std::exp(-r * r);
    });
    exp_sinh<double> tail;
    tanh_sinh<double> head;
    // r = v^{2/alpha} on [0, 1] removes the integrable singularity at the origin.
    const double k = 2.0 / a;
    auto smoothed = [&](double v) { return radial(std::pow(v, k)) * k * std::pow(v, k - 1.0); };
    const double rhs = sphere_area(d) *
                       (head.integrate(smoothed, 0.0, 1.0) + tail.integrate([&](double u) { return radial(1.0 + u); }));
    CHECK(rhs == doctest::Approx(lhs).epsilon(1e-9));
  }
}

TEST_CASE("sphere integral against direct angular quadrature") {
  const auto spec = NoiseSpec::fractional_product({0.5, 0.3});
  // First quadrant; the complement argument keeps both axis singularities accurate.
  auto on_arc = [&](double th, double thc) {
    const std::array<double, 2> w = thc >= 0.0 ? std::array<double, 2>{std::sin(thc), std::cos(thc)}
                                               : std::array<double, 2>{std::cos(-thc), std::sin(-thc)};
    (void)th;
    if (std::abs(w[0]) < 1e-100 || std::abs(w[1]) < 1e-100) return 0.0;
    return spectral_density(spec, w);
  };
  tanh_sinh<double> ts;
  const double direct = 4.0 * ts.integrate(on_arc, 0.0, pi / 2);
  CHECK(sphere_integral(spec) == doctest::Approx(direct).epsilon(1e-8));
}

TEST_CASE("resolvent mass closed forms") {
  // (2 pi)^-1 int (1 + xi^2)^-2 d xi by quadrature.
  auto f1 = [](double x) { return 1.0 / ((1.0 + x * x) * (1.0 + x * x)); };
  exp_sinh<double> es;
  const double one_d = 2.0 * es.integrate(f1) / (2.0 * pi);
  CHECK(resolvent_mass(NoiseSpec::white(1)) == doctest::Approx(one_d).epsilon(1e-12));
  CHECK(one_d == doctest::Approx(0.25).epsilon(1e-12));

  auto f3 = [](double r) { return r * r / ((1.0 + r * r) * (1.0 + r * r)); };
  const double three_d = 4.0 * pi * es.integrate(f3) / std::pow(2.0 * pi, 3);
  CHECK(resolvent_mass(NoiseSpec::white(3)) == doctest::Approx(three_d).epsilon(1e-10));
  CHECK(three_d == doctest::Approx(1.0 / (8.0 * pi)).epsilon(1e-10));

  // riesz d=2, alpha=1: alpha * mu(B_1) * int_0^inf (1 + r^2)^-2 dr.
  const auto riesz = NoiseSpec::riesz(2, 1.0);
  auto ball = guarded([&](double r) {
    const std::array<double, 2> p{r, 0.0};
    return spectral_density(riesz, p) * 2.0 * pi * r;
  });
  tanh_sinh<double> ts;
  const double mu_ball = ts.integrate(ball, 0.0, 1.0);
  const double radial = es.integrate(f1) / 1.0;  // int_0^inf (1 + r^2)^-2 dr = pi / 4
  CHECK(radial == doctest::Approx(pi / 4).epsilon(1e-12));
  CHECK(resolvent_mass(riesz) == doctest::Approx(1.0 * mu_ball * radial).epsilon(1e-9));
}

TEST_CASE("resolvent mass of a product family by two-dimensional quadrature") {
  const auto spec = NoiseSpec::fractional_product({0.6, 0.7});
  exp_sinh<double> outer_q, inner_q;
  auto outer = [&](double a) {
    auto inner = guarded([&](double b) {
      const std::array<double, 2> p{a, b};
      const double w = 1.0 + a * a + b * b;
      return spectral_density(spec, p) / (w * w);
    });
    return inner_q.integrate(inner);
  };
  const double quarter = outer_q.integrate(outer);
  CHECK(resolvent_mass(spec) == doctest::Approx(4.0 * quarter).epsilon(1e-6));
}

TEST_CASE("square-root kernel squares to the covariance") {
  const auto spec = NoiseSpec::riesz(1, 0.5);
  const std::array<double, 1> unit{1.0};
  CHECK(sqrt_kernel(spec, unit) == doctest::Approx(sqrt_kernel_constant(0.5, 1)).epsilon(1e-15));
  CHECK(sqrt_kernel_constant(0.5, 1) ==
        doctest::Approx(std::pow(pi, -0.25) * std::tgamma(0.375) / std::tgamma(0.125)).epsilon(1e-13));
  for (int i = 0; i < 10; ++i) {
    const double x = 0.25 + 0.5 * i;
    auto k = guarded([&](double y) {
      const std::array<double, 1> a{y}, b{x - y};
      return sqrt_kernel(spec, a) * sqrt_kernel(spec, b);
    });
    tanh_sinh<double> ts;
    exp_sinh<double> es;
    const double mid = ts.integrate(k, 0.0, x);
    const double right = es.integrate([&](double s) { return k(x + s); });
    const double left = es.integrate([&](double s) { return k(-s); });
    const std::array<double, 1> xv{x};
    CHECK((left + mid + right) == doctest::Approx(covariance(spec, xv)).epsilon(1e-3));
  }
  const auto prod = NoiseSpec::fractional_product({0.4, 0.7});
  const std::array<double, 2> p{0.8, 1.9};
  const std::array<double, 1> p0{0.8}, p1{1.9};
  CHECK(sqrt_kernel(prod, p) ==
        doctest::Approx(sqrt_kernel(NoiseSpec::riesz(1, 0.4), p0) * sqrt_kernel(NoiseSpec::riesz(1, 0.7), p1))
            .epsilon(1e-14));
}

TEST_CASE("wave kernel point values") {
  CHECK(WaveKernel(1).density(2.0, 1.0) == 0.5);
  CHECK(WaveKernel(1).density(2.0, 3.0) == 0.0);
  CHECK(WaveKernel(2).density(2.0, 0.0) == doctest::Approx(1.0 / (4.0 * pi)).epsilon(1e-15));
  CHECK_THROWS_AS((void)WaveKernel(2).density(2.0, 2.0), DomainError);
  CHECK_THROWS_AS((void)WaveKernel(3).density(1.0, 0.5), ConfigError);
  CHECK(WaveKernel(1).fourier(1.0, 0.0) == 1.0);
  CHECK(WaveKernel(1).fourier(pi / 2, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(WaveKernel(3).fourier(3.0, 2.0) == doctest::Approx(0.5 * WaveKernel(3).fourier(6.0, 1.0)).epsilon(1e-12));
}

TEST_CASE("d=3 mollified kernel at the origin matches sphere sampling") {
  const double eps = 0.01, t = 1.0;
  const WaveKernel g(3, eps);
  std::mt19937_64 rng(11);
  Accumulator acc;
  const double norm = std::pow(2.0 * pi * eps, -1.5);
  for (int i = 0; i < 200000; ++i) {
    std::array<double, 3> w{};
    sample_sphere(rng, w);
    // p_eps(0 - t w) averaged over the sphere, times t (the sphere mass).
    acc.add(t * norm * std::exp(-0.5 * t * t / eps));
  }
  CHECK(std::abs(g.density(t, 0.0) - acc.mean) <= 3.0 * acc.stderr_of_mean() + 1e-12 * acc.mean);
  // Also at a point off the origin against a sampled average.
  Accumulator off;
  const std::array<double, 3> x{0.0, 0.0, 0.95};
  for (int i = 0; i < 200000; ++i) {
    std::array<double, 3> w{};
    sample_sphere(rng, w);
    double r2 = 0.0;
    for (int k = 0; k < 3; ++k) r2 += (x[k] - t * w[k]) * (x[k] - t * w[k]);
    off.add(t * norm * std::exp(-0.5 * r2 / eps));
  }
  CHECK(std::abs(g.density(t, 0.95) - off.mean) <= 3.0 * off.stderr_of_mean());
}

TEST_CASE("Fourier scaling and mollifier consistency") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  for (int i = 0; i < 200; ++i) {
    const double c = u(rng), t = u(rng), xi = u(rng), eps = 0.1 * u(rng);
    const WaveKernel g(3), ge(3, eps);
    CHECK(g.fourier(t, c * xi) == doctest::Approx(g.fourier(c * t, xi) / c).epsilon(1e-13));
    CHECK(ge.fourier(t, xi) == doctest::Approx(std::exp(-0.5 * eps * xi * xi) * g.fourier(t, xi)).epsilon(1e-14));
  }
}

TEST_CASE("d=3 mollified kernel: mass and Fourier transform") {
  const double t = 0.7;
  for (double eps : {0.05, 0.01, 0.001}) {
    const WaveKernel g(3, eps);
    gauss_kronrod<double, 61> gk;
    const double hi = t + 12.0 * std::sqrt(eps);
    const double mass = gk.integrate([&](double r) { return 4.0 * pi * r * r * g.density(t, r); }, 0.0, hi, 20, 1e-12);
    CHECK(mass == doctest::Approx(t).epsilon(1e-8));
    for (double xi : {0.5, 2.0, 7.0}) {
      const double ft = gk.integrate([&](double r) { return 4.0 * pi * r * std::sin(xi * r) / xi * g.density(t, r); },
                                     0.0, hi, 20, 1e-12);
      CHECK(ft == doctest::Approx(g.fourier(t, xi)).epsilon(1e-7));
    }
  }
}

TEST_CASE("d=1 and d=2 kernels have mass t and sample consistently") {
  const double t = 1.3;
  tanh_sinh<double> ts;
  const WaveKernel g2(2);
  const double mass2 = ts.integrate([&](double r) { return 2.0 * pi * r * g2.density(t, r); }, 0.0, t);
  CHECK(mass2 == doctest::Approx(t).epsilon(1e-7));
  // Empirical E|X|^2 for X ~ G(t,.)/t in d=2 is t^2 * 2/3.
  std::mt19937_64 rng(5);
  Accumulator acc;
  for (int i = 0; i < 100000; ++i) {
    std::array<double, 2> x{};
    g2.sample(rng, t, x);
    acc.add(x[0] * x[0] + x[1] * x[1]);
  }
  const double exact = ts.integrate([&](double r) { return r * r * 2.0 * pi * r * g2.density(t, r); }, 0.0, t) / t;
  CHECK(std::abs(acc.mean - exact) <= 4.0 * acc.stderr_of_mean());
}

TEST_CASE("frequency sampler is unbiased for Gaussian test functions") {
  for (const auto& spec : {NoiseSpec::white(1), NoiseSpec::white(3), NoiseSpec::riesz(2, 1.0),
                           NoiseSpec::fractional_product({0.4, 0.8}), NoiseSpec::hybrid({2, 1}, {1.5, 0.5})}) {
    for (double power : {2.0, 0.5 * (spec.alpha() + 1.0)}) {
      const FrequencySampler sampler(spec, power);
      std::mt19937_64 rng(99);
      Accumulator acc;
      std::vector<double> xi(static_cast<std::size_t>(spec.d));
      for (int i = 0; i < 200000; ++i) {
        const double w = sampler.sample(rng, xi);
        if (i < 100) CHECK(w * sampler.density(xi) == doctest::Approx(spectral_density(spec, xi)).epsilon(1e-12));
        double r2 = 0.0;
        for (double v : xi) r2 += v * v;
        // anisotropic test function exercises the direction law
        double ani = 0.0;
        for (std::size_t k = 0; k < xi.size(); ++k) ani += (1.0 + k) * xi[k] * xi[k];
        acc.add(w * std::exp(-ani));
      }
      // Product of one-dimensional Gaussian integrals group by group.
      double exact = 1.0;
      if (spec.is_white()) {
        for (int k = 0; k < spec.d; ++k) exact *= std::sqrt(pi / (1.0 + k)) / (2.0 * pi);
      } else {
        // int prod_i C_i |eta_i|^{-(d_i-a_i)} exp(-sum_k (1+k) xi_k^2): radial per group is
        // anisotropic in the hybrid case, so integrate each group numerically.
        std::size_t offset = 0;
        for (std::size_t g = 0; g < spec.groups.size(); ++g) {
          const int k = spec.groups[g];
          const double a = spec.alphas[g];
          const double c = spectral_constant(k, a);
          exp_sinh<double> es;
          tanh_sinh<double> ts;
          if (k == 1) {
            const double lam = 1.0 + offset;
            exact *= 2.0 * c * es.integrate([&](double r) { return std::pow(r, a - 1.0) * std::exp(-lam * r * r); });
          } else {
            const double l0 = 1.0 + offset, l1 = 2.0 + offset;
            exact *= c * ts.integrate(
                             [&](double th) {
                               const double lam = l0 * std::cos(th) * std::cos(th) + l1 * std::sin(th) * std::sin(th);
                               return 0.5 * std::tgamma(0.5 * a) * std::pow(lam, -0.5 * a);
                             },
                             0.0, 2.0 * pi);
          }
          offset += static_cast<std::size_t>(k);
        }
      }
      CHECK(std::abs(acc.mean - exact) <= 4.0 * acc.stderr_of_mean());
    }
  }
  CHECK_THROWS_AS(FrequencySampler(NoiseSpec::white(2), 1.0), ConfigError);
}

TEST_CASE("smoothed covariance against direct convolution") {
  const double s = 0.7;
  const auto spec = NoiseSpec::riesz(1, 0.4);
  tanh_sinh<double> ts;
  exp_sinh<double> es;
  for (double x : {0.0, 0.3, 1.5, 4.0}) {
    auto integrand = guarded([&](double y) {
      const std::array<double, 1> d{x - y};
      return std::exp(-0.5 * y * y / s) / std::sqrt(2.0 * pi * s) * covariance(spec, d);
    });
    double total = ts.integrate(integrand, x - 1.0, x) + ts.integrate(integrand, x, x + 1.0);
    total += es.integrate([&](double u) { return integrand(x + 1.0 + u); });
    total += es.integrate([&](double u) { return integrand(x - 1.0 - u); });
    const std::array<double, 1> xv{x};
    CHECK(smoothed_covariance(spec, s, xv) == doctest::Approx(total).epsilon(1e-8));
  }
  // Far field tends to the bare covariance.
  const std::array<double, 1> far{60.0};
  CHECK(smoothed_covariance(spec, s, far) == doctest::Approx(covariance(spec, far)).epsilon(1e-3));
}

TEST_CASE("chain integrals match direct time quadrature") {
  chaos::PrecisionStats stats;
  // One node: int_0^t sin(u a)/a du = (1 - cos(t a)) / a^2.
  const std::array<double, 1> one{2.25};
  CHECK(chaos::chain_integral(one, 1.3, stats) == doctest::Approx((1.0 - std::cos(1.3 * 1.5)) / 2.25).epsilon(1e-12));
  // Two nodes: int_{u1+u2<=t} s1(u1) s2(u2) by nested quadrature.
  const double a = 0.8, b = 2.1, t = 1.7;
  gauss_kronrod<double, 31> gk;
  const double direct = gk.integrate(
      [&](double u1) {
        return std::sin(a * u1) / a * gk.integrate([&](double u2) { return std::sin(b * u2) / b; }, 0.0, t - u1);
      },
      0.0, t);
  const std::array<double, 2> two{a * a, b * b};
  CHECK(chaos::chain_integral(two, t, stats) == doctest::Approx(direct).epsilon(1e-10));
  // Near-confluent nodes still agree with the confluent limit computed by quadrature.
  const std::array<double, 2> close{1.0, 1.0 + 1e-9};
  const double confluent = gk.integrate(
      [&](double u1) { return std::sin(u1) * gk.integrate([&](double u2) { return std::sin(u2); }, 0.0, t - u1); }, 0.0,
      t);
  CHECK(chaos::chain_integral(close, t, stats) == doctest::Approx(confluent).epsilon(1e-6));
}
