#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "wavechaos/chaos.hpp"
#include "wavechaos/errors.hpp"

using namespace wavechaos;
using namespace wavechaos::chaos;
using boost::math::quadrature::gauss_kronrod;
constexpr double pi = std::numbers::pi;

namespace {

SamplingOptions with_samples(std::size_t samples, std::uint64_t seed = kDefaultSeed) {
  SamplingOptions o;
  o.samples = samples;
  o.seed = seed;
  return o;
}

double joint_error(double a, double b) { return std::sqrt(a * a + b * b); }

// Adaptive Gauss-Kronrod in both variables after xi = tan(theta).
template <class F>
double plane_integral(F&& f) {
  auto inner = [&](double a) {
    return gauss_kronrod<double, 31>::integrate(
        [&](double b) {
          const double x = std::tan(a), y = std::tan(b);
          return f(x, y) / (std::cos(a) * std::cos(a) * std::cos(b) * std::cos(b));
        },
        -pi / 2, pi / 2, 12, 1e-11);
  };
  return gauss_kronrod<double, 31>::integrate(inner, -pi / 2, pi / 2, 12, 1e-10);
}

}  // namespace

TEST_CASE("method names round-trip") {
  for (Method m : {Method::fourier_mc, Method::realspace_quadrature, Method::closed_form})
    CHECK(method_from_string(to_string(m)) == m);
  CHECK_THROWS_AS((void)method_from_string("exact"), ConfigError);
}

TEST_CASE("C' matches closed forms") {
  CHECK(c_mu_prime(kernels::NoiseSpec::white(1)) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(c_mu_prime(kernels::NoiseSpec::white(3)) == doctest::Approx(1.0 / (8.0 * pi)).epsilon(1e-12));
  CHECK(c_mu_prime_lebesgue(kernels::NoiseSpec::white(3)) == doctest::Approx(pi * pi).epsilon(1e-12));
  CHECK_THROWS_AS((void)c_mu_prime_lebesgue(kernels::NoiseSpec::riesz(2, 1.0)), ConfigError);
}

TEST_CASE("T_1 equals C' and saturates the factorial bound") {
  for (const auto& spec : {kernels::NoiseSpec::white(1), kernels::NoiseSpec::riesz(2, 1.0),
                           kernels::NoiseSpec::fractional_product({0.4, 0.7}), kernels::NoiseSpec::white(3)}) {
    const ChaosEstimate e = t_n_estimate(spec, 1, with_samples(50000));
    CHECK(std::fabs(e.value - c_mu_prime(spec)) <= 3.0 * e.std_error + 1e-12 * e.value);
    CHECK(e.std_error < 0.01 * e.value);
  }
}

TEST_CASE("T_2 for white noise in d = 1 matches tensor quadrature") {
  const double oracle = plane_integral([](double a, double b) {
                          const double s = 1.0 / (1.0 + (a + b) * (a + b));
                          const double v = s * (1.0 / (1.0 + a * a) + 1.0 / (1.0 + b * b));
                          return v * v;
                        }) /
                        (4.0 * pi * pi);
  const ChaosEstimate e = t_n_estimate(kernels::NoiseSpec::white(1), 2, with_samples(200000));
  CHECK(std::fabs(e.value - oracle) < 3.0 * e.std_error);
  CHECK(e.value <= 4.0 * 0.25 * 0.25 + 3.0 * e.std_error);
}

TEST_CASE("permutation subsampling of T_n agrees with the full sum") {
  const auto spec = kernels::NoiseSpec::riesz(2, 1.0);
  SamplingOptions full = with_samples(40000, 11);
  SamplingOptions sub = full;
  sub.exact_order = 2;
  sub.permutation_samples = 4;
  const ChaosEstimate a = t_n_estimate(spec, 4, full);
  const ChaosEstimate b = t_n_estimate(spec, 4, sub);
  CHECK(std::fabs(a.value - b.value) < 3.0 * joint_error(a.std_error, b.std_error));
  CHECK(b.std_error > 0.0);
}

TEST_CASE("first chaos norm for white noise in d = 1") {
  const auto spec = kernels::NoiseSpec::white(1);
  const ChaosEstimate closed = chaos_norm(spec, 1, 1.0, Method::closed_form);
  CHECK(closed.value == 1.0 / 6.0);
  CHECK(closed.std_error == 0.0);
  const ChaosEstimate real = chaos_norm(spec, 1, 1.0, Method::realspace_quadrature);
  CHECK(real.value == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(real.std_error == 0.0);
  const ChaosEstimate mc = chaos_norm(spec, 1, 1.0, Method::fourier_mc, with_samples(200000));
  CHECK(std::fabs(mc.value - 1.0 / 6.0) < 3.0 * mc.std_error);
  CHECK(mc.std_error < 0.01 * mc.value);
  CHECK(chaos_norm(spec, 1, 2.0, Method::closed_form).value == doctest::Approx(4.0 / 3.0));
  const ChaosEstimate mc2 = chaos_norm(spec, 1, 2.0, Method::fourier_mc, with_samples(200000));
  CHECK(std::fabs(mc2.value - 4.0 / 3.0) < 3.0 * mc2.std_error);
}

TEST_CASE("zeroth chaos is the constant one") {
  for (const auto& spec : {kernels::NoiseSpec::white(3), kernels::NoiseSpec::riesz(2, 0.5)}) {
    const ChaosEstimate e = chaos_norm(spec, 0, 3.0);
    CHECK(e.value == 1.0);
    CHECK(e.std_error == 0.0);
  }
}

TEST_CASE("white kernel in d = 1 has the expected shape") {
  for (double x : {-0.7, 0.0, 0.3, 1.5}) {
    const std::array<double, 1> p{x};
    CHECK(white_kernel_1d(1, 1.0, p) == doctest::Approx(0.5 * std::max(0.0, 1.0 - std::fabs(x))));
  }
  // Outside the light cone the kernel vanishes; it is symmetric in its arguments.
  const std::array<double, 2> far{0.9, -0.9}, a{0.2, -0.4}, b{-0.4, 0.2};
  CHECK(white_kernel_1d(2, 1.0, far) == 0.0);
  CHECK(white_kernel_1d(2, 1.0, a) == doctest::Approx(white_kernel_1d(2, 1.0, b)));
  // n = 2 at the origin: two orderings of (t^2) / (2^2 2!) averaged over 2!.
  const std::array<double, 2> origin{0.0, 0.0};
  CHECK(white_kernel_1d(2, 1.0, origin) == doctest::Approx(1.0 / 8.0));
}

TEST_CASE("second chaos norm: real space against Fourier sampling") {
  const auto spec = kernels::NoiseSpec::white(1);
  const ChaosEstimate real = chaos_norm(spec, 2, 1.0, Method::realspace_quadrature);
  const double adaptive = gauss_kronrod<double, 31>::integrate(
      [](double x1) {
        return gauss_kronrod<double, 31>::integrate(
            [&](double x2) {
              const std::array<double, 2> x{x1, x2};
              const double f = white_kernel_1d(2, 1.0, x);
              return f * f;
            },
            -1.0, 1.0, 10, 1e-9);
      },
      -1.0, 1.0, 10, 1e-8);
  CHECK(real.value == doctest::Approx(adaptive).epsilon(1e-6));
  const ChaosEstimate mc = chaos_norm(spec, 2, 1.0, Method::fourier_mc, with_samples(200000));
  CHECK(std::fabs(mc.value - real.value) < 3.0 * mc.std_error);
}

TEST_CASE("first Riesz chaos norm in d = 1: real space against Fourier sampling") {
  const auto spec = kernels::NoiseSpec::riesz(1, 0.5);
  const ChaosEstimate real = chaos_norm(spec, 1, 1.0, Method::realspace_quadrature);
  const ChaosEstimate mc = chaos_norm(spec, 1, 1.0, Method::fourier_mc, with_samples(200000));
  CHECK(std::fabs(mc.value - real.value) < 3.0 * mc.std_error);
}

TEST_CASE("method and spec mismatches are configuration errors") {
  CHECK_THROWS_AS((void)chaos_norm(kernels::NoiseSpec::white(3), 1, 1.0, Method::realspace_quadrature), ConfigError);
  CHECK_THROWS_AS((void)chaos_norm(kernels::NoiseSpec::white(1), 2, 1.0, Method::closed_form), ConfigError);
  CHECK_THROWS_AS((void)chaos_norm(kernels::NoiseSpec::white(1), 13, 1.0), ConfigError);
  CHECK_THROWS_AS((void)t_n_estimate(kernels::NoiseSpec::white(1), 0), ConfigError);
  CHECK_THROWS_AS((void)chaos_norm(kernels::NoiseSpec::white(1), 1, 1.0, Method::closed_form, {}, 0.1), ConfigError);
}

TEST_CASE("chaos norms scale like t^{(4 - alpha) n}") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> time(0.5, 2.0);
  for (const auto& spec : {kernels::NoiseSpec::white(1), kernels::NoiseSpec::riesz(2, 1.0),
                           kernels::NoiseSpec::hybrid({2, 1}, {1.2, 0.4})}) {
    const double a = 4.0 - spec.alpha();
    for (int n = 1; n <= 3; ++n) {
      const double t = time(rng);
      const ChaosEstimate base = chaos_norm(spec, n, 1.0, Method::fourier_mc, with_samples(20000, 100 + n));
      const ChaosEstimate at_t = chaos_norm(spec, n, t, Method::fourier_mc, with_samples(20000, 200 + n));
      const double scale = std::pow(t, a * n);
      CHECK(std::fabs(at_t.value - scale * base.value) < 3.0 * joint_error(at_t.std_error, scale * base.std_error));
    }
  }
}

TEST_CASE("norms sit between the two Laplace bounds in terms of T_n") {
  for (const auto& spec : {kernels::NoiseSpec::white(1), kernels::NoiseSpec::riesz(2, 1.0)}) {
    const double a = 4.0 - spec.alpha();
    for (int n = 1; n <= 4; ++n) {
      const ChaosEstimate norm = chaos_norm(spec, n, 1.0, Method::fourier_mc, with_samples(20000, 300 + n));
      const ChaosEstimate tn = t_n_estimate(spec, n, with_samples(20000, 400 + n));
      const double f2 = std::pow(std::tgamma(n + 1.0), 2);
      const double g1 = std::tgamma(a * n + 1.0);
      const double upper = std::pow(2.0, a * n) / f2;
      CHECK(g1 * norm.value <= upper * tn.value + 3.0 * joint_error(g1 * norm.std_error, upper * tn.std_error));
      const double g2 = std::pow(std::tgamma(a * n / 2.0 + 1.0), 2);
      CHECK(tn.value / f2 <= g2 * norm.value + 3.0 * joint_error(tn.std_error / f2, g2 * norm.std_error));
    }
  }
}

TEST_CASE("estimates are bit-identical for identical seeds") {
  const auto spec = kernels::NoiseSpec::riesz(3, 2.0);
  const ChaosEstimate a = chaos_norm(spec, 3, 1.3, Method::fourier_mc, with_samples(5000, 42));
  const ChaosEstimate b = chaos_norm(spec, 3, 1.3, Method::fourier_mc, with_samples(5000, 42));
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
  CHECK(a.spec_hash == spec.hash());
  const ChaosEstimate c = chaos_norm(spec, 3, 1.3, Method::fourier_mc, with_samples(5000, 43));
  CHECK(a.value != c.value);
}

TEST_CASE("mollification ladder extrapolates to the unmollified norm") {
  const auto spec = kernels::NoiseSpec::white(3);
  const ChaosEstimate plain = chaos_norm(spec, 1, 1.0, Method::fourier_mc, with_samples(100000, 5));
  const ChaosEstimate mollified = chaos_norm(spec, 1, 1.0, Method::fourier_mc, with_samples(100000, 5), 0.05);
  CHECK(mollified.value < plain.value);
  const ChaosEstimate extrapolated = chaos_norm_extrapolated(spec, 1, 1.0, 1e-3, with_samples(100000, 5));
  // The ladder cancels the linear term only; the heavy frequency tail leaves a
  // bias of order sqrt(epsilon0), so the gap shrinks tenfold per factor 100.
  const double gap3 = std::fabs(extrapolated.value - plain.value);
  const ChaosEstimate finer = chaos_norm_extrapolated(spec, 1, 1.0, 1e-5, with_samples(100000, 5));
  const double gap5 = std::fabs(finer.value - plain.value);
  CHECK(gap5 < 0.2 * gap3);
  CHECK(gap5 < 0.01 * plain.value);
}

TEST_CASE("second moment series") {
  const auto white1 = kernels::NoiseSpec::white(1);
  const MomentSeriesResult zero = second_moment_series(white1, 5.0, 0.0, 4, with_samples(1000));
  for (double s : zero.partial_sums) CHECK(s == 1.0);

  const MomentSeriesResult one = second_moment_series(white1, 1.0, 1.0, 1, with_samples(200000));
  REQUIRE(one.partial_sums.size() == 2);
  CHECK(std::fabs(one.partial_sums[1] - 7.0 / 6.0) < 3.0 * one.term_errors[1]);

  const MomentSeriesResult series =
      second_moment_series(kernels::NoiseSpec::riesz(2, 1.0), 1.5, 0.7, 5, with_samples(5000));
  for (std::size_t k = 1; k < series.partial_sums.size(); ++k)
    CHECK(series.partial_sums[k] >= series.partial_sums[k - 1]);
  CHECK(series.converged);

  // Deep in the divergence regime of white noise in d = 3.
  const double m = 0.0042;
  const MomentSeriesResult critical =
      second_moment_series(kernels::NoiseSpec::white(3), 60.0, 1.0, 6, with_samples(5000), m);
  CHECK_FALSE(critical.converged);
  CHECK_FALSE(critical.warning.empty());
  const MomentSeriesResult calm =
      second_moment_series(kernels::NoiseSpec::white(3), 1.0, 1.0, 2, with_samples(2000), m);
  CHECK(calm.warning.empty());
}

TEST_CASE("Laplace identity for chaos norms") {
  const auto spec = kernels::NoiseSpec::white(1);
  const LaplaceReport zero = laplace_identity_check(spec, 0, with_samples(10));
  CHECK(zero.lhs == 1.0);
  CHECK(zero.rhs == 1.0);
  for (int n = 1; n <= 3; ++n) {
    const LaplaceReport r = laplace_identity_check(spec, n, with_samples(20000, 500 + n));
    CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(r.bound_holds);
    CHECK(std::fabs(r.curve - r.lhs) < 3.0 * joint_error(r.curve_error, r.lhs_error) + 1e-3 * r.lhs);
  }
  const LaplaceReport first = laplace_identity_check(spec, 1, with_samples(200000));
  CHECK(std::fabs(first.lhs - 1.0) < 3.0 * first.lhs_error);
  CHECK(first.bound == doctest::Approx(2.0));
}

TEST_CASE("reverse Cauchy-Schwarz inequality") {
  const ReverseCsReport constant = reverse_cauchy_schwarz_check([](double) { return 1.0; });
  CHECK(constant.lhs == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(constant.rhs == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(constant.holds);
  const ReverseCsReport linear = reverse_cauchy_schwarz_check([](double t) { return t; });
  CHECK(linear.lhs == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(linear.rhs == doctest::Approx(1.0).epsilon(1e-10));
  const std::array<double, 3> cuts{0.5, 1.0, 2.5};
  auto step = [](double t) { return t < 0.5 ? 0.2 : t < 1.0 ? 1.0 : t < 2.5 ? 1.5 : 4.0; };
  const ReverseCsReport stepped = reverse_cauchy_schwarz_check(step, cuts);
  const double first = 0.2 * (1 - std::exp(-0.5)) + 1.0 * (std::exp(-0.5) - std::exp(-1.0)) +
                       1.5 * (std::exp(-1.0) - std::exp(-2.5)) + 4.0 * std::exp(-2.5);
  const double second = 0.04 * (1 - std::exp(-1.0)) + (std::exp(-1.0) - std::exp(-2.0)) +
                        2.25 * (std::exp(-2.0) - std::exp(-5.0)) + 16.0 * std::exp(-5.0);
  CHECK(stepped.rhs == doctest::Approx(first * first).epsilon(1e-10));
  CHECK(stepped.lhs == doctest::Approx(second).epsilon(1e-10));
  CHECK(stepped.holds);
  CHECK_THROWS_AS((void)reverse_cauchy_schwarz_check([](double t) { return std::exp(-t); }), ConfigError);
}

TEST_CASE("W_1 with an indicator weight") {
  const auto spec = kernels::NoiseSpec::white(1);
  const FrequencyWeight ball = [](std::span<const double> xi) { return std::fabs(xi[0]) <= 1.0 ? 1.0 : 0.0; };
  for (double t : {0.5, 1.0, 3.0}) {
    const double oracle =
        2.0 *
        gauss_kronrod<double, 31>::integrate(
            [&](double x) { return x < 1e-6 ? 0.5 * t * t : (1.0 - std::cos(t * x)) / (x * x); }, 0.0, 1.0, 10, 1e-13) /
        (2.0 * pi);
    const ChaosEstimate w = lower_bound_W(spec, 1, t, ball, with_samples(100000));
    CHECK(std::fabs(w.value - oracle) < 3.0 * w.std_error);
  }
  // Small times: W_1 ~ (t^2 / 2) mu(phi).
  const double t = 1e-3;
  const ChaosEstimate w = lower_bound_W(spec, 1, t, ball, with_samples(100000));
  CHECK(w.value == doctest::Approx(0.5 * t * t / pi).epsilon(0.02));
}

TEST_CASE("W_n scaling under phi -> t^{alpha/2} phi(t .)") {
  for (const auto& spec : {kernels::NoiseSpec::white(1), kernels::NoiseSpec::riesz(2, 1.0)}) {
    const double alpha = spec.alpha();
    for (int n = 1; n <= 2; ++n) {
      const double t = 1.7;
      const FrequencyWeight phi = [](std::span<const double> xi) {
        double sq = 0.0;
        for (double v : xi) sq += v * v;
        return std::exp(-sq);
      };
      const FrequencyWeight scaled = [&](std::span<const double> xi) {
        std::vector<double> y(xi.begin(), xi.end());
        for (double& v : y) v *= t;
        return std::pow(t, alpha / 2.0) * phi(y);
      };
      const ChaosEstimate a = lower_bound_W(spec, n, t, scaled, with_samples(50000, 600 + n));
      const ChaosEstimate b = lower_bound_W(spec, n, 1.0, phi, with_samples(50000, 700 + n));
      const double s = std::pow(t, (4.0 - alpha) * n / 2.0);
      CHECK(std::fabs(a.value - s * b.value) < 3.0 * joint_error(a.std_error, s * b.std_error));
    }
  }
}

TEST_CASE("Laplace transform of W_n is the resolvent product") {
  for (const auto& spec : {kernels::NoiseSpec::white(1), kernels::NoiseSpec::riesz(3, 2.0)}) {
    const FrequencyWeight phi = [](std::span<const double> xi) {
      double sq = 0.0;
      for (double v : xi) sq += v * v;
      return 1.0 / (1.0 + sq);
    };
    for (int n = 1; n <= 3; ++n) {
      const LaplaceWReport r = laplace_check_W(spec, n, phi, with_samples(20000, 800 + n));
      CHECK(std::fabs(r.curve - r.resolvent) < 3.0 * r.difference_error + 1e-6 * r.resolvent);
    }
  }
}

TEST_CASE("U_1 for white noise in d = 1 with a Gaussian test function") {
  const auto spec = kernels::NoiseSpec::white(1);
  const TestFunction f = gaussian_test_function(spec, 1.0);
  // int_0^1 int f(x) (1/2) 1{|x| < s} dx ds = int_0^1 erf(s / sqrt 2) / 2 ds.
  const double oracle = gauss_kronrod<double, 31>::integrate(
      [](double s) { return 0.5 * std::erf(s / std::numbers::sqrt2); }, 0.0, 1.0, 10, 1e-14);
  const ChaosEstimate u = lower_bound_U(spec, 1, 1.0, f, with_samples(100000));
  CHECK(std::fabs(u.value - oracle) < 3.0 * u.std_error);
  CHECK(lower_bound_U(spec, 0, 1.0, f).value == 1.0);
}

TEST_CASE("U_n agrees with W_n at the Fourier transform of f") {
  const std::vector<std::pair<kernels::NoiseSpec, int>> cases{
      {kernels::NoiseSpec::white(1), 2},      {kernels::NoiseSpec::riesz(1, 0.5), 2},
      {kernels::NoiseSpec::riesz(2, 1.0), 2}, {kernels::NoiseSpec::fractional_product({0.5, 0.5}), 2},
      {kernels::NoiseSpec::white(3), 1},      {kernels::NoiseSpec::riesz(3, 1.5), 2}};
  for (const auto& [spec, n] : cases) {
    const TestFunction f = gaussian_test_function(spec, 0.5);
    const ChaosEstimate u = lower_bound_U(spec, n, 1.2, f, with_samples(100000, 900 + n));
    const ChaosEstimate w = lower_bound_W(spec, n, 1.2, f.fourier, with_samples(100000, 950 + n));
    CHECK(u.value >= -3.0 * u.std_error);
    CHECK(std::fabs(u.value - w.value) < 3.0 * joint_error(u.std_error, w.std_error));
  }
}

TEST_CASE("negative test functions are rejected") {
  const auto spec = kernels::NoiseSpec::white(1);
  TestFunction f = gaussian_test_function(spec, 1.0);
  f.convolved = [](std::span<const double>) { return -1.0; };
  CHECK_THROWS_AS((void)lower_bound_U(spec, 1, 1.0, f, with_samples(100)), ConfigError);
}
