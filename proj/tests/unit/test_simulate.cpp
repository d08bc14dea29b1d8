#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "doctest.h"
#include "wavechaos/chaos.hpp"
#include "wavechaos/errors.hpp"
#include "wavechaos/simulate.hpp"

using namespace wavechaos;
using namespace wavechaos::simulate;
using boost::math::quadrature::gauss_kronrod;

namespace {

const SymmetricTensor::Entry* find_entry(const SymmetricTensor& a, std::array<int, 3> index) {
  for (const auto& e : a.entries)
    if (e.index == index) return &e;
  return nullptr;
}

// Adaptive nested integral of the symmetrized kernel over a product of boxes.
double kernel_box_oracle(int n, double t, const BoxBasis& basis, std::array<int, 3> index) {
  std::vector<double> x(static_cast<std::size_t>(n));
  auto level = [&](auto&& self, int k) -> double {
    if (k == n) return chaos::white_kernel_1d(n, t, x);
    const double a = basis.left(index[static_cast<std::size_t>(k)]);
    return gauss_kronrod<double, 15>::integrate(
        [&](double y) {
          x[static_cast<std::size_t>(k)] = y;
          return self(self, k + 1);
        },
        a, a + basis.width(), 4, 1e-10);
  };
  return level(level, 0) * std::pow(basis.width(), -0.5 * n);
}

}  // namespace

TEST_CASE("first-order box coefficients") {
  const BoxBasis basis{1.0, 8};
  const double t = 0.9;
  const auto a = project_kernel(1, t, basis);
  // Box 5 is [0.25, 0.5].
  const auto* e = find_entry(a, {5, 0, 0});
  REQUIRE(e != nullptr);
  const double oracle =
      gauss_kronrod<double, 61>::integrate([&](double x) { return 0.5 * (t - std::fabs(x)); }, 0.25, 0.5) /
      std::sqrt(0.25);
  CHECK(e->value == doctest::Approx(oracle).epsilon(1e-14));

  // Boxes outside |x| < t carry nothing.
  const auto narrow = project_kernel(1, 0.5, basis);
  CHECK(find_entry(narrow, {0, 0, 0}) == nullptr);
  CHECK(find_entry(narrow, {7, 0, 0}) == nullptr);
  for (int n = 2; n <= 3; ++n)
    for (const auto& entry : project_kernel(n, 0.5, basis).entries)
      for (int i = 0; i < n; ++i) {
        CHECK(entry.index[static_cast<std::size_t>(i)] != 0);
        CHECK(entry.index[static_cast<std::size_t>(i)] != 7);
      }
}

TEST_CASE("projected norms increase to the chaos norms") {
  const double t = 1.0;
  const double first = chaos::chaos_norm(kernels::NoiseSpec::white(1), 1, t, chaos::Method::closed_form).value;
  const double second =
      chaos::chaos_norm(kernels::NoiseSpec::white(1), 2, t, chaos::Method::realspace_quadrature).value;
  double previous1 = 0.0, previous2 = 0.0;
  for (int m : {16, 32, 64}) {
    const BoxBasis basis{t, m};
    const double s1 = project_kernel(1, t, basis).squared_norm();
    const double s2 = project_kernel(2, t, basis).squared_norm();
    CHECK(s1 > previous1);
    CHECK(s2 > previous2);
    CHECK(s1 < first);
    CHECK(s2 < second);
    // Piecewise-constant projection loses w^2/12 times the slope energy t/2.
    const double w = basis.width();
    CHECK(first - s1 == doctest::Approx(w * w * t / 24.0).epsilon(1e-9));
    previous1 = s1;
    previous2 = s2;
  }
  CHECK(previous2 == doctest::Approx(second).epsilon(0.005));
  const double fine = project_kernel(1, t, {t, 1024}).squared_norm();
  CHECK(fine == doctest::Approx(t * t * t / 6.0).epsilon(1e-6));
}

TEST_CASE("higher-order box coefficients against adaptive quadrature") {
  const BoxBasis basis{1.0, 8};
  const double t = 1.0;
  const auto a2 = project_kernel(2, t, basis);
  for (std::array<int, 3> index : {std::array<int, 3>{3, 3, 0}, {3, 4, 0}, {2, 5, 0}, {4, 4, 0}}) {
    const auto* e = find_entry(a2, index);
    REQUIRE(e != nullptr);
    CHECK(e->value == doctest::Approx(kernel_box_oracle(2, t, basis, index)).epsilon(1e-6));
  }
  const auto a3 = project_kernel(3, t, basis);
  for (std::array<int, 3> index : {std::array<int, 3>{3, 3, 4}, {4, 4, 4}}) {
    const auto* e = find_entry(a3, index);
    REQUIRE(e != nullptr);
    CHECK(e->value == doctest::Approx(kernel_box_oracle(3, t, basis, index)).epsilon(1e-5));
  }
}

TEST_CASE("Wick products have the Gaussian chaos moments") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  const double a = 0.7;
  SymmetricTensor single2{2, 1, {{{0, 0, 0}, a}}};
  SymmetricTensor single3{3, 1, {{{0, 0, 0}, a}}};
  // Off-diagonal entry a_{01} = a_{10}: I_2 = 2 a z_0 z_1, E I_2^2 = 2! (2 a^2).
  SymmetricTensor cross{2, 2, {{{0, 1, 0}, a}}};
  Accumulator s2, s3, sc, m2, mixed;
  std::vector<double> z(2);
  for (int i = 0; i < 400000; ++i) {
    z[0] = normal(rng);
    z[1] = normal(rng);
    const double i2 = wick_integral(single2, z), i3 = wick_integral(single3, z), ic = wick_integral(cross, z);
    s2.add(i2 * i2);
    s3.add(i3 * i3);
    sc.add(ic * ic);
    m2.add(i2);
    mixed.add(i2 * i3);
  }
  CHECK(std::abs(s2.mean - 2.0 * a * a) < 3.0 * s2.stderr_of_mean());
  CHECK(std::abs(s3.mean - 6.0 * a * a) < 3.0 * s3.stderr_of_mean());
  CHECK(std::abs(sc.mean - 2.0 * cross.squared_norm()) < 3.0 * sc.stderr_of_mean());
  CHECK(cross.squared_norm() == doctest::Approx(2.0 * a * a));
  CHECK(std::abs(m2.mean) < 3.0 * m2.stderr_of_mean());
  CHECK(std::abs(mixed.mean) < 3.0 * mixed.stderr_of_mean());
}

TEST_CASE("sampled truncated solution") {
  SimConfig c;
  c.truncation = 1;
  c.replicates = 100000;
  const auto one = sample_uN(c);
  CHECK(std::abs(one.mean - 1.0) < 3.0 * one.mean_stderr);
  CHECK(std::abs(one.variance - c.theta / 6.0) < 3.0 * one.variance_stderr);
  CHECK(one.moments.size() == 3);
  CHECK(std::pow(one.moments[1], 0.5) <= std::pow(one.moments[2], 0.25));

  c.truncation = 2;
  c.theta = 2.0;
  const auto two = sample_uN(c);
  const auto white = kernels::NoiseSpec::white(1);
  const double series =
      1.0 + c.theta * chaos::chaos_norm(white, 1, 1.0, chaos::Method::closed_form).value +
      c.theta * c.theta * 2.0 * chaos::chaos_norm(white, 2, 1.0, chaos::Method::realspace_quadrature).value;
  CHECK(std::abs(two.mean - 1.0) < 3.0 * two.mean_stderr);
  CHECK(std::abs(two.moments[1] - series) < 3.0 * two.moment_stderr[1]);
  CHECK(two.series_second_moment == doctest::Approx(series).epsilon(1e-3));
  CHECK(std::pow(two.moments[1], 0.5) <= std::pow(two.moments[2], 0.25));
}

TEST_CASE("sampling is deterministic") {
  SimConfig c;
  c.truncation = 3;
  c.modes = 16;
  c.replicates = 2000;
  const auto a = sample_uN(c);
  const auto b = sample_uN(c);
  CHECK(a.samples == b.samples);
  CHECK(a.moment_stderr == b.moment_stderr);
  c.seed += 1;
  CHECK(sample_uN(c).samples != a.samples);
}

TEST_CASE("hypercontractivity of the truncated series") {
  SimConfig c;
  c.t = 0.8;
  c.truncation = 3;
  c.modes = 32;
  c.replicates = 20000;

  const auto same = hypercontractivity_check(c, 2.0);
  CHECK(same.t_p == c.t);
  CHECK(same.lhs == same.rhs);
  CHECK(same.holds);

  const auto four = hypercontractivity_check(c, 4.0);
  CHECK(four.t_p == doctest::Approx(std::cbrt(3.0) * 0.8).epsilon(1e-15));
  CHECK(four.holds);
  CHECK(std::abs(four.rhs - four.rhs_series) < 3.0 * four.rhs_stderr);

  c.theta = 0.0;
  const auto flat = hypercontractivity_check(c, 4.0);
  CHECK(flat.lhs == 1.0);
  CHECK(flat.rhs == 1.0);
}

TEST_CASE("sample CSV round trip") {
  SimConfig c;
  c.truncation = 2;
  c.modes = 8;
  c.replicates = 50;
  const auto run = sample_uN(c);
  const auto path = (std::filesystem::temp_directory_path() / "wavechaos_samples.csv").string();
  write_samples_csv(path, run);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "u");
  std::vector<double> back;
  while (std::getline(in, line)) back.push_back(std::stod(line));
  CHECK(back == run.samples);
  std::filesystem::remove(path);
}

TEST_CASE("simulation configuration errors") {
  SimConfig c;
  c.truncation = 4;
  CHECK_THROWS_AS((void)sample_uN(c), ConfigError);
  c.truncation = 1;
  c.modes = 7;
  CHECK_THROWS_AS((void)sample_uN(c), ConfigError);
  c.modes = 8;
  c.half_width = 0.5;
  CHECK_THROWS_AS((void)sample_uN(c), ConfigError);
  CHECK_THROWS_AS((void)project_kernel(2, 1.5, {1.0, 8}), ConfigError);
  CHECK_THROWS_AS((void)hypercontractivity_check(SimConfig{}, 1.5), ConfigError);
}
