#include "acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "wavechaos/asymptotics.hpp"
#include "wavechaos/chaos.hpp"
#include "wavechaos/errors.hpp"
#include "wavechaos/simulate.hpp"
#include "wavechaos/variational.hpp"

namespace wavechaos::cli {

namespace {

using kernels::NoiseSpec;
constexpr double pi = std::numbers::pi;
const double kSobolevBound = 1.0 / (2.0 * std::pow(pi, 4));

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

struct Check {
  bool passed = true;
  std::vector<std::string> notes;

  void expect(bool ok, std::string note) {
    passed = passed && ok;
    notes.push_back((ok ? "" : "FAILED ") + std::move(note));
  }
  [[nodiscard]] std::string detail() const {
    std::string out;
    for (std::size_t i = 0; i < notes.size(); ++i) out += (i ? "; " : "") + notes[i];
    return out;
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Check variational_d1() {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  variational::VariationalProblem p;
  p.f = variational::Interaction::delta();
  const auto r = variational::solve_M(p, 1);
  const double elapsed = seconds_since(start);
  const double target = std::cbrt(1.5) / 12.0;
  const double gap = std::abs(r.value - target) / target;
  c.expect(gap <= 0.01, fmt("M(delta0, d=1) = %.6f vs %.6f (relative gap %.3g, limit 0.01)", r.value, target, gap));
  c.expect(elapsed < 30.0, fmt("runtime %.1f s < 30 s", elapsed));
  c.notes.push_back(fmt("sharp 1-D Gagliardo-Nirenberg value (3/4) 6^(-1/3) = %.6f", 0.75 * std::cbrt(1.0 / 6.0)));
  return c;
}

Check sobolev_d3() {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  const auto s = variational::sobolev_bound_analysis();
  c.expect(s.identity_gap < 1e-12, fmt("|27 A^6/32 - 1/(2 pi^4)| = %.3g < 1e-12 (A = %.12f)", s.identity_gap, s.a));
  variational::VariationalProblem p;
  p.f = variational::Interaction::delta();
  p.d = 3;
  p.grid.points = 48;
  const auto r = variational::solve_M(p, 11);
  c.expect(r.value <= kSobolevBound + 1e-3,
           fmt("M(delta0, d=3, m=48) = %.6f <= %.6f (L = %.0f)", r.value, kSobolevBound + 1e-3, r.extent));
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 300.0, fmt("runtime %.1f s < 300 s", elapsed));
  return c;
}

Check scaling_matrix() {
  Check c;
  using variational::Interaction;
  struct Case {
    Interaction f;
    double big_theta, theta;
    int d;
    variational::Grid grid;
  };
  const std::vector<Case> cases{
      {Interaction::delta(), 4.0, 1.0, 1, {16.0, 512}},
      {Interaction::delta(), 1.0, 2.0, 1, {24.0, 512}},
      {Interaction::noise(NoiseSpec::riesz(2, 1.0)), 1.0, 3.0, 2, {40.0, 160}},
  };
  for (const auto& k : cases) {
    const auto r = variational::scaling_check_M(k.f, k.big_theta, k.theta, k.d, k.grid);
    c.expect(r.relative_gap <= 0.03,
             fmt("%s Theta=%g theta=%g: solved %.6f predicted %.6f gap %.3g", k.f.describe(k.d).c_str(), k.big_theta,
                 k.theta, r.solved, r.predicted, r.relative_gap));
  }
  return c;
}

Check chaos_oracle() {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  const auto white = NoiseSpec::white(1);
  const auto exact = chaos::chaos_norm(white, 1, 1.0, chaos::Method::closed_form);
  c.expect(exact.value == 1.0 / 6.0, fmt("closed form n=1: %.17g", exact.value));
  chaos::SamplingOptions o;
  o.samples = 1000000;
  const auto mc1 = chaos::chaos_norm(white, 1, 1.0, chaos::Method::fourier_mc, o);
  c.expect(std::abs(mc1.value - 1.0 / 6.0) <= 3.0 * mc1.std_error && mc1.std_error < 0.01 * mc1.value,
           fmt("MC n=1: %.6f +- %.2g (relative stderr %.2g)", mc1.value, mc1.std_error, mc1.std_error / mc1.value));
  const auto quad = chaos::chaos_norm(white, 2, 1.0, chaos::Method::realspace_quadrature);
  const auto mc2 = chaos::chaos_norm(white, 2, 1.0, chaos::Method::fourier_mc, o);
  c.expect(std::abs(mc2.value - quad.value) <= 3.0 * mc2.std_error,
           fmt("MC n=2: %.7f +- %.2g vs quadrature %.7f", mc2.value, mc2.std_error, quad.value));
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 120.0, fmt("runtime %.1f s < 120 s", elapsed));
  return c;
}

Check laplace_identity() {
  Check c;
  for (int n = 1; n <= 3; ++n) {
    const auto r = chaos::laplace_identity_check(NoiseSpec::white(1), n);
    c.expect(r.ratio >= 0.97 && r.ratio <= 1.03 && r.bound_holds,
             fmt("n=%d: ratio %.4f, lhs %.4g <= bound %.4g", n, r.ratio, r.lhs, r.bound));
  }
  return c;
}

Check critical_times() {
  Check c;
  const auto t = asymptotics::critical_times(1.0, 2.0, kSobolevBound);
  c.expect(std::abs(t.t_p - 2.0 * pi * pi) <= 1e-12 * 2.0 * pi * pi, fmt("T_2 = %.15f (2 pi^2)", t.t_p));
  c.expect(std::abs(t.t_p_prime - 4.0 * pi) <= 1e-12 * 4.0 * pi, fmt("T_2' = %.15f (4 pi)", t.t_p_prime));
  int held = 0, total = 0;
  for (double theta : {0.5, 1.0, 2.0, 4.0, 8.0})
    for (double p : {2.0, 3.0, 5.0, 10.0}) {
      const auto g = asymptotics::critical_times(theta, p, kSobolevBound);
      ++total;
      if (g.holds && g.t_p >= g.t_p_prime) ++held;
    }
  c.expect(held == total, fmt("T_p >= 2 pi^2/(theta(p-1)) >= T_p' on %d/%d grid points", held, total));
  return c;
}

Check radius_probe() {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  variational::VariationalProblem p;
  p.f = variational::Interaction::delta();
  p.d = 3;
  p.radial = true;
  const double m = variational::solve_M(p, 5).value;
  chaos::SamplingOptions o;
  o.samples = 100000;
  std::vector<std::pair<int, double>> coefficients;
  double factorial = 1.0;
  for (int n = 1; n <= 6; ++n) {
    factorial *= n;
    coefficients.emplace_back(
        n, factorial * chaos::chaos_norm(NoiseSpec::white(3), n, 1.0, chaos::Method::fourier_mc, o).value);
  }
  const auto probe = asymptotics::fit_rate(coefficients);
  const double target = std::sqrt(2.0 / m);
  const double gap = std::abs(probe.radius - target) / target;
  c.expect(gap <= 0.3, fmt("radius %.2f (window %d..%d) vs sqrt(2/M) = %.2f with M = %.7f: gap %.3g, limit 0.3",
                           probe.radius, probe.n_min, probe.n_max, target, m, gap));
  const auto& back = coefficients;
  c.notes.push_back(fmt("last ratios R_n/R_(n-1): %.4f %.4f %.4f vs 1/radius %.4f", back[3].second / back[2].second,
                        back[4].second / back[3].second, back[5].second / back[4].second, 1.0 / target));
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 600.0, fmt("runtime %.1f s < 600 s", elapsed));
  return c;
}

Check mittag_leffler() {
  Check c;
  const double one = asymptotics::mittag_leffler_limit(1.0, 50.0);
  c.expect(std::abs(one - 1.0) <= 1e-9, fmt("gamma=1, t=50: %.12f", one));
  struct Ladder {
    double gamma;
    std::vector<double> t;
  };
  for (const auto& l :
       {Ladder{0.5, {10.0, 30.0, 100.0}}, Ladder{1.0, {10.0, 30.0, 50.0}}, Ladder{2.0, {100.0, 1e3, 1e4}}}) {
    const double v = asymptotics::mittag_leffler_limit(l.gamma, l.t.back());
    c.expect(std::abs(v - l.gamma) <= 0.05 * l.gamma, fmt("gamma=%g, t=%g: %.5f", l.gamma, l.t.back(), v));
  }
  return c;
}

Check series_growth() {
  Check c;
  for (double alpha : {0.5, 1.0, 2.0}) {
    const double theta = 0.7, base = 0.5;
    std::vector<double> r;
    for (int n = 0; n <= 600; ++n) r.push_back(std::pow(base, n));
    const double m = std::pow(base / asymptotics::growth_base(alpha, 1.0), 2.0 / (4.0 - alpha));
    std::vector<double> t;
    for (int i = 0; i <= 10; ++i)
      t.push_back(std::pow(std::pow(60.0 + 14.0 * i, 3.0 - alpha) / (theta * base), 1.0 / (4.0 - alpha)));
    const auto g = asymptotics::series_growth_probe({alpha, theta, 2.0, m}, t, r);
    const double expected = (3.0 - alpha) * std::pow(theta * base, 1.0 / (3.0 - alpha));
    const double gap = std::abs(g.fitted_constant - expected) / expected;
    c.expect(gap <= 0.02 && !g.truncated,
             fmt("synthetic alpha=%g: constant %.5f vs %.5f (gap %.3g)", alpha, g.fitted_constant, expected, gap));
  }
  chaos::SamplingOptions o;
  o.samples = 20000;
  std::vector<double> r{1.0};
  double factorial = 1.0;
  for (int n = 1; n <= 8; ++n) {
    factorial *= n;
    r.push_back(std::pow(factorial, 3) *
                chaos::chaos_norm(NoiseSpec::white(1), n, 1.0, chaos::Method::fourier_mc, o).value);
  }
  std::vector<double> t;
  for (int i = 0; i <= 10; ++i) t.push_back(4.0 + 0.25 * i);
  const auto g = asymptotics::series_growth_probe({1.0, 1.0, 2.0, 0.75 * std::cbrt(1.0 / 6.0)}, t, r);
  c.expect(std::abs(g.fitted_exponent - 1.5) <= 0.15 && !g.truncated,
           fmt("d=1 white N=8, t in [4, 6.5]: exponent %.4f vs 1.5 (constant %.4f, predicted %.4f)", g.fitted_exponent,
               g.fitted_constant, g.predicted_constant));
  return c;
}

Check simulator() {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  simulate::SimConfig s;
  s.replicates = 100000;
  s.truncation = 3;
  const auto full = simulate::sample_uN(s);
  c.expect(std::abs(full.mean - 1.0) <= 3.0 * full.mean_stderr,
           fmt("N=3 mean %.5f +- %.2g", full.mean, full.mean_stderr));
  s.truncation = 1;
  const auto first = simulate::sample_uN(s);
  const double target = s.theta * s.t * s.t * s.t / 6.0;
  c.expect(std::abs(first.variance - target) <= 3.0 * first.variance_stderr,
           fmt("N=1 variance %.5f +- %.2g vs %.5f", first.variance, first.variance_stderr, target));
  s.truncation = 3;
  s.t = 0.8;
  const auto h = simulate::hypercontractivity_check(s, 4.0);
  c.expect(h.holds, fmt("p=4, t=0.8: ||u||_4 = %.5f +- %.2g <= ||u(t_4)||_2 = %.5f +- %.2g (series %.5f, t_4 = %.4f)",
                        h.lhs, h.lhs_stderr, h.rhs, h.rhs_stderr, h.rhs_series, h.t_p));
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 300.0, fmt("runtime %.1f s < 300 s", elapsed));
  return c;
}

template <class Obj>
double gradient_mismatch(const Obj& obj, int axes, int m, int points, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  const std::size_t n = obj.size();
  double worst = 0.0;
  for (int k = 0; k < points; ++k) {
    std::vector<double> g(n), v(n), grad(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t rest = i;
      double r2 = 0.0;
      for (int a = 0; a < axes; ++a) {
        const double x = 2.0 * (static_cast<double>(rest % static_cast<std::size_t>(m)) + 1.0) / (m + 1.0) - 1.0;
        rest /= static_cast<std::size_t>(m);
        r2 += x * x;
      }
      g[i] = std::exp(-4.0 * r2) * (1.0 + 0.3 * z(rng));
    }
    for (double& x : v) x = z(rng);
    obj.value(g, grad);
    const double analytic = obj.inner(grad, v);
    const double scale = std::sqrt(obj.inner(grad, grad) * obj.inner(v, v));
    const double eps = 1e-5 * std::sqrt(obj.inner(g, g) / obj.inner(v, v));
    std::vector<double> gp(g), gm(g);
    for (std::size_t i = 0; i < n; ++i) {
      gp[i] += eps * v[i];
      gm[i] -= eps * v[i];
    }
    const double fd = (obj.value(gp, {}) - obj.value(gm, {})) / (2.0 * eps);
    worst = std::max(worst, std::abs(fd - analytic) / scale);
  }
  return worst;
}

Check gradients() {
  Check c;
  using variational::Interaction;
  struct Case {
    Interaction f;
    int d, m;
    bool radial;
  };
  const std::vector<Case> cases{
      {Interaction::delta(1.5), 1, 40, false},
      {Interaction::delta(), 2, 16, false},
      {Interaction::delta(), 3, 8, false},
      {Interaction::delta(), 3, 40, true},
      {Interaction::noise(NoiseSpec::riesz(1, 0.5), 2.0), 1, 40, false},
      {Interaction::noise(NoiseSpec::riesz(2, 1.0)), 2, 16, false},
      {Interaction::noise(NoiseSpec::fractional_product({0.4, 0.7})), 2, 12, false},
      {Interaction::noise(NoiseSpec::hybrid({2, 1}, {1.2, 0.5})), 3, 8, false},
  };
  double worst_grid = 0.0;
  for (const auto& k : cases) {
    variational::VariationalProblem p;
    p.f = k.f;
    p.theta = 0.7;
    p.d = k.d;
    p.radial = k.radial;
    const variational::GridObjective obj(p, k.m, 3.0);
    worst_grid = std::max(worst_grid, gradient_mismatch(obj, k.radial ? 1 : k.d, k.m, 20, 99));
  }
  c.expect(worst_grid < 1e-5,
           fmt("grid objective: worst relative mismatch %.2g over %zu cases x 20 points", worst_grid, cases.size()));
  double worst_rho = 0.0;
  for (const auto& spec : {NoiseSpec::white(1), NoiseSpec::riesz(2, 1.0)}) {
    const int points = spec.d == 1 ? 41 : 15;
    const variational::RhoObjective squared(variational::RhoProblem{spec, {}, 4.0, points, {}});
    const variational::RhoObjective linear(variational::RhoProblem{
        spec, [](std::span<const double> xi) { return std::exp(-xi[0] * xi[0]); }, 4.0, points, {}});
    worst_rho = std::max(worst_rho, gradient_mismatch(squared, spec.d, points, 20, 5));
    worst_rho = std::max(worst_rho, gradient_mismatch(linear, spec.d, points, 20, 6));
  }
  c.expect(worst_rho < 1e-5, fmt("rho objective: worst relative mismatch %.2g over 4 cases x 20 points", worst_rho));
  return c;
}

Check reverse_cauchy_schwarz() {
  Check c;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int held = 0;
  double worst = -1e300;
  for (int k = 0; k < 50; ++k) {
    const int jumps = 1 + static_cast<int>(u(rng) * 6.0);
    std::vector<double> at(static_cast<std::size_t>(jumps)), level(static_cast<std::size_t>(jumps) + 1);
    for (double& a : at) a = 8.0 * u(rng);
    std::sort(at.begin(), at.end());
    level[0] = u(rng);
    for (std::size_t i = 1; i < level.size(); ++i) level[i] = level[i - 1] + 2.0 * u(rng);
    auto f = [&](double t) {
      std::size_t i = 0;
      while (i < at.size() && t >= at[i]) ++i;
      return level[i];
    };
    const auto r = chaos::reverse_cauchy_schwarz_check(f, at);
    if (r.holds) ++held;
    worst = std::max(worst, (r.lhs - r.rhs) / r.rhs);
  }
  c.expect(held == 50, fmt("lhs <= rhs on %d/50 step functions (largest (lhs-rhs)/rhs %.3g)", held, worst));
  const auto flat = chaos::reverse_cauchy_schwarz_check([](double) { return 2.5; });
  c.expect(std::abs(flat.lhs - flat.rhs) <= 1e-12 * flat.rhs,
           fmt("constant f: lhs %.15f, rhs %.15f", flat.lhs, flat.rhs));
  return c;
}

struct Entry {
  int id;
  const char* title;
  Check (*body)();
};

const Entry kEntries[kCriteria] = {
    {1, "variational constant d=1", variational_d1},
    {2, "Sobolev bound d=3", sobolev_d3},
    {3, "scaling law", scaling_matrix},
    {4, "chaos oracle d=1 white", chaos_oracle},
    {5, "Laplace identity", laplace_identity},
    {6, "critical times", critical_times},
    {7, "radius probe d=3 white", radius_probe},
    {8, "Mittag-Leffler limit", mittag_leffler},
    {9, "series growth", series_growth},
    {10, "simulator", simulator},
    {11, "gradient checks", gradients},
    {12, "reverse Cauchy-Schwarz", reverse_cauchy_schwarz},
};

}  // namespace

std::vector<int> parse_sections(const std::string& text) {
  std::vector<int> ids;
  if (text == "all" || text.empty()) {
    for (int i = 1; i <= kCriteria; ++i) ids.push_back(i);
    return ids;
  }
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    std::size_t used = 0;
    int id = 0;
    try {
      id = std::stoi(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == part.size() && used > 0 && id >= 1 && id <= kCriteria,
            "section '" + part + "' is not a criterion id in [1, 12]");
    ids.push_back(id);
  }
  return ids;
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids, std::ostream* progress) {
  std::vector<CriterionResult> results;
  for (int id : ids) {
    require(id >= 1 && id <= kCriteria, "criterion id out of range");
    const Entry& e = kEntries[id - 1];
    CriterionResult r;
    r.id = id;
    r.title = e.title;
    const auto start = std::chrono::steady_clock::now();
    try {
      const Check c = e.body();
      r.passed = c.passed;
      r.detail = c.detail();
    } catch (const std::exception& ex) {
      r.passed = false;
      r.detail = std::string("exception: ") + ex.what();
    }
    r.seconds = seconds_since(start);
    if (progress) *progress << format_line(r) << std::endl;
    results.push_back(std::move(r));
  }
  return results;
}

std::string format_line(const CriterionResult& r) {
  return fmt("[%s] %2d  %s: ", r.passed ? "PASS" : "FAIL", r.id, r.title.c_str()) + r.detail +
         fmt(" (%.1f s)", r.seconds);
}

}  // namespace wavechaos::cli
