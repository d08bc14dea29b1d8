#include "wavechaos/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wavechaos/errors.hpp"
#include "wavechaos/io.hpp"
#include "wavechaos/quadrature.hpp"

namespace wavechaos::simulate {

namespace {

constexpr double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// f~_n(x, 0; t) for n <= 3: the symmetrized chain kernel
// (1/n!) sum_sigma (t - |x_s1| - sum |x_sk - x_s(k-1)|)_+^n / (2^n n!).
double chain_kernel(int n, double t, const double* x) {
  auto power = [n](double r) { return n == 1 ? r : n == 2 ? r * r : r * r * r; };
  auto path = [&](int a, int b, int c) {
    double len = std::fabs(x[a]);
    if (n > 1) len += std::fabs(x[b] - x[a]);
    if (n > 2) len += std::fabs(x[c] - x[b]);
    const double rest = t - len;
    return rest > 0.0 ? power(rest) : 0.0;
  };
  double sum = 0.0;
  if (n == 1) {
    sum = path(0, 0, 0);
  } else if (n == 2) {
    sum = path(0, 1, 0) + path(1, 0, 0);
  } else {
    sum = path(0, 1, 2) + path(0, 2, 1) + path(1, 0, 2) + path(1, 2, 0) + path(2, 0, 1) + path(2, 1, 0);
  }
  const double nf = factorial(n);
  return sum / (nf * std::ldexp(nf, n));
}

// int_0^x (1/2)(t - |s|)_+ ds
double first_kernel_antiderivative(double t, double x) {
  const double c = std::min(std::fabs(x), t);
  return std::copysign(0.5 * (t * c - 0.5 * c * c), x);
}

struct GroupRule {
  int size = 0;
  std::vector<double> points;  // size coordinates per node
  std::vector<double> weights;
};

// k! times the rule for the ordered simplex a < y_1 < ... < y_k < a + w, so
// that it integrates symmetric functions over the full box^k.
GroupRule box_power_rule(int k, double a, double w, const GaussRule& unit) {
  GroupRule r;
  r.size = k;
  const auto q = unit.nodes.size();
  std::size_t total = 1;
  for (int i = 0; i < k; ++i) total *= q;
  std::vector<std::size_t> digit(static_cast<std::size_t>(k));
  std::vector<double> y(static_cast<std::size_t>(k));
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    for (int i = 0; i < k; ++i) {
      digit[static_cast<std::size_t>(i)] = rest % q;
      rest /= q;
    }
    double weight = factorial(k);
    double jac = w;
    y[static_cast<std::size_t>(k - 1)] = a + w * unit.nodes[digit[static_cast<std::size_t>(k - 1)]];
    for (int i = k - 2; i >= 0; --i) {
      const double span = y[static_cast<std::size_t>(i + 1)] - a;
      jac *= span;
      y[static_cast<std::size_t>(i)] = a + span * unit.nodes[digit[static_cast<std::size_t>(i)]];
    }
    for (int i = 0; i < k; ++i) weight *= unit.weights[digit[static_cast<std::size_t>(i)]];
    r.points.insert(r.points.end(), y.begin(), y.end());
    r.weights.push_back(weight * jac);
  }
  return r;
}

double box_integral(int n, double t, const BoxBasis& basis, const std::array<int, kMaxOrder>& index,
                    const GaussRule& unit) {
  std::vector<GroupRule> groups;
  for (int i = 0; i < n;) {
    int k = 1;
    while (i + k < n && index[static_cast<std::size_t>(i + k)] == index[static_cast<std::size_t>(i)]) ++k;
    groups.push_back(box_power_rule(k, basis.left(index[static_cast<std::size_t>(i)]), basis.width(), unit));
    i += k;
  }
  double x[kMaxOrder];
  double sum = 0.0;
  // Tensor product over groups (at most three).
  auto recurse = [&](auto&& self, std::size_t g, int offset, double weight) -> void {
    if (g == groups.size()) {
      sum += weight * chain_kernel(n, t, x);
      return;
    }
    const auto& rule = groups[g];
    for (std::size_t node = 0; node < rule.weights.size(); ++node) {
      for (int c = 0; c < rule.size; ++c)
        x[offset + c] = rule.points[node * static_cast<std::size_t>(rule.size) + static_cast<std::size_t>(c)];
      self(self, g + 1, offset + rule.size, weight * rule.weights[node]);
    }
  };
  recurse(recurse, 0, 0, 1.0);
  return sum;
}

double hermite(int k, double z) {
  switch (k) {
    case 0:
      return 1.0;
    case 1:
      return z;
    case 2:
      return z * z - 1.0;
    default:
      return z * z * z - 3.0 * z;
  }
}

// Entry flattened for sampling: weight = multiplicity * value and the
// distinct (index, power) factors.
struct Term {
  std::array<int, kMaxOrder> index{};
  std::array<int, kMaxOrder> power{};
  int factors = 0;
  double weight = 0.0;
};

std::vector<Term> flatten(const SymmetricTensor& a) {
  std::vector<Term> terms;
  terms.reserve(a.entries.size());
  for (const auto& e : a.entries) {
    Term term;
    term.weight = a.multiplicity(e) * e.value;
    for (int i = 0; i < a.order;) {
      int k = 1;
      while (i + k < a.order && e.index[static_cast<std::size_t>(i + k)] == e.index[static_cast<std::size_t>(i)]) ++k;
      term.index[static_cast<std::size_t>(term.factors)] = e.index[static_cast<std::size_t>(i)];
      term.power[static_cast<std::size_t>(term.factors)] = k;
      ++term.factors;
      i += k;
    }
    terms.push_back(term);
  }
  return terms;
}

double evaluate_terms(const std::vector<Term>& terms, const std::vector<std::array<double, 4>>& he) {
  double sum = 0.0;
  for (const auto& term : terms) {
    double v = term.weight;
    for (int f = 0; f < term.factors; ++f)
      v *= he[static_cast<std::size_t>(term.index[static_cast<std::size_t>(f)])]
             [static_cast<std::size_t>(term.power[static_cast<std::size_t>(f)])];
    sum += v;
  }
  return sum;
}

}  // namespace

void BoxBasis::validate() const {
  require(half_width > 0.0 && std::isfinite(half_width), "box range must be positive");
  require(modes >= 2 && modes % 2 == 0, "the number of boxes must be even and at least 2");
}

double BoxBasis::width() const { return 2.0 * half_width / modes; }

double BoxBasis::left(int j) const { return -half_width + j * width(); }

double SymmetricTensor::multiplicity(const Entry& entry) const {
  double m = factorial(order);
  for (int i = 0; i < order;) {
    int k = 1;
    while (i + k < order && entry.index[static_cast<std::size_t>(i + k)] == entry.index[static_cast<std::size_t>(i)])
      ++k;
    m /= factorial(k);
    i += k;
  }
  return m;
}

double SymmetricTensor::squared_norm() const {
  double s = 0.0;
  for (const auto& e : entries) s += multiplicity(e) * e.value * e.value;
  return s;
}

SymmetricTensor project_kernel(int n, double t, const BoxBasis& basis, int quadrature_points) {
  basis.validate();
  require(n >= 1 && n <= kMaxOrder, "kernel projection supports orders 1 to 3");
  require(t > 0.0 && std::isfinite(t), "time must be positive");
  require(quadrature_points >= 1 && quadrature_points <= 32, "quadrature points must lie in [1, 32]");
  require(basis.half_width >= t * (1.0 - 1e-12), "boxes do not cover the kernel support |x| < t");

  SymmetricTensor a;
  a.order = n;
  a.modes = basis.modes;
  const double w = basis.width();
  const double norm = std::pow(w, -0.5 * n);

  if (n == 1) {
    for (int j = 0; j < basis.modes; ++j) {
      const double lo = basis.left(j);
      const double v = (first_kernel_antiderivative(t, lo + w) - first_kernel_antiderivative(t, lo)) * norm;
      if (v != 0.0) a.entries.push_back({{j, 0, 0}, v});
    }
    return a;
  }

  const GaussRule unit = gauss_legendre(quadrature_points, 0.0, 1.0);
  const int m = basis.modes;
  std::vector<std::vector<SymmetricTensor::Entry>> parts(static_cast<std::size_t>(m));
  parallel_chunks(static_cast<std::size_t>(m), [&](std::size_t first) {
    const int j1 = static_cast<int>(first);
    auto& out = parts[first];
    std::array<int, kMaxOrder> index{j1, 0, 0};
    auto visit = [&]() {
      // The path from 0 through every point is at least the length of the
      // hull of {0} and the boxes.
      double hi = 0.0, lo = 0.0;
      for (int i = 0; i < n; ++i) {
        hi = std::max(hi, basis.left(index[static_cast<std::size_t>(i)]));
        lo = std::min(lo, basis.left(index[static_cast<std::size_t>(i)]) + w);
      }
      if (hi - lo >= t) return;
      const double v = box_integral(n, t, basis, index, unit) * norm;
      if (v != 0.0) out.push_back({index, v});
    };
    for (int j2 = j1; j2 < m; ++j2) {
      index[1] = j2;
      if (n == 2) {
        visit();
        continue;
      }
      for (int j3 = j2; j3 < m; ++j3) {
        index[2] = j3;
        visit();
      }
    }
  });
  for (auto& p : parts) a.entries.insert(a.entries.end(), p.begin(), p.end());
  return a;
}

double wick_integral(const SymmetricTensor& a, std::span<const double> z) {
  require(z.size() >= static_cast<std::size_t>(a.modes), "Gaussian vector is shorter than the basis");
  std::vector<std::array<double, 4>> he(z.size());
  for (std::size_t j = 0; j < z.size(); ++j)
    for (int k = 0; k < 4; ++k) he[j][static_cast<std::size_t>(k)] = hermite(k, z[j]);
  return evaluate_terms(flatten(a), he);
}

void SimConfig::validate() const {
  require(t > 0.0 && std::isfinite(t), "time must be positive");
  require(theta >= 0.0 && std::isfinite(theta), "theta must be nonnegative");
  require(truncation >= 0 && truncation <= kMaxOrder, "chaos truncation N must lie in [0, 3]");
  require(replicates >= 2, "at least two replicates are needed");
  require(bootstrap_resamples >= 2, "at least two bootstrap resamples are needed");
  require(half_width == 0.0 || half_width >= t, "box range must cover the light cone |x| <= t");
  for (double p : moment_orders) require(p > 0.0 && std::isfinite(p), "moment orders must be positive");
  basis().validate();
}

BoxBasis SimConfig::basis() const { return {half_width > 0.0 ? half_width : t, modes}; }

SimRun sample_uN(const SimConfig& config) {
  config.validate();
  SimRun run;
  run.config = config;
  const BoxBasis basis = config.basis();
  const auto m = static_cast<std::size_t>(basis.modes);

  std::vector<std::vector<Term>> levels;
  std::vector<double> scale;
  run.series_second_moment = 1.0;
  for (int n = 1; n <= config.truncation; ++n) {
    const auto a = project_kernel(n, config.t, basis);
    const double norm2 = a.squared_norm();
    run.chaos_norms.push_back(norm2);
    run.series_second_moment += std::pow(config.theta, n) * factorial(n) * norm2;
    levels.push_back(flatten(a));
    scale.push_back(std::pow(config.theta, 0.5 * n));
  }

  run.samples.resize(config.replicates);
  constexpr std::size_t substreams = 16;
  const std::size_t chunks = std::min(substreams, config.replicates);
  parallel_chunks(chunks, [&](std::size_t k) {
    const std::size_t lo = config.replicates * k / chunks;
    const std::size_t hi = config.replicates * (k + 1) / chunks;
    Rng rng(substream_seed(config.seed, k));
    std::normal_distribution<double> normal;
    std::vector<std::array<double, 4>> he(m);
    for (std::size_t i = lo; i < hi; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        const double z = normal(rng);
        he[j] = {1.0, z, z * z - 1.0, z * z * z - 3.0 * z};
      }
      double u = 1.0;
      for (std::size_t n = 0; n < levels.size(); ++n) u += scale[n] * evaluate_terms(levels[n], he);
      run.samples[i] = u;
    }
  });

  // Point estimates and bootstrap errors of the mean, variance and E|u|^p.
  const auto& x = run.samples;
  const std::size_t count = x.size();
  const std::size_t q = config.moment_orders.size();
  std::vector<std::vector<double>> powered(q, std::vector<double>(count));
  for (std::size_t k = 0; k < q; ++k)
    for (std::size_t i = 0; i < count; ++i) powered[k][i] = std::pow(std::fabs(x[i]), config.moment_orders[k]);

  auto statistics = [&](auto&& pick) {
    std::vector<double> s(2 + q, 0.0);
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t r = pick(i);
      sum += x[r];
      sum2 += x[r] * x[r];
      for (std::size_t k = 0; k < q; ++k) s[2 + k] += powered[k][r];
    }
    const double nn = static_cast<double>(count);
    s[0] = sum / nn;
    s[1] = (sum2 - sum * sum / nn) / (nn - 1.0);
    for (std::size_t k = 0; k < q; ++k) s[2 + k] /= nn;
    return s;
  };
  const auto point = statistics([](std::size_t i) { return i; });
  std::vector<Accumulator> spread(2 + q);
  Rng boot(substream_seed(config.seed, 0xb0075ULL));
  std::uniform_int_distribution<std::size_t> draw(0, count - 1);
  for (int b = 0; b < config.bootstrap_resamples; ++b) {
    const auto s = statistics([&](std::size_t) { return draw(boot); });
    for (std::size_t k = 0; k < s.size(); ++k) spread[k].add(s[k]);
  }
  run.mean = point[0];
  run.mean_stderr = std::sqrt(spread[0].variance());
  run.variance = point[1];
  run.variance_stderr = std::sqrt(spread[1].variance());
  for (std::size_t k = 0; k < q; ++k) {
    run.moments.push_back(point[2 + k]);
    run.moment_stderr.push_back(std::sqrt(spread[2 + k].variance()));
  }
  return run;
}

NormEstimate p_norm(std::span<const double> samples, double p, int resamples, std::uint64_t seed) {
  require(samples.size() >= 2, "p-norm needs at least two samples");
  require(p > 0.0, "p must be positive");
  require(resamples >= 2, "at least two bootstrap resamples are needed");
  const std::size_t count = samples.size();
  std::vector<double> powered(count);
  for (std::size_t i = 0; i < count; ++i) powered[i] = std::pow(std::fabs(samples[i]), p);
  double total = 0.0;
  for (double v : powered) total += v;
  NormEstimate e;
  e.value = std::pow(total / static_cast<double>(count), 1.0 / p);
  Rng boot(substream_seed(seed, 0xb0075ULL));
  std::uniform_int_distribution<std::size_t> draw(0, count - 1);
  Accumulator spread;
  for (int b = 0; b < resamples; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += powered[draw(boot)];
    spread.add(std::pow(s / static_cast<double>(count), 1.0 / p));
  }
  e.stderr_ = std::sqrt(spread.variance());
  return e;
}

HypercontractivityReport hypercontractivity_check(const SimConfig& config, double p) {
  require(p >= 2.0 && std::isfinite(p), "hypercontractivity needs p >= 2");
  config.validate();
  HypercontractivityReport r;
  r.p = p;
  r.t = config.t;
  r.t_p = std::cbrt(p - 1.0) * config.t;

  SimConfig at_t = config;
  at_t.moment_orders = {p};
  SimConfig at_tp = config;
  at_tp.t = r.t_p;
  at_tp.half_width = config.half_width > 0.0 ? config.half_width * r.t_p / config.t : 0.0;
  at_tp.moment_orders = {2.0};

  const SimRun run_t = sample_uN(at_t);
  const SimRun run_tp = p == 2.0 ? run_t : sample_uN(at_tp);
  const auto lhs = p_norm(run_t.samples, p, config.bootstrap_resamples, config.seed);
  const auto rhs = p_norm(run_tp.samples, 2.0, config.bootstrap_resamples, config.seed);
  r.lhs = lhs.value;
  r.lhs_stderr = lhs.stderr_;
  r.rhs = rhs.value;
  r.rhs_stderr = rhs.stderr_;
  r.rhs_series = std::sqrt(run_tp.series_second_moment);
  r.joint_stderr = std::hypot(r.lhs_stderr, r.rhs_stderr);
  r.margin = r.rhs - r.lhs;
  r.holds = r.lhs <= r.rhs + 3.0 * r.joint_stderr;
  return r;
}

void write_samples_csv(const std::string& path, const SimRun& run) {
  std::ostringstream out;
  out << "u\n";
  for (double v : run.samples) out << format_exact(v) << '\n';
  write_file_atomically(path, out.str());
}

}  // namespace wavechaos::simulate
