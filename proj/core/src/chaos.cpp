#include "wavechaos/chaos.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "wavechaos/errors.hpp"
#include "wavechaos/quadrature.hpp"
#include "wavechaos/stats.hpp"
#include "wavechaos/wave_kernel.hpp"

namespace wavechaos::chaos {

using kernels::FrequencySampler;
using kernels::WaveKernel;

namespace {

constexpr int kMaxTableOrder = 10;

struct McAcc {
  Accumulator acc;
  PrecisionStats precision;
  void merge(const McAcc& o) {
    acc.merge(o.acc);
    precision.merge(o.precision);
  }
};

struct PairMcAcc {
  PairAccumulator acc;
  PrecisionStats precision;
  void merge(const PairMcAcc& o) {
    acc.merge(o.acc);
    precision.merge(o.precision);
  }
};

void check_order(int n, const SamplingOptions& options) {
  require(n >= 0, "chaos order must be nonnegative");
  require(n <= options.max_order,
          "chaos order " + std::to_string(n) + " exceeds the cap of " + std::to_string(options.max_order));
  require(options.samples >= 2, "at least two samples are required");
  require(options.permutation_samples >= 1, "permutation_samples must be positive");
}

bool use_tables(int n, const SamplingOptions& options) { return n <= std::min(options.exact_order, kMaxTableOrder); }

ChaosEstimate make_estimate(const NoiseSpec& spec, int n, double t, Method method, const SamplingOptions& options) {
  ChaosEstimate e;
  e.n = n;
  e.t = t;
  e.method = method;
  e.seed = options.seed;
  e.spec_hash = spec.hash();
  return e;
}

void fill_from(ChaosEstimate& e, const Accumulator& acc, std::size_t samples, const PrecisionStats& precision) {
  e.value = acc.mean;
  e.std_error = acc.stderr_of_mean();
  e.samples = samples;
  e.precision = precision;
}

double factorial(int n) { return std::tgamma(n + 1.0); }

// Proposal for n frequencies, an equal mixture of three laws:
//  - independent draws from the single-frequency proposal q;
//  - the partial sums xi_sigma(k) + ... + xi_sigma(n) along a uniform random
//    ordering sigma drawn independently from q;
//  - the same with a heavier-tailed q whose radial tail is r^{-2}.
// The chained components cover frequencies with large entries but small
// partial sums, where the chaos integrands keep their mass and independent
// sampling has unbounded weights.
class ChainMixtureSampler {
 public:
  ChainMixtureSampler(const NoiseSpec& spec, int n)
      : light_(spec),
        heavy_(spec, 0.5 * (spec.alpha() + 1.0)),
        spec_(spec),
        n_(n),
        d_(spec.d),
        inv_nfact_(1.0 / factorial(n)) {}

  // Fills xi and the subset square norms; returns mu(d xi)^n / proposal.
  double sample(Rng& rng, std::vector<double>& xi, std::vector<double>& x_of_mask) {
    const auto n = static_cast<std::size_t>(n_), d = static_cast<std::size_t>(d_);
    xi.resize(n * d);
    const int component = std::uniform_int_distribution<int>(0, 2)(rng);
    if (component == 0) {
      for (std::size_t k = 0; k < n; ++k) (void)light_.sample(rng, std::span<double>(xi).subspan(k * d, d));
    } else {
      const FrequencySampler& law = component == 1 ? light_ : heavy_;
      perm_.resize(n);
      std::iota(perm_.begin(), perm_.end(), 0);
      std::shuffle(perm_.begin(), perm_.end(), rng);
      eta_.assign((n + 1) * d, 0.0);
      for (std::size_t k = 0; k < n; ++k) (void)law.sample(rng, std::span<double>(eta_).subspan(k * d, d));
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t a = 0; a < d; ++a)
          xi[static_cast<std::size_t>(perm_[k]) * d + a] = eta_[k * d + a] - eta_[(k + 1) * d + a];
    }
    subset_sums(xi, n_, d_, sums_, x_of_mask);
    const std::size_t count = std::size_t{1} << n;
    q_light_.resize(count);
    q_heavy_.resize(count);
    for (std::size_t s = 1; s < count; ++s) {
      const auto eta = std::span<const double>(sums_).subspan(s * d, d);
      const double phi = kernels::spectral_density(spec_, eta);
      const double r = 1.0 + x_of_mask[s];
      q_light_[s] = phi / (light_.mass() * r * r);
      q_heavy_[s] = phi * std::pow(r, -heavy_.power()) / heavy_.mass();
    }
    double target = 1.0, independent = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t single = std::size_t{1} << k;
      target *= q_light_[single] * light_.mass() * std::pow(1.0 + x_of_mask[single], 2.0);
      independent *= q_light_[single];
    }
    const double chained = inv_nfact_ * ordered_chain_sum(q_light_, n_);
    const double chained_heavy = inv_nfact_ * ordered_chain_sum(q_heavy_, n_);
    return 3.0 * target / (independent + chained + chained_heavy);
  }

 private:
  FrequencySampler light_, heavy_;
  NoiseSpec spec_;
  int n_, d_;
  double inv_nfact_;
  std::vector<int> perm_;
  std::vector<double> eta_, sums_, q_light_, q_heavy_;
};

// Frequencies drawn from the proposal. For each sample the caller receives
// the importance weight of all n frequencies, the subset square norms, and
// two estimates fa, fb of n! F f~_n at each requested time. With full
// permutation tables fa and fb are the same exact value; otherwise they are
// independent permutation averages, so fa * fb is unbiased for the square.
template <class Reduce>
McAcc sample_chaos_transform(const NoiseSpec& spec, int n, std::span<const double> ts, const SamplingOptions& options,
                             Reduce&& reduce) {
  const bool exact = use_tables(n, options);
  const SubsetChains chains(exact ? n : 1);
  const double nfact = factorial(n);
  std::function<void(Rng&, std::size_t, McAcc&)> body = [&](Rng& rng, std::size_t count, McAcc& out) {
    ChainMixtureSampler sampler(spec, n);
    std::vector<double> xi;
    std::vector<double> x_of_mask;
    std::vector<double> fa(ts.size()), fb(ts.size());
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::vector<double> nodes(static_cast<std::size_t>(n));
    auto permutation_average = [&](std::vector<double>& f) {
      std::fill(f.begin(), f.end(), 0.0);
      for (int p = 0; p < options.permutation_samples; ++p) {
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::uint32_t mask = 0;
        for (int k = 0; k < n; ++k) {
          mask |= 1u << perm[static_cast<std::size_t>(k)];
          nodes[static_cast<std::size_t>(k)] = x_of_mask[mask];
        }
        for (std::size_t i = 0; i < ts.size(); ++i) f[i] += chain_integral(nodes, ts[i], out.precision);
      }
      for (double& v : f) v *= nfact / options.permutation_samples;
    };
    for (std::size_t s = 0; s < count; ++s) {
      const double weight = sampler.sample(rng, xi, x_of_mask);
      if (exact) {
        chains.cosine_sums(x_of_mask, ts, fa, out.precision);
        fb = fa;
      } else {
        permutation_average(fa);
        permutation_average(fb);
      }
      out.acc.add(
          reduce(weight, std::span<const double>(x_of_mask), std::span<const double>(fa), std::span<const double>(fb)));
    }
  };
  return sample_in_substreams<McAcc>(options.seed, options.samples, body);
}

// int_{-t}^{t} ((t - |x|) / 2)^2 dx, evaluated by an exact Gauss rule.
double white_1d_first_norm(double t) {
  const GaussRule rule = gauss_legendre(4, 0.0, t);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double f = 0.5 * (t - rule.nodes[i]);
    sum += rule.weights[i] * f * f;
  }
  return 2.0 * sum;
}

// Piecewise Gauss integration over sorted breakpoints clipped to [a, b].
template <class F>
double piecewise_gauss(std::vector<double> breaks, double a, double b, const GaussRule& unit, F&& f) {
  breaks.push_back(a);
  breaks.push_back(b);
  for (double& v : breaks) v = std::clamp(v, a, b);
  std::sort(breaks.begin(), breaks.end());
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double lo = breaks[k], hi = breaks[k + 1];
    if (hi - lo <= 0.0) continue;
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (std::size_t i = 0; i < unit.nodes.size(); ++i) sum += half * unit.weights[i] * f(mid + half * unit.nodes[i]);
  }
  return sum;
}

// Double integral of f~_2(x1, x2)^2 for white noise in d = 1. The integrand
// is piecewise polynomial; the inner breakpoints are its kinks in x2 and the
// outer grid contains the kinks of the inner integral in x1.
double white_1d_second_norm(double t) {
  const GaussRule inner = gauss_legendre(5);
  const GaussRule outer = gauss_legendre(8);
  auto inner_integral = [&](double x1) {
    const double r = t - std::fabs(x1);
    std::vector<double> breaks{0.0, x1, x1 - r, x1 + r, 0.5 * (x1 - t), 0.5 * (x1 + t)};
    return piecewise_gauss(breaks, -t, t, inner, [&](double x2) {
      const double x[2] = {x1, x2};
      const double f = white_kernel_1d(2, t, x);
      return f * f;
    });
  };
  std::vector<double> grid;
  for (int k = -12; k <= 12; ++k) grid.push_back(t * k / 12.0);
  return piecewise_gauss(grid, -t, t, outer, inner_integral);
}

// ||f~_1||^2 = int A(z) |z|^{-alpha} dz for the Riesz kernel in d = 1 with
// f~_1(x) = (t - |x|)_+ / 2 and autocorrelation A.
double riesz_1d_first_norm(double t, double alpha) {
  const GaussRule rule3 = gauss_legendre(3);
  auto autocorrelation = [&](double z) {
    std::vector<double> breaks{0.0, -z, t - z, -t - z};
    return piecewise_gauss(breaks, std::max(-t, -t - z), std::min(t, t - z), rule3, [&](double y) {
      return 0.25 * std::max(0.0, t - std::fabs(y)) * std::max(0.0, t - std::fabs(y + z));
    });
  };
  // On [0, t] substitute z = t v^k with k = 1 / (1 - alpha) so the
  // singular weight becomes smooth.
  const double k = 1.0 / (1.0 - alpha);
  const GaussRule near = gauss_legendre(64, 0.0, 1.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < near.nodes.size(); ++i) {
    const double v = near.nodes[i];
    const double z = t * std::pow(v, k);
    sum += near.weights[i] * autocorrelation(z) * std::pow(t, 1.0 - alpha) * k;
  }
  const GaussRule far = gauss_legendre(16, t, 2.0 * t);
  for (std::size_t i = 0; i < far.nodes.size(); ++i)
    sum += far.weights[i] * autocorrelation(far.nodes[i]) * std::pow(far.nodes[i], -alpha);
  return 2.0 * sum;
}

ChaosEstimate realspace_norm(const NoiseSpec& spec, int n, double t, const SamplingOptions& options) {
  ChaosEstimate e = make_estimate(spec, n, t, Method::realspace_quadrature, options);
  if (spec.is_white() && spec.d == 1 && n == 1) {
    e.value = white_1d_first_norm(t);
  } else if (spec.is_white() && spec.d == 1 && n == 2) {
    e.value = white_1d_second_norm(t);
  } else if (spec.family == kernels::Family::riesz && spec.d == 1 && n == 1) {
    e.value = riesz_1d_first_norm(t, spec.alphas.at(0));
  } else {
    throw ConfigError(
        "real-space quadrature is available only for white noise in d = 1 with n <= 2 "
        "and Riesz noise in d = 1 with n = 1");
  }
  return e;
}

ChaosEstimate closed_form_norm(const NoiseSpec& spec, int n, double t, const SamplingOptions& options) {
  ChaosEstimate e = make_estimate(spec, n, t, Method::closed_form, options);
  if (spec.is_white() && spec.d == 1 && n == 1) {
    e.value = t * t * t / 6.0;
    return e;
  }
  throw ConfigError("closed form is available only for n = 0 and for white noise in d = 1 with n = 1");
}

// Least-squares intercept at epsilon = 0 of values at epsilon0 * {1, 2, 3}.
double ladder_intercept(double y1, double y2, double y3) { return (4.0 * y1 + y2 - 2.0 * y3) / 3.0; }

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::fourier_mc:
      return "fourier_mc";
    case Method::realspace_quadrature:
      return "realspace_quadrature";
    case Method::closed_form:
      return "closed_form";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "fourier_mc") return Method::fourier_mc;
  if (name == "realspace_quadrature") return Method::realspace_quadrature;
  if (name == "closed_form") return Method::closed_form;
  throw ConfigError("unknown method '" + name + "'");
}

double c_mu_prime(const NoiseSpec& spec) { return kernels::resolvent_mass(spec); }

double c_mu_prime_lebesgue(const NoiseSpec& spec) {
  spec.validate();
  require(spec.is_white(), "the Lebesgue normalization applies to white noise only");
  return c_mu_prime(spec) * std::pow(2.0 * std::numbers::pi, spec.d);
}

ChaosEstimate t_n_estimate(const NoiseSpec& spec, int n, const SamplingOptions& options) {
  spec.validate();
  check_order(n, options);
  require(n >= 1, "T_n is defined for n >= 1");
  ChaosEstimate e = make_estimate(spec, n, 1.0, Method::fourier_mc, options);
  const bool exact = use_tables(n, options);
  const SubsetChains chains(exact ? n : 1);
  const double nfact = factorial(n);
  std::function<void(Rng&, std::size_t, McAcc&)> body = [&](Rng& rng, std::size_t count, McAcc& out) {
    ChainMixtureSampler sampler(spec, n);
    std::vector<double> xi;
    std::vector<double> x_of_mask;
    std::vector<int> perm(static_cast<std::size_t>(n));
    auto permutation_average = [&]() {
      double sum = 0.0;
      for (int p = 0; p < options.permutation_samples; ++p) {
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::uint32_t mask = 0;
        double prod = 1.0;
        for (int k = 0; k < n; ++k) {
          mask |= 1u << perm[static_cast<std::size_t>(k)];
          prod /= 1.0 + x_of_mask[mask];
        }
        sum += prod;
      }
      return nfact * sum / options.permutation_samples;
    };
    for (std::size_t s = 0; s < count; ++s) {
      const double weight = sampler.sample(rng, xi, x_of_mask);
      double value;
      if (exact) {
        const double r = chains.resolvent_sum(x_of_mask);
        value = weight * r * r;
      } else {
        const double ra = permutation_average();
        const double rb = permutation_average();
        value = weight * ra * rb;
      }
      out.acc.add(value);
    }
  };
  const McAcc acc = sample_in_substreams<McAcc>(options.seed, options.samples, body);
  fill_from(e, acc.acc, options.samples, acc.precision);
  return e;
}

ChaosEstimate chaos_norm(const NoiseSpec& spec, int n, double t, Method method, const SamplingOptions& options,
                         double epsilon) {
  spec.validate();
  require(t > 0.0, "time must be positive");
  require(epsilon >= 0.0, "mollification parameter must be nonnegative");
  check_order(n, options);
  if (n == 0) {
    ChaosEstimate e = make_estimate(spec, 0, t, Method::closed_form, options);
    e.value = 1.0;
    return e;
  }
  if (method != Method::fourier_mc) require(epsilon == 0.0, "mollification applies to the Fourier path only");
  if (method == Method::realspace_quadrature) return realspace_norm(spec, n, t, options);
  if (method == Method::closed_form) return closed_form_norm(spec, n, t, options);

  ChaosEstimate e = make_estimate(spec, n, t, Method::fourier_mc, options);
  const double nfact = factorial(n);
  const double full_index = static_cast<double>((1u << n) - 1u);
  const double ts[1] = {t};
  const McAcc acc = sample_chaos_transform(
      spec, n, ts, options,
      [&](double weight, std::span<const double> x, std::span<const double> fa, std::span<const double> fb) {
        double v = weight * fa[0] * fb[0] / (nfact * nfact);
        if (epsilon > 0.0) v *= std::exp(-epsilon * x[static_cast<std::size_t>(full_index)]);
        return v;
      });
  fill_from(e, acc.acc, options.samples, acc.precision);
  return e;
}

ChaosEstimate chaos_norm_extrapolated(const NoiseSpec& spec, int n, double t, double epsilon0,
                                      const SamplingOptions& options) {
  spec.validate();
  require(t > 0.0, "time must be positive");
  require(epsilon0 > 0.0, "ladder base must be positive");
  check_order(n, options);
  if (n == 0) return chaos_norm(spec, 0, t, Method::fourier_mc, options);
  ChaosEstimate e = make_estimate(spec, n, t, Method::fourier_mc, options);
  const double nfact = factorial(n);
  const std::size_t full = (std::size_t{1} << n) - 1;
  const double ts[1] = {t};
  const McAcc acc = sample_chaos_transform(
      spec, n, ts, options,
      [&](double weight, std::span<const double> x, std::span<const double> fa, std::span<const double> fb) {
        const double v = weight * fa[0] * fb[0] / (nfact * nfact);
        const double s = x[full];
        return v *
               ladder_intercept(std::exp(-epsilon0 * s), std::exp(-2.0 * epsilon0 * s), std::exp(-3.0 * epsilon0 * s));
      });
  fill_from(e, acc.acc, options.samples, acc.precision);
  return e;
}

MomentSeriesResult second_moment_series(const NoiseSpec& spec, double t, double theta, int truncation,
                                        const SamplingOptions& options, std::optional<double> critical_m) {
  spec.validate();
  require(t > 0.0, "time must be positive");
  require(theta >= 0.0, "theta must be nonnegative");
  require(truncation >= 0, "truncation must be nonnegative");
  require(truncation <= options.max_order, "truncation exceeds the chaos order cap");
  MomentSeriesResult r;
  r.t = t;
  r.theta = theta;
  r.truncation = truncation;
  r.partial_sums.push_back(1.0);
  r.terms.push_back(1.0);
  r.term_errors.push_back(0.0);
  const double a = 4.0 - spec.alpha();
  for (int n = 1; n <= truncation; ++n) {
    SamplingOptions per_order = options;
    per_order.seed = substream_seed(options.seed, 1000 + static_cast<std::uint64_t>(n));
    ChaosEstimate norm;
    try {
      norm = chaos_norm(spec, n, 1.0, Method::fourier_mc, per_order);
    } catch (const std::exception& ex) {
      throw NumericalError("chaos norm of order " + std::to_string(n) + " failed: " + ex.what());
    }
    // Series terms are nonnegative; a negative permutation-sampled estimate is clipped.
    const double scale = std::pow(theta, n) * factorial(n) * std::pow(t, a * n);
    const double term = scale * std::max(norm.value, 0.0);
    r.terms.push_back(term);
    r.term_errors.push_back(scale * norm.std_error);
    r.partial_sums.push_back(r.partial_sums.back() + term);
    r.norms.push_back(norm);
  }
  if (truncation >= 4) {
    bool all_large = true;
    for (int n = truncation - 2; n <= truncation; ++n) {
      const double prev = r.terms[static_cast<std::size_t>(n - 1)];
      const double ratio = prev > 0.0 ? r.terms[static_cast<std::size_t>(n)] / prev : 0.0;
      if (!(ratio > 0.9)) all_large = false;
    }
    r.converged = !all_large;
  }
  if (critical_m && spec.is_white() && spec.d == 3) {
    const double level = theta * t * std::sqrt(*critical_m) / std::numbers::sqrt2;
    if (level >= 1.0) {
      std::ostringstream msg;
      msg.precision(6);
      msg << "theta * t * sqrt(M / 2) = " << level << " >= 1: the second-moment series diverges";
      r.warning = msg.str();
    }
  }
  return r;
}

LaplaceReport laplace_identity_check(const NoiseSpec& spec, int n, const SamplingOptions& options) {
  spec.validate();
  check_order(n, options);
  LaplaceReport r;
  r.n = n;
  if (n == 0) return r;
  const double a = (4.0 - spec.alpha()) * n;
  const ChaosEstimate norm = chaos_norm(spec, n, 1.0, Method::fourier_mc, options);
  const double gamma = std::tgamma(a + 1.0);
  r.lhs = gamma * norm.value;
  r.lhs_error = gamma * norm.std_error;
  boost::math::quadrature::exp_sinh<double> integrator;
  const double moment = integrator.integrate([&](double s) { return s > 0.0 ? std::exp(a * std::log(s) - s) : 0.0; });
  r.rhs = moment * norm.value;
  r.ratio = r.lhs / r.rhs;
  r.bound = std::pow(std::pow(2.0, 4.0 - spec.alpha()) * c_mu_prime(spec), n);
  r.bound_holds = r.lhs <= r.bound + 3.0 * r.lhs_error;

  // Independent route: sample the whole curve t -> ||f~_n(t)||^2 with shared
  // frequencies and integrate it against e^{-t} by Gauss-Laguerre.
  const GaussRule laguerre = gauss_laguerre(48);
  const double nfact = factorial(n);
  const McAcc acc = sample_chaos_transform(
      spec, n, laguerre.nodes, options,
      [&](double weight, std::span<const double>, std::span<const double> fa, std::span<const double> fb) {
        double sum = 0.0;
        for (std::size_t i = 0; i < fa.size(); ++i) sum += laguerre.weights[i] * fa[i] * fb[i];
        return weight * sum / (nfact * nfact);
      });
  r.curve = acc.acc.mean;
  r.curve_error = acc.acc.stderr_of_mean();
  r.curve_ratio = r.curve / r.lhs;
  return r;
}

ReverseCsReport reverse_cauchy_schwarz_check(const std::function<double(double)>& f,
                                             std::span<const double> breakpoints, double horizon, int checks) {
  require(horizon > 0.0 && checks >= 2, "invalid monotonicity grid");
  double prev = f(0.0);
  require(prev >= 0.0, "function must be nonnegative");
  for (int i = 1; i <= checks; ++i) {
    const double v = f(horizon * i / checks);
    require(v >= prev, "function must be nondecreasing");
    prev = v;
  }
  for (double b : breakpoints) require(b >= 0.0 && std::isfinite(b), "breakpoints must be finite and nonnegative");

  std::vector<double> cuts(breakpoints.begin(), breakpoints.end());
  cuts.push_back(0.0);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  using boost::math::quadrature::gauss_kronrod;
  boost::math::quadrature::exp_sinh<double> tail;
  double first = 0.0, second = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k], hi = cuts[k + 1];
    // Sample strictly inside the piece so step functions see one value.
    first += gauss_kronrod<double, 31>::integrate([&](double s) { return std::exp(-s) * f(s); }, lo, hi, 10, 1e-13);
    second += gauss_kronrod<double, 31>::integrate(
        [&](double s) {
          const double v = f(s);
          return std::exp(-2.0 * s) * v * v;
        },
        lo, hi, 10, 1e-13);
  }
  const double last = cuts.back();
  first += tail.integrate([&](double u) { return std::exp(-(last + u)) * f(last + u); });
  second += tail.integrate([&](double u) {
    const double v = f(last + u);
    return std::exp(-2.0 * (last + u)) * v * v;
  });
  ReverseCsReport r;
  r.lhs = 2.0 * second;
  r.rhs = first * first;
  r.holds = r.lhs <= r.rhs * (1.0 + 1e-10) + 1e-14;
  return r;
}

ChaosEstimate lower_bound_W(const NoiseSpec& spec, int n, double t, const FrequencyWeight& phi,
                            const SamplingOptions& options) {
  spec.validate();
  require(t > 0.0, "time must be positive");
  check_order(n, options);
  ChaosEstimate e = make_estimate(spec, n, t, Method::fourier_mc, options);
  if (n == 0) {
    e.method = Method::closed_form;
    e.value = 1.0;
    return e;
  }
  const FrequencySampler sampler(spec);
  const int d = spec.d;
  std::function<void(Rng&, std::size_t, McAcc&)> body = [&](Rng& rng, std::size_t count, McAcc& out) {
    std::vector<double> xi(static_cast<std::size_t>(n * d));
    std::vector<double> suffix(static_cast<std::size_t>(d));
    std::vector<double> nodes(static_cast<std::size_t>(n));
    for (std::size_t s = 0; s < count; ++s) {
      double weight = 1.0;
      for (int k = 0; k < n; ++k) {
        auto xk = std::span<double>(xi).subspan(k * d, d);
        weight *= sampler.sample(rng, xk);
        weight *= phi(xk);
      }
      std::fill(suffix.begin(), suffix.end(), 0.0);
      for (int k = n - 1; k >= 0; --k) {
        double sq = 0.0;
        for (int j = 0; j < d; ++j) {
          suffix[j] += xi[static_cast<std::size_t>(k * d + j)];
          sq += suffix[j] * suffix[j];
        }
        nodes[static_cast<std::size_t>(k)] = sq;
      }
      const double v = weight * chain_integral(nodes, t, out.precision);
      if (!std::isfinite(v)) throw ConfigError("frequency weight is not square integrable against mu");
      out.acc.add(v);
    }
  };
  const McAcc acc = sample_in_substreams<McAcc>(options.seed, options.samples, body);
  fill_from(e, acc.acc, options.samples, acc.precision);
  return e;
}

LaplaceWReport laplace_check_W(const NoiseSpec& spec, int n, const FrequencyWeight& phi, const SamplingOptions& options,
                               int nodes) {
  spec.validate();
  check_order(n, options);
  require(n >= 1, "the Laplace check needs n >= 1");
  const GaussRule laguerre = gauss_laguerre(nodes);
  const FrequencySampler sampler(spec);
  const int d = spec.d;
  std::function<void(Rng&, std::size_t, PairMcAcc&)> body = [&](Rng& rng, std::size_t count, PairMcAcc& out) {
    std::vector<double> xi(static_cast<std::size_t>(n * d));
    std::vector<double> suffix(static_cast<std::size_t>(d));
    std::vector<double> chain(static_cast<std::size_t>(n));
    for (std::size_t s = 0; s < count; ++s) {
      double weight = 1.0;
      for (int k = 0; k < n; ++k) {
        auto xk = std::span<double>(xi).subspan(k * d, d);
        weight *= sampler.sample(rng, xk);
        weight *= phi(xk);
      }
      std::fill(suffix.begin(), suffix.end(), 0.0);
      double resolvent = 1.0;
      for (int k = n - 1; k >= 0; --k) {
        double sq = 0.0;
        for (int j = 0; j < d; ++j) {
          suffix[j] += xi[static_cast<std::size_t>(k * d + j)];
          sq += suffix[j] * suffix[j];
        }
        chain[static_cast<std::size_t>(k)] = sq;
        resolvent /= 1.0 + sq;
      }
      double curve = 0.0;
      for (std::size_t i = 0; i < laguerre.nodes.size(); ++i)
        curve += laguerre.weights[i] * chain_integral(chain, laguerre.nodes[i], out.precision);
      out.acc.add(weight * curve, weight * resolvent);
    }
  };
  const PairMcAcc acc = sample_in_substreams<PairMcAcc>(options.seed, options.samples, body);
  LaplaceWReport r;
  r.curve = acc.acc.a.mean;
  r.curve_error = acc.acc.a.stderr_of_mean();
  r.resolvent = acc.acc.b.mean;
  r.resolvent_error = acc.acc.b.stderr_of_mean();
  r.difference_error = acc.acc.diff.stderr_of_mean();
  return r;
}

TestFunction gaussian_test_function(const NoiseSpec& spec, double variance) {
  spec.validate();
  require(variance > 0.0, "variance must be positive");
  TestFunction f;
  f.convolved = [spec, variance](std::span<const double> x) { return kernels::smoothed_covariance(spec, variance, x); };
  f.fourier = [variance](std::span<const double> xi) {
    double sq = 0.0;
    for (double v : xi) sq += v * v;
    return std::exp(-0.5 * variance * sq);
  };
  return f;
}

ChaosEstimate lower_bound_U(const NoiseSpec& spec, int n, double t, const TestFunction& f,
                            const SamplingOptions& options, double epsilon0) {
  spec.validate();
  require(t > 0.0, "time must be positive");
  check_order(n, options);
  require(static_cast<bool>(f.convolved), "test function needs its convolution with the covariance");
  ChaosEstimate e = make_estimate(spec, n, t, Method::fourier_mc, options);
  if (n == 0) {
    e.method = Method::closed_form;
    e.value = 1.0;
    return e;
  }
  const int d = spec.d;
  const bool ladder = d == 3;
  if (ladder) require(epsilon0 > 0.0, "the mollification ladder needs a positive base");
  const WaveKernel kernel(d);
  const double volume = std::pow(t, n) / factorial(n);
  std::function<void(Rng&, std::size_t, McAcc&)> body = [&](Rng& rng, std::size_t count, McAcc& out) {
    std::uniform_real_distribution<double> unif(0.0, t);
    std::normal_distribution<double> normal;
    std::vector<double> times(static_cast<std::size_t>(n));
    std::vector<double> step(static_cast<std::size_t>(d)), noise(static_cast<std::size_t>(d));
    std::vector<std::vector<double>> pos(ladder ? 3 : 1, std::vector<double>(static_cast<std::size_t>(d)));
    for (std::size_t s = 0; s < count; ++s) {
      for (double& v : times) v = unif(rng);
      std::sort(times.begin(), times.end());
      for (auto& p : pos) std::fill(p.begin(), p.end(), 0.0);
      double prev = 0.0;
      double lengths = 1.0;
      double values[3] = {1.0, 1.0, 1.0};
      for (int k = 0; k < n; ++k) {
        const double u = times[static_cast<std::size_t>(k)] - prev;
        prev = times[static_cast<std::size_t>(k)];
        lengths *= u;
        if (ladder) {
          kernels::sample_sphere(rng, step);
          for (double& z : noise) z = normal(rng);
          for (int l = 0; l < 3; ++l) {
            const double sd = std::sqrt(epsilon0 * (l + 1));
            for (int j = 0; j < d; ++j) pos[l][j] += u * step[j] + sd * noise[j];
          }
        } else {
          kernel.sample(rng, u, step);
          for (int j = 0; j < d; ++j) pos[0][j] += step[j];
        }
        for (std::size_t l = 0; l < pos.size(); ++l) {
          const double g = f.convolved(pos[l]);
          if (!(g >= 0.0)) throw ConfigError("test function convolution is negative at a sampled point");
          values[l] *= g;
        }
      }
      const double scale = volume * lengths;
      out.acc.add(ladder ? scale * ladder_intercept(values[0], values[1], values[2]) : scale * values[0]);
    }
  };
  const McAcc acc = sample_in_substreams<McAcc>(options.seed, options.samples, body);
  fill_from(e, acc.acc, options.samples, acc.precision);
  return e;
}

double white_kernel_1d(int n, double t, std::span<const double> x) {
  require(n >= 0 && static_cast<std::size_t>(n) == x.size(), "point dimension must equal the order");
  if (n == 0) return 1.0;
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  double sum = 0.0;
  do {
    double rest = t - std::fabs(x[static_cast<std::size_t>(perm[0])]);
    for (int k = 1; k < n; ++k)
      rest -= std::fabs(x[static_cast<std::size_t>(perm[k])] - x[static_cast<std::size_t>(perm[k - 1])]);
    if (rest > 0.0) sum += std::pow(rest, n);
  } while (std::next_permutation(perm.begin(), perm.end()));
  const double nfact = factorial(n);
  return sum / (nfact * std::pow(2.0, n) * nfact);
}

}  // namespace wavechaos::chaos
