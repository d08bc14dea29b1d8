#include "wavechaos/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wavechaos/errors.hpp"

namespace wavechaos::asymptotics {

namespace {

constexpr double pi = std::numbers::pi;

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const auto k = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = y[i] - f.intercept - f.slope * x[i];
      rss += e * e;
    }
    f.slope_stderr = std::sqrt(rss / (k - 2.0) / sxx);
  }
  return f;
}

// theta^{1/(3-a)} (1/2)^{a/(2(3-a))} ((2 M^{1/2})/(4-a))^{(4-a)/(3-a)}
double common_factor(const AsymptoticSpec& s) {
  const double a = s.alpha;
  return std::pow(s.theta, 1.0 / (3.0 - a)) * std::pow(0.5, a / (2.0 * (3.0 - a))) *
         std::pow(2.0 * std::sqrt(s.m) / (4.0 - a), (4.0 - a) / (3.0 - a));
}

}  // namespace

double log_mittag_leffler(double gamma, double t) {
  require(gamma > 0.0, "Mittag-Leffler exponent must be positive");
  require(t > 0.0 && std::isfinite(t), "Mittag-Leffler argument must be positive");
  const double lt = std::log(t);
  return log_series([&](long n) { return n * lt - gamma * std::lgamma(n + 1.0); });
}

double mittag_leffler_limit(double gamma, double t) { return std::pow(t, -1.0 / gamma) * log_mittag_leffler(gamma, t); }

StirlingReport stirling_rate_check(double a, int n_max) {
  require(a > 0.0, "Stirling rate needs a > 0");
  require(n_max >= 1, "Stirling rate needs n_max >= 1");
  StirlingReport r;
  r.a = a;
  r.limit = a * std::log(a);
  r.sequence.reserve(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) r.sequence.push_back((std::lgamma(a * n + 1.0) - a * std::lgamma(n + 1.0)) / n);
  return r;
}

SeriesProbe fit_rate(std::vector<std::pair<int, double>> coefficients, std::optional<std::pair<int, int>> window) {
  require(!coefficients.empty(), "rate fit needs coefficients");
  std::sort(coefficients.begin(), coefficients.end());
  for (const auto& [n, rn] : coefficients)
    require(rn > 0.0 && std::isfinite(rn), "rate fit needs positive coefficients");
  SeriesProbe probe;
  probe.coefficients = coefficients;
  if (window) {
    require(window->first <= window->second, "rate fit window is empty");
    require(window->first >= coefficients.front().first && window->second <= coefficients.back().first,
            "rate fit window lies outside the supplied indices");
    probe.n_min = window->first;
    probe.n_max = window->second;
  } else {
    const std::size_t k = coefficients.size();
    const std::size_t take = std::min(k, std::max<std::size_t>(4, k - k / 2));
    probe.n_min = coefficients[k - take].first;
    probe.n_max = coefficients.back().first;
  }
  std::vector<double> x, y;
  for (const auto& [n, rn] : coefficients)
    if (n >= probe.n_min && n <= probe.n_max) {
      x.push_back(n);
      y.push_back(std::log(rn));
    }
  require(x.size() >= 4, "rate fit needs at least 4 points in the window");
  const auto f = least_squares(x, y);
  probe.rate = f.slope;
  probe.rate_stderr = f.slope_stderr;
  probe.intercept = f.intercept;
  probe.radius = std::exp(-f.slope);
  return probe;
}

void AsymptoticSpec::validate() const {
  require(alpha > 0.0 && alpha < 3.0, "asymptotic constants need 0 < alpha < 3; alpha = 3 is the critical case");
  require(theta > 0.0, "theta must be positive");
  require(p >= 2.0, "moment order must be at least 2");
  require(m > 0.0, "M must be positive");
}

double AsymptoticSpec::beta() const {
  require(alpha < 3.0, "beta is infinite at alpha = 3");
  return (4.0 - alpha) / (3.0 - alpha);
}

CriticalTimes critical_times(double theta, double p, double m) {
  require(theta > 0.0, "theta must be positive");
  require(p >= 2.0, "moment order must be at least 2");
  require(m > 0.0, "M must be positive");
  CriticalTimes c;
  const double k = theta * (p - 1.0);
  c.t_p = std::sqrt(2.0) / (k * std::sqrt(m));
  c.t_p_prime = 4.0 * pi / k;
  c.middle = 2.0 * pi * pi / k;
  const double bound = 1.0 / (2.0 * std::pow(pi, 4));
  c.bound_applies = m <= bound * (1.0 + 1e-12);
  c.holds = c.t_p >= c.middle * (1.0 - 1e-12) && c.middle >= c.t_p_prime;
  return c;
}

std::string to_string(Constant c) {
  switch (c) {
    case Constant::p_norm_rate:
      return "p_norm_rate";
    case Constant::p2_rate:
      return "p2_rate";
    case Constant::t_fixed:
      return "t_fixed";
    case Constant::p_fixed:
      return "p_fixed";
  }
  return "unknown";
}

Constant constant_from_string(const std::string& name) {
  for (auto c : {Constant::p_norm_rate, Constant::p2_rate, Constant::t_fixed, Constant::p_fixed})
    if (to_string(c) == name) return c;
  throw ConfigError("unknown asymptotic constant '" + name + "'");
}

double asymptotic_constant(const AsymptoticSpec& spec, Constant which, double t) {
  spec.validate();
  const double a = spec.alpha;
  switch (which) {
    case Constant::p_norm_rate:
      return common_factor(spec) * (3.0 - a) / 2.0;
    case Constant::p2_rate:
      return common_factor(spec) * (3.0 - a);
    case Constant::t_fixed:
      // Written out in full rather than through p_norm_rate.
      return spec.p * std::pow(spec.p - 1.0, 1.0 / (3.0 - a)) * std::pow(spec.theta, 1.0 / (3.0 - a)) *
             std::pow(0.5, a / (2.0 * (3.0 - a))) * (3.0 - a) / 2.0 *
             std::pow(2.0 * std::sqrt(spec.m) / (4.0 - a), (4.0 - a) / (3.0 - a));
    case Constant::p_fixed:
      require(t > 0.0, "p_fixed needs t > 0");
      return std::pow(t, spec.beta()) * common_factor(spec) * (3.0 - a) / 2.0;
  }
  throw ConfigError("unknown asymptotic constant");
}

double growth_base(double alpha, double m) {
  require(alpha > 0.0 && alpha < 4.0, "growth base needs 0 < alpha < 4");
  require(m > 0.0, "M must be positive");
  return std::pow(2.0 / (4.0 - alpha), 4.0 - alpha) * std::pow(2.0, -alpha / 2.0) * std::pow(m, (4.0 - alpha) / 2.0);
}

GrowthProbe series_growth_probe(const AsymptoticSpec& spec, std::span<const double> t_grid, std::span<const double> r) {
  require(spec.alpha > 0.0 && spec.alpha < 3.0, "growth probe needs 0 < alpha < 3");
  require(spec.theta >= 0.0, "theta must be nonnegative");
  require(!r.empty(), "growth probe needs R_0..R_N");
  require(t_grid.size() >= 2, "growth probe needs at least two times");
  for (double v : r) require(v >= 0.0 && std::isfinite(v), "coefficients must be finite and nonnegative");
  const double a = spec.alpha;
  GrowthProbe g;
  g.beta = (4.0 - a) / (3.0 - a);
  g.t.assign(t_grid.begin(), t_grid.end());
  const auto n_terms = static_cast<long>(r.size());
  for (double t : t_grid) {
    require(t > 0.0, "probe times must be positive");
    auto term = [&](long n) {
      const double rn = r[static_cast<std::size_t>(n)];
      if (rn == 0.0) return -std::numeric_limits<double>::infinity();
      if (n == 0) return std::log(rn);
      if (spec.theta == 0.0) return -std::numeric_limits<double>::infinity();
      return n * (std::log(spec.theta) + (4.0 - a) * std::log(t)) + std::log(rn) - (3.0 - a) * std::lgamma(n + 1.0);
    };
    double peak = -std::numeric_limits<double>::infinity();
    for (long n = 0; n < n_terms; ++n) peak = std::max(peak, term(n));
    double scaled = 0.0;
    for (long n = 0; n < n_terms; ++n) scaled += std::exp(term(n) - peak);
    const double log_s = peak + std::log(scaled);
    g.log_sum.push_back(log_s);
    if (t == t_grid.back()) g.last_term_share = std::exp(term(n_terms - 1) - log_s);
  }
  g.truncated = g.last_term_share > 0.01;

  std::vector<double> xb, y;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < g.t.size(); ++i) {
    xb.push_back(std::pow(g.t[i], g.beta));
    y.push_back(g.log_sum[i]);
    if (g.log_sum[i] > 0.0) {
      lx.push_back(std::log(g.t[i]));
      ly.push_back(std::log(g.log_sum[i]));
    }
  }
  g.fitted_constant = least_squares(xb, y).slope;
  g.fitted_exponent = lx.size() >= 2 ? least_squares(lx, ly).slope : 0.0;
  if (spec.theta > 0.0 && spec.m > 0.0) {
    AsymptoticSpec s = spec;
    s.p = 2.0;
    g.predicted_constant = asymptotic_constant(s, Constant::p2_rate);
  }
  return g;
}

}  // namespace wavechaos::asymptotics
