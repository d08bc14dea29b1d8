#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wavechaos::asymptotics {

// log sum_{n>=0} exp(log_term(n)) for a unimodal log-term sequence, summed
// until terms fall 36 log-units below the running maximum past the peak.
template <class F>
[[nodiscard]] double log_series(F&& log_term, long max_terms = 100'000'000);

// log sum_{n>=0} t^n / (n!)^gamma.
[[nodiscard]] double log_mittag_leffler(double gamma, double t);

// t^{-1/gamma} log sum_{n>=0} t^n / (n!)^gamma; tends to gamma.
[[nodiscard]] double mittag_leffler_limit(double gamma, double t);

struct StirlingReport {
  double a = 0.0;
  std::vector<double> sequence;  // (1/n) log(Gamma(a n + 1) / (n!)^a), n = 1..n_max
  double limit = 0.0;            // a log a
};

[[nodiscard]] StirlingReport stirling_rate_check(double a, int n_max);

struct SeriesProbe {
  std::vector<std::pair<int, double>> coefficients;  // (n, R_n)
  int n_min = 0;
  int n_max = 0;
  double rate = 0.0;  // slope of log R_n against n
  double rate_stderr = 0.0;
  double intercept = 0.0;
  double radius = 0.0;  // exp(-rate)
};

// Least-squares slope of log R_n over the window [n_min, n_max]. Without a
// window the last half of the indices is used, and never fewer than 4 points.
[[nodiscard]] SeriesProbe fit_rate(std::vector<std::pair<int, double>> coefficients,
                                   std::optional<std::pair<int, int>> window = std::nullopt);

// Scaling index alpha (d for white noise), coupling theta, moment order p and
// variational constant M.
struct AsymptoticSpec {
  double alpha = 1.0;
  double theta = 1.0;
  double p = 2.0;
  double m = 1.0;

  void validate() const;
  // (4 - alpha) / (3 - alpha)
  [[nodiscard]] double beta() const;
};

struct CriticalTimes {
  double t_p = 0.0;            // sqrt(2) / (theta (p-1) sqrt(M))
  double t_p_prime = 0.0;      // 4 pi / (theta (p-1))
  double middle = 0.0;         // 2 pi^2 / (theta (p-1))
  bool bound_applies = false;  // M <= 1/(2 pi^4)
  bool holds = false;          // t_p >= middle >= t_p_prime
};

// Critical times for d = 3 white noise.
[[nodiscard]] CriticalTimes critical_times(double theta, double p, double m);

enum class Constant { p_norm_rate, p2_rate, t_fixed, p_fixed };

[[nodiscard]] std::string to_string(Constant c);
[[nodiscard]] Constant constant_from_string(const std::string& name);

// Closed-form limits:
//   p_norm_rate  lim t_p^{-beta} log ||u||_p
//   p2_rate      lim t^{-beta} log E u^2
//   t_fixed      lim t^{-beta} log E |u|^p
//   p_fixed      lim p^{-beta} log E |u|^p at time t
[[nodiscard]] double asymptotic_constant(const AsymptoticSpec& spec, Constant which, double t = 1.0);

// R = (2/(4-alpha))^{4-alpha} 2^{-alpha/2} M^{(4-alpha)/2}, the geometric
// growth base of R_n = (n!)^{4-alpha} ||f_n(.,0;1)||^2.
[[nodiscard]] double growth_base(double alpha, double m);

struct GrowthProbe {
  std::vector<double> t;
  std::vector<double> log_sum;  // log sum_n theta^n t^{(4-alpha) n} R_n / (n!)^{3-alpha}
  double beta = 0.0;
  double fitted_exponent = 0.0;  // slope of log log S against log t
  double fitted_constant = 0.0;  // slope of log S against t^beta
  double predicted_constant = 0.0;
  double last_term_share = 0.0;  // share of the last term at the largest t
  bool truncated = false;        // last_term_share > 1%
};

// `r` holds R_0..R_N.
[[nodiscard]] GrowthProbe series_growth_probe(const AsymptoticSpec& spec, std::span<const double> t_grid,
                                              std::span<const double> r);

// ---------------------------------------------------------------------------

template <class F>
double log_series(F&& log_term, long max_terms) {
  double peak = -std::numeric_limits<double>::infinity();
  double scaled = 0.0;  // sum exp(term - peak)
  bool past_peak = false;
  double previous = -std::numeric_limits<double>::infinity();
  for (long n = 0; n < max_terms; ++n) {
    const double lt = log_term(n);
    if (lt > peak) {
      scaled = scaled * std::exp(peak - lt) + 1.0;
      peak = lt;
    } else {
      scaled += std::exp(lt - peak);
    }
    if (lt < previous) past_peak = true;
    previous = lt;
    if (past_peak && lt < peak - 36.0) break;
  }
  return peak + std::log(scaled);
}

}  // namespace wavechaos::asymptotics
