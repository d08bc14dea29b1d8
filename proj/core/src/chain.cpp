#include "wavechaos/chain.hpp"

#include <quadmath.h>

#include <bit>
#include <cfloat>
#include <cmath>
#include <type_traits>

#include "wavechaos/errors.hpp"

namespace wavechaos::chaos {

namespace {

constexpr double kRelTol = 1e-10;

inline double cos_sqrt(double x, double t) { return std::cos(t * std::sqrt(x)); }
inline long double cos_sqrt(long double x, double t) { return std::cos(static_cast<long double>(t) * std::sqrt(x)); }
inline __float128 cos_sqrt(__float128 x, double t) { return cosq(static_cast<__float128>(t) * sqrtq(x)); }

inline __float128 abs_q(__float128 x) { return x < 0 ? -x : x; }

// Scatter the low bits of `index` into the set bits of `mask`.
std::uint32_t deposit(std::uint32_t index, std::uint32_t mask) {
  std::uint32_t out = 0;
  for (std::uint32_t bit = 1; mask != 0; bit <<= 1) {
    const std::uint32_t low = mask & (~mask + 1);
    if (index & bit) out |= low;
    mask &= mask - 1;
  }
  return out;
}

// Gather the bits of `value` at the set bits of `mask` into the low bits.
std::uint32_t extract(std::uint32_t value, std::uint32_t mask) {
  std::uint32_t out = 0;
  for (std::uint32_t bit = 1; mask != 0; bit <<= 1) {
    const std::uint32_t low = mask & (~mask + 1);
    if (value & low) out |= bit;
    mask &= mask - 1;
  }
  return out;
}

// Evaluates in double and long double, escalating to binary128 when the
// two disagree by more than the relative tolerance allows.
template <class Eval>
double escalate(Eval&& eval, PrecisionStats& stats) {
  ++stats.evaluations;
  const double rd = eval.template operator()<double>();
  const long double rl = eval.template operator()<long double>();
  const long double scale = static_cast<long double>(LDBL_EPSILON) / DBL_EPSILON;
  const long double err_l = std::fabs(static_cast<long double>(rd) - rl) * scale;
  if (err_l <= kRelTol * std::fabs(rl)) {
    if (std::fabs(static_cast<long double>(rd) - rl) > kRelTol * std::fabs(rl)) ++stats.extended;
    return static_cast<double>(rl);
  }
  const __float128 rq = eval.template operator()<__float128>();
  ++stats.quad;
  const __float128 err_q = abs_q(static_cast<__float128>(rl) - rq) * (FLT128_EPSILON / LDBL_EPSILON);
  if (!(err_q <= kRelTol * abs_q(rq))) ++stats.unresolved;
  return static_cast<double>(rq);
}

}  // namespace

double chain_integral(std::span<const double> nodes, double t, PrecisionStats& stats) {
  const std::size_t n = nodes.size();
  if (n == 0) return 1.0;
  auto eval = [&]<class Real>() -> Real {
    Real c[64];
    Real y[64];
    if (n + 1 > 64) throw ConfigError("chain too long");
    y[0] = 0;
    c[0] = 1;
    for (std::size_t k = 1; k <= n; ++k) {
      y[k] = static_cast<Real>(nodes[k - 1]);
      Real sum = 0;
      for (std::size_t j = 0; j < k; ++j) {
        c[j] /= (y[k] - y[j]);
        sum += c[j];
      }
      c[k] = -sum;
    }
    Real total = 0;
    for (std::size_t k = 0; k <= n; ++k) total += c[k] * cos_sqrt(y[k], t);
    return total;
  };
  return escalate(eval, stats);
}

SubsetChains::SubsetChains(int n) : n_(n), full_(0) {
  require(n >= 1 && n <= 20, "subset chains support 1 <= n <= 20");
  full_ = (1u << n) - 1u;
  if (n > 10) return;  // only the resolvent sum is available
  const std::size_t count = std::size_t{1} << n;
  offset_.assign(count + 1, 0);
  for (std::uint32_t s = 0; s < count; ++s) offset_[s + 1] = offset_[s] + (std::size_t{1} << std::popcount(s));
  submasks_.resize(offset_[count]);
  for (std::uint32_t s = 0; s < count; ++s) {
    const std::size_t size = std::size_t{1} << std::popcount(s);
    for (std::uint32_t i = 0; i < size; ++i) submasks_[offset_[s] + i] = deposit(i, s);
  }
  parent_begin_.assign(count + 1, 0);
  map_begin_.push_back(0);
  for (std::uint32_t s = 0; s < count; ++s) {
    for (std::uint32_t rest = s; rest != 0; rest &= rest - 1) {
      const std::uint32_t p = s & ~(rest & (~rest + 1));
      parent_list_.push_back(p);
      const std::size_t psize = std::size_t{1} << std::popcount(p);
      for (std::uint32_t i = 0; i < psize; ++i) map_.push_back(extract(deposit(i, p), s));
      map_begin_.push_back(map_.size());
    }
    parent_begin_[s + 1] = parent_list_.size();
  }
}

double SubsetChains::resolvent_sum(std::span<const double> x_of_mask) const {
  const std::size_t count = std::size_t{1} << n_;
  require(x_of_mask.size() >= count, "subset norm table too small");
  std::vector<double> b(count);
  b[0] = 1.0;
  for (std::uint32_t s = 1; s < count; ++s) {
    double sum = 0.0;
    for (std::uint32_t rest = s; rest != 0; rest &= rest - 1) sum += b[s & ~(rest & (~rest + 1))];
    b[s] = sum / (1.0 + x_of_mask[s]);
  }
  return b[count - 1];
}

template <class Real>
void SubsetChains::coefficients(std::span<const double> x_of_mask, std::vector<Real>& coef) const {
  const std::size_t count = std::size_t{1} << n_;
  coef.assign(offset_[count], Real(0));
  coef[0] = 1;
  std::size_t entry = 0;
  for (std::uint32_t s = 1; s < count; ++s) {
    Real* block = coef.data() + offset_[s];
    for (std::size_t e = parent_begin_[s]; e < parent_begin_[s + 1]; ++e, ++entry) {
      const std::uint32_t p = parent_list_[e];
      const Real* src = coef.data() + offset_[p];
      const std::uint32_t* m = map_.data() + map_begin_[entry];
      const std::size_t psize = offset_[p + 1] - offset_[p];
      for (std::size_t i = 0; i < psize; ++i) block[m[i]] += src[i];
    }
    // block now holds p_T for proper subsets T; expand 1/((z+x_T)(z+x_S)).
    const std::size_t size = offset_[s + 1] - offset_[s];
    const Real xs = static_cast<Real>(x_of_mask[s]);
    Real sum = 0;
    for (std::size_t i = 0; i + 1 < size; ++i) {
      const Real xt = static_cast<Real>(x_of_mask[submasks_[offset_[s] + i]]);
      block[i] /= (xs - xt);
      sum += block[i];
    }
    block[size - 1] = -sum;
  }
}

template <class Real>
Real SubsetChains::evaluate(const std::vector<Real>& coef, std::span<const double> x_of_mask, double t) const {
  const std::size_t base = offset_[full_];
  const std::size_t size = offset_[full_ + 1] - base;
  Real total = 0;
  for (std::size_t i = 0; i < size; ++i)
    total += coef[base + i] * cos_sqrt(static_cast<Real>(x_of_mask[submasks_[base + i]]), t);
  return total;
}

double SubsetChains::cosine_sum(std::span<const double> x_of_mask, double t, PrecisionStats& stats) const {
  double out = 0.0;
  cosine_sums(x_of_mask, std::span<const double>(&t, 1), std::span<double>(&out, 1), stats);
  return out;
}

void SubsetChains::cosine_sums(std::span<const double> x_of_mask, std::span<const double> ts, std::span<double> out,
                               PrecisionStats& stats) const {
  require(n_ <= 10, "symmetrized cosine sums are tabulated for n <= 10");
  require(x_of_mask.size() >= (std::size_t{1} << n_), "subset norm table too small");
  require(out.size() >= ts.size(), "output span too small");
  std::vector<double> cd;
  std::vector<long double> cl;
  std::vector<__float128> cq;
  coefficients(x_of_mask, cd);
  coefficients(x_of_mask, cl);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double t = ts[i];
    auto eval = [&]<class Real>() -> Real {
      if constexpr (std::is_same_v<Real, double>) {
        return evaluate(cd, x_of_mask, t);
      } else if constexpr (std::is_same_v<Real, long double>) {
        return evaluate(cl, x_of_mask, t);
      } else {
        if (cq.empty()) coefficients(x_of_mask, cq);
        return evaluate(cq, x_of_mask, t);
      }
    };
    out[i] = escalate(eval, stats);
  }
}

void subset_sums(std::span<const double> xi, int n, int d, std::vector<double>& sums, std::vector<double>& out) {
  const std::size_t count = std::size_t{1} << n;
  out.assign(count, 0.0);
  sums.assign(count * static_cast<std::size_t>(d), 0.0);
  for (std::uint32_t s = 1; s < count; ++s) {
    const int j = std::countr_zero(s);
    const std::uint32_t rest = s & (s - 1);
    double norm = 0.0;
    for (int a = 0; a < d; ++a) {
      const double v = sums[rest * d + a] + xi[static_cast<std::size_t>(j * d + a)];
      sums[s * d + a] = v;
      norm += v * v;
    }
    out[s] = norm;
  }
}

void subset_square_norms(std::span<const double> xi, int n, int d, std::vector<double>& out) {
  std::vector<double> sums;
  subset_sums(xi, n, d, sums, out);
}

double ordered_chain_sum(std::span<const double> v, int n) {
  const std::size_t count = std::size_t{1} << n;
  require(v.size() >= count, "subset table too small");
  std::vector<double> b(count);
  b[0] = 1.0;
  for (std::uint32_t s = 1; s < count; ++s) {
    double sum = 0.0;
    for (std::uint32_t rest = s; rest != 0; rest &= rest - 1) sum += b[s & ~(rest & (~rest + 1))];
    b[s] = sum * v[s];
  }
  return b[count - 1];
}

}  // namespace wavechaos::chaos
