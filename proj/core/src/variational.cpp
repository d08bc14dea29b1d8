#include "wavechaos/variational.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <utility>

#include "wavechaos/errors.hpp"
#include "wavechaos/quadrature.hpp"
#include "wavechaos/stats.hpp"

namespace wavechaos::variational {

namespace {

constexpr double pi = std::numbers::pi;

// Plan creation in FFTW is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <class T>
struct FftwBuffer {
  T* data = nullptr;
  std::size_t size = 0;
  FftwBuffer() = default;
  explicit FftwBuffer(std::size_t n)
      : data(static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)))), size(n) {
    if (data == nullptr) throw std::bad_alloc();
    std::memset(static_cast<void*>(data), 0, sizeof(T) * std::max<std::size_t>(n, 1));
  }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  FftwBuffer(FftwBuffer&& o) noexcept : data(std::exchange(o.data, nullptr)), size(o.size) {}
  FftwBuffer& operator=(FftwBuffer&& o) noexcept {
    std::swap(data, o.data);
    std::swap(size, o.size);
    return *this;
  }
  ~FftwBuffer() {
    if (data != nullptr) fftw_free(data);
  }
};

struct Plan {
  fftw_plan p = nullptr;
  Plan() = default;
  explicit Plan(fftw_plan plan) : p(plan) {
    if (p == nullptr) throw NumericalError("FFTW could not create a plan");
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  Plan(Plan&& o) noexcept : p(std::exchange(o.p, nullptr)) {}
  Plan& operator=(Plan&& o) noexcept {
    std::swap(p, o.p);
    return *this;
  }
  ~Plan() {
    if (p != nullptr) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(p);
    }
  }
  void run() const { fftw_execute(p); }
};

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// Real-to-complex transform pair on an N^d box with the r2c half layout.
struct RealFft {
  int d = 1;
  int n = 0;
  std::size_t real_size = 0;
  std::size_t half_size = 0;
  FftwBuffer<double> real;
  FftwBuffer<fftw_complex> half;
  Plan forward;
  Plan backward;

  RealFft() = default;
  RealFft(int dims, int points) : d(dims), n(points) {
    real_size = ipow(static_cast<std::size_t>(n), d);
    half_size = real_size / static_cast<std::size_t>(n) * static_cast<std::size_t>(n / 2 + 1);
    real = FftwBuffer<double>(real_size);
    half = FftwBuffer<fftw_complex>(half_size);
    std::array<int, 3> dims_arr{n, n, n};
    std::lock_guard lock(planner_mutex());
    forward = Plan(fftw_plan_dft_r2c(d, dims_arr.data(), real.data, half.data, FFTW_ESTIMATE));
    backward = Plan(fftw_plan_dft_c2r(d, dims_arr.data(), half.data, real.data, FFTW_ESTIMATE));
  }

  // Signed frequency index of half-layout entry `flat` along each axis.
  void frequency_index(std::size_t flat, std::span<int> out) const {
    const auto last = static_cast<std::size_t>(n / 2 + 1);
    out[d - 1] = static_cast<int>(flat % last);
    flat /= last;
    for (int a = d - 2; a >= 0; --a) {
      const int k = static_cast<int>(flat % static_cast<std::size_t>(n));
      flat /= static_cast<std::size_t>(n);
      out[a] = k < n / 2 ? k : k - n;
    }
  }
};

// Average of C |s|^{-beta} over [a, b] in one coordinate, beta = 1 - alpha.
double interval_average_1d(double c, double alpha, double a, double b) {
  auto antiderivative = [alpha](double s) { return std::copysign(std::pow(std::abs(s), alpha), s) / alpha; };
  return c * (antiderivative(b) - antiderivative(a)) / (b - a);
}

// int_{[-1,1]^k} |eta|^{-beta} d eta by the pyramid decomposition of the cube:
// 2k/(k - beta) * int_{[-1,1]^{k-1}} (1 + |y|^2)^{-beta/2} dy.
double unit_cube_singular_integral(int k, double beta) {
  if (k == 1) return 2.0 / (1.0 - beta);
  const auto rule = gauss_legendre(24);
  double face = 0.0;
  if (k == 2) {
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      face += rule.weights[i] * std::pow(1.0 + rule.nodes[i] * rule.nodes[i], -0.5 * beta);
  } else {
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        const double y2 = rule.nodes[i] * rule.nodes[i] + rule.nodes[j] * rule.nodes[j];
        face += rule.weights[i] * rule.weights[j] * std::pow(1.0 + y2, -0.5 * beta);
      }
  }
  return 2.0 * k / (k - beta) * face;
}

// Average of C |eta|^{-beta} over a k-dimensional cell centered at
// spacing * index, for a group of size k >= 2.
double group_cell_average(int k, double c, double beta, double spacing, std::span<const int> index) {
  int far = 0;
  for (int i : index) far = std::max(far, std::abs(i));
  if (far == 0) {
    const double half = 0.5 * spacing;
    return c * std::pow(half, k - beta) * unit_cube_singular_integral(k, beta) / std::pow(spacing, k);
  }
  // Tensor Gauss rules; cells next to the singular one are subdivided.
  const int sub = far <= 2 ? 2 : 1;
  const int order = far <= 2 ? 6 : (k == 3 ? 2 : 3);
  const auto rule = gauss_legendre(order, 0.0, 1.0);
  const double piece = spacing / sub;
  const int q = order * sub;
  std::vector<double> nodes(static_cast<std::size_t>(q)), weights(static_cast<std::size_t>(q));
  for (int s = 0; s < sub; ++s)
    for (int i = 0; i < order; ++i) {
      nodes[static_cast<std::size_t>(s * order + i)] =
          (s + rule.nodes[static_cast<std::size_t>(i)]) * piece - 0.5 * spacing;
      weights[static_cast<std::size_t>(s * order + i)] = rule.weights[static_cast<std::size_t>(i)] / sub;
    }
  double total = 0.0;
  std::array<int, 3> it{0, 0, 0};
  const std::size_t count = ipow(static_cast<std::size_t>(q), k);
  for (std::size_t flat = 0; flat < count; ++flat) {
    std::size_t rest = flat;
    double r2 = 0.0, w = 1.0;
    for (int a = 0; a < k; ++a) {
      it[a] = static_cast<int>(rest % static_cast<std::size_t>(q));
      rest /= static_cast<std::size_t>(q);
      const double x = spacing * index[static_cast<std::size_t>(a)] + nodes[static_cast<std::size_t>(it[a])];
      r2 += x * x;
      w *= weights[static_cast<std::size_t>(it[a])];
    }
    total += w * std::pow(r2, -0.5 * beta);
  }
  return c * total;
}

// Dirichlet Laplacian on an m^axes interior grid: out = -Delta_h g.
void negative_laplacian(std::span<const double> g, std::span<double> out, int axes, int m, double h) {
  const double inv = 1.0 / (h * h);
  const auto mm = static_cast<std::size_t>(m);
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = 2.0 * axes * g[i] * inv;
  std::size_t stride = 1;
  for (int a = axes - 1; a >= 0; --a) {
    const std::size_t block = stride * mm;
    for (std::size_t base = 0; base < g.size(); base += block) {
      // Lines along axis a: neighbours at +-stride inside each block.
      for (std::size_t p = 0; p + 1 < mm; ++p)
        for (std::size_t r = 0; r < stride; ++r) {
          const std::size_t i = base + p * stride + r;
          out[i] -= g[i + stride] * inv;
          out[i + stride] -= g[i] * inv;
        }
    }
    stride = block;
  }
}

double default_extent(const VariationalProblem& p) {
  const double base = p.radial ? 240.0 : (p.d == 1 ? 16.0 : (p.d == 2 ? 20.0 : 40.0));
  const double a = p.f.alpha(p.d);
  return base * std::pow(p.theta / std::sqrt(p.f.scale), 2.0 / (4.0 - a));
}

int default_points(const VariationalProblem& p) {
  if (p.radial) return 1024;
  return p.d == 1 ? 256 : (p.d == 2 ? 128 : 48);
}

}  // namespace

// ---------------------------------------------------------------------------
// Interaction

Interaction Interaction::delta(double scale) {
  Interaction f;
  f.delta0 = true;
  f.scale = scale;
  return f;
}

Interaction Interaction::noise(NoiseSpec spec, double scale) {
  Interaction f;
  f.delta0 = false;
  f.spec = std::move(spec);
  f.scale = scale;
  return f;
}

double Interaction::alpha(int d) const { return delta0 ? static_cast<double>(d) : spec.alpha(); }

std::string Interaction::describe(int d) const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g*", scale);
  return std::string(buf) + (delta0 ? "delta0(d=" + std::to_string(d) + ")" : spec.canonical());
}

void VariationalProblem::validate() const {
  require(d >= 1 && d <= 3, "variational problems need d in {1, 2, 3}");
  require(theta > 0.0 && std::isfinite(theta), "theta must be positive");
  require(f.scale > 0.0 && std::isfinite(f.scale), "interaction scale must be positive");
  require(grid.extent >= 0.0 && std::isfinite(grid.extent), "grid extent must be positive");
  require(grid.points == 0 || grid.points >= 16, "grids need at least 16 points per axis");
  require(optimizer.max_iterations > 0, "max_iterations must be positive");
  require(optimizer.restarts >= 1, "at least one start is needed");
  require(optimizer.refinement_levels >= 1, "at least one refinement level is needed");
  require(optimizer.gradient_tolerance > 0.0, "gradient tolerance must be positive");
  if (!f.delta0) {
    f.spec.validate();
    require(f.spec.d == d, "noise dimension does not match the problem dimension");
  }
  require(f.alpha(d) < 4.0, "the scaling index must be below 4");
  if (radial) require(f.delta0 && d == 3, "the radial reduction is implemented for delta_0 in d = 3");
}

Grid resolved_grid(const VariationalProblem& problem) {
  Grid g = problem.grid;
  if (g.extent == 0.0) g.extent = default_extent(problem);
  if (g.points == 0) g.points = default_points(problem);
  return g;
}

// ---------------------------------------------------------------------------
// GridObjective

struct GridObjective::Impl {
  int d = 1;
  int axes = 1;
  int m = 0;
  double extent = 0.0;
  double h = 0.0;
  double cell = 0.0;  // quadrature weight per grid point
  bool radial = false;
  bool delta0 = true;
  double scale = 1.0;
  double theta = 1.0;
  std::size_t n = 0;

  // Spectral quartic term.
  RealFft fft;
  std::vector<double> weight;  // Theta dxi^d h^{2d} phibar per half-layout entry
  std::vector<double> multiplicity;

  // Preconditioner.
  FftwBuffer<double> work;
  Plan dst;
  std::vector<double> eigen;  // eigenvalues of -Delta_h per DST mode

  mutable std::vector<double> scratch;
  mutable std::vector<double> scratch2;

  void flat_index(std::size_t flat, std::span<int> out) const {
    for (int a = axes - 1; a >= 0; --a) {
      out[static_cast<std::size_t>(a)] = static_cast<int>(flat % static_cast<std::size_t>(m));
      flat /= static_cast<std::size_t>(m);
    }
  }
};

GridObjective::GridObjective(const VariationalProblem& problem, int points, double extent)
    : impl_(std::make_unique<Impl>()) {
  problem.validate();
  require(points >= 4, "grid needs at least 4 points per axis");
  require(extent > 0.0, "grid extent must be positive");
  auto& s = *impl_;
  s.d = problem.d;
  s.radial = problem.radial;
  s.axes = s.radial ? 1 : s.d;
  s.m = points;
  s.extent = extent;
  s.h = (s.radial ? extent : 2.0 * extent) / (points + 1);
  s.cell = s.radial ? 4.0 * pi * s.h : std::pow(s.h, s.d);
  s.delta0 = problem.f.delta0;
  s.scale = problem.f.scale;
  s.theta = problem.theta;
  s.n = ipow(static_cast<std::size_t>(points), s.axes);
  s.scratch.assign(s.n, 0.0);
  s.scratch2.assign(s.n, 0.0);

  if (!s.delta0) {
    const int big = 2 * (points + 1);
    s.fft = RealFft(s.d, big);
    const double dxi = 2.0 * pi / (big * s.h);
    const double factor = s.scale * std::pow(dxi, s.d) * std::pow(s.h, 2 * s.d);
    s.weight.assign(s.fft.half_size, 0.0);
    s.multiplicity.assign(s.fft.half_size, 0.0);
    std::array<int, 3> k{};
    for (std::size_t i = 0; i < s.fft.half_size; ++i) {
      s.fft.frequency_index(i, std::span<int>(k.data(), static_cast<std::size_t>(s.d)));
      s.weight[i] = factor * cell_averaged_density(problem.f.spec, dxi,
                                                   std::span<const int>(k.data(), static_cast<std::size_t>(s.d)));
      const int last = k[static_cast<std::size_t>(s.d - 1)];
      s.multiplicity[i] = (last == 0 || 2 * last == big) ? 1.0 : 2.0;
    }
  }

  s.work = FftwBuffer<double>(s.n);
  std::array<int, 3> dims{points, points, points};
  std::array<fftw_r2r_kind, 3> kinds{FFTW_RODFT00, FFTW_RODFT00, FFTW_RODFT00};
  {
    std::lock_guard lock(planner_mutex());
    s.dst = Plan(fftw_plan_r2r(s.axes, dims.data(), s.work.data, s.work.data, kinds.data(), FFTW_ESTIMATE));
  }
  std::vector<double> mode(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double sn = std::sin(pi * (k + 1) / (2.0 * (points + 1)));
    mode[static_cast<std::size_t>(k)] = 4.0 * sn * sn / (s.h * s.h);
  }
  s.eigen.assign(s.n, 0.0);
  std::array<int, 3> idx{};
  for (std::size_t i = 0; i < s.n; ++i) {
    s.flat_index(i, idx);
    double e = 0.0;
    for (int a = 0; a < s.axes; ++a) e += mode[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
    s.eigen[i] = e;
  }
}

GridObjective::~GridObjective() = default;
GridObjective::GridObjective(GridObjective&&) noexcept = default;
GridObjective& GridObjective::operator=(GridObjective&&) noexcept = default;

std::size_t GridObjective::size() const { return impl_->n; }
double GridObjective::spacing() const { return impl_->h; }

double GridObjective::inner(std::span<const double> u, std::span<const double> v) const {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s * impl_->cell;
}

double GridObjective::coordinate(int i) const {
  const auto& s = *impl_;
  return s.radial ? (i + 1) * s.h : -s.extent + (i + 1) * s.h;
}

double GridObjective::quartic(std::span<const double> g, std::span<double> grad) const {
  const auto& s = *impl_;
  require(g.size() == s.n, "grid function has the wrong size");
  const bool want = !grad.empty();
  if (s.radial) {
    double q = 0.0;
    for (std::size_t i = 0; i < s.n; ++i) {
      const double r = (static_cast<double>(i) + 1.0) * s.h;
      const double u2 = g[i] * g[i];
      q += u2 * u2 / (r * r);
      if (want) grad[i] = 4.0 * s.scale * u2 * g[i] / (r * r);
    }
    return s.scale * s.cell * q;
  }
  if (s.delta0) {
    double q = 0.0;
    for (std::size_t i = 0; i < s.n; ++i) {
      const double u2 = g[i] * g[i];
      q += u2 * u2;
      if (want) grad[i] = 4.0 * s.scale * u2 * g[i];
    }
    return s.scale * s.cell * q;
  }
  // Spectral: Q = Theta int |F g^2|^2 phi on the padded lattice.
  auto& fft = impl_->fft;
  std::fill(fft.real.data, fft.real.data + fft.real_size, 0.0);
  const auto big = static_cast<std::size_t>(fft.n);
  std::array<int, 3> idx{};
  for (std::size_t i = 0; i < s.n; ++i) {
    s.flat_index(i, idx);
    std::size_t pos = 0;
    for (int a = 0; a < s.d; ++a) pos = pos * big + static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
    fft.real.data[pos] = g[i] * g[i];
  }
  fft.forward.run();
  double q = 0.0;
  for (std::size_t k = 0; k < fft.half_size; ++k) {
    const double re = fft.half.data[k][0], im = fft.half.data[k][1];
    q += s.multiplicity[k] * s.weight[k] * (re * re + im * im);
    fft.half.data[k][0] *= s.weight[k];
    fft.half.data[k][1] *= s.weight[k];
  }
  if (want) {
    fft.backward.run();
    for (std::size_t i = 0; i < s.n; ++i) {
      s.flat_index(i, idx);
      std::size_t pos = 0;
      for (int a = 0; a < s.d; ++a) pos = pos * big + static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
      // dQ/du_j = 2 (c2r)_j, chain rule through u = g^2, then divide by h^d.
      grad[i] = 4.0 * g[i] * fft.real.data[pos] / s.cell;
    }
  }
  return q;
}

double GridObjective::dirichlet(std::span<const double> g, std::span<double> grad) const {
  const auto& s = *impl_;
  require(g.size() == s.n, "grid function has the wrong size");
  auto& lap = s.scratch;
  negative_laplacian(g, lap, s.axes, s.m, s.h);
  if (!grad.empty())
    for (std::size_t i = 0; i < s.n; ++i) grad[i] = 2.0 * lap[i];
  return inner(g, lap);
}

double GridObjective::value(std::span<const double> g, std::span<double> grad) const {
  const auto& s = *impl_;
  if (grad.empty()) {
    const double q = quartic(g, {});
    const double dd = dirichlet(g, {});
    return std::sqrt(std::max(q, 0.0)) - 0.5 * s.theta * dd;
  }
  auto& dgrad = s.scratch2;
  const double q = quartic(g, grad);
  const double dd = dirichlet(g, dgrad);
  const double root = std::sqrt(std::max(q, 0.0));
  if (q < 1e-14) {
    // Below the threshold the square root is not differentiable in a useful
    // way; ascend the quartic term alone.
    return root - 0.5 * s.theta * dd;
  }
  for (std::size_t i = 0; i < s.n; ++i) grad[i] = grad[i] / (2.0 * root) - 0.5 * s.theta * dgrad[i];
  return root - 0.5 * s.theta * dd;
}

void GridObjective::precondition(std::span<const double> in, std::span<double> out, double c) const {
  const auto& s = *impl_;
  auto* w = s.work.data;
  std::copy(in.begin(), in.end(), w);
  s.dst.run();
  const double norm = std::pow(2.0 * (s.m + 1), s.axes);
  for (std::size_t i = 0; i < s.n; ++i) w[i] /= norm * (1.0 + c * s.eigen[i]);
  s.dst.run();
  std::copy(w, w + s.n, out.begin());
}

double GridObjective::boundary_mass(std::span<const double> g) const {
  const auto& s = *impl_;
  // Outer tenth of each axis; g is pinned to 0 at the wall, so a thinner
  // layer would miss a slowly decaying tail.
  const int layer = std::max(2, (s.m + 9) / 10);
  std::array<int, 3> idx{};
  double mass = 0.0;
  for (std::size_t i = 0; i < s.n; ++i) {
    s.flat_index(i, idx);
    bool edge = false;
    for (int a = 0; a < s.axes; ++a) {
      const int p = idx[static_cast<std::size_t>(a)];
      if (p >= s.m - layer || (!s.radial && p < layer)) edge = true;
    }
    if (edge) mass += g[i] * g[i];
  }
  return mass * s.cell;
}

double GridObjective::second_moment(std::span<const double> g) const {
  const auto& s = *impl_;
  std::array<int, 3> idx{};
  double total = 0.0;
  for (std::size_t i = 0; i < s.n; ++i) {
    s.flat_index(i, idx);
    double r2 = 0.0;
    for (int a = 0; a < s.axes; ++a) {
      const double x = coordinate(idx[static_cast<std::size_t>(a)]);
      r2 += x * x;
    }
    total += r2 * g[i] * g[i];
  }
  return total * s.cell;
}

// ---------------------------------------------------------------------------
// Riemannian ascent on the unit sphere of <.,.>.

namespace {

struct AscentOutcome {
  double value = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

void normalize(std::vector<double>& g,
               const std::function<double(std::span<const double>, std::span<const double>)>& inner) {
  const double n2 = inner(g, g);
  if (!(n2 > 0.0) || !std::isfinite(n2)) throw NumericalError("cannot normalize a zero or non-finite grid function");
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : g) x *= inv;
}

// Riemannian L-BFGS ascent on the unit sphere with an Armijo line search and
// the normalization retraction. Memory pairs are carried to the new tangent
// space by projection. `precondition(in, out, lambda)` is the initial inverse
// Hessian given the current multiplier lambda = <grad, g>.
template <class Value, class Inner, class Precondition>
AscentOutcome ascend(Value&& value, Inner&& inner, Precondition&& precondition, std::vector<double>& g,
                     const OptimizerOptions& opt, std::vector<double>* trace) {
  constexpr std::size_t memory = 8;
  const std::size_t n = g.size();
  std::function<double(std::span<const double>, std::span<const double>)> ip = inner;
  normalize(g, ip);
  std::vector<double> grad(n), tangent(n), dir(n), trial(n), trial_grad(n), trial_tangent(n), q(n);
  auto project = [&](std::vector<double>& v, const std::vector<double>& at) {
    const double c = inner(v, at);
    for (std::size_t i = 0; i < n; ++i) v[i] -= c * at[i];
  };
  auto tangent_of = [&](const std::vector<double>& gr, const std::vector<double>& at, std::vector<double>& t) {
    const double lambda = inner(gr, at);
    for (std::size_t i = 0; i < n; ++i) t[i] = gr[i] - lambda * at[i];
    return lambda;
  };

  double j = value(g, grad);
  double lambda = tangent_of(grad, g, tangent);
  if (trace != nullptr) {
    trace->clear();
    trace->push_back(j);
  }
  std::vector<std::vector<double>> ss, ys;
  std::vector<double> rhos;
  AscentOutcome out;
  double window_start = j;
  int window = 0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    out.iterations = it;
    out.gradient_norm = std::sqrt(inner(tangent, tangent));
    const double scale = std::max({std::abs(lambda), std::abs(j), 1e-300});

    // Two-loop recursion for -J: gradient -tangent, so the step is H tangent.
    q = tangent;
    std::vector<double> alphas(ss.size());
    for (std::size_t k = ss.size(); k-- > 0;) {
      alphas[k] = rhos[k] * inner(ss[k], q);
      for (std::size_t i = 0; i < n; ++i) q[i] -= alphas[k] * ys[k][i];
    }
    precondition(q, dir, scale);
    if (!ss.empty()) {
      precondition(ys.back(), trial, scale);
      const double gamma = inner(ss.back(), ys.back()) / inner(ys.back(), trial) * scale;
      for (double& x : dir) x *= gamma / scale;
    }
    for (std::size_t k = 0; k < ss.size(); ++k) {
      const double beta = rhos[k] * inner(ys[k], dir);
      for (std::size_t i = 0; i < n; ++i) dir[i] += (alphas[k] - beta) * ss[k][i];
    }
    project(dir, g);
    double rate = inner(tangent, dir);
    if (!(rate > 0.0) || !std::isfinite(rate)) {
      ss.clear();
      ys.clear();
      rhos.clear();
      precondition(tangent, dir, scale);
      project(dir, g);
      rate = inner(tangent, dir);
    }
    if (!(rate > opt.gradient_tolerance * std::max(std::abs(j), 1e-300))) {
      out.converged = true;
      break;
    }

    bool accepted = false;
    double jt = j;
    double tau = 1.0;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = g[i] + tau * dir[i];
      normalize(trial, ip);
      jt = value(trial, trial_grad);
      if (std::isfinite(jt) && jt >= j + 1e-4 * tau * rate) {
        accepted = true;
        break;
      }
      tau *= 0.5;
    }
    if (!accepted) {
      if (!ss.empty()) {
        // Retry from the preconditioned gradient before giving up.
        ss.clear();
        ys.clear();
        rhos.clear();
        continue;
      }
      out.converged = rate <= 1e-6 * std::max(std::abs(j), 1e-300);
      break;
    }

    const double lambda_new = tangent_of(trial_grad, trial, trial_tangent);
    // s = step carried to the new tangent space; y = change of the -J gradient.
    std::vector<double> s_new(n), y_new(n);
    for (std::size_t i = 0; i < n; ++i) s_new[i] = tau * dir[i];
    project(s_new, trial);
    for (std::size_t i = 0; i < n; ++i) y_new[i] = tangent[i];
    project(y_new, trial);
    for (std::size_t i = 0; i < n; ++i) y_new[i] -= trial_tangent[i];
    for (std::size_t k = 0; k < ss.size(); ++k) {
      project(ss[k], trial);
      project(ys[k], trial);
      rhos[k] = 1.0 / inner(ss[k], ys[k]);
    }
    // Drop pairs whose curvature turned non-positive after transport.
    for (std::size_t k = ss.size(); k-- > 0;) {
      if (!(rhos[k] > 0.0) || !std::isfinite(rhos[k])) {
        ss.erase(ss.begin() + static_cast<std::ptrdiff_t>(k));
        ys.erase(ys.begin() + static_cast<std::ptrdiff_t>(k));
        rhos.erase(rhos.begin() + static_cast<std::ptrdiff_t>(k));
      }
    }
    const double sy = inner(s_new, y_new);
    if (sy > 1e-12 * std::sqrt(inner(s_new, s_new) * inner(y_new, y_new))) {
      if (ss.size() == memory) {
        ss.erase(ss.begin());
        ys.erase(ys.begin());
        rhos.erase(rhos.begin());
      }
      ss.push_back(std::move(s_new));
      ys.push_back(std::move(y_new));
      rhos.push_back(1.0 / sy);
    }

    g.swap(trial);
    grad.swap(trial_grad);
    tangent.swap(trial_tangent);
    lambda = lambda_new;
    j = jt;
    if (trace != nullptr) trace->push_back(j);
    out.iterations = it + 1;
    if (++window == 200) {
      if (j - window_start <= 1e-14 * std::abs(j)) {
        out.converged = rate <= 1e-6 * std::max(std::abs(j), 1e-300);
        break;
      }
      window = 0;
      window_start = j;
    }
  }
  out.gradient_norm = std::sqrt(inner(tangent, tangent));
  out.value = j;
  return out;
}

AscentOutcome ascend_grid(const GridObjective& obj, double theta, std::vector<double>& g, const OptimizerOptions& opt,
                          std::vector<double>* trace) {
  return ascend([&](std::span<const double> x, std::span<double> gr) { return obj.value(x, gr); },
                [&](std::span<const double> a, std::span<const double> b) { return obj.inner(a, b); },
                [&](std::span<const double> in, std::span<double> out, double lambda) {
                  // (lambda - theta Delta)^{-1}
                  obj.precondition(in, out, theta / lambda);
                  for (double& x : out) x /= lambda;
                },
                g, opt, trace);
}

// Linear interpolation of a grid function between grids of the same extent.
std::vector<double> resample(std::span<const double> src, int m_src, int m_dst, int axes, bool radial) {
  // Fractional source index of destination point i: grids share the box, so
  // x = origin + (i + 1) H / (m + 1) in both.
  std::vector<double> cur(src.begin(), src.end());
  std::vector<std::size_t> shape(static_cast<std::size_t>(axes), static_cast<std::size_t>(m_src));
  for (int a = 0; a < axes; ++a) {
    std::size_t outer = 1, inner = 1;
    for (int b = 0; b < a; ++b) outer *= shape[static_cast<std::size_t>(b)];
    for (int b = a + 1; b < axes; ++b) inner *= shape[static_cast<std::size_t>(b)];
    std::vector<double> next(outer * static_cast<std::size_t>(m_dst) * inner, 0.0);
    for (int i = 0; i < m_dst; ++i) {
      const double t = (i + 1.0) * (m_src + 1.0) / (m_dst + 1.0) - 1.0;
      const int lo = static_cast<int>(std::floor(t));
      const double frac = t - lo;
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t r = 0; r < inner; ++r) {
          auto at = [&](int j) {
            if (j < 0 || j >= m_src) return 0.0;
            return cur[(o * static_cast<std::size_t>(m_src) + static_cast<std::size_t>(j)) * inner + r];
          };
          next[(o * static_cast<std::size_t>(m_dst) + static_cast<std::size_t>(i)) * inner + r] =
              (1.0 - frac) * at(lo) + frac * at(lo + 1);
        }
    }
    cur.swap(next);
    shape[static_cast<std::size_t>(a)] = static_cast<std::size_t>(m_dst);
  }
  (void)radial;
  return cur;
}

std::vector<double> initial_bump(const GridObjective& obj, int axes, int m, double extent, bool radial, int start,
                                 std::uint64_t seed) {
  Rng rng(substream_seed(seed, static_cast<std::uint64_t>(start)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::array<double, 3> center{0.0, 0.0, 0.0};
  double width = 0.12 * extent;
  if (start > 0) {
    for (int a = 0; a < axes; ++a)
      center[static_cast<std::size_t>(a)] = radial ? 0.0 : (unit(rng) - 0.5) * 0.2 * extent;
    width = (0.06 + 0.14 * unit(rng)) * extent;
  }
  const std::size_t n = obj.size();
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rest = i;
    double r2 = 0.0;
    double first = 0.0;
    for (int a = axes - 1; a >= 0; --a) {
      const int p = static_cast<int>(rest % static_cast<std::size_t>(m));
      rest /= static_cast<std::size_t>(m);
      const double x = obj.coordinate(p) - center[static_cast<std::size_t>(a)];
      r2 += x * x;
      first = obj.coordinate(p);
    }
    g[i] = std::exp(-0.5 * r2 / (width * width));
    if (radial) g[i] *= first;  // u = r g
  }
  return g;
}

std::vector<int> level_points(int m, int levels) {
  std::vector<int> out;
  for (int l = levels - 1; l >= 0; --l) out.push_back(std::max(8, m >> l));
  out.back() = m;
  return out;
}

void to_reported(VariationalResult& r, const GridObjective& obj) {
  if (!r.radial) return;
  for (std::size_t i = 0; i < r.maximizer.size(); ++i) r.maximizer[i] /= obj.coordinate(static_cast<int>(i));
}

}  // namespace

VariationalResult solve_M(const VariationalProblem& problem, std::uint64_t seed) {
  problem.validate();
  const Grid base = resolved_grid(problem);
  require(base.points >= 16, "grids need at least 16 points per axis");
  const int axes = problem.radial ? 1 : problem.d;
  const auto& opt = problem.optimizer;
  auto levels = level_points(base.points, opt.refinement_levels);
  // Default-sized grids keep their spacing when the extent doubles, up to a
  // size cap; caller-fixed point counts stay fixed.
  const bool grow = problem.grid.points == 0;
  constexpr std::size_t max_grid = std::size_t{1} << 20;

  VariationalResult result;
  result.d = problem.d;
  result.radial = problem.radial;
  result.seed = seed;
  double extent = base.extent;
  for (int doubling = 0;; ++doubling) {
    result.history.clear();
    result.iterations = 0;
    std::vector<double> best;
    int best_m = 0;
    for (std::size_t lvl = 0; lvl < levels.size(); ++lvl) {
      const int m = levels[lvl];
      const GridObjective obj(problem, m, extent);
      if (lvl == 0) {
        const auto starts = static_cast<std::size_t>(opt.restarts);
        std::vector<std::vector<double>> gs(starts);
        std::vector<AscentOutcome> outs(starts);
        parallel_chunks(starts, [&](std::size_t k) {
          const GridObjective local(problem, m, extent);
          gs[k] = initial_bump(local, axes, m, extent, problem.radial, static_cast<int>(k), seed);
          outs[k] = ascend_grid(local, problem.theta, gs[k], opt, nullptr);
        });
        std::size_t pick = 0;
        for (std::size_t k = 1; k < starts; ++k)
          if (outs[k].value > outs[pick].value) pick = k;
        for (const auto& o : outs) result.iterations += o.iterations;
        best = std::move(gs[pick]);
        result.value = outs[pick].value;
        result.gradient_norm = outs[pick].gradient_norm;
        result.converged = outs[pick].converged;
      } else {
        best = resample(best, best_m, m, axes, problem.radial);
        const auto out = ascend_grid(obj, problem.theta, best, opt, &result.trace);
        result.iterations += out.iterations;
        result.value = out.value;
        result.gradient_norm = out.gradient_norm;
        result.converged = out.converged;
      }
      best_m = m;
      result.history.emplace_back(m, result.value);
      if (lvl + 1 == levels.size()) {
        result.boundary_mass = obj.boundary_mass(best);
        result.points = m;
        result.extent = extent;
        result.maximizer = best;
        to_reported(result, obj);
      }
    }
    if (result.boundary_mass <= opt.boundary_mass_limit || doubling >= opt.max_extent_doublings) break;
    extent *= 2.0;
    const int m_next = 2 * levels.back() + 1;
    if (grow && ipow(static_cast<std::size_t>(m_next), axes) <= max_grid)
      levels = level_points(m_next, opt.refinement_levels);
  }
  return result;
}

VariationalResult solve_M_from(const VariationalProblem& problem, std::vector<double> initial) {
  problem.validate();
  const Grid grid = resolved_grid(problem);
  const GridObjective obj(problem, grid.points, grid.extent);
  require(initial.size() == obj.size(), "initial grid function has the wrong size");
  if (problem.radial)
    for (std::size_t i = 0; i < initial.size(); ++i) initial[i] *= obj.coordinate(static_cast<int>(i));
  VariationalResult result;
  result.d = problem.d;
  result.radial = problem.radial;
  result.points = grid.points;
  result.extent = grid.extent;
  const auto out = ascend_grid(obj, problem.theta, initial, problem.optimizer, &result.trace);
  result.value = out.value;
  result.iterations = out.iterations;
  result.gradient_norm = out.gradient_norm;
  result.converged = out.converged;
  result.boundary_mass = obj.boundary_mass(initial);
  result.history.emplace_back(grid.points, out.value);
  result.maximizer = std::move(initial);
  to_reported(result, obj);
  return result;
}

ScalingReport scaling_check_M(const Interaction& f, double Theta, double theta, int d, const Grid& grid,
                              std::uint64_t seed, const OptimizerOptions& optimizer) {
  require(Theta > 0.0 && theta > 0.0, "scaling check needs positive Theta and theta");
  Interaction unit = f;
  unit.scale = 1.0;
  const double a = unit.alpha(d);
  require(a < 4.0, "scaling law needs alpha < 4");

  VariationalProblem ref{unit, 1.0, d, grid, optimizer, false};
  Interaction scaled = unit;
  scaled.scale = Theta;
  VariationalProblem target{scaled, theta, d, grid, optimizer, false};

  ScalingReport rep;
  rep.reference = solve_M(ref, seed).value;
  rep.solved = (Theta == 1.0 && theta == 1.0) ? rep.reference : solve_M(target, seed).value;
  rep.predicted = std::pow(Theta, 2.0 / (4.0 - a)) * std::pow(theta, -a / (4.0 - a)) * rep.reference;
  rep.relative_gap = std::abs(rep.solved - rep.predicted) / std::abs(rep.predicted);
  return rep;
}

double rho_from_M(double m_value, double alpha) {
  require(m_value > 0.0, "rho needs a positive M");
  require(alpha > 0.0 && alpha < 4.0, "rho needs 0 < alpha < 4");
  return std::pow(0.5, 0.5 * alpha) * std::pow(m_value, 0.5 * (4.0 - alpha));
}

SobolevReport sobolev_bound_analysis() {
  SobolevReport r;
  r.a = std::pow(3.0, -0.5) * std::pow(2.0 / pi, 2.0 / 3.0);
  const double a32 = std::pow(r.a, 1.5);
  r.y3 = 1.5 * a32;
  auto varphi = [a32](double y) { return a32 * y * y * y - 0.5 * y * y * y * y; };
  r.c = varphi(r.y3);
  const double closed = 27.0 * std::pow(r.a, 6) / 32.0;
  r.identity_gap = std::abs(closed - 1.0 / (2.0 * std::pow(pi, 4)));
  if (std::abs(r.c - closed) > 1e-12 || r.identity_gap > 1e-12)
    throw NumericalError("Sobolev constant identity does not hold to 1e-12");

  // Golden-section search for the maximum on [0, 2].
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, hi = 2.0;
  double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
  double f1 = varphi(x1), f2 = varphi(x2);
  while (hi - lo > 1e-12) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = varphi(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = varphi(x1);
    }
  }
  r.c_search = varphi(0.5 * (lo + hi));
  return r;
}

// ---------------------------------------------------------------------------
// Frequency-lattice density averages.

double cell_averaged_density(const NoiseSpec& spec, double spacing, std::span<const int> index) {
  require(static_cast<int>(index.size()) == spec.d, "cell index dimension does not match the noise");
  require(spacing > 0.0, "cell spacing must be positive");
  if (spec.is_white()) return std::pow(2.0 * pi, -spec.d);
  double value = 1.0;
  std::size_t offset = 0;
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    const int k = spec.groups[g];
    const double a = spec.alphas[g];
    const double c = kernels::spectral_constant(k, a);
    const auto sub = index.subspan(offset, static_cast<std::size_t>(k));
    if (k == 1) {
      const double centre = spacing * sub[0];
      value *= interval_average_1d(c, a, centre - 0.5 * spacing, centre + 0.5 * spacing);
    } else {
      value *= group_cell_average(k, c, k - a, spacing, sub);
    }
    offset += static_cast<std::size_t>(k);
  }
  return value;
}

// ---------------------------------------------------------------------------
// rho(phi) on a centered frequency lattice.

struct RhoObjective::Impl {
  int d = 1;
  int p = 0;  // lattice points per axis
  double delta = 0.0;
  double cell = 0.0;
  bool squared = false;
  std::size_t n = 0;
  RealFft fft;
  std::vector<double> w;                       // (1 + |xi|^2)^{-1/2} per lattice point
  std::vector<double> mu;                      // cell-averaged spectral density per lag (N^d layout), 0 beyond range
  std::vector<double> phi_mu;                  // phi * mu per lag, linear variant
  std::vector<std::array<double, 2>> psi_hat;  // transform of 2 Delta^{2d} phi mu, linear variant
  mutable std::vector<std::array<double, 2>> spectrum;

  std::size_t padded(std::size_t flat) const {
    std::size_t pos = 0;
    std::size_t div = n / static_cast<std::size_t>(p);
    for (int a = 0; a < d; ++a) {
      const std::size_t i = (flat / div) % static_cast<std::size_t>(p);
      pos = pos * static_cast<std::size_t>(fft.n) + i;
      div /= static_cast<std::size_t>(p);
    }
    return pos;
  }
};

RhoObjective::RhoObjective(const RhoProblem& problem) : impl_(std::make_unique<Impl>()) {
  problem.spec.validate();
  require(problem.points >= 3 && problem.points % 2 == 1, "rho lattice needs an odd number of points");
  require(problem.extent > 0.0, "rho lattice extent must be positive");
  auto& s = *impl_;
  s.d = problem.spec.d;
  s.p = problem.points;
  s.delta = 2.0 * problem.extent / (s.p - 1);
  s.cell = std::pow(s.delta, s.d);
  s.squared = !problem.phi;
  s.n = ipow(static_cast<std::size_t>(s.p), s.d);
  const int big = 2 * s.p;
  s.fft = RealFft(s.d, big);
  s.spectrum.resize(s.fft.half_size);

  s.w.resize(s.n);
  std::array<double, 3> xi{};
  for (std::size_t i = 0; i < s.n; ++i) {
    std::size_t rest = i;
    double r2 = 0.0;
    for (int a = s.d - 1; a >= 0; --a) {
      const int j = static_cast<int>(rest % static_cast<std::size_t>(s.p));
      rest /= static_cast<std::size_t>(s.p);
      const double x = (j - (s.p - 1) / 2) * s.delta;
      r2 += x * x;
    }
    s.w[i] = 1.0 / std::sqrt(1.0 + r2);
  }

  s.mu.assign(s.fft.real_size, 0.0);
  if (!s.squared) s.phi_mu.assign(s.fft.real_size, 0.0);
  std::array<int, 3> lag{};
  for (std::size_t i = 0; i < s.fft.real_size; ++i) {
    std::size_t rest = i;
    bool inside = true;
    for (int a = s.d - 1; a >= 0; --a) {
      const int k = static_cast<int>(rest % static_cast<std::size_t>(big));
      rest /= static_cast<std::size_t>(big);
      const int l = k < s.p ? k : k - big;
      if (std::abs(l) >= s.p) inside = false;
      lag[static_cast<std::size_t>(a)] = l;
      xi[static_cast<std::size_t>(a)] = l * s.delta;
    }
    if (!inside) continue;
    s.mu[i] =
        cell_averaged_density(problem.spec, s.delta, std::span<const int>(lag.data(), static_cast<std::size_t>(s.d)));
    if (!s.squared) {
      const double ph = problem.phi(std::span<const double>(xi.data(), static_cast<std::size_t>(s.d)));
      require(std::isfinite(ph) && ph >= 0.0, "rho weight must be finite and nonnegative");
      s.phi_mu[i] = ph * s.mu[i];
    }
  }
  if (!s.squared) {
    const double factor = 2.0 * s.cell * s.cell;
    for (std::size_t i = 0; i < s.fft.real_size; ++i) s.fft.real.data[i] = factor * s.phi_mu[i];
    s.fft.forward.run();
    s.psi_hat.resize(s.fft.half_size);
    for (std::size_t k = 0; k < s.fft.half_size; ++k) s.psi_hat[k] = {s.fft.half.data[k][0], s.fft.half.data[k][1]};
  }
}

RhoObjective::~RhoObjective() = default;
RhoObjective::RhoObjective(RhoObjective&&) noexcept = default;
RhoObjective& RhoObjective::operator=(RhoObjective&&) noexcept = default;

std::size_t RhoObjective::size() const { return impl_->n; }
double RhoObjective::spacing() const { return impl_->delta; }
double RhoObjective::coordinate(int i) const { return (i - (impl_->p - 1) / 2) * impl_->delta; }

double RhoObjective::inner(std::span<const double> u, std::span<const double> v) const {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s * impl_->cell;
}

double RhoObjective::value(std::span<const double> h, std::span<double> grad) const {
  const auto& s = *impl_;
  require(h.size() == s.n, "lattice function has the wrong size");
  auto& fft = impl_->fft;
  const double inv_n = 1.0 / static_cast<double>(fft.real_size);

  std::fill(fft.real.data, fft.real.data + fft.real_size, 0.0);
  for (std::size_t i = 0; i < s.n; ++i) fft.real.data[s.padded(i)] = h[i] * s.w[i];
  fft.forward.run();
  auto& v_hat = s.spectrum;
  for (std::size_t k = 0; k < fft.half_size; ++k) v_hat[k] = {fft.half.data[k][0], fft.half.data[k][1]};

  // B(lag) = Delta^d sum_j v_{j+lag} v_j.
  for (std::size_t k = 0; k < fft.half_size; ++k) {
    fft.half.data[k][0] = v_hat[k][0] * v_hat[k][0] + v_hat[k][1] * v_hat[k][1];
    fft.half.data[k][1] = 0.0;
  }
  fft.backward.run();
  double value = 0.0;
  std::vector<double> psi;
  if (s.squared) psi.assign(fft.real_size, 0.0);
  for (std::size_t i = 0; i < fft.real_size; ++i) {
    const double b = s.cell * fft.real.data[i] * inv_n;
    if (s.squared) {
      value += s.mu[i] * b * b;
      psi[i] = 4.0 * s.cell * s.cell * s.mu[i] * b;
    } else {
      value += s.phi_mu[i] * b;
    }
  }
  value *= s.cell;
  if (grad.empty()) return value;

  // dR/dv_j = sum_lag Psi_lag v_{j+lag}, a convolution since Psi is even.
  std::vector<std::array<double, 2>> psi_hat_local;
  const std::vector<std::array<double, 2>>* psi_hat = &s.psi_hat;
  if (s.squared) {
    std::copy(psi.begin(), psi.end(), fft.real.data);
    fft.forward.run();
    psi_hat_local.resize(fft.half_size);
    for (std::size_t k = 0; k < fft.half_size; ++k) psi_hat_local[k] = {fft.half.data[k][0], fft.half.data[k][1]};
    psi_hat = &psi_hat_local;
  }
  for (std::size_t k = 0; k < fft.half_size; ++k) {
    const auto& a = (*psi_hat)[k];
    const auto& b = v_hat[k];
    fft.half.data[k][0] = a[0] * b[0] - a[1] * b[1];
    fft.half.data[k][1] = a[0] * b[1] + a[1] * b[0];
  }
  fft.backward.run();
  for (std::size_t i = 0; i < s.n; ++i) grad[i] = s.w[i] * fft.real.data[s.padded(i)] * inv_n / s.cell;
  return value;
}

RhoResult rho_phi_direct(const RhoProblem& problem, std::uint64_t seed) {
  const RhoObjective obj(problem);
  const auto& opt = problem.optimizer;
  const auto starts = static_cast<std::size_t>(std::max(1, opt.restarts));
  std::vector<std::vector<double>> hs(starts);
  std::vector<AscentOutcome> outs(starts);
  const int d = problem.spec.d;
  const int p = problem.points;
  parallel_chunks(starts, [&](std::size_t k) {
    const RhoObjective local(problem);
    Rng rng(substream_seed(seed, k));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double width = problem.extent * (k == 0 ? 0.15 : 0.08 + 0.2 * unit(rng));
    auto& h = hs[k];
    h.resize(local.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
      std::size_t rest = i;
      double r2 = 0.0;
      for (int a = 0; a < d; ++a) {
        const double x = local.coordinate(static_cast<int>(rest % static_cast<std::size_t>(p)));
        rest /= static_cast<std::size_t>(p);
        r2 += x * x;
      }
      h[i] = std::exp(-0.5 * r2 / (width * width));
    }
    outs[k] = ascend([&](std::span<const double> x, std::span<double> gr) { return local.value(x, gr); },
                     [&](std::span<const double> a, std::span<const double> b) { return local.inner(a, b); },
                     [](std::span<const double> in, std::span<double> out, double lambda) {
                       for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] / lambda;
                     },
                     h, opt, nullptr);
  });
  std::size_t pick = 0;
  for (std::size_t k = 1; k < starts; ++k)
    if (outs[k].value > outs[pick].value) pick = k;
  RhoResult r;
  r.value = outs[pick].value;
  r.gradient_norm = outs[pick].gradient_norm;
  r.converged = outs[pick].converged;
  for (const auto& o : outs) r.iterations += o.iterations;
  r.maximizer = std::move(hs[pick]);
  return r;
}

// ---------------------------------------------------------------------------
// Binary grid dump.

void write_grid(const std::string& path, const VariationalResult& result) {
  require(!result.radial, "radial results have no full-grid dump");
  const std::size_t expect = ipow(static_cast<std::size_t>(result.points), result.d);
  require(result.maximizer.size() == expect, "maximizer size does not match its grid");
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open " + tmp + " for writing");
    const std::int32_t d = result.d, m = result.points;
    const double l = result.extent;
    out.write(reinterpret_cast<const char*>(&d), sizeof d);
    out.write(reinterpret_cast<const char*>(&m), sizeof m);
    out.write(reinterpret_cast<const char*>(&l), sizeof l);
    out.write(reinterpret_cast<const char*>(result.maximizer.data()),
              static_cast<std::streamsize>(sizeof(double) * result.maximizer.size()));
    if (!out) throw NumericalError("failed writing " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw NumericalError("cannot move " + tmp + " to " + path);
}

VariationalResult read_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::int32_t d = 0, m = 0;
  double l = 0.0;
  in.read(reinterpret_cast<char*>(&d), sizeof d);
  in.read(reinterpret_cast<char*>(&m), sizeof m);
  in.read(reinterpret_cast<char*>(&l), sizeof l);
  if (!in || d < 1 || d > 3 || m < 1 || !(l > 0.0)) throw ConfigError("malformed grid header in " + path);
  VariationalResult r;
  r.d = d;
  r.points = m;
  r.extent = l;
  r.maximizer.resize(ipow(static_cast<std::size_t>(m), d));
  in.read(reinterpret_cast<char*>(r.maximizer.data()),
          static_cast<std::streamsize>(sizeof(double) * r.maximizer.size()));
  if (!in) throw ConfigError("truncated grid data in " + path);
  return r;
}

}  // namespace wavechaos::variational
