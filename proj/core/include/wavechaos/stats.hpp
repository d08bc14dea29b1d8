#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace wavechaos {

using Rng = std::mt19937_64;

// Default seed for every sampling routine.
inline constexpr std::uint64_t kDefaultSeed = 0x5eed2024ULL;

// Seed for substream `index` of a run seeded with `seed` (splitmix64 finalizer).
[[nodiscard]] std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

// Streaming mean and variance (Welford). Merging is exact in the sense of
// Chan et al., so partial accumulators can be combined in any grouping.
struct Accumulator {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    count += 1.0;
    const double delta = x - mean;
    mean += delta / count;
    m2 += delta * (x - mean);
  }

  void merge(const Accumulator& other) {
    if (other.count == 0.0) return;
    if (count == 0.0) {
      *this = other;
      return;
    }
    const double total = count + other.count;
    const double delta = other.mean - mean;
    mean += delta * other.count / total;
    m2 += other.m2 + delta * delta * count * other.count / total;
    count = total;
  }

  [[nodiscard]] double variance() const { return count > 1.0 ? m2 / (count - 1.0) : 0.0; }
  [[nodiscard]] double stderr_of_mean() const { return count > 1.0 ? std::sqrt(variance() / count) : 0.0; }
};

// Paired accumulator for two correlated estimators sharing samples.
struct PairAccumulator {
  Accumulator a, b, diff;
  double cross = 0.0;  // running co-moment of (a, b)

  void add(double x, double y) {
    const double n1 = a.count + 1.0;
    cross += (x - a.mean) * (y - b.mean) * (n1 - 1.0) / n1;
    a.add(x);
    b.add(y);
    diff.add(x - y);
  }

  void merge(const PairAccumulator& other) {
    if (other.a.count == 0.0) return;
    if (a.count == 0.0) {
      *this = other;
      return;
    }
    const double n = a.count, m = other.a.count, total = n + m;
    const double da = other.a.mean - a.mean, db = other.b.mean - b.mean;
    cross += other.cross + da * db * n * m / total;
    a.merge(other.a);
    b.merge(other.b);
    diff.merge(other.diff);
  }

  [[nodiscard]] double covariance() const { return a.count > 1.0 ? cross / (a.count - 1.0) : 0.0; }
};

// Number of worker threads: WAVECHAOS_WORKERS if set, else hardware concurrency.
[[nodiscard]] unsigned worker_count();

// Runs body(chunk) for chunk in [0, chunks) on the worker pool. The chunk
// decomposition is fixed by the caller, so results do not depend on the
// number of workers.
void parallel_chunks(std::size_t chunks, const std::function<void(std::size_t)>& body);

// Splits `samples` into a fixed number of seeded substreams, runs
// body(rng, count, acc) on each and merges in substream order.
template <class Acc>
Acc sample_in_substreams(std::uint64_t seed, std::size_t samples,
                         const std::function<void(Rng&, std::size_t, Acc&)>& body, std::size_t substreams = 16) {
  if (samples < substreams) substreams = samples == 0 ? 1 : samples;
  std::vector<Acc> parts(substreams);
  parallel_chunks(substreams, [&](std::size_t k) {
    const std::size_t lo = samples * k / substreams;
    const std::size_t hi = samples * (k + 1) / substreams;
    Rng rng(substream_seed(seed, k));
    body(rng, hi - lo, parts[k]);
  });
  Acc total = parts[0];
  for (std::size_t k = 1; k < substreams; ++k) total.merge(parts[k]);
  return total;
}

}  // namespace wavechaos
