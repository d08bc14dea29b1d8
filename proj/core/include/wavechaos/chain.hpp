#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace wavechaos::chaos {

// Counts how often the cosine partial-fraction sums needed more than double
// precision to reach a relative accuracy of 1e-10.
struct PrecisionStats {
  std::size_t evaluations = 0;
  std::size_t extended = 0;    // resolved in long double
  std::size_t quad = 0;        // resolved in binary128
  std::size_t unresolved = 0;  // binary128 still above tolerance

  void merge(const PrecisionStats& o) {
    evaluations += o.evaluations;
    extended += o.extended;
    quad += o.quad;
    unresolved += o.unresolved;
  }
};

// Time integral of one chain of Fourier wave kernels.
//
// For nodes y_1..y_n >= 0 returns
//   int_{u_0 + ... + u_n = t, u >= 0} prod_k sin(u_k sqrt(y_k)) / sqrt(y_k) du,
// whose Laplace transform in t is (1/s) prod_k 1 / (s^2 + y_k). The value is
// the cosine sum sum_k c_k cos(t sqrt(y_k)) over the nodes {0, y_1, ..., y_n}
// with partial-fraction weights c_k.
[[nodiscard]] double chain_integral(std::span<const double> nodes, double t, PrecisionStats& stats);

// Index tables for dynamic programs over the subsets of {0, ..., n-1}.
// Subsets are bit masks; x_of_mask[S] = |sum_{j in S} xi_j|^2.
class SubsetChains {
 public:
  explicit SubsetChains(int n);

  [[nodiscard]] int order() const { return n_; }

  // Sum over all orderings sigma of prod_k 1 / (1 + x_{suffix set of sigma at k}).
  [[nodiscard]] double resolvent_sum(std::span<const double> x_of_mask) const;

  // Sum over all orderings of chain_integral along the nested prefix sets,
  // i.e. n! times the Fourier transform of the symmetrized time-integrated
  // kernel at the given frequencies.
  [[nodiscard]] double cosine_sum(std::span<const double> x_of_mask, double t, PrecisionStats& stats) const;

  // cosine_sum at several times, sharing the partial-fraction expansion.
  void cosine_sums(std::span<const double> x_of_mask, std::span<const double> ts, std::span<double> out,
                   PrecisionStats& stats) const;

 private:
  template <class Real>
  void coefficients(std::span<const double> x_of_mask, std::vector<Real>& coef) const;
  template <class Real>
  Real evaluate(const std::vector<Real>& coef, std::span<const double> x_of_mask, double t) const;

  int n_;
  std::uint32_t full_;
  std::vector<std::size_t> offset_;      // start of each subset's coefficient block
  std::vector<std::uint32_t> submasks_;  // submasks of S in compressed order
  // For each S and each j in S: mapping of compressed indices of S \ {j} into S.
  std::vector<std::size_t> parent_begin_;   // per S, start into parent_list_
  std::vector<std::uint32_t> parent_list_;  // (S \ {j}) masks
  std::vector<std::size_t> map_begin_;      // per (S, j) entry, start into map_
  std::vector<std::uint32_t> map_;
};

// Sums of frequency vectors over all subsets: out[S] = |sum_{j in S} xi_j|^2,
// with xi stored as n consecutive d-vectors.
void subset_square_norms(std::span<const double> xi, int n, int d, std::vector<double>& out);

// Same, also keeping the summed vectors: sums[S * d + a].
void subset_sums(std::span<const double> xi, int n, int d, std::vector<double>& sums, std::vector<double>& out);

// Sum over all orderings sigma of prod_k v[{sigma(k), ..., sigma(n)}] for a
// table v indexed by subset mask.
[[nodiscard]] double ordered_chain_sum(std::span<const double> v, int n);

}  // namespace wavechaos::chaos
