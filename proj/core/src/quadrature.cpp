#include "wavechaos/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "wavechaos/errors.hpp"

namespace wavechaos {

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights come
// from the first eigenvector components.
GaussRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, double mu0) {
  const auto m = diag.size();
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    j(i, i) = diag(i);
    if (i + 1 < m) j(i, i + 1) = j(i + 1, i) = off(i);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(j);
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(m));
  rule.weights.resize(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    rule.nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    const double v = solver.eigenvectors()(0, i);
    rule.weights[static_cast<std::size_t>(i)] = mu0 * v * v;
  }
  return rule;
}

}  // namespace

GaussRule gauss_legendre(int m, double a, double b) {
  require(m >= 1, "Gauss rule needs at least one node");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(m), off(std::max(m - 1, 0));
  for (int i = 1; i < m; ++i) off(i - 1) = i / std::sqrt(4.0 * i * i - 1.0);
  GaussRule rule = golub_welsch(diag, off, 2.0);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  return rule;
}

GaussRule gauss_laguerre(int m) {
  require(m >= 1, "Gauss rule needs at least one node");
  Eigen::VectorXd diag(m), off(std::max(m - 1, 0));
  for (int i = 0; i < m; ++i) diag(i) = 2.0 * i + 1.0;
  for (int i = 1; i < m; ++i) off(i - 1) = i;
  return golub_welsch(diag, off, 1.0);
}

}  // namespace wavechaos
