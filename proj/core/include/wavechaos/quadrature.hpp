#pragma once

#include <vector>

namespace wavechaos {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// m-point Gauss-Legendre rule on [a, b].
[[nodiscard]] GaussRule gauss_legendre(int m, double a = -1.0, double b = 1.0);

// m-point Gauss-Laguerre rule for int_0^inf e^{-t} g(t) dt.
[[nodiscard]] GaussRule gauss_laguerre(int m);

}  // namespace wavechaos
