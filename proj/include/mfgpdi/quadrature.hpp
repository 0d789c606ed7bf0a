#pragma once

#include <vector>

namespace mfgpdi {

/// Gauss-Legendre rule on [-1, 1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule, nodes ascending. Throws QuadratureError for n < 1.
[[nodiscard]] QuadratureRule gauss_legendre(int n);

} // namespace mfgpdi
