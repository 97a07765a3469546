#pragma once

#include "berslab/types.hpp"

#include <functional>
#include <vector>

namespace berslab::quad {

/// Nodes and weights on [-1, 1] for the weight (1-x)^alpha (1+x)^beta.
struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Jacobi rule with `n` points, alpha, beta > -1 (Golub-Welsch).
/// Rules are cached per (n, alpha, beta); the returned reference stays valid.
const Rule& gauss_jacobi(int n, double alpha, double beta);

inline const Rule& gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

using ComplexFn = std::function<Complex(double)>;

/// Integral over [0, 1] of s^left (1-s)^right g(s) ds, with g smooth on [0, 1].
Complex jacobi_panel(const ComplexFn& g, double left, double right, int n);

/// Adaptive composite Gauss-Legendre on [lo, hi]: each panel is accepted once an
/// n-point rule and two half-panel n-point rules agree to `tol` (absolute, scaled
/// by the panel share of the interval). Throws NumericalError past `max_depth`.
Complex adaptive_legendre(const ComplexFn& f, double lo, double hi, double tol, int n = 20,
                          int max_depth = 48);

} // namespace berslab::quad
