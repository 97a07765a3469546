#include "berslab/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace berslab::quad {

namespace {

Rule build_gauss_jacobi(int n, double alpha, double beta)
{
    if (n < 1)
        throw ValidationError("quadrature_order", "Gauss-Jacobi rule needs n >= 1");
    if (!(alpha > -1.0) || !(beta > -1.0))
        throw ValidationError("jacobi_exponent", "Jacobi exponents must exceed -1");

    // Three-term recurrence of the monic Jacobi polynomials.
    Eigen::VectorXd diag(n);
    Eigen::VectorXd off(n > 1 ? n - 1 : 0);
    const double ab = alpha + beta;
    for (int k = 0; k < n; ++k) {
        const double s = 2.0 * k + ab;
        if (k == 0)
            diag(k) = (beta - alpha) / (ab + 2.0);
        else
            diag(k) = (beta * beta - alpha * alpha) / (s * (s + 2.0));
    }
    for (int k = 1; k < n; ++k) {
        const double s = 2.0 * k + ab;
        double b2;
        if (k == 1) // (k + ab) cancels against (s - 1)
            b2 = 4.0 * (1.0 + alpha) * (1.0 + beta) / (s * s * (s + 1.0));
        else
            b2 = 4.0 * k * (k + alpha) * (k + beta) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0));
        off(k - 1) = std::sqrt(b2);
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw NumericalError("gauss_jacobi", "tridiagonal eigensolver failed");

    const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) +
                                std::lgamma(beta + 1.0) - std::lgamma(ab + 2.0));
    Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int k = 0; k < n; ++k) {
        rule.nodes[k] = solver.eigenvalues()(k);
        const double v0 = solver.eigenvectors()(0, k);
        rule.weights[k] = mu0 * v0 * v0;
    }
    return rule;
}

} // namespace

const Rule& gauss_jacobi(int n, double alpha, double beta)
{
    static std::mutex mutex;
    static std::map<std::tuple<int, double, double>, Rule> cache;
    std::lock_guard lock(mutex);
    auto key = std::make_tuple(n, alpha, beta);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, build_gauss_jacobi(n, alpha, beta)).first;
    return it->second;
}

Complex jacobi_panel(const ComplexFn& g, double left, double right, int n)
{
    // s = (1+x)/2:  s^left (1-s)^right ds = 2^-(left+right+1) (1+x)^left (1-x)^right dx
    const Rule& rule = gauss_jacobi(n, right, left);
    const double scale = std::pow(0.5, left + right + 1.0);
    Complex sum{};
    for (int k = 0; k < n; ++k)
        sum += rule.weights[k] * g(0.5 * (1.0 + rule.nodes[k]));
    return scale * sum;
}

namespace {

Complex legendre_on(const ComplexFn& f, double lo, double hi, int n)
{
    const Rule& rule = gauss_legendre(n);
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    Complex sum{};
    for (int k = 0; k < n; ++k)
        sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
    return half * sum;
}

Complex adaptive_step(const ComplexFn& f, double lo, double hi, Complex whole, double tol, int n,
                      int depth)
{
    const double mid = 0.5 * (lo + hi);
    const Complex left = legendre_on(f, lo, mid, n);
    const Complex right = legendre_on(f, mid, hi, n);
    const Complex both = left + right;
    if (std::abs(both - whole) <= tol)
        return both;
    if (depth <= 0)
        throw NumericalError("quadrature_nonconvergence",
                             "adaptive Gauss-Legendre failed to converge on a panel");
    return adaptive_step(f, lo, mid, left, 0.5 * tol, n, depth - 1) +
           adaptive_step(f, mid, hi, right, 0.5 * tol, n, depth - 1);
}

} // namespace

Complex adaptive_legendre(const ComplexFn& f, double lo, double hi, double tol, int n, int max_depth)
{
    if (hi == lo)
        return {};
    return adaptive_step(f, lo, hi, legendre_on(f, lo, hi, n), tol, n, max_depth);
}

} // namespace berslab::quad
