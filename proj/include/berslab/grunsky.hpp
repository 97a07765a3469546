#pragma once

#include "berslab/pole_expansion.hpp"
#include "berslab/schwarz_ode.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace berslab {

/// f(z) = z + b_0 + b_1/z + ... + b_T/z^T on |z| > 1. Coefficients past T are zero.
class ExteriorExpansion {
public:
    /// b[k] = b_k. `truncation` pads with zeros when it exceeds b.size() - 1.
    explicit ExteriorExpansion(std::vector<Complex> b, std::optional<std::size_t> truncation = {});

    [[nodiscard]] const std::vector<Complex>& coefficients() const noexcept { return b_; }
    [[nodiscard]] std::size_t truncation() const noexcept { return b_.size() - 1; }
    [[nodiscard]] Complex coefficient(std::size_t k) const noexcept
    {
        return k < b_.size() ? b_[k] : Complex{};
    }
    [[nodiscard]] Complex evaluate(Complex z) const;

    /// Largest |positive-power coefficient| (k >= 2) seen on the sampling circle, plus the
    /// magnitude of the highest resolved coefficient there. Zero for exact input.
    double aliasing_estimate = 0.0;

private:
    std::vector<Complex> b_;
};

/// Laurent coefficients from samples f(R e^{2 pi i m / M}), m = 0..M-1, by a discrete
/// contour integral. Resolves b_0 .. b_{2N}, enough for an exact N x N Grunsky block; needs
/// M >= 8N. Throws ValidationError
/// "insufficient_nodes" or "not_normalized" (coefficient of z off 1 by more than 1e-6).
ExteriorExpansion exterior_expansion_from_samples(const std::vector<Complex>& samples, double radius,
                                                  std::size_t n);

/// Samples `f` on the circle (in parallel) and calls exterior_expansion_from_samples.
ExteriorExpansion exterior_expansion(const std::function<Complex(Complex)>& f, double radius,
                                     std::size_t n, std::size_t nodes);

/// Exterior map F = w o T for the map w with Schwarzian phi on the upper half-plane, T the
/// Cayley map of |z| > 1 onto it. w is normalized at i, where it has its pole, so F has a
/// simple pole at infinity. F is integrated once around |z| = radius and rescaled to
/// leading coefficient 1.
ExteriorExpansion exterior_expansion_from_schwarzian(const PoleExpansion& phi, std::size_t n,
                                                     std::size_t nodes = 512, double radius = 1.25,
                                                     const OdeOptions& ode = {});

struct GrunskyMatrix {
    std::size_t n = 0;
    /// Row-major n x n, entry (j-1, l-1) = sqrt(j l) c_{jl} where
    /// log((f(z) - f(zeta)) / (z - zeta)) = -sum c_{jl} z^-j zeta^-l.
    std::vector<Complex> weighted;
    double operator_norm_lower_bound = 0.0;
    double symmetry_defect = 0.0;           // max |c_jl - c_lj|
    double max_faber_coefficient = 0.0;
    bool ill_conditioned = false;           // non-finite or runaway Faber coefficients

    [[nodiscard]] Complex c(std::size_t j, std::size_t l) const;   // 1-based, unweighted
};

/// Coefficients through the Faber-polynomial recursion. Requires 1 <= N <= truncation;
/// entries with j + l - 1 above the truncation treat missing b_k as zero.
GrunskyMatrix grunsky_matrix(const ExteriorExpansion& f, std::size_t n);

struct GrunskyReport {
    std::vector<std::size_t> sizes;
    std::vector<double> norms;
    bool monotone = true;
    std::optional<double> beltrami_norm;    // companion Ahlfors-Weill sup-norm
    double aliasing_estimate = 0.0;
};

GrunskyReport grunsky_report(const ExteriorExpansion& f, const std::vector<std::size_t>& sizes,
                             std::optional<double> beltrami_norm = {});

void to_json(nlohmann::json& j, const GrunskyReport& r);

/// "# schema=berslab.grunsky_matrix/1" then rows "j,l,re,im" of the weighted matrix.
void write_grunsky_csv(std::ostream& out, const GrunskyMatrix& m);

} // namespace berslab
