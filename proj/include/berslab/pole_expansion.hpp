#pragma once

#include "berslab/types.hpp"

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "json.hpp"

namespace berslab {

// Thrown when an expansion is evaluated within the near-pole tolerance of one of its poles.
class NearPoleError : public Error {
public:
    NearPoleError(std::size_t pole_index, double pole, Complex z);

    [[nodiscard]] std::size_t pole_index() const noexcept { return pole_index_; }

private:
    std::size_t pole_index_;
};

/// Rational function on the upper half-plane with real poles a_j:
///
///   sum_j s_j/(z-a_j) + sum_j d_j/(z-a_j)^2 + sum_{j<l} x_jl/((z-a_j)(z-a_l)).
///
/// Log-derivatives of Schwarz-Christoffel maps and their Schwarzians are exactly of this shape.
class PoleExpansion {
public:
    using PairIndex = std::pair<std::size_t, std::size_t>;
    using CrossMap = std::map<PairIndex, Complex>;

    static constexpr double near_pole_tolerance = 1e-12;

    PoleExpansion() = default;

    /// Poles must be finite and strictly increasing; coefficient vectors must match
    /// the pole count (an empty vector means all zero); cross keys must satisfy j < l < n.
    PoleExpansion(std::vector<double> poles, std::vector<Complex> simple,
                  std::vector<Complex> dbl = {}, CrossMap cross = {});

    [[nodiscard]] std::size_t size() const noexcept { return poles_.size(); }
    [[nodiscard]] const std::vector<double>& poles() const noexcept { return poles_; }
    [[nodiscard]] const std::vector<Complex>& simple_coeffs() const noexcept { return simple_; }
    [[nodiscard]] const std::vector<Complex>& double_coeffs() const noexcept { return double_; }
    [[nodiscard]] const CrossMap& cross_coeffs() const noexcept { return cross_; }

    [[nodiscard]] bool has_only_simple_poles() const noexcept;

    /// Sum of all terms; throws NearPoleError if |z - a_j| < near_pole_tolerance.
    [[nodiscard]] Complex evaluate(Complex z) const;
    [[nodiscard]] Complex operator()(Complex z) const { return evaluate(z); }

    /// Complex derivative of the expansion.
    [[nodiscard]] Complex derivative(Complex z) const;

    /// Same shape, every coefficient multiplied by `factor`.
    [[nodiscard]] PoleExpansion scaled(Complex factor) const;

    /// Partial-fraction residues: the coefficient of 1/(z-a_j) once every cross
    /// term has been split.
    [[nodiscard]] std::vector<Complex> effective_residues() const;

    /// Laurent coefficients p_0..p_{count-1} around pole `j`, with
    /// phi(z) = sum_k p_k (z - a_j)^(k-2).
    [[nodiscard]] std::vector<Complex> laurent_at_pole(std::size_t j, std::size_t count) const;

    /// Coefficients q_0..q_{count-1} of the expansion at infinity, phi(z) = sum_k q_k z^(-k),
    /// convergent for |z| > max |a_j|.
    [[nodiscard]] std::vector<Complex> laurent_at_infinity(std::size_t count) const;

    /// Coefficient-wise equality (exact, including the cross-term key set).
    [[nodiscard]] bool same_coefficients(const PoleExpansion& other) const;

private:
    std::vector<double> poles_;
    std::vector<Complex> simple_;
    std::vector<Complex> double_;
    CrossMap cross_;
};

void to_json(nlohmann::json& j, const PoleExpansion& e);
void from_json(const nlohmann::json& j, PoleExpansion& e);

} // namespace berslab
